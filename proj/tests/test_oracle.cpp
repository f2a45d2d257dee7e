#include <cmath>

#include <Eigen/SVD>

#include "doctest.h"
#include "oracles.hpp"
#include "rotd/environments.hpp"
#include "rotd/oracle.hpp"

using namespace rotd;
using namespace rotd::testing;

namespace {

// Fully independent projected-Bellman-error evaluation: assemble every term
// densely and invert the Gram matrix through an SVD pseudo-inverse.
double dense_mspbe(const MdpModel& model, const FeatureMap& features, const Vector& theta,
                   double gamma) {
  const Matrix phi = features.matrix();
  const Matrix xi = model.state_dist.asDiagonal();
  const Vector bellman = model.reward + gamma * model.transition * phi * theta - phi * theta;
  const Vector z = phi.transpose() * xi * bellman;
  const Matrix c = phi.transpose() * xi * phi;
  Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  return z.dot(svd.solve(z));
}

LinearSystem star_system(double eta = 10.0) {
  auto [model, features] = star_mdp();
  return exact_system(model, features, eta, 0.99, RankPolicy::AllowRankDeficient);
}

}  // namespace

TEST_CASE("exact system blocks for the star problem") {
  const LinearSystem sys = star_system();
  CHECK(sys.b().lpNorm<Eigen::Infinity>() == 0.0);  // all rewards vanish
  CHECK(sys.A().allFinite());
  CHECK(sys.d() == 8);

  // eta = 0 zeroes the top block row of A and b
  const LinearSystem sys0 = star_system(0.0);
  CHECK(sys0.A().topRows(8).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(sys0.b().head(8).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(sys0.A().bottomRows(8).lpNorm<Eigen::Infinity>() > 0.0);

  // C is symmetric positive semi-definite
  const Matrix& c = sys.C();
  CHECK((c - c.transpose()).lpNorm<Eigen::Infinity>() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix> es(c);
  CHECK(es.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("exact system matches monte-carlo block estimates") {
  const double eta = 1.0;
  const int n = 1000000;

  // random walk with tabular features, per-entry agreement at 1e-3
  {
    const MdpModel model = random_walk();
    const FeatureMap features = random_walk_features(FeatureMap::Kind::Tabular);
    const LinearSystem sys = exact_system(model, features, eta, model.gamma);
    const EpisodeBatch batch = collect_iid_samples(model, features, n, 2024);
    Matrix a_hat = Matrix::Zero(10, 10);
    Vector b_hat = Vector::Zero(10);
    for (const Sample& s : batch.samples) {
      a_hat += dense_sample_matrix(s, eta, model.gamma);
      b_hat += dense_sample_rhs(s, eta);
    }
    a_hat /= n;
    b_hat /= n;
    CHECK((a_hat - sys.A()).lpNorm<Eigen::Infinity>() < 1e-3);
    CHECK((b_hat - sys.b()).lpNorm<Eigen::Infinity>() < 1e-3);
  }

  // star problem, looser per-entry bound
  {
    auto [model, features] = star_mdp();
    const LinearSystem sys =
        exact_system(model, features, eta, model.gamma, RankPolicy::AllowRankDeficient);
    const EpisodeBatch batch = collect_iid_samples(model, features, n, 2025);
    Matrix a_hat = Matrix::Zero(16, 16);
    for (const Sample& s : batch.samples) a_hat += dense_sample_matrix(s, eta, model.gamma);
    a_hat /= n;
    CHECK((a_hat - sys.A()).lpNorm<Eigen::Infinity>() < 1e-2);
  }
}

TEST_CASE("rank policy separates overcomplete bases from configuration bugs") {
  const MdpModel model = random_walk();
  const FeatureMap features = random_walk_features(FeatureMap::Kind::Tabular);
  exact_system(model, features, 1.0, model.gamma);  // full rank: fine

  // appending a duplicate column makes the Gram matrix singular
  Matrix phi = features.matrix();
  Matrix wide(phi.rows(), phi.cols() + 1);
  wide << phi, phi.col(2);
  const FeatureMap duplicated = FeatureMap::table(wide);
  CHECK_THROWS_AS(exact_system(model, duplicated, 1.0, model.gamma), RankError);

  // the permissive policy evaluates through the pseudo-inverse and the
  // projected error is unchanged by the duplicated column
  const LinearSystem base = exact_system(model, features, 1.0, model.gamma);
  const LinearSystem relaxed =
      exact_system(model, duplicated, 1.0, model.gamma, RankPolicy::AllowRankDeficient);
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector theta = random_vector(rng, 5);
    Vector theta_wide(6);
    theta_wide << theta, 0.0;
    CHECK(mspbe(theta, base) == doctest::Approx(mspbe(theta_wide, relaxed)).epsilon(1e-9));
  }
}

TEST_CASE("mspbe vanishes exactly where it should") {
  // representable value function on the random walk
  const MdpModel model = random_walk();
  const FeatureMap features = random_walk_features(FeatureMap::Kind::Tabular);
  const LinearSystem sys = exact_system(model, features, 1.0, model.gamma);
  Matrix bellman = Matrix::Identity(5, 5);
  Vector reward_int = Vector::Zero(5);
  for (int i = 0; i < 5; ++i) {
    if (i > 0) bellman(i, i - 1) -= model.gamma * 0.5;
    if (i < 4) bellman(i, i + 1) -= model.gamma * 0.5;
  }
  reward_int[4] = 0.5;
  const Vector v_exact = bellman.fullPivLu().solve(reward_int);
  CHECK(mspbe(v_exact, sys) < 1e-10);

  // star problem: zero rewards make theta = 0 a projected fixed point
  const LinearSystem star = star_system();
  CHECK(mspbe(Vector::Zero(8), star) == 0.0);

  // the classic initialization has positive error matching the dense assembly
  auto [model_s, features_s] = star_mdp();
  const Vector theta0 = baird_theta_init();
  const double direct = dense_mspbe(model_s, features_s, theta0, 0.99);
  CHECK(mspbe(theta0, star) == doctest::Approx(direct).epsilon(1e-10));
  CHECK(mspbe(theta0, star) > 1.0);
}

TEST_CASE("fixed-point solve") {
  // star: minimum-norm solution of the singular consistent system is zero
  const LinearSystem star = star_system();
  const Vector x_star = solve_fixed_point(star);
  CHECK(mspbe(x_star.tail(8), star) < 1e-10);
  CHECK(x_star.norm() < 1e-8);

  // random walk with tabular features recovers the exact value function
  const MdpModel model = random_walk();
  const FeatureMap features = random_walk_features(FeatureMap::Kind::Tabular);
  const LinearSystem sys = exact_system(model, features, 1.0, model.gamma);
  const Vector x = solve_fixed_point(sys);
  CHECK((sys.A() * x - sys.b()).norm() <= 1e-8);
  Matrix bellman = Matrix::Identity(5, 5);
  Vector reward_int = Vector::Zero(5);
  for (int i = 0; i < 5; ++i) {
    if (i > 0) bellman(i, i - 1) -= model.gamma * 0.5;
    if (i < 4) bellman(i, i + 1) -= model.gamma * 0.5;
  }
  reward_int[4] = 0.5;
  const Vector v_exact = bellman.fullPivLu().solve(reward_int);
  CHECK((x.tail(5) - v_exact).lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK(x.head(5).lpNorm<Eigen::Infinity>() < 1e-8);  // auxiliary weights vanish

  // an inconsistent singular system reports its condition estimate
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  Vector b(2);
  b << 1.0, 1.0;
  bool thrown = false;
  try {
    solve_fixed_point(LinearSystem::dense(a, b));
  } catch (const SingularSystemError& e) {
    thrown = true;
    CHECK(e.condition > 1e12);
  }
  CHECK(thrown);
}

TEST_CASE("duality diagnostics fields") {
  const LinearSystem star = star_system();
  SolverConfig cfg;
  cfg.eta = 10.0;
  cfg.gamma = 0.99;

  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    PrimalDualState state = PrimalDualState::zero(8);
    state.theta = random_vector(rng, 8);
    state.w = random_vector(rng, 8);
    Vector y = random_vector(rng, 16);
    y = project_ball(y, 2.0);
    state.y1 = y.head(8);
    state.y2 = y.tail(8);
    const DiagnosticsRecord rec = duality_diagnostics(state, &star, cfg);
    CHECK(rec.dual_value <= rec.l2_residual + 1e-12);
    CHECK(rec.mspbe >= 0.0);
  }

  // at the fixed point with no regularization both quantities vanish
  PrimalDualState at_fp = PrimalDualState::zero(8);
  const DiagnosticsRecord rec = duality_diagnostics(at_fp, &star, cfg);
  CHECK(rec.l2_residual <= 1e-8);
  CHECK(rec.dual_value <= 1e-8);

  // active-feature counting
  PrimalDualState sparse = PrimalDualState::zero(8);
  sparse.theta << 0.5, 0.0, 1e-9, -2.0, 0.0, 0.0, 3.0, 0.0;
  sparse.w << 0.0, 1e-7, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0;
  const DiagnosticsRecord counts = duality_diagnostics(sparse, &star, cfg);
  CHECK(counts.theta_nnz == 3);
  CHECK(counts.w_nnz == 1);

  // without a system the model-based fields are not-a-number
  const DiagnosticsRecord bare = duality_diagnostics(sparse, nullptr, cfg);
  CHECK(std::isnan(bare.mspbe));
  CHECK(std::isnan(bare.l2_residual));
  CHECK(bare.theta_nnz == 3);
}

TEST_CASE("diagnostics rows round-trip through their text form") {
  DiagnosticsRecord rec;
  rec.iteration = 123456789;
  rec.mspbe = 0.1 + 0.2;  // not exactly representable
  rec.l2_residual = 1e-17;
  rec.dual_value = -3.0e-5;
  rec.delta = 2.5e300;
  rec.theta_nnz = 7;
  rec.w_nnz = 0;
  rec.objective = 1.0 / 3.0;
  const std::string row = rec.csv_row();
  long long iteration = 0;
  double mspbe_back = 0, l2_back = 0, dual_back = 0, delta_back = 0, obj_back = 0;
  int nnz1 = -1, nnz2 = -1;
  const int fields = std::sscanf(row.c_str(), "%lld,%lf,%lf,%lf,%lf,%d,%d,%lf", &iteration,
                                 &mspbe_back, &l2_back, &dual_back, &delta_back, &nnz1, &nnz2,
                                 &obj_back);
  REQUIRE(fields == 8);
  CHECK(iteration == rec.iteration);
  CHECK(mspbe_back == rec.mspbe);
  CHECK(l2_back == rec.l2_residual);
  CHECK(dual_back == rec.dual_value);
  CHECK(delta_back == rec.delta);
  CHECK(nnz1 == 7);
  CHECK(nnz2 == 0);
  CHECK(obj_back == rec.objective);
}

TEST_CASE("reference solver: identity system with shrinkage") {
  Matrix a = Matrix::Identity(2, 2);
  Vector b(2);
  b << 1.0, 0.0;
  const Vector x = reference_solve(a, b, 0.5, 0.5, 2.0);
  // one-dimensional scan along t * (1, 0) locates the minimum at t = 1
  double best_scan = 1e300;
  double best_t = -1.0;
  for (int i = 0; i <= 4000; ++i) {
    const double t = i * 5e-4;
    const double f = std::abs(t - 1.0) + 0.5 * t;
    if (f < best_scan) {
      best_scan = f;
      best_t = t;
    }
  }
  CHECK(best_t == doctest::Approx(1.0).epsilon(1e-6));
  CHECK((x - Vector{{1.0, 0.0}}).lpNorm<Eigen::Infinity>() < 1e-6);
  const double objective = (a * x - b).norm() + 0.5 * x.lpNorm<1>();
  CHECK(objective == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(objective <= best_scan + 1e-9);
}

TEST_CASE("reference solver: no regularization solves the linear system") {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix a(4, 4);
    Vector b(4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
      b[i] = rng.uniform(-1.0, 1.0);
    }
    a += 2.0 * Matrix::Identity(4, 4);  // keep it comfortably invertible
    const Vector x = reference_solve(a, b, 0.0, 0.0, 2.0);
    CHECK((x - a.fullPivLu().solve(b)).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("reference solver: large threshold forces the zero solution") {
  Rng rng(9);
  Matrix a(4, 4);
  Vector b(4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
    b[i] = rng.uniform(-1.0, 1.0);
  }
  // just above the threshold where coordinate moves stop paying off
  const double rho = 1.05 * (a.transpose() * (b / b.norm())).lpNorm<Eigen::Infinity>();
  const Vector x = reference_solve(a, b, rho, rho, 2.0);
  CHECK(x.lpNorm<Eigen::Infinity>() < 1e-8);

  // confirm optimality of zero by coordinate perturbations in both directions
  const double f0 = b.norm();
  for (int i = 0; i < 4; ++i) {
    for (double eps : {1e-3, -1e-3, 1e-2, -1e-2}) {
      Vector probe = Vector::Zero(4);
      probe[i] = eps;
      const double f = (a * probe - b).norm() + rho * probe.lpNorm<1>();
      CHECK(f >= f0 - 1e-12);
    }
  }
}

TEST_CASE("reference solver results satisfy first-order optimality") {
  Rng rng(10);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 6;
    Matrix a(n, n);
    Vector b(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
      b[i] = rng.uniform(-1.0, 1.0);
    }
    // moderate thresholds keep the minimizer away from exact interpolation,
    // where the residual-norm gradient would be undefined
    const double rho1 = rng.uniform(0.3, 0.8), rho2 = rng.uniform(0.3, 0.8);
    const Vector x = reference_solve(a, b, rho1, rho2, 2.0);
    if ((a * x - b).norm() < 1e-6) continue;
    CHECK(stationarity_gap(a, b, rho1, rho2, x) < 1e-6);
    ++checked;
  }
  CHECK(checked >= 15);
}

TEST_CASE("reference solver handles the other residual norms") {
  // m = 1: objective |x0 - 2| + |x1| + rho ||x||_1 has its optimum at (2, 0)
  Matrix a = Matrix::Identity(2, 2);
  Vector b(2);
  b << 2.0, 0.0;
  const Vector x1 = reference_solve(a, b, 0.4, 0.4, 1.0);
  CHECK((x1 - Vector{{2.0, 0.0}}).lpNorm<Eigen::Infinity>() < 1e-5);

  // m = inf: the returned point beats black-box perturbations
  Rng rng(11);
  Matrix a2(3, 3);
  Vector b2(3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a2(i, j) = rng.uniform(-1.0, 1.0);
    b2[i] = rng.uniform(-1.0, 1.0);
  }
  const double rho = 0.15;
  const Vector xi = reference_solve(a2, b2, rho, rho, kInf);
  auto objective = [&](const Vector& v) {
    return (a2 * v - b2).lpNorm<Eigen::Infinity>() + rho * v.lpNorm<1>();
  };
  const double f_star = objective(xi);
  for (int trial = 0; trial < 300; ++trial) {
    const double scale = std::pow(10.0, rng.uniform(-3.0, -1.0));
    CHECK(objective(xi + scale * random_vector(rng, 3)) >= f_star - 1e-6);
  }
}

TEST_CASE("reference solver rejects oversized systems and reports non-convergence") {
  CHECK_THROWS_AS(reference_solve(Matrix::Identity(80, 80), Vector::Ones(80), 0.1, 0.1, 2.0),
                  InvalidArgument);
  Matrix a = Matrix::Identity(3, 3);
  Vector b = Vector::Ones(3);
  ReferenceOptions opts;
  opts.max_outer = 1;  // unreachable tolerance in one round
  opts.max_inner = 2;
  bool thrown = false;
  try {
    reference_solve(a, b, 0.1, 0.1, 2.0, opts);
  } catch (const NumericError& e) {
    thrown = true;
    CHECK(std::isfinite(e.best_objective));
  }
  CHECK(thrown);
}
