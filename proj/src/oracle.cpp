#include "rotd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace rotd {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

LinearSystem LinearSystem::exact(const MdpModel& model, const FeatureMap& features, double eta,
                                 double gamma, RankPolicy policy) {
  model.validate();
  if (!features.discrete())
    throw InvalidArgument("exact system needs a discrete feature map over the model's states");
  Matrix phi = features.matrix();
  if (phi.rows() != model.n_states)
    throw InvalidArgument("feature map rows do not match the model's state count");
  if (eta < 0.0) throw InvalidArgument("eta must be nonnegative");

  const auto xi = model.state_dist.asDiagonal();
  const int d = static_cast<int>(phi.cols());
  const Matrix p_phi = model.transition * phi;

  LinearSystem sys;
  sys.d_ = d;
  sys.has_model_ = true;
  sys.policy_ = policy;
  sys.C_ = phi.transpose() * xi * phi;
  sys.F_ = phi.transpose() * xi * (gamma * p_phi - phi);
  sys.g_ = phi.transpose() * xi * model.reward;

  sys.A_.resize(2 * d, 2 * d);
  sys.A_.topLeftCorner(d, d) = eta * sys.C_;
  sys.A_.topRightCorner(d, d) = -eta * sys.F_;
  sys.A_.bottomLeftCorner(d, d) = gamma * p_phi.transpose() * xi * phi;
  sys.A_.bottomRightCorner(d, d) = -sys.F_;
  sys.b_.resize(2 * d);
  sys.b_.head(d) = eta * sys.g_;
  sys.b_.tail(d) = sys.g_;

  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sys.C_ + sys.C_.transpose()));
  sys.c_eigvecs_ = es.eigenvectors();
  sys.c_eigvals_ = es.eigenvalues();
  const double cutoff = std::max(sys.c_eigvals_.cwiseAbs().maxCoeff(), 1.0) * d * 1e-14;
  sys.rank_ = static_cast<int>((sys.c_eigvals_.array() > cutoff).count());
  if (policy == RankPolicy::RequireFullRank && sys.rank_ < d) {
    throw RankError(
        "feature Gram matrix is rank deficient (rank " + std::to_string(sys.rank_) + " of " +
        std::to_string(d) +
        "): the basis functions are linearly dependent under the sampling distribution");
  }
  return sys;
}

LinearSystem LinearSystem::dense(Matrix A, Vector b) {
  if (A.rows() != b.size()) throw InvalidArgument("dense system: A rows must match b");
  LinearSystem sys;
  sys.A_ = std::move(A);
  sys.b_ = std::move(b);
  sys.d_ = static_cast<int>(sys.A_.cols()) / 2;
  sys.has_model_ = false;
  return sys;
}

LinearSystem exact_system(const MdpModel& model, const FeatureMap& features, double eta,
                          double gamma, RankPolicy policy) {
  return LinearSystem::exact(model, features, eta, gamma, policy);
}

double mspbe(const Vector& theta, const LinearSystem& system) {
  if (!system.has_model()) throw InvalidArgument("mspbe: system carries no model");
  if (theta.size() != system.d()) throw InvalidArgument("mspbe: theta dimension mismatch");
  const Vector z = system.g_ + system.F_ * theta;
  // z lies in the row space of Phi, so solving through the thresholded
  // eigendecomposition of C is exact for consistent systems.
  const double cutoff =
      std::max(system.c_eigvals_.cwiseAbs().maxCoeff(), 1.0) * system.d() * 1e-14;
  const Vector zt = system.c_eigvecs_.transpose() * z;
  double value = 0.0;
  for (int i = 0; i < system.d(); ++i) {
    if (system.c_eigvals_[i] > cutoff) value += zt[i] * zt[i] / system.c_eigvals_[i];
  }
  return std::max(value, 0.0);
}

Vector solve_fixed_point(const LinearSystem& system) {
  const Matrix& A = system.A();
  if (A.rows() != A.cols()) throw InvalidArgument("solve_fixed_point: A must be square");
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues()[0];
  const double smin = svd.singularValues()[svd.singularValues().size() - 1];
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  const bool singular = !(smin > smax * A.rows() * 1e-14);
  if (singular && system.policy() == RankPolicy::RequireFullRank) {
    char msg[128];
    std::snprintf(msg, sizeof(msg), "system matrix is singular (condition estimate %.3e)", cond);
    throw SingularSystemError(msg, cond);
  }
  svd.setThreshold(A.rows() * 1e-14);
  const Vector x = svd.solve(system.b());  // minimum-norm least-squares solution
  const double residual = (A * x - system.b()).norm();
  if (residual > 1e-8 * (1.0 + system.b().norm())) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "singular system is inconsistent (residual %.3e, condition estimate %.3e)",
                  residual, cond);
    throw SingularSystemError(msg, cond);
  }
  return x;
}

const char* DiagnosticsRecord::csv_header() {
  return "iteration,mspbe,l2_residual,dual_value,delta,theta_nnz,w_nnz,objective";
}

std::string DiagnosticsRecord::csv_row() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%.17g,%d,%d,%.17g",
                static_cast<long long>(iteration), mspbe, l2_residual, dual_value, delta,
                theta_nnz, w_nnz, objective);
  return buf;
}

int count_active(const Vector& v) {
  return static_cast<int>((v.cwiseAbs().array() > kActiveTolerance).count());
}

DiagnosticsRecord duality_diagnostics(const PrimalDualState& state, const LinearSystem* system,
                                      const SolverConfig& config, bool averaged_estimate) {
  DiagnosticsRecord rec;
  rec.iteration = state.t;
  rec.delta = state.last_delta;

  const int d = state.dim();
  const bool use_average = averaged_estimate && state.t >= 1;
  const Vector x_bar = use_average ? average_iterates(state).first : state.x();
  const Vector theta_est = use_average ? Vector(x_bar.tail(d)) : state.theta;
  const Vector w_est = use_average ? Vector(x_bar.head(d)) : state.w;
  rec.theta_nnz = count_active(theta_est);
  rec.w_nnz = count_active(w_est);

  if (system == nullptr) {
    rec.mspbe = kNan;
    rec.l2_residual = kNan;
    rec.dual_value = kNan;
    rec.objective = kNan;
    return rec;
  }
  const Vector x = state.x();
  const Vector residual = system->A() * x - system->b();
  rec.l2_residual = residual.norm();
  rec.dual_value = state.y().dot(residual);
  rec.mspbe = system->has_model() ? mspbe(theta_est, *system) : kNan;
  const Vector x_avg = state.t >= 1 ? average_iterates(state).first : x;
  rec.objective = regularized_objective(system->A(), system->b(), x_avg, config.rho1, config.rho2,
                                        config.norm_m);
  return rec;
}

double regularized_objective(const Matrix& A, const Vector& b, const Vector& x, double rho1,
                             double rho2, double m) {
  const int d = static_cast<int>(x.size()) / 2;
  const double fit = vector_norm(A * x - b, m);
  return fit + rho2 * x.head(d).lpNorm<1>() + rho1 * x.tail(x.size() - d).lpNorm<1>();
}

namespace {

// Weighted l1 proximal-gradient (FISTA) solve of
//   min_x 1/2 x' H x - q . x ... expressed through the smooth gradient
// callback; L is a Lipschitz bound on the gradient.
template <typename Grad>
Vector fista(Vector x, const Vector& weights, double L, int max_iter, double tol, Grad&& grad) {
  Vector z = x;
  double momentum = 1.0;
  for (int k = 0; k < max_iter; ++k) {
    const Vector x_prev = x;
    Vector step = z - grad(z) / L;
    for (int i = 0; i < x.size(); ++i) {
      const double w = weights[i] / L;
      step[i] = std::max(step[i] - w, 0.0) - std::max(-step[i] - w, 0.0);
    }
    x = step;
    const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    z = x + ((momentum - 1.0) / momentum_next) * (x - x_prev);
    momentum = momentum_next;
    if ((x - x_prev).lpNorm<Eigen::Infinity>() <= tol) break;
  }
  return x;
}

Vector threshold_weights(int n, double rho1, double rho2) {
  Vector w(n);
  if (rho1 == rho2) {
    w.setConstant(rho1);
    return w;
  }
  if (n % 2 != 0)
    throw InvalidArgument("reference_solve: distinct rho1/rho2 need an even-dimensional x");
  w.head(n / 2).setConstant(rho2);
  w.tail(n / 2).setConstant(rho1);
  return w;
}

}  // namespace

Vector reference_solve(const Matrix& A, const Vector& b, double rho1, double rho2, double m,
                       const ReferenceOptions& options) {
  if (A.rows() > 64 || A.cols() > 64)
    throw InvalidArgument("reference_solve: intended for small dense systems (<= 64)");
  if (rho1 < 0.0 || rho2 < 0.0) throw InvalidArgument("reference_solve: negative threshold");
  const int n = static_cast<int>(A.cols());
  const Vector weights = threshold_weights(n, rho1, rho2);
  const double a_norm2 = A.squaredNorm() > 0.0
                             ? Eigen::JacobiSVD<Matrix>(A).singularValues()[0]
                             : 0.0;
  auto objective = [&](const Vector& x) {
    return vector_norm(A * x - b, m) + weights.dot(x.cwiseAbs());
  };

  Vector x = Vector::Zero(n);
  double f_prev = objective(x);
  double f_best = f_prev;
  double temperature = 0.1;  // m = inf smoothing, lowered every round

  for (int outer = 0; outer < options.max_outer; ++outer) {
    const Vector r = A * x - b;
    if (m == 2.0) {
      // Majorize ||r||_2 at the current residual: ||Ax-b||_2 <= t/2 + ||Ax-b||^2/(2t)
      // with t = ||r||_2, then solve the quadratic-plus-l1 surrogate exactly.
      const double t = std::max(r.norm(), 1e-13);
      const double L = std::max(a_norm2 * a_norm2 / t, 1e-300);
      x = fista(x, weights, L, options.max_inner, 1e-15,
                [&](const Vector& v) { return Vector(A.transpose() * (A * v - b) / t); });
    } else if (m == 1.0) {
      // Reweighted quadratic majorant of ||r||_1 with a floor that shrinks as
      // the outer objective stabilizes.
      const double floor = std::max(1e-12, 1e-3 * std::pow(0.5, outer));
      Vector inv_w = r.cwiseAbs().cwiseMax(floor).cwiseInverse();
      const Matrix scaled = inv_w.cwiseSqrt().asDiagonal() * A;
      const double L =
          std::max(std::pow(Eigen::JacobiSVD<Matrix>(scaled).singularValues()[0], 2.0), 1e-300);
      x = fista(x, weights, L, options.max_inner, 1e-15, [&](const Vector& v) {
        return Vector(A.transpose() * (inv_w.asDiagonal() * (A * v - b)));
      });
    } else if (m == kInf) {
      // Smooth max with decreasing temperature.
      const double mu = std::max(temperature, 1e-9);
      temperature *= 0.5;
      const double L = std::max(a_norm2 * a_norm2 / mu, 1e-300);
      x = fista(x, weights, L, options.max_inner, 1e-15, [&](const Vector& v) {
        const Vector rv = (A * v - b) / mu;
        const double peak = rv.cwiseAbs().maxCoeff();
        Vector p(rv.size());
        double z = 0.0;
        for (int i = 0; i < rv.size(); ++i) {
          const double ep = std::exp(rv[i] - peak);
          const double en = std::exp(-rv[i] - peak);
          p[i] = ep - en;
          z += ep + en;
        }
        return Vector(A.transpose() * (p / z));
      });
    } else {
      throw InvalidArgument("reference_solve: unsupported residual norm");
    }

    const double f_new = objective(x);
    f_best = std::min(f_best, f_new);
    const bool objective_settled = std::abs(f_prev - f_new) < options.objective_tol;
    if (m == 2.0) {
      // For the smooth-residual case the first-order condition is checkable
      // directly; require it before accepting the objective plateau.
      const Vector r_now = A * x - b;
      const bool interpolating = r_now.norm() <= 1e-10;
      const bool stationary =
          interpolating || stationarity_gap(A, b, rho1, rho2, x) < 1e-8;
      if (objective_settled && stationary) return x;
    } else if (objective_settled && (m != kInf || temperature < 1e-9)) {
      return x;
    }
    f_prev = f_new;
  }
  throw NumericError("reference_solve: objective did not stabilize within the iteration cap",
                     f_best);
}

double stationarity_gap(const Matrix& A, const Vector& b, double rho1, double rho2,
                        const Vector& x) {
  const Vector r = A * x - b;
  const double rn = r.norm();
  if (!(rn > 1e-10))
    throw InvalidArgument("stationarity_gap: residual at zero, gradient undefined");
  const Vector grad = A.transpose() * (r / rn);
  const Vector weights = threshold_weights(static_cast<int>(x.size()), rho1, rho2);
  double worst = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    double violation;
    if (x[i] > kActiveTolerance)
      violation = std::abs(grad[i] + weights[i]);
    else if (x[i] < -kActiveTolerance)
      violation = std::abs(grad[i] - weights[i]);
    else
      violation = std::max(0.0, std::abs(grad[i]) - weights[i]);
    worst = std::max(worst, violation);
  }
  return worst;
}

}  // namespace rotd
