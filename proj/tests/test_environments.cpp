#include <cmath>
#include <cstdio>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "oracles.hpp"
#include "rotd/environments.hpp"

using namespace rotd;
using rotd::testing::exactly_equal;

TEST_CASE("star problem has zero rewards and hub-directed target kernel") {
  auto [model, features] = star_mdp();
  CHECK(model.n_states == 7);
  CHECK(model.reward.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(model.gamma == 0.99);
  for (int s = 0; s < 7; ++s) {
    CHECK(model.transition(s, 6) == 1.0);
    CHECK(model.state_dist[s] == doctest::Approx(1.0 / 7));
  }
  CHECK(features.dim() == 8);
  // the projected reward vector vanishes identically
  const Vector phi_r = features.matrix().transpose() * model.reward;
  CHECK(phi_r.lpNorm<Eigen::Infinity>() == 0.0);
  // classic basis: 2 e_s + e_8 for the spokes, e_7 + 2 e_8 for the hub
  CHECK(features.at(0)[0] == 2.0);
  CHECK(features.at(0)[7] == 1.0);
  CHECK(features.at(6)[6] == 1.0);
  CHECK(features.at(6)[7] == 2.0);
  CHECK(baird_theta_init().isApprox(Vector{{1, 1, 1, 1, 1, 1, 10, 1}}, 1e-15));
}

TEST_CASE("random walk kernel, exact values and restart distribution") {
  const MdpModel model = random_walk();
  CHECK(model.n_states == 7);
  model.validate();
  CHECK(model.transition(3, 2) == 0.5);
  CHECK(model.transition(3, 4) == 0.5);
  CHECK(model.reward[5] == doctest::Approx(0.5));

  // undiscounted check: solve the 5x5 interior Bellman system directly;
  // the known solution is V(i) = i/6 for interior states i = 1..5
  Matrix interior = Matrix::Identity(5, 5);
  Vector reward_int = Vector::Zero(5);
  for (int i = 0; i < 5; ++i) {
    if (i > 0) interior(i, i - 1) -= 0.5;
    if (i < 4) interior(i, i + 1) -= 0.5;
  }
  reward_int[4] = 0.5;
  const Vector v = interior.fullPivLu().solve(reward_int);
  for (int i = 0; i < 5; ++i) CHECK(v[i] == doctest::Approx((i + 1) / 6.0).epsilon(1e-12));

  // stationary distribution of the restart-at-center chain, via an
  // independent eigenvector computation
  Matrix restart = model.transition;
  restart.row(0).setZero();
  restart(0, 3) = 1.0;
  restart.row(6).setZero();
  restart(6, 3) = 1.0;
  Eigen::EigenSolver<Matrix> es(restart.transpose());
  int top = 0;
  for (int i = 1; i < 7; ++i) {
    if (es.eigenvalues()[i].real() > es.eigenvalues()[top].real()) top = i;
  }
  Vector stationary = es.eigenvectors().col(top).real();
  stationary /= stationary.sum();
  stationary[0] = 0.0;
  stationary[6] = 0.0;
  stationary /= stationary.sum();
  CHECK((model.state_dist - stationary).lpNorm<Eigen::Infinity>() < 1e-10);
  const double expected[] = {0, 1.0 / 9, 2.0 / 9, 3.0 / 9, 2.0 / 9, 1.0 / 9, 0};
  for (int s = 0; s < 7; ++s) CHECK(model.state_dist[s] == doctest::Approx(expected[s]));
}

TEST_CASE("random walk features embed the interior basis with zero end rows") {
  for (auto kind :
       {FeatureMap::Kind::Tabular, FeatureMap::Kind::Inverted, FeatureMap::Kind::Dependent}) {
    const FeatureMap map = random_walk_features(kind);
    CHECK(map.n_states() == 7);
    CHECK(map.at(0).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(map.at(6).lpNorm<Eigen::Infinity>() == 0.0);
    for (int s = 1; s <= 5; ++s) CHECK(map.at(s).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(random_walk_features(FeatureMap::Kind::Dependent).dim() == 3);
}

TEST_CASE("mountain car dynamics") {
  const auto coast = MountainCar::step(-0.5, 0.0, 1);
  CHECK(coast.velocity == doctest::Approx(-0.0025 * std::cos(-1.5)).epsilon(1e-15));
  CHECK(coast.position == doctest::Approx(-0.5 + coast.velocity));
  CHECK(coast.reward == -1.0);
  CHECK_FALSE(coast.done);

  for (int a = 0; a < 3; ++a) CHECK(MountainCar::step(0.5, 0.01, a).done);

  // left wall zeroes an inbound velocity
  const auto wall = MountainCar::step(-1.19, -0.07, 1);
  CHECK(wall.position == -1.2);
  CHECK(wall.velocity == 0.0);

  CHECK_THROWS_AS(MountainCar::step(0.0, 0.0, 3), InvalidArgument);
  CHECK_THROWS_AS(MountainCar::step(0.0, 0.0, -1), InvalidArgument);
}

TEST_CASE("iid sample collection is deterministic and follows the state distribution") {
  auto [model, features] = star_mdp();
  const EpisodeBatch a = collect_iid_samples(model, features, 500, 99);
  const EpisodeBatch b = collect_iid_samples(model, features, 500, 99);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(exactly_equal(a.samples[i].phi, b.samples[i].phi));
    CHECK(exactly_equal(a.samples[i].phi_next, b.samples[i].phi_next));
    CHECK(a.samples[i].reward == b.samples[i].reward);
  }

  // start-state frequencies approach the behavior distribution
  const int n = 100000;
  const EpisodeBatch big = collect_iid_samples(model, features, n, 12345);
  Vector counts = Vector::Zero(7);
  for (const SampleRecord& rec : big.records) counts[static_cast<int>(rec.state[0])] += 1.0;
  counts /= n;
  for (int s = 0; s < 7; ++s) CHECK(std::abs(counts[s] - 1.0 / 7) < 0.01);
}

TEST_CASE("a single-state model yields phi == phi_next") {
  MdpModel model;
  model.n_states = 1;
  model.transition = Matrix::Ones(1, 1);
  model.transition_reward = Matrix::Zero(1, 1);
  model.reward = Vector::Zero(1);
  model.gamma = 0.5;
  model.state_dist = Vector::Ones(1);
  model.absorbing = {0};
  const EpisodeBatch batch = collect_iid_samples(model, FeatureMap::tabular(1), 20, 3);
  for (const Sample& s : batch.samples) CHECK(exactly_equal(s.phi, s.phi_next));
}

TEST_CASE("model validation rejects broken kernels") {
  MdpModel model;
  model.n_states = 2;
  model.transition = Matrix::Ones(2, 2);  // rows sum to 2
  model.transition_reward = Matrix::Zero(2, 2);
  model.reward = Vector::Zero(2);
  model.gamma = 0.9;
  model.state_dist = Vector::Constant(2, 0.5);
  CHECK_THROWS_AS(model.validate(), InvalidArgument);
  model.transition << 0.5, 0.5, 0.0, 1.0;
  model.validate();
  model.absorbing = {0};  // state 0 does not self-loop
  CHECK_THROWS_AS(model.validate(), InvalidArgument);
}

namespace {

// never reaches the goal from a low-energy start, so episodes only truncate
struct CoastSim : Simulator {
  int state_dim() const override { return 2; }
  int n_actions() const override { return 3; }
  Vector reset(Rng&) const override {
    Vector s(2);
    s << -0.5, 0.0;
    return s;
  }
  std::tuple<Vector, double, bool> step(const Vector& state, int action) const override {
    return MountainCarSim{}.step(state, action);
  }
};

}  // namespace

TEST_CASE("episode collection truncates, counts and reproduces") {
  const FeatureMap features =
      FeatureMap::rbf_grid(MountainCar::bounds(), {2}, true);
  const CoastSim sim;
  const Policy coast = [](const Vector&) { return 1; };

  const EpisodeBatch batch = collect_episodes(sim, coast, features, 15, 200, 11);
  CHECK(batch.size() == 3000);
  REQUIRE(batch.episode_boundaries.size() == 15);
  for (int e = 0; e < 15; ++e) CHECK(batch.episode_boundaries[e] == 200u * (e + 1));

  const EpisodeBatch single = collect_episodes(sim, coast, features, 10, 1, 11);
  CHECK(single.size() == 10);
  for (std::size_t e = 0; e < 10; ++e) CHECK(single.episode_boundaries[e] == e + 1);

  const EpisodeBatch again = collect_episodes(sim, coast, features, 15, 200, 11);
  REQUIRE(again.size() == batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(exactly_equal(batch.samples[i].phi, again.samples[i].phi));
    CHECK(batch.samples[i].reward == again.samples[i].reward);
  }

  // min_samples tops up and cuts to the exact count
  const EpisodeBatch capped = collect_episodes(sim, coast, features, 1, 200, 11, 450);
  CHECK(capped.size() == 450);
  CHECK(capped.episode_boundaries.back() == 450u);
}

TEST_CASE("chain episodes stop at absorbing states and reset nothing mid-episode") {
  const MdpModel model = random_walk();
  const FeatureMap features = random_walk_features(FeatureMap::Kind::Tabular);
  const EpisodeBatch batch = collect_chain_episodes(model, features, 50, 500, 21, 3);
  REQUIRE(batch.episode_boundaries.size() == 50);
  for (std::size_t e = 0; e < batch.episode_boundaries.size(); ++e) {
    const std::size_t last = batch.episode_boundaries[e] - 1;
    const int next_state = static_cast<int>(batch.records[last].next_state[0]);
    const bool absorbed = next_state == 0 || next_state == 6;
    CHECK(batch.records[last].terminal == absorbed);
    if (absorbed) CHECK(batch.samples[last].phi_next.lpNorm<Eigen::Infinity>() == 0.0);
  }
  const EpisodeBatch capped = collect_chain_episodes(model, features, 1, 500, 21, 3, 200);
  CHECK(capped.size() == 200);
}

TEST_CASE("batches round-trip through csv with features recomputed") {
  const FeatureMap features = FeatureMap::rbf_grid(MountainCar::bounds(), {2, 4}, false);
  const MountainCarSim sim;
  const EpisodeBatch batch =
      collect_episodes(sim, energy_pump_action, features, 3, 50, 5);

  const std::string path = "/tmp/rotd_test_batch.csv";
  batch.save_csv(path);
  EpisodeBatch loaded = EpisodeBatch::load_csv(path);
  REQUIRE(loaded.records.size() == batch.records.size());
  CHECK(loaded.episode_boundaries == batch.episode_boundaries);
  loaded.materialize(features);
  REQUIRE(loaded.samples.size() == batch.samples.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(exactly_equal(loaded.samples[i].phi, batch.samples[i].phi));
    CHECK(exactly_equal(loaded.samples[i].phi_next, batch.samples[i].phi_next));
    CHECK(loaded.samples[i].reward == batch.samples[i].reward);
  }
  std::remove(path.c_str());

  CHECK_THROWS_AS(EpisodeBatch::load_csv("/nonexistent/batch.csv"), IoError);
}
