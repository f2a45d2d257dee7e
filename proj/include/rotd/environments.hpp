#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "rotd/features.hpp"
#include "rotd/rng.hpp"

namespace rotd {

// Finite MDP under a fixed target policy. `transition` is the induced state
// kernel, `transition_reward(s, s')` the reward paid on that move, and
// `reward` its per-state expectation. `state_dist` is the distribution the
// behavior process visits states with; it need not match the kernel.
struct MdpModel {
  int n_states = 0;
  Matrix transition;
  Matrix transition_reward;
  Vector reward;
  double gamma = 0.0;
  Vector state_dist;
  std::vector<int> absorbing;

  /// Throws InvalidArgument when row sums, distribution mass, discount range
  /// or absorbing-state conventions are violated.
  void validate() const;

  /// Fills `reward` from `transition` and `transition_reward`.
  void derive_expected_reward();
};

// One transition's learning payload. `phi_bar_next` is the target-policy
// expected next feature vector used by trace-based learners; an empty vector
// means it coincides with `phi_next`.
struct Sample {
  Vector phi;
  double reward = 0.0;
  Vector phi_next;
  Vector phi_bar_next;

  const Vector& phi_bar() const { return phi_bar_next.size() > 0 ? phi_bar_next : phi_next; }
};

// Raw per-sample payload kept alongside the feature vectors so a batch can be
// serialized without storing dense features; features are recomputed on load.
struct SampleRecord {
  int episode = 0;
  int step = 0;
  Vector state;
  int action = 0;
  double reward = 0.0;
  Vector next_state;
  bool terminal = false;
};

struct EpisodeBatch {
  std::vector<Sample> samples;
  std::vector<std::size_t> episode_boundaries;  // one-past-the-end sample index per episode
  std::uint64_t seed = 0;
  std::vector<SampleRecord> records;

  std::size_t size() const { return samples.size(); }

  /// Writes one CSV row per sample: episode, step, action, reward, terminal,
  /// state coordinates, next-state coordinates.
  void save_csv(const std::string& path) const;

  /// Reads a batch written by save_csv. Only `records`, boundaries and seed
  /// are restored; call materialize() to rebuild the samples.
  static EpisodeBatch load_csv(const std::string& path);

  /// Recomputes `samples` from `records` with the given basis. Terminal
  /// transitions get a zero next-feature vector.
  void materialize(const FeatureMap& features);
};

/// The 7-state star counterexample: zero rewards, discount 0.99, uniform
/// behavior distribution, every target transition into the hub state, and the
/// classic 8-feature overcomplete basis.
std::pair<MdpModel, FeatureMap> star_mdp();

/// The parameter vector the star experiment starts from: all ones except 10
/// at the hub coordinate.
Vector baird_theta_init();

/// 5-state symmetric random walk with absorbing ends (7 states total, ends at
/// indices 0 and 6), +1 reward on exiting right, discount 0.9. The behavior
/// state distribution is the stationary distribution of the walk restarted at
/// the center, restricted to the interior.
MdpModel random_walk();

/// Interior-state basis of the given family (tabular, inverted or dependent),
/// embedded over all 7 chain states with zero rows at the absorbing ends.
FeatureMap random_walk_features(FeatureMap::Kind kind);

// Canonical mountain-car dynamics: throttle in {0,1,2} maps to {-1,0,+1},
// v' = clip(v + 0.001 (a-1) - 0.0025 cos(3p)), p' = clip(p + v'), velocity
// zeroed at the left wall, reward -1 per step, done once p' >= 0.5.
struct MountainCar {
  static constexpr double kMinPos = -1.2;
  static constexpr double kMaxPos = 0.6;
  static constexpr double kMaxVel = 0.07;
  static constexpr double kGoalPos = 0.5;
  static constexpr int kActions = 3;

  struct Outcome {
    double position = 0.0;
    double velocity = 0.0;
    double reward = 0.0;
    bool done = false;
  };

  static Outcome step(double position, double velocity, int action);
  static std::array<Interval, 2> bounds();
};

// Minimal episodic simulator interface for trajectory collection.
class Simulator {
 public:
  virtual ~Simulator() = default;
  virtual int state_dim() const = 0;
  virtual int n_actions() const = 0;
  virtual Vector reset(Rng& rng) const = 0;
  virtual std::tuple<Vector, double, bool> step(const Vector& state, int action) const = 0;
};

/// Mountain car with episode starts drawn uniformly over the position
/// interval at zero velocity.
class MountainCarSim : public Simulator {
 public:
  int state_dim() const override { return 2; }
  int n_actions() const override { return MountainCar::kActions; }
  Vector reset(Rng& rng) const override;
  std::tuple<Vector, double, bool> step(const Vector& state, int action) const override;
};

using Policy = std::function<int(const Vector& state)>;

/// Accelerates in the direction of travel; pumps energy until the goal.
int energy_pump_action(const Vector& state);

/// n transitions with start states drawn i.i.d. from the model's state
/// distribution and successors from its kernel. Deterministic given seed.
EpisodeBatch collect_iid_samples(const MdpModel& model, const FeatureMap& features, int n,
                                 std::uint64_t seed);

/// Trajectories from a simulator under a behavior policy, truncated at
/// max_steps per episode. When min_samples > 0, additional episodes are run
/// until that many samples exist and the batch is cut to exactly that count.
EpisodeBatch collect_episodes(const Simulator& env, const Policy& behavior,
                              const FeatureMap& features, int n_episodes, int max_steps,
                              std::uint64_t seed, int min_samples = 0);

/// Episodic trajectories through a finite chain from a fixed start state;
/// episodes end on entering an absorbing state or after max_steps. When
/// min_samples > 0, extra episodes run until that many samples exist and the
/// batch is cut to exactly that count.
EpisodeBatch collect_chain_episodes(const MdpModel& model, const FeatureMap& features,
                                    int n_episodes, int max_steps, std::uint64_t seed,
                                    int start_state, int min_samples = 0);

}  // namespace rotd
