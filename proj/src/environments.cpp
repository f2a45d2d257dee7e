#include "rotd/environments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rotd {

void MdpModel::validate() const {
  if (n_states < 1) throw InvalidArgument("MdpModel: n_states must be positive");
  if (transition.rows() != n_states || transition.cols() != n_states)
    throw InvalidArgument("MdpModel: transition must be n_states x n_states");
  if (reward.size() != n_states) throw InvalidArgument("MdpModel: reward size mismatch");
  if (state_dist.size() != n_states) throw InvalidArgument("MdpModel: state_dist size mismatch");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("MdpModel: gamma must be in [0,1)");
  for (int s = 0; s < n_states; ++s) {
    if (transition.row(s).minCoeff() < 0.0)
      throw InvalidArgument("MdpModel: negative transition probability");
    if (std::abs(transition.row(s).sum() - 1.0) > 1e-12)
      throw InvalidArgument("MdpModel: transition row " + std::to_string(s) +
                            " does not sum to 1");
  }
  if (state_dist.minCoeff() < 0.0) throw InvalidArgument("MdpModel: negative state_dist entry");
  if (std::abs(state_dist.sum() - 1.0) > 1e-12)
    throw InvalidArgument("MdpModel: state_dist does not sum to 1");
  for (int s : absorbing) {
    if (s < 0 || s >= n_states) throw InvalidArgument("MdpModel: absorbing index out of range");
    if (std::abs(transition(s, s) - 1.0) > 1e-12)
      throw InvalidArgument("MdpModel: absorbing state must self-loop");
    if (std::abs(reward[s]) > 0.0)
      throw InvalidArgument("MdpModel: absorbing state must have zero reward");
  }
}

void MdpModel::derive_expected_reward() {
  reward = transition.cwiseProduct(transition_reward).rowwise().sum();
}

std::pair<MdpModel, FeatureMap> star_mdp() {
  constexpr int n = 7;
  MdpModel m;
  m.n_states = n;
  m.transition = Matrix::Zero(n, n);
  m.transition.col(n - 1).setOnes();  // target policy: always jump to the hub
  m.transition_reward = Matrix::Zero(n, n);
  m.reward = Vector::Zero(n);
  m.gamma = 0.99;
  m.state_dist = Vector::Constant(n, 1.0 / n);
  m.validate();

  Matrix phi = Matrix::Zero(n, 8);
  for (int s = 0; s < 6; ++s) {
    phi(s, s) = 2.0;
    phi(s, 7) = 1.0;
  }
  phi(6, 6) = 1.0;
  phi(6, 7) = 2.0;
  return {std::move(m), FeatureMap::table(std::move(phi))};
}

Vector baird_theta_init() {
  Vector theta = Vector::Ones(8);
  theta[6] = 10.0;
  return theta;
}

MdpModel random_walk() {
  constexpr int n = 7;  // 0 and 6 absorbing, 1..5 interior, center 3
  MdpModel m;
  m.n_states = n;
  m.transition = Matrix::Zero(n, n);
  m.transition(0, 0) = 1.0;
  m.transition(n - 1, n - 1) = 1.0;
  for (int s = 1; s <= 5; ++s) {
    m.transition(s, s - 1) = 0.5;
    m.transition(s, s + 1) = 0.5;
  }
  m.transition_reward = Matrix::Zero(n, n);
  m.transition_reward(5, 6) = 1.0;  // +1 on exiting right
  m.derive_expected_reward();
  m.gamma = 0.9;
  m.absorbing = {0, n - 1};

  // Stationary distribution of the walk restarted at the center, restricted
  // to the interior states. The restart chain is periodic (every move flips
  // position parity), so power iteration runs on the lazy half-step chain,
  // which shares the stationary distribution and mixes.
  Matrix restart = m.transition;
  restart.row(0).setZero();
  restart(0, 3) = 1.0;
  restart.row(n - 1).setZero();
  restart(n - 1, 3) = 1.0;
  const Matrix lazy = 0.5 * (Matrix::Identity(n, n) + restart);
  Vector dist = Vector::Constant(n, 1.0 / n);
  for (int it = 0; it < 100000; ++it) {
    Vector next = lazy.transpose() * dist;
    const double change = (next - dist).lpNorm<1>();
    dist = next;
    if (change < 1e-14) break;
  }
  dist[0] = 0.0;
  dist[n - 1] = 0.0;
  dist /= dist.sum();
  m.state_dist = dist;
  m.validate();
  return m;
}

FeatureMap random_walk_features(FeatureMap::Kind kind) {
  constexpr int interior = 5;
  FeatureMap base = [&] {
    switch (kind) {
      case FeatureMap::Kind::Tabular:
        return FeatureMap::tabular(interior);
      case FeatureMap::Kind::Inverted:
        return FeatureMap::inverted(interior);
      case FeatureMap::Kind::Dependent:
        return FeatureMap::dependent(interior);
      default:
        throw InvalidArgument("random_walk_features: unsupported basis family");
    }
  }();
  Matrix phi = Matrix::Zero(interior + 2, base.dim());
  phi.block(1, 0, interior, base.dim()) = base.matrix();
  return FeatureMap::table(std::move(phi));
}

MountainCar::Outcome MountainCar::step(double position, double velocity, int action) {
  if (action < 0 || action >= kActions)
    throw InvalidArgument("mountain car: action must be in {0,1,2}");
  Outcome out;
  double v = velocity + 0.001 * (action - 1) - 0.0025 * std::cos(3.0 * position);
  v = std::clamp(v, -kMaxVel, kMaxVel);
  double p = std::clamp(position + v, kMinPos, kMaxPos);
  if (p <= kMinPos && v < 0.0) v = 0.0;
  out.position = p;
  out.velocity = v;
  out.reward = -1.0;
  out.done = p >= kGoalPos;
  return out;
}

std::array<Interval, 2> MountainCar::bounds() {
  return {Interval{kMinPos, kMaxPos}, Interval{-kMaxVel, kMaxVel}};
}

Vector MountainCarSim::reset(Rng& rng) const {
  Vector s(2);
  s[0] = rng.uniform(MountainCar::kMinPos, MountainCar::kMaxPos);
  s[1] = 0.0;
  return s;
}

std::tuple<Vector, double, bool> MountainCarSim::step(const Vector& state, int action) const {
  const auto out = MountainCar::step(state[0], state[1], action);
  Vector next(2);
  next[0] = out.position;
  next[1] = out.velocity;
  return {next, out.reward, out.done};
}

int energy_pump_action(const Vector& state) { return state[1] >= 0.0 ? 2 : 0; }

EpisodeBatch collect_iid_samples(const MdpModel& model, const FeatureMap& features, int n,
                                 std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("collect_iid_samples: n must be >= 1");
  model.validate();
  EpisodeBatch batch;
  batch.seed = seed;
  batch.samples.reserve(n);
  batch.records.reserve(n);
  batch.episode_boundaries.reserve(n);
  Rng rng(seed);
  for (int t = 0; t < n; ++t) {
    const int s = rng.discrete(model.state_dist);
    const int s2 = rng.discrete(model.transition.row(s).transpose());
    Sample sample;
    sample.phi = features.at(s);
    sample.reward = model.transition_reward.size() > 0 ? model.transition_reward(s, s2) : 0.0;
    sample.phi_next = features.at(s2);
    batch.samples.push_back(std::move(sample));
    SampleRecord rec;
    rec.episode = t;
    rec.step = 0;
    rec.state = Vector::Constant(1, static_cast<double>(s));
    rec.reward = batch.samples.back().reward;
    rec.next_state = Vector::Constant(1, static_cast<double>(s2));
    batch.records.push_back(std::move(rec));
    batch.episode_boundaries.push_back(static_cast<std::size_t>(t) + 1);
  }
  return batch;
}

namespace {

void truncate_batch(EpisodeBatch& batch, int n_samples) {
  if (n_samples <= 0 || batch.samples.size() <= static_cast<std::size_t>(n_samples)) return;
  batch.samples.resize(n_samples);
  batch.records.resize(n_samples);
  while (!batch.episode_boundaries.empty() &&
         batch.episode_boundaries.back() > static_cast<std::size_t>(n_samples)) {
    batch.episode_boundaries.pop_back();
  }
  if (batch.episode_boundaries.empty() ||
      batch.episode_boundaries.back() < static_cast<std::size_t>(n_samples)) {
    batch.episode_boundaries.push_back(n_samples);
  }
}

}  // namespace

EpisodeBatch collect_episodes(const Simulator& env, const Policy& behavior,
                              const FeatureMap& features, int n_episodes, int max_steps,
                              std::uint64_t seed, int min_samples) {
  if (n_episodes < 1 || max_steps < 1)
    throw InvalidArgument("collect_episodes: n_episodes and max_steps must be >= 1");
  EpisodeBatch batch;
  batch.seed = seed;
  Rng rng(seed);
  const Vector zero_phi = Vector::Zero(features.dim());
  int episode = 0;
  while (episode < n_episodes ||
         (min_samples > 0 && batch.samples.size() < static_cast<std::size_t>(min_samples))) {
    Vector s = env.reset(rng);
    for (int step = 0; step < max_steps; ++step) {
      const int a = behavior(s);
      auto [s2, r, done] = env.step(s, a);
      Sample sample;
      sample.phi = features.at(s);
      sample.reward = r;
      sample.phi_next = done ? zero_phi : features.at(s2);
      batch.samples.push_back(std::move(sample));
      SampleRecord rec;
      rec.episode = episode;
      rec.step = step;
      rec.state = s;
      rec.action = a;
      rec.reward = r;
      rec.next_state = s2;
      rec.terminal = done;
      batch.records.push_back(std::move(rec));
      s = std::move(s2);
      if (done) break;
    }
    batch.episode_boundaries.push_back(batch.samples.size());
    ++episode;
  }
  truncate_batch(batch, min_samples);
  return batch;
}

EpisodeBatch collect_chain_episodes(const MdpModel& model, const FeatureMap& features,
                                    int n_episodes, int max_steps, std::uint64_t seed,
                                    int start_state, int min_samples) {
  if (n_episodes < 1 || max_steps < 1)
    throw InvalidArgument("collect_chain_episodes: n_episodes and max_steps must be >= 1");
  if (start_state < 0 || start_state >= model.n_states)
    throw InvalidArgument("collect_chain_episodes: start state out of range");
  model.validate();
  EpisodeBatch batch;
  batch.seed = seed;
  Rng rng(seed);
  auto is_absorbing = [&](int s) {
    return std::find(model.absorbing.begin(), model.absorbing.end(), s) != model.absorbing.end();
  };
  for (int episode = 0;
       episode < n_episodes ||
       (min_samples > 0 && batch.samples.size() < static_cast<std::size_t>(min_samples));
       ++episode) {
    int s = start_state;
    for (int step = 0; step < max_steps; ++step) {
      const int s2 = rng.discrete(model.transition.row(s).transpose());
      const bool done = is_absorbing(s2);
      Sample sample;
      sample.phi = features.at(s);
      sample.reward = model.transition_reward.size() > 0 ? model.transition_reward(s, s2) : 0.0;
      sample.phi_next = features.at(s2);
      batch.samples.push_back(std::move(sample));
      SampleRecord rec;
      rec.episode = episode;
      rec.step = step;
      rec.state = Vector::Constant(1, static_cast<double>(s));
      rec.reward = batch.samples.back().reward;
      rec.next_state = Vector::Constant(1, static_cast<double>(s2));
      rec.terminal = done;
      batch.records.push_back(std::move(rec));
      s = s2;
      if (done) break;
    }
    batch.episode_boundaries.push_back(batch.samples.size());
  }
  truncate_batch(batch, min_samples);
  return batch;
}

void EpisodeBatch::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const int k = records.empty() ? 1 : static_cast<int>(records.front().state.size());
  out << "episode,step,action,reward,terminal";
  for (int j = 0; j < k; ++j) out << ",s" << j;
  for (int j = 0; j < k; ++j) out << ",n" << j;
  out << "\n";
  char buf[32];
  for (const SampleRecord& rec : records) {
    out << rec.episode << ',' << rec.step << ',' << rec.action << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", rec.reward);
    out << buf << ',' << (rec.terminal ? 1 : 0);
    for (int j = 0; j < k; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", rec.state[j]);
      out << ',' << buf;
    }
    for (int j = 0; j < k; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", rec.next_state[j]);
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing " + path);
}

EpisodeBatch EpisodeBatch::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty batch file " + path);
  int columns = 1;
  for (char c : line) columns += (c == ',');
  const int k = (columns - 5) / 2;
  if (k < 1 || 5 + 2 * k != columns) throw IoError("unrecognized batch header in " + path);

  EpisodeBatch batch;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<int>(vals.size()) != columns) throw IoError("ragged row in " + path);
    SampleRecord rec;
    rec.episode = static_cast<int>(vals[0]);
    rec.step = static_cast<int>(vals[1]);
    rec.action = static_cast<int>(vals[2]);
    rec.reward = vals[3];
    rec.terminal = vals[4] != 0.0;
    rec.state = Eigen::Map<const Vector>(vals.data() + 5, k);
    rec.next_state = Eigen::Map<const Vector>(vals.data() + 5 + k, k);
    batch.records.push_back(std::move(rec));
  }
  // Episode boundaries are implied by the episode column.
  for (std::size_t i = 1; i <= batch.records.size(); ++i) {
    if (i == batch.records.size() || batch.records[i].episode != batch.records[i - 1].episode)
      batch.episode_boundaries.push_back(i);
  }
  return batch;
}

void EpisodeBatch::materialize(const FeatureMap& features) {
  samples.clear();
  samples.reserve(records.size());
  const Vector zero_phi = Vector::Zero(features.dim());
  for (const SampleRecord& rec : records) {
    Sample sample;
    sample.phi = features.at(rec.state);
    sample.reward = rec.reward;
    sample.phi_next = rec.terminal ? zero_phi : features.at(rec.next_state);
    samples.push_back(std::move(sample));
  }
}

}  // namespace rotd
