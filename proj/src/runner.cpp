#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rotd/harness.hpp"

namespace rotd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool record_due(int t, int n, int stride) { return t % stride == 0 || t == n; }

DiagnosticsRecord ext_diagnostics(const DualExtensionState& state, const LinearSystem* system,
                                  const SolverConfig& solver) {
  const int d = static_cast<int>(state.x.size()) / 2;
  PrimalDualState mirror = PrimalDualState::zero(d);
  mirror.w = state.x.head(d);
  mirror.theta = state.x.tail(d);
  mirror.y1 = state.y.head(d);
  mirror.y2 = state.y.tail(d);
  mirror.t = state.t;
  mirror.sum_alpha = state.sum_alpha;
  mirror.x_weighted_sum = state.x_weighted_sum;
  mirror.y_weighted_sum = state.y_weighted_sum;
  return duality_diagnostics(mirror, system, solver, true);
}

// Drives one algorithm over a fixed sample stream, recording diagnostics
// every `stride` iterations. Divergence marks the run and stops it; earlier
// records are kept.
RunResult run_stream(Algorithm algorithm, const EpisodeBatch& batch, const LinearSystem* system,
                     const SolverConfig& solver, const Vector& theta_init, int stride,
                     const std::string& basis, int run_index, std::uint64_t seed) {
  const auto start_time = Clock::now();
  const int n = static_cast<int>(batch.samples.size());
  const int d = static_cast<int>(batch.samples.front().phi.size());

  RunResult result;
  result.algorithm = to_string(algorithm);
  result.basis = basis;
  result.run_index = run_index;
  result.seed = seed;

  if (algorithm == Algorithm::ROTD_EXT) {
    DualExtensionState state = DualExtensionState::zero(2 * d, 2 * d);
    if (theta_init.size() > 0) state.x.tail(d) = theta_init;
    result.records.push_back(ext_diagnostics(state, system, solver));
    try {
      for (int t = 0; t < n; ++t) {
        rotd_ext_step(state, batch.samples[t], solver.alpha.at(state.t + 1), solver.rho1,
                      solver.eta, solver.gamma);
        if (record_due(t + 1, n, stride))
          result.records.push_back(ext_diagnostics(state, system, solver));
      }
      auto [x_bar, y_bar] = average_iterates(state);
      result.x_bar = std::move(x_bar);
      result.y_bar = std::move(y_bar);
      if (system != nullptr) {
        result.averaged_objective = 0.5 * (system->A() * result.x_bar - system->b()).squaredNorm() +
                                    solver.rho1 * result.x_bar.lpNorm<1>();
      }
    } catch (const DivergenceError& e) {
      result.diverged = true;
      result.diverged_iteration = e.iteration;
    }
    result.duration_sec = seconds_since(start_time);
    return result;
  }

  const bool averaged = algorithm == Algorithm::ROTD || algorithm == Algorithm::ROGQ;
  PrimalDualState state = PrimalDualState::zero(d);
  if (theta_init.size() > 0) state.theta = theta_init;
  TraceState trace = TraceState::zero(d, solver.lambda);
  result.records.push_back(duality_diagnostics(state, system, solver, averaged));

  std::size_t next_boundary_idx = 0;
  try {
    for (int t = 0; t < n; ++t) {
      // new episode begins here: the trace must not cross the boundary
      while (next_boundary_idx < batch.episode_boundaries.size() &&
             batch.episode_boundaries[next_boundary_idx] == static_cast<std::size_t>(t)) {
        ++next_boundary_idx;
      }
      if (t == 0 || (next_boundary_idx > 0 &&
                     batch.episode_boundaries[next_boundary_idx - 1] ==
                         static_cast<std::size_t>(t))) {
        trace.reset();
      }
      const Sample& sample = batch.samples[t];
      const double alpha = solver.alpha.at(state.t + 1);
      switch (algorithm) {
        case Algorithm::TD:
          td_step(state, sample, alpha, solver.gamma);
          break;
        case Algorithm::TDC:
          tdc_step(state, sample, alpha, solver.eta, solver.gamma);
          break;
        case Algorithm::ROTD:
          rotd_step(state, sample, solver);
          break;
        case Algorithm::GQ:
          gq_trace_update(trace, sample, solver.gamma);
          gq_step(state, trace, sample, alpha, solver.eta, solver.gamma, solver.lambda);
          break;
        case Algorithm::ROGQ:
          gq_trace_update(trace, sample, solver.gamma);
          rogq_step(state, trace, sample, solver);
          break;
        default:
          throw InvalidArgument("unsupported algorithm for this experiment");
      }
      if (record_due(t + 1, n, stride))
        result.records.push_back(duality_diagnostics(state, system, solver, averaged));
    }
    auto [x_bar, y_bar] = average_iterates(state);
    result.x_bar = std::move(x_bar);
    result.y_bar = std::move(y_bar);
  } catch (const DivergenceError& e) {
    result.diverged = true;
    result.diverged_iteration = e.iteration;
  }
  result.duration_sec = seconds_since(start_time);
  return result;
}

// Stochastic saddle iteration on an explicit dense system: one uniformly
// sampled row per step, scaled by the row count to stay unbiased.
RunResult run_row_sampled(const LinearSystem& system, const SolverConfig& solver, int iterations,
                          int stride, int run_index, std::uint64_t seed) {
  const auto start_time = Clock::now();
  const Matrix& A = system.A();
  const Vector& b = system.b();
  const int rows = static_cast<int>(A.rows());
  const int d = rows / 2;

  RunResult result;
  result.algorithm = to_string(Algorithm::ROTD);
  result.run_index = run_index;
  result.seed = seed;

  PrimalDualState state = PrimalDualState::zero(d);
  Rng rng(seed);
  result.records.push_back(duality_diagnostics(state, &system, solver, true));
  try {
    for (int t = 0; t < iterations; ++t) {
      const int i = rng.uniform_int(rows);
      const double y_i = i < d ? state.y1[i] : state.y2[i - d];
      const Vector aty = (rows * y_i) * A.row(i).transpose();
      Vector axb = Vector::Zero(rows);
      axb[i] = rows * (A.row(i).head(d).dot(state.w) + A.row(i).tail(d).dot(state.theta) - b[i]);
      saddle_update(state, aty, axb, solver.alpha.at(state.t + 1), solver.rho1, solver.rho2,
                    solver.norm_n);
      if (record_due(t + 1, iterations, stride))
        result.records.push_back(duality_diagnostics(state, &system, solver, true));
    }
    auto [x_bar, y_bar] = average_iterates(state);
    result.x_bar = std::move(x_bar);
    result.y_bar = std::move(y_bar);
    result.averaged_objective = regularized_objective(A, b, result.x_bar, solver.rho1,
                                                      solver.rho2, solver.norm_m);
  } catch (const DivergenceError& e) {
    result.diverged = true;
    result.diverged_iteration = e.iteration;
  }
  result.duration_sec = seconds_since(start_time);
  return result;
}

std::vector<RunResult> run_star(const ExperimentConfig& config) {
  auto [model, features] = star_mdp();
  SolverConfig solver = config.solver;
  const LinearSystem system =
      exact_system(model, features, solver.eta, solver.gamma, RankPolicy::AllowRankDeficient);
  const Vector theta0 = baird_theta_init();

  std::vector<RunResult> results;
  for (Algorithm algorithm : config.algorithms) {
    solver.algorithm = algorithm;
    for (int run = 0; run < config.n_runs; ++run) {
      const std::uint64_t seed = config.seed_base + run;
      const EpisodeBatch batch = collect_iid_samples(model, features, config.n_samples, seed);
      results.push_back(
          run_stream(algorithm, batch, &system, solver, theta0, config.stride(), "", run, seed));
    }
  }
  return results;
}

std::vector<RunResult> run_random_walk(const ExperimentConfig& config) {
  const MdpModel model = random_walk();
  SolverConfig solver = config.solver;

  std::vector<RunResult> results;
  for (FeatureMap::Kind kind : config.bases) {
    const FeatureMap features = random_walk_features(kind);
    const LinearSystem system = exact_system(model, features, solver.eta, solver.gamma);
    std::string basis = kind == FeatureMap::Kind::Tabular    ? "tabular"
                        : kind == FeatureMap::Kind::Inverted ? "inverted"
                                                             : "dependent";
    for (Algorithm algorithm : config.algorithms) {
      solver.algorithm = algorithm;
      for (int run = 0; run < config.n_runs; ++run) {
        const std::uint64_t seed = config.seed_base + run;
        const EpisodeBatch batch =
            config.episodic
                ? collect_chain_episodes(model, features, 1, config.max_steps, seed, 3,
                                         config.n_samples)
                : collect_iid_samples(model, features, config.n_samples, seed);
        results.push_back(run_stream(algorithm, batch, &system, solver, Vector(), config.stride(),
                                     basis, run, seed));
      }
    }
  }
  return results;
}

std::vector<RunResult> run_mountain_car(const ExperimentConfig& config) {
  const FeatureMap features =
      FeatureMap::rbf_grid(MountainCar::bounds(), {2, 4, 8, 16, 32}, true);
  const MountainCarSim sim;
  SolverConfig solver = config.solver;

  std::vector<RunResult> results;
  for (Algorithm algorithm : config.algorithms) {
    solver.algorithm = algorithm;
    for (int run = 0; run < config.n_runs; ++run) {
      const std::uint64_t seed = config.seed_base + run;
      const EpisodeBatch batch = collect_episodes(sim, energy_pump_action, features, 1,
                                                  config.max_steps, seed, config.n_samples);
      RunResult result = run_stream(algorithm, batch, nullptr, solver, Vector(), config.stride(),
                                    "", run, seed);
      if (!result.diverged && result.x_bar.size() > 0) {
        FeatureSelectionSummary summary = feature_selection_report(result, features);
        if (config.control_eval) {
          evaluate_control(summary, result.x_bar.tail(features.dim()), features,
                           config.eval_rollouts, config.eval_step_cap, seed + 1000003,
                           solver.gamma);
        }
        result.notes = summary.to_text();
      }
      results.push_back(std::move(result));
    }
  }
  return results;
}

std::vector<RunResult> run_synthetic_family(const ExperimentConfig& config, bool force_reference) {
  constexpr int kSystemSize = 10;
  SolverConfig solver = config.solver;

  std::vector<RunResult> results;
  for (Algorithm algorithm : config.algorithms) {
    if (algorithm != Algorithm::ROTD && algorithm != Algorithm::ROTD_EXT)
      throw InvalidArgument("synthetic experiments support ro-td and ro-td-ext only");
    solver.algorithm = algorithm;
    for (int run = 0; run < config.n_runs; ++run) {
      const std::uint64_t seed = config.seed_base + run;
      Rng rng(seed);
      Matrix A;
      Vector b;
      random_system(kSystemSize, rng, A, b);
      const LinearSystem system = LinearSystem::dense(A, b);

      RunResult result;
      if (algorithm == Algorithm::ROTD) {
        result = run_row_sampled(system, solver, config.n_samples, config.stride(), run, seed);
        if (force_reference || config.experiment == ExperimentKind::Synthetic) {
          const Vector x_ref = reference_solve(A, b, solver.rho1, solver.rho2, solver.norm_m);
          result.reference_objective =
              regularized_objective(A, b, x_ref, solver.rho1, solver.rho2, solver.norm_m);
          result.has_reference = true;
        }
      } else {
        // The squared-residual extension runs on the full system each step;
        // its certificate is the proximal-gradient oracle in the test suite.
        const auto start_time = Clock::now();
        result.algorithm = to_string(algorithm);
        result.run_index = run;
        result.seed = seed;
        DualExtensionState state = DualExtensionState::zero(kSystemSize, kSystemSize);
        result.records.push_back(ext_diagnostics(state, &system, solver));
        try {
          for (int t = 0; t < config.n_samples; ++t) {
            rotd_ext_step(state, A, b, solver.alpha.at(state.t + 1), solver.rho1);
            if (record_due(t + 1, config.n_samples, config.stride()))
              result.records.push_back(ext_diagnostics(state, &system, solver));
          }
          auto [x_bar, y_bar] = average_iterates(state);
          result.x_bar = std::move(x_bar);
          result.y_bar = std::move(y_bar);
          result.averaged_objective = 0.5 * (A * result.x_bar - b).squaredNorm() +
                                      solver.rho1 * result.x_bar.lpNorm<1>();
        } catch (const DivergenceError& e) {
          result.diverged = true;
          result.diverged_iteration = e.iteration;
        }
        result.duration_sec = seconds_since(start_time);
      }
      results.push_back(std::move(result));
    }
  }
  return results;
}

}  // namespace

void random_system(int n, Rng& rng, Matrix& A, Vector& b) {
  A.resize(n, n);
  b.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = 0.2 * rng.uniform(-1.0, 1.0);
    b[i] = 0.2 * rng.uniform(-1.0, 1.0);
  }
}

std::vector<RunResult> run_experiment(const ExperimentConfig& config) {
  SolverConfig check = config.solver;
  check.validate();
  switch (config.experiment) {
    case ExperimentKind::Star:
      return run_star(config);
    case ExperimentKind::RandomWalk:
      return run_random_walk(config);
    case ExperimentKind::MountainCar:
      return run_mountain_car(config);
    case ExperimentKind::Synthetic:
      return run_synthetic_family(config, false);
    case ExperimentKind::Prop1Check:
      return run_synthetic_family(config, true);
  }
  throw InvalidArgument("unknown experiment kind");
}

FeatureSelectionSummary feature_selection_report(const RunResult& run,
                                                 const FeatureMap& features) {
  if (run.x_bar.size() != 2 * features.dim())
    throw InvalidArgument("feature_selection_report: run does not match the feature map");
  FeatureSelectionSummary summary;
  summary.dim = features.dim();
  const Vector theta = run.x_bar.tail(features.dim());
  summary.theta_nnz = count_active(theta);
  if (features.kind() == FeatureMap::Kind::RbfGrid) {
    int offset = 0;
    for (int g : features.rbf_grid_sizes()) {
      const int block = g * g;
      summary.per_group.emplace_back(std::to_string(g) + "x" + std::to_string(g),
                                     count_active(theta.segment(offset, block)));
      offset += block;
    }
    if (features.rbf_has_constant()) {
      summary.per_group.emplace_back("constant", count_active(theta.tail(1)));
    }
  }
  return summary;
}

void evaluate_control(FeatureSelectionSummary& summary, const Vector& theta,
                      const FeatureMap& features, int rollouts, int step_cap, std::uint64_t seed,
                      double gamma) {
  const MountainCarSim sim;
  Rng rng(seed);
  summary.control_evaluated = true;
  summary.rollouts = rollouts;
  std::vector<double> steps_to_goal;
  for (int r = 0; r < rollouts; ++r) {
    Vector s = sim.reset(rng);
    bool reached = false;
    int steps = 0;
    while (steps < step_cap) {
      // greedy one-step lookahead through the simulator
      int best_action = 0;
      double best_value = -std::numeric_limits<double>::infinity();
      Vector best_next;
      bool best_done = false;
      for (int a = 0; a < sim.n_actions(); ++a) {
        auto [s2, reward, done] = sim.step(s, a);
        const double value = reward + (done ? 0.0 : gamma * theta.dot(features.at(s2)));
        if (value > best_value) {
          best_value = value;
          best_action = a;
          best_next = s2;
          best_done = done;
        }
      }
      (void)best_action;
      s = best_next;
      ++steps;
      if (best_done) {
        reached = true;
        break;
      }
    }
    if (reached) {
      ++summary.successes;
      steps_to_goal.push_back(steps);
    }
  }
  if (!steps_to_goal.empty()) {
    double mean = 0.0;
    for (double v : steps_to_goal) mean += v;
    mean /= steps_to_goal.size();
    double var = 0.0;
    for (double v : steps_to_goal) var += (v - mean) * (v - mean);
    summary.steps_mean = mean;
    summary.steps_std =
        steps_to_goal.size() > 1 ? std::sqrt(var / (steps_to_goal.size() - 1)) : 0.0;
  }
}

std::string FeatureSelectionSummary::to_text() const {
  std::ostringstream out;
  out << "active features: " << theta_nnz << " of " << dim;
  if (!per_group.empty()) {
    out << " (";
    bool first = true;
    for (const auto& [name, count] : per_group) {
      if (!first) out << ", ";
      out << name << ": " << count;
      first = false;
    }
    out << ")";
  }
  if (control_evaluated) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "; greedy rollouts: %d/%d reached the goal", successes,
                  rollouts);
    out << buf;
    if (successes > 0) {
      std::snprintf(buf, sizeof(buf), ", steps %.2f +/- %.2f", steps_mean, steps_std);
      out << buf;
    }
  }
  return out.str();
}

std::string results_summary(const std::vector<RunResult>& results,
                            const ExperimentConfig& config) {
  std::ostringstream out;
  out << "experiment: " << to_string(config.experiment) << ", " << config.n_samples
      << " samples, " << config.n_runs << " run(s) per algorithm\n";

  std::vector<std::string> order;
  for (const RunResult& r : results) {
    if (std::find(order.begin(), order.end(), r.label()) == order.end())
      order.push_back(r.label());
  }
  char buf[256];
  for (const std::string& label : order) {
    int total = 0, diverged = 0, with_ref = 0;
    std::vector<double> final_mspbe, final_objective, gaps;
    double duration = 0.0;
    std::string notes;
    for (const RunResult& r : results) {
      if (r.label() != label) continue;
      ++total;
      duration += r.duration_sec;
      if (r.diverged) {
        ++diverged;
        continue;
      }
      if (!r.records.empty()) {
        const DiagnosticsRecord& last = r.records.back();
        if (std::isfinite(last.mspbe)) final_mspbe.push_back(last.mspbe);
        if (std::isfinite(last.objective)) final_objective.push_back(last.objective);
      }
      if (r.has_reference) {
        ++with_ref;
        gaps.push_back(r.averaged_objective - r.reference_objective);
      }
      if (!r.notes.empty() && notes.empty()) notes = r.notes;
    }
    auto mean_std = [](const std::vector<double>& v) {
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= v.size();
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      return std::make_pair(mean, v.size() > 1 ? std::sqrt(var / (v.size() - 1)) : 0.0);
    };
    out << "  " << label << ": " << total - diverged << "/" << total << " runs completed";
    if (diverged > 0) out << " (" << diverged << " diverged)";
    if (!final_mspbe.empty()) {
      auto [m, s] = mean_std(final_mspbe);
      std::snprintf(buf, sizeof(buf), "; final mspbe %.6g +/- %.2g", m, s);
      out << buf;
    }
    if (!final_objective.empty()) {
      auto [m, s] = mean_std(final_objective);
      std::snprintf(buf, sizeof(buf), "; final objective %.6g +/- %.2g", m, s);
      out << buf;
    }
    if (with_ref > 0) {
      auto [m, s] = mean_std(gaps);
      const double worst = *std::max_element(gaps.begin(), gaps.end());
      std::snprintf(buf, sizeof(buf), "; objective gap to reference %.3g +/- %.2g (max %.3g)", m,
                    s, worst);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), "; %.2fs", duration);
    out << buf << "\n";
    if (!notes.empty()) out << "    " << notes << "\n";
  }
  return out.str();
}

}  // namespace rotd
