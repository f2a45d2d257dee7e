#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rotd/oracle.hpp"

namespace rotd {

enum class ExperimentKind { Star, RandomWalk, MountainCar, Synthetic, Prop1Check };

std::string to_string(ExperimentKind kind);
std::string to_string(Algorithm algorithm);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Star;
  std::vector<Algorithm> algorithms;
  std::vector<FeatureMap::Kind> bases;  // random-walk basis families
  SolverConfig solver;
  int n_samples = 2000;
  int n_runs = 1;
  std::uint64_t seed_base = 1234;
  std::string output_dir = "out";
  bool plot = false;
  int record_stride = 0;  // 0 = max(1, n_samples / 500)
  bool episodic = false;  // random walk: episode trajectories instead of i.i.d. draws
  int max_steps = 200;
  bool control_eval = false;
  int eval_rollouts = 20;
  int eval_step_cap = 1000;

  int stride() const { return record_stride > 0 ? record_stride : std::max(1, n_samples / 500); }
};

/// Parses the key = value config format (leading [experiment] section header,
/// # comments). Unknown keys, malformed lines and constraint violations throw
/// ConfigError carrying the offending line number.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

struct RunResult {
  std::string algorithm;
  std::string basis;  // empty when the experiment has a single basis
  int run_index = 0;
  std::uint64_t seed = 0;
  std::vector<DiagnosticsRecord> records;
  Vector x_bar, y_bar;
  double duration_sec = 0.0;
  bool diverged = false;
  std::int64_t diverged_iteration = -1;
  // synthetic / saddle-certification runs
  double averaged_objective = 0.0;
  double reference_objective = 0.0;
  bool has_reference = false;
  // free-form additions to the run summary (feature selection, control eval)
  std::string notes;

  std::string label() const { return basis.empty() ? algorithm : algorithm + "_" + basis; }
};

/// Executes every (algorithm, basis, seed) combination of the config
/// sequentially in seed order; divergence is recorded per run and the
/// remaining runs continue.
std::vector<RunResult> run_experiment(const ExperimentConfig& config);

/// Header plus one row per record per run, run/seed columns prepended,
/// numbers at 17 significant digits.
void emit_csv(const std::vector<RunResult>& results, const std::string& path);

/// One trace file per (algorithm, basis) group under `dir`, named
/// <experiment>_<label>.csv. Returns the paths written.
std::vector<std::string> emit_all_csv(const std::vector<RunResult>& results,
                                      const ExperimentConfig& config, const std::string& dir);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Self-contained SVG line chart of one or more diagnostics metrics against
/// iteration, one curve per (algorithm, basis) and metric, averaged over the
/// non-diverged runs. `metric` accepts a comma-separated list of
/// DiagnosticsRecord columns. log_scale < 0 picks the default (log for
/// mspbe-only plots).
void emit_plot(const std::vector<RunResult>& results, const std::string& metric,
               const std::string& path, int log_scale = -1);

/// Same chart built from previously written trace CSVs, one curve per file
/// and metric.
void emit_plot_csv(const std::vector<std::string>& csv_paths, const std::string& metric,
                   const std::string& path, int log_scale = -1);

/// Reads back a trace CSV written by emit_csv; outer index is the run.
std::vector<std::vector<DiagnosticsRecord>> read_trace_csv(const std::string& path);

struct FeatureSelectionSummary {
  int dim = 0;
  int theta_nnz = 0;
  std::vector<std::pair<std::string, int>> per_group;  // nonzeros per grid resolution
  bool control_evaluated = false;
  int successes = 0;
  int rollouts = 0;
  double steps_mean = 0.0;
  double steps_std = 0.0;

  std::string to_text() const;
};

/// Active-feature report of the averaged theta of a mountain-car run, broken
/// down by grid resolution.
FeatureSelectionSummary feature_selection_report(const RunResult& run, const FeatureMap& features);

/// Greedy one-step lookahead rollouts through the simulator on the learned
/// state-value estimate.
void evaluate_control(FeatureSelectionSummary& summary, const Vector& theta,
                      const FeatureMap& features, int rollouts, int step_cap, std::uint64_t seed,
                      double gamma);

/// Random dense square system used by the synthetic and saddle-certification
/// experiments.
void random_system(int n, Rng& rng, Matrix& A, Vector& b);

/// Human-readable multi-seed summary (mean and sample standard deviation of
/// the final diagnostics per group, divergence counts, reference gaps).
std::string results_summary(const std::vector<RunResult>& results,
                            const ExperimentConfig& config);

std::vector<std::string> preset_names();

/// Embedded config text of a named preset; throws InvalidArgument for unknown
/// names.
const std::string& preset_text(const std::string& name);

}  // namespace rotd
