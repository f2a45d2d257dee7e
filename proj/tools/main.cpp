// rotd command-line runner. Talks to the library exclusively through the C
// interface in rotd.h.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rotd.h"

namespace {

int exit_code_for(rotd_status status) {
  switch (status) {
    case ROTD_OK:
      return 0;
    case ROTD_ERR_IO:
      return 2;
    case ROTD_ERR_ALL_DIVERGED:
      return 3;
    default:
      return 1;  // config problems and bad arguments
  }
}

int fail(rotd_status status) {
  std::fprintf(stderr, "error: %s\n", rotd_last_error());
  return exit_code_for(status);
}

int cmd_run(const std::string& config_path, const std::string& out_dir_flag) {
  rotd_config* config = nullptr;
  rotd_status status = rotd_config_parse(config_path.c_str(), &config);
  if (status != ROTD_OK) return fail(status);

  std::string out_dir;
  if (!out_dir_flag.empty()) out_dir = out_dir_flag;
  if (const char* env = std::getenv("ROTD_OUTPUT_DIR"); env != nullptr && *env != '\0')
    out_dir = env;  // environment override wins
  if (!out_dir.empty()) rotd_config_set_output_dir(config, out_dir.c_str());

  rotd_results* results = nullptr;
  status = rotd_run(config, &results);
  if (status != ROTD_OK && status != ROTD_ERR_ALL_DIVERGED) {
    rotd_config_free(config);
    return fail(status);
  }
  const bool all_diverged = status == ROTD_ERR_ALL_DIVERGED;

  char* paths = nullptr;
  const rotd_status write_status =
      rotd_results_write_csv(results, config, rotd_config_output_dir(config), &paths);
  if (write_status != ROTD_OK) {
    rotd_results_free(results);
    rotd_config_free(config);
    return fail(write_status);
  }
  std::string first_csv;
  if (paths != nullptr) {
    std::printf("wrote traces:\n");
    std::string all(paths);
    std::size_t start = 0;
    while (start < all.size()) {
      std::size_t end = all.find('\n', start);
      if (end == std::string::npos) end = all.size();
      const std::string p = all.substr(start, end - start);
      if (first_csv.empty()) first_csv = p;
      std::printf("  %s\n", p.c_str());
      start = end + 1;
    }
    rotd_text_free(paths);
  }

  if (rotd_config_plot_enabled(config) && !all_diverged) {
    const std::string base = std::string(rotd_config_output_dir(config)) + "/" +
                             rotd_config_experiment(config);
    struct {
      const char* metric;
      const char* suffix;
    } plots[] = {{"mspbe", "_mspbe.svg"},
                 {"objective", "_objective.svg"},
                 {"dual_value,l2_residual", "_duality.svg"}};
    for (const auto& plot : plots) {
      const std::string path = base + plot.suffix;
      if (rotd_results_write_plot(results, plot.metric, path.c_str(), -1) == ROTD_OK)
        std::printf("wrote plot: %s\n", path.c_str());
    }
  }

  char* summary = nullptr;
  if (rotd_results_summary(results, config, &summary) == ROTD_OK && summary != nullptr) {
    std::printf("%s", summary);
    rotd_text_free(summary);
  }
  if (all_diverged) std::fprintf(stderr, "error: all runs diverged\n");

  rotd_results_free(results);
  rotd_config_free(config);
  return all_diverged ? 3 : 0;
}

int cmd_plot(const std::vector<std::string>& csvs, const std::string& metric,
             const std::string& out_path, int log_scale) {
  std::vector<const char*> paths;
  paths.reserve(csvs.size());
  for (const std::string& p : csvs) paths.push_back(p.c_str());
  const rotd_status status = rotd_plot_csv(paths.data(), static_cast<int>(paths.size()),
                                           metric.c_str(), out_path.c_str(), log_scale);
  if (status != ROTD_OK) return fail(status);
  std::printf("wrote plot: %s\n", out_path.c_str());
  return 0;
}

int cmd_presets_list() {
  const int count = rotd_preset_count();
  for (int i = 0; i < count; ++i) std::printf("%s\n", rotd_preset_name(i));
  return 0;
}

int cmd_presets_show(const std::string& name) {
  const char* text = rotd_preset_content(name.c_str());
  if (text == nullptr) {
    std::fprintf(stderr, "error: unknown preset '%s'\n", name.c_str());
    return 1;
  }
  std::printf("%s", text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("rotd ") + rotd_version() +
               " - regularized off-policy TD learning experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("config", config_path, "config file (key = value format)")->required();
  run->add_option("--out", out_dir,
                  "output directory (overrides the config; ROTD_OUTPUT_DIR overrides both)");

  std::vector<std::string> csvs;
  std::string metric = "mspbe", plot_out = "plot.svg";
  bool log_flag = false, linear_flag = false;
  auto* plot = app.add_subcommand("plot", "chart a metric from trace CSV files");
  plot->add_option("csv", csvs, "trace CSV file(s) written by 'run'")->required();
  plot->add_option("--metric", metric,
                   "diagnostics column(s), comma separated (mspbe, l2_residual, dual_value, "
                   "delta, theta_nnz, w_nnz, objective)");
  plot->add_option("--out", plot_out, "output SVG path");
  plot->add_flag("--log", log_flag, "force logarithmic y axis");
  plot->add_flag("--linear", linear_flag, "force linear y axis");

  auto* presets = app.add_subcommand("presets", "built-in experiment configurations");
  presets->require_subcommand(1);
  presets->add_subcommand("list", "list preset names");
  std::string preset_name;
  auto* show = presets->add_subcommand("show", "print a preset's config text");
  show->add_option("name", preset_name, "preset name")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(config_path, out_dir);
  if (plot->parsed()) {
    const int log_scale = log_flag ? 1 : (linear_flag ? 0 : -1);
    return cmd_plot(csvs, metric, plot_out, log_scale);
  }
  if (presets->parsed()) {
    if (show->parsed()) return cmd_presets_show(preset_name);
    return cmd_presets_list();
  }
  return 1;
}
