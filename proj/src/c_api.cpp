#include "rotd.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "rotd/harness.hpp"

struct rotd_config {
  rotd::ExperimentConfig cfg;
};

struct rotd_results {
  std::vector<rotd::RunResult> runs;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

rotd_status classify(const std::exception& e) {
  set_error(e.what());
  if (dynamic_cast<const rotd::ConfigError*>(&e)) return ROTD_ERR_CONFIG;
  if (dynamic_cast<const rotd::IoError*>(&e)) return ROTD_ERR_IO;
  if (dynamic_cast<const rotd::InvalidArgument*>(&e)) return ROTD_ERR_INVALID;
  if (dynamic_cast<const rotd::NumericError*>(&e)) return ROTD_ERR_NUMERIC;
  if (dynamic_cast<const rotd::DivergenceError*>(&e)) return ROTD_ERR_NUMERIC;
  if (dynamic_cast<const rotd::SingularSystemError*>(&e)) return ROTD_ERR_NUMERIC;
  if (dynamic_cast<const rotd::RankError*>(&e)) return ROTD_ERR_NUMERIC;
  return ROTD_ERR_INTERNAL;
}

template <typename Fn>
rotd_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ROTD_OK;
  } catch (const std::exception& e) {
    return classify(e);
  } catch (...) {
    set_error("unknown failure");
    return ROTD_ERR_INTERNAL;
  }
}

char* copy_text(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* rotd_version(void) { return "1.0.0"; }

const char* rotd_last_error(void) { return g_last_error.c_str(); }

rotd_status rotd_config_parse(const char* path, rotd_config** out) {
  if (path == nullptr || out == nullptr) {
    set_error("null argument");
    return ROTD_ERR_INVALID;
  }
  return guarded([&] { *out = new rotd_config{rotd::parse_config(path)}; });
}

rotd_status rotd_config_parse_text(const char* text, const char* origin, rotd_config** out) {
  if (text == nullptr || out == nullptr) {
    set_error("null argument");
    return ROTD_ERR_INVALID;
  }
  return guarded([&] {
    *out = new rotd_config{rotd::parse_config_text(text, origin ? origin : "<memory>")};
  });
}

rotd_status rotd_config_set_output_dir(rotd_config* config, const char* dir) {
  if (config == nullptr || dir == nullptr) {
    set_error("null argument");
    return ROTD_ERR_INVALID;
  }
  config->cfg.output_dir = dir;
  return ROTD_OK;
}

const char* rotd_config_experiment(const rotd_config* config) {
  if (config == nullptr) return nullptr;
  thread_local std::string name;
  name = rotd::to_string(config->cfg.experiment);
  return name.c_str();
}

const char* rotd_config_output_dir(const rotd_config* config) {
  return config == nullptr ? nullptr : config->cfg.output_dir.c_str();
}

int rotd_config_plot_enabled(const rotd_config* config) {
  return config != nullptr && config->cfg.plot ? 1 : 0;
}

void rotd_config_free(rotd_config* config) { delete config; }

rotd_status rotd_run(const rotd_config* config, rotd_results** out) {
  if (config == nullptr || out == nullptr) {
    set_error("null argument");
    return ROTD_ERR_INVALID;
  }
  *out = nullptr;
  const rotd_status status = guarded([&] {
    auto results = rotd::run_experiment(config->cfg);
    *out = new rotd_results{std::move(results)};
  });
  if (status != ROTD_OK) return status;
  int diverged = 0;
  for (const rotd::RunResult& r : (*out)->runs) diverged += r.diverged ? 1 : 0;
  if (!(*out)->runs.empty() && diverged == static_cast<int>((*out)->runs.size())) {
    set_error("all runs diverged");
    return ROTD_ERR_ALL_DIVERGED;
  }
  return ROTD_OK;
}

int rotd_results_run_count(const rotd_results* results) {
  return results == nullptr ? 0 : static_cast<int>(results->runs.size());
}

int rotd_results_diverged_count(const rotd_results* results) {
  if (results == nullptr) return 0;
  int diverged = 0;
  for (const rotd::RunResult& r : results->runs) diverged += r.diverged ? 1 : 0;
  return diverged;
}

void rotd_results_free(rotd_results* results) { delete results; }

rotd_status rotd_results_write_csv(const rotd_results* results, const rotd_config* config,
                                   const char* dir, char** paths_out) {
  if (results == nullptr || config == nullptr || dir == nullptr) {
    set_error("null argument");
    return ROTD_ERR_INVALID;
  }
  return guarded([&] {
    const auto paths = rotd::emit_all_csv(results->runs, config->cfg, dir);
    if (paths_out != nullptr) {
      std::string joined;
      for (const std::string& p : paths) {
        if (!joined.empty()) joined += '\n';
        joined += p;
      }
      *paths_out = copy_text(joined);
    }
  });
}

rotd_status rotd_results_write_plot(const rotd_results* results, const char* metric,
                                    const char* path, int log_scale) {
  if (results == nullptr || metric == nullptr || path == nullptr) {
    set_error("null argument");
    return ROTD_ERR_INVALID;
  }
  return guarded([&] { rotd::emit_plot(results->runs, metric, path, log_scale); });
}

rotd_status rotd_results_summary(const rotd_results* results, const rotd_config* config,
                                 char** text_out) {
  if (results == nullptr || config == nullptr || text_out == nullptr) {
    set_error("null argument");
    return ROTD_ERR_INVALID;
  }
  return guarded([&] { *text_out = copy_text(rotd::results_summary(results->runs, config->cfg)); });
}

rotd_status rotd_plot_csv(const char* const* csv_paths, int n_csv, const char* metric,
                          const char* out_path, int log_scale) {
  if (csv_paths == nullptr || n_csv < 1 || metric == nullptr || out_path == nullptr) {
    set_error("null argument");
    return ROTD_ERR_INVALID;
  }
  return guarded([&] {
    std::vector<std::string> paths(csv_paths, csv_paths + n_csv);
    rotd::emit_plot_csv(paths, metric, out_path, log_scale);
  });
}

void rotd_text_free(char* text) { std::free(text); }

int rotd_preset_count(void) { return static_cast<int>(rotd::preset_names().size()); }

const char* rotd_preset_name(int index) {
  const auto names = rotd::preset_names();
  if (index < 0 || index >= static_cast<int>(names.size())) return nullptr;
  thread_local std::string name;
  name = names[index];
  return name.c_str();
}

const char* rotd_preset_content(const char* name) {
  if (name == nullptr) return nullptr;
  try {
    return rotd::preset_text(name).c_str();  // stable: lives in the preset table
  } catch (const std::exception&) {
    return nullptr;
  }
}

}  // extern "C"
