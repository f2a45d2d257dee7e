#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "rotd/harness.hpp"

namespace rotd {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Star:
      return "star";
    case ExperimentKind::RandomWalk:
      return "random-walk";
    case ExperimentKind::MountainCar:
      return "mountain-car";
    case ExperimentKind::Synthetic:
      return "synthetic";
    case ExperimentKind::Prop1Check:
      return "prop1-check";
  }
  return "?";
}

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::TD:
      return "td";
    case Algorithm::TDC:
      return "tdc";
    case Algorithm::ROTD:
      return "ro-td";
    case Algorithm::GQ:
      return "gq";
    case Algorithm::ROGQ:
      return "ro-gq";
    case Algorithm::ROTD_EXT:
      return "ro-td-ext";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    if (lower(v) == "inf") return kInf;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + v + "'", line);
  }
}

long long parse_int(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("expected an integer, got '" + v + "'", line);
  }
}

bool parse_bool(const std::string& v, int line) {
  const std::string s = lower(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("expected a boolean, got '" + v + "'", line);
}

Algorithm parse_algorithm(const std::string& v, int line) {
  const std::string s = lower(v);
  if (s == "td") return Algorithm::TD;
  if (s == "tdc") return Algorithm::TDC;
  if (s == "ro-td" || s == "rotd") return Algorithm::ROTD;
  if (s == "gq") return Algorithm::GQ;
  if (s == "ro-gq" || s == "rogq") return Algorithm::ROGQ;
  if (s == "ro-td-ext" || s == "ext") return Algorithm::ROTD_EXT;
  throw ConfigError("unknown algorithm '" + v + "'", line);
}

FeatureMap::Kind parse_basis(const std::string& v, int line) {
  const std::string s = lower(v);
  if (s == "tabular") return FeatureMap::Kind::Tabular;
  if (s == "inverted") return FeatureMap::Kind::Inverted;
  if (s == "dependent") return FeatureMap::Kind::Dependent;
  throw ConfigError("unknown basis family '" + v + "'", line);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg;
  bool saw_section = false;
  bool saw_experiment = false;
  bool saw_gamma = false;
  bool saw_eta = false;

  std::stringstream stream(text);
  std::string raw;
  int line = 0;
  while (std::getline(stream, raw)) {
    ++line;
    std::string s = raw;
    const std::size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s != "[experiment]") throw ConfigError("unknown section '" + s + "'", line);
      if (saw_section) throw ConfigError("duplicate [experiment] section", line);
      saw_section = true;
      continue;
    }
    if (!saw_section)
      throw ConfigError("expected the [experiment] section header before any keys", line);

    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    const std::string key = lower(trim(s.substr(0, eq)));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("expected 'key = value'", line);

    if (key == "experiment") {
      const std::string v = lower(value);
      if (v == "star")
        cfg.experiment = ExperimentKind::Star;
      else if (v == "random-walk")
        cfg.experiment = ExperimentKind::RandomWalk;
      else if (v == "mountain-car")
        cfg.experiment = ExperimentKind::MountainCar;
      else if (v == "synthetic")
        cfg.experiment = ExperimentKind::Synthetic;
      else if (v == "prop1-check")
        cfg.experiment = ExperimentKind::Prop1Check;
      else
        throw ConfigError("unknown experiment '" + value + "'", line);
      saw_experiment = true;
    } else if (key == "algorithms") {
      cfg.algorithms.clear();
      for (const std::string& item : split_list(value))
        cfg.algorithms.push_back(parse_algorithm(item, line));
      if (cfg.algorithms.empty()) throw ConfigError("algorithms list is empty", line);
    } else if (key == "features") {
      cfg.bases.clear();
      if (lower(value) == "all") {
        cfg.bases = {FeatureMap::Kind::Tabular, FeatureMap::Kind::Inverted,
                     FeatureMap::Kind::Dependent};
      } else {
        for (const std::string& item : split_list(value))
          cfg.bases.push_back(parse_basis(item, line));
      }
    } else if (key == "alpha") {
      cfg.solver.alpha.value = parse_double(value, line);
      if (!(cfg.solver.alpha.value > 0.0)) throw ConfigError("alpha must be positive", line);
    } else if (key == "alpha_schedule") {
      const std::string v = lower(value);
      if (v == "constant")
        cfg.solver.alpha.kind = StepKind::Constant;
      else if (v == "inv-sqrt")
        cfg.solver.alpha.kind = StepKind::InvSqrt;
      else
        throw ConfigError("alpha_schedule must be 'constant' or 'inv-sqrt'", line);
    } else if (key == "eta") {
      cfg.solver.eta = parse_double(value, line);
      saw_eta = true;
    } else if (key == "rho1") {
      cfg.solver.rho1 = parse_double(value, line);
    } else if (key == "rho2") {
      cfg.solver.rho2 = parse_double(value, line);
    } else if (key == "lambda") {
      cfg.solver.lambda = parse_double(value, line);
    } else if (key == "gamma") {
      cfg.solver.gamma = parse_double(value, line);
      saw_gamma = true;
    } else if (key == "m") {
      cfg.solver.norm_m = parse_double(value, line);
    } else if (key == "n") {
      cfg.solver.norm_n = parse_double(value, line);
    } else if (key == "n_samples") {
      cfg.n_samples = static_cast<int>(parse_int(value, line));
      if (cfg.n_samples < 1) throw ConfigError("n_samples must be >= 1", line);
    } else if (key == "n_runs") {
      cfg.n_runs = static_cast<int>(parse_int(value, line));
      if (cfg.n_runs < 1) throw ConfigError("n_runs must be >= 1", line);
    } else if (key == "seed_base") {
      cfg.seed_base = static_cast<std::uint64_t>(parse_int(value, line));
    } else if (key == "record_stride") {
      cfg.record_stride = static_cast<int>(parse_int(value, line));
      if (cfg.record_stride < 0) throw ConfigError("record_stride must be >= 0", line);
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else if (key == "plot") {
      cfg.plot = parse_bool(value, line);
    } else if (key == "sampling") {
      const std::string v = lower(value);
      if (v == "iid")
        cfg.episodic = false;
      else if (v == "episodes")
        cfg.episodic = true;
      else
        throw ConfigError("sampling must be 'iid' or 'episodes'", line);
    } else if (key == "max_steps") {
      cfg.max_steps = static_cast<int>(parse_int(value, line));
      if (cfg.max_steps < 1) throw ConfigError("max_steps must be >= 1", line);
    } else if (key == "control_eval") {
      cfg.control_eval = parse_bool(value, line);
    } else if (key == "eval_rollouts") {
      cfg.eval_rollouts = static_cast<int>(parse_int(value, line));
      if (cfg.eval_rollouts < 1) throw ConfigError("eval_rollouts must be >= 1", line);
    } else if (key == "eval_step_cap") {
      cfg.eval_step_cap = static_cast<int>(parse_int(value, line));
      if (cfg.eval_step_cap < 1) throw ConfigError("eval_step_cap must be >= 1", line);
    } else {
      throw ConfigError("unknown key '" + key + "'", line);
    }
  }

  if (!saw_experiment)
    throw ConfigError(origin + ": missing required key 'experiment' (required keys: experiment; "
                               "everything else has documented defaults)");

  if (cfg.algorithms.empty()) cfg.algorithms = {Algorithm::ROTD};
  if (cfg.bases.empty() && cfg.experiment == ExperimentKind::RandomWalk) {
    cfg.bases = {FeatureMap::Kind::Tabular, FeatureMap::Kind::Inverted,
                 FeatureMap::Kind::Dependent};
  }
  if (!saw_gamma) {
    switch (cfg.experiment) {
      case ExperimentKind::RandomWalk:
        cfg.solver.gamma = 0.9;
        break;
      default:
        cfg.solver.gamma = 0.99;
        break;
    }
  }
  if (!saw_eta) cfg.solver.eta = 1.0;

  try {
    cfg.solver.algorithm = cfg.algorithms.front();
    cfg.solver.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string(e.what()));
  }
  const bool wants_ext = std::find(cfg.algorithms.begin(), cfg.algorithms.end(),
                                   Algorithm::ROTD_EXT) != cfg.algorithms.end();
  if (wants_ext && !(cfg.solver.rho1 > 0.0))
    throw ConfigError("ro-td-ext requires rho1 > 0");
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace rotd
