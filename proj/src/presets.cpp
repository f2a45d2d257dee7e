#include <map>

#include "rotd/harness.hpp"

namespace rotd {

namespace {

// Embedded copies of the preset files under presets/; a test pins the two
// sources of truth together byte for byte.
const std::map<std::string, std::string>& preset_table() {
  static const std::map<std::string, std::string> presets = {
      {"star", R"(# Off-policy evaluation on the 7-state star problem from the classic
# divergence setup: plain TD's projected Bellman error grows while TDC and
# RO-TD drive it down on the same sample stream.
[experiment]
experiment = star
algorithms = td, tdc, ro-td
alpha = 0.01
eta = 10
rho1 = 0
rho2 = 0
n_samples = 2000
n_runs = 1
seed_base = 1301
plot = true
)"},
      {"random-walk", R"(# 5-state symmetric random walk with absorbing ends, evaluated with tabular,
# inverted and dependent bases, averaged over 50 seeds.
[experiment]
experiment = random-walk
algorithms = ro-td
features = all
alpha = 0.03
eta = 1
rho1 = 0
rho2 = 0
n_samples = 20000
n_runs = 50
seed_base = 501
plot = true
)"},
      {"mountain-car", R"(# Feature selection on mountain car: 1365 RBF features over five grid
# resolutions plus a constant, learned from 3000 energy-pumping samples.
[experiment]
experiment = mountain-car
algorithms = ro-td
alpha = 0.001
eta = 1
rho1 = 0.01
rho2 = 0.2
n_samples = 3000
max_steps = 200
n_runs = 1
seed_base = 77
control_eval = true
)"},
      {"synthetic", R"(# Random dense 10x10 systems solved stochastically (one sampled row per
# iteration) by the regularized primal-dual iteration, and deterministically
# by the squared-residual extension iteration.
[experiment]
experiment = synthetic
algorithms = ro-td, ro-td-ext
alpha = 0.002
rho1 = 0.1
rho2 = 0.1
n_samples = 50000
n_runs = 3
seed_base = 901
plot = true
)"},
      {"prop1-check", R"(# Certifies the averaged iterate against the brute-force reference solver on
# 20 random systems: the regularized objective of the average must approach
# the reference optimum.
[experiment]
experiment = prop1-check
algorithms = ro-td
alpha = 0.002
rho1 = 0.1
rho2 = 0.1
n_samples = 100000
n_runs = 20
seed_base = 424
)"},
  };
  return presets;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : preset_table()) names.push_back(name);
  return names;
}

const std::string& preset_text(const std::string& name) {
  const auto& table = preset_table();
  auto it = table.find(name);
  if (it == table.end()) throw InvalidArgument("unknown preset '" + name + "'");
  return it->second;
}

}  // namespace rotd
