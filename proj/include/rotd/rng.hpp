#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "rotd/errors.hpp"

namespace rotd {

// Deterministic random source. The draw functions below are hand-rolled on
// top of mt19937_64 so that streams are identical across standard-library
// implementations; std::*_distribution sequences are not portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in {0, ..., n-1}.
  int uniform_int(int n) {
    if (n <= 0) throw InvalidArgument("uniform_int: n must be positive");
    return static_cast<int>(uniform() * n) % n;
  }

  /// Index drawn from a probability vector by CDF inversion.
  int discrete(const Eigen::VectorXd& probs) {
    const double u = uniform();
    double acc = 0.0;
    for (int i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    // Guard against round-off in the cumulative sum: return the last index
    // with positive mass.
    for (int i = static_cast<int>(probs.size()) - 1; i >= 0; --i) {
      if (probs[i] > 0.0) return i;
    }
    throw InvalidArgument("discrete: probability vector has no mass");
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rotd
