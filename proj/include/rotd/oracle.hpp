#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "rotd/environments.hpp"
#include "rotd/solvers.hpp"

namespace rotd {

enum class RankPolicy {
  RequireFullRank,    // rank-deficient Gram matrix is a configuration error
  AllowRankDeficient  // overcomplete bases evaluate through the pseudo-inverse
};

// Exact expectations of the per-sample system: A = E[A_t], b = E[b_t], plus
// the feature Gram matrix C and the cached pieces that make the projected
// Bellman error a quadratic form evaluation.
class LinearSystem {
 public:
  /// Assembles A, b, C from the model's kernel, rewards and state
  /// distribution. Under RequireFullRank a rank-deficient C throws RankError.
  static LinearSystem exact(const MdpModel& model, const FeatureMap& features, double eta,
                            double gamma, RankPolicy policy = RankPolicy::RequireFullRank);

  /// Wraps an explicit system; no model-based diagnostics (mspbe unavailable).
  static LinearSystem dense(Matrix A, Vector b);

  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  const Matrix& C() const { return C_; }
  int d() const { return d_; }
  bool has_model() const { return has_model_; }
  int rank() const { return rank_; }
  RankPolicy policy() const { return policy_; }

 private:
  friend LinearSystem exact_system(const MdpModel&, const FeatureMap&, double, double, RankPolicy);
  friend double mspbe(const Vector&, const LinearSystem&);
  friend Vector solve_fixed_point(const LinearSystem&);

  Matrix A_, C_, F_;  // F = Phi' Xi (gamma P - I) Phi
  Vector b_, g_;      // g = Phi' Xi R
  Matrix c_eigvecs_;
  Vector c_eigvals_;
  int d_ = 0;
  int rank_ = 0;
  bool has_model_ = false;
  RankPolicy policy_ = RankPolicy::RequireFullRank;
};

LinearSystem exact_system(const MdpModel& model, const FeatureMap& features, double eta,
                          double gamma, RankPolicy policy = RankPolicy::RequireFullRank);

/// Mean-square projected Bellman error of theta through the cached
/// factorization of C.
double mspbe(const Vector& theta, const LinearSystem& system);

/// Solves A x = b. With RequireFullRank a singular A throws
/// SingularSystemError carrying a condition estimate; with AllowRankDeficient
/// a consistent singular system returns the minimum-norm solution and only an
/// inconsistent one throws.
Vector solve_fixed_point(const LinearSystem& system);

// One diagnostics row. Model-based fields are NaN when the experiment has no
// exact system (continuous state spaces).
struct DiagnosticsRecord {
  std::int64_t iteration = 0;
  double mspbe = 0.0;
  double l2_residual = 0.0;
  double dual_value = 0.0;
  double delta = 0.0;
  int theta_nnz = 0;
  int w_nnz = 0;
  double objective = 0.0;

  static const char* csv_header();  // fixed column order
  std::string csv_row() const;
};

/// Magnitudes above this count as active features; shrinkage produces exact
/// zeros, so the tolerance only guards float noise.
constexpr double kActiveTolerance = 1e-8;

int count_active(const Vector& v);

/// Fills a record against the exact system: ||A x_t - b||_2 and
/// y_t'(A x_t - b) always use the current iterate, the last TD error is
/// carried over, and the objective is evaluated at the averaged iterate.
/// mspbe and the active-feature counts are taken on the estimate the
/// algorithm reports: the current theta_t by default, the averaged theta_bar
/// when `averaged_estimate` is set (the saddle-point algorithms return the
/// average). Pass nullptr for `system` to get the model-free fields only.
DiagnosticsRecord duality_diagnostics(const PrimalDualState& state, const LinearSystem* system,
                                      const SolverConfig& config,
                                      bool averaged_estimate = false);

/// ||A x - b||_m + rho1 ||theta half||_1 + rho2 ||w half||_1, with x = [w; theta].
double regularized_objective(const Matrix& A, const Vector& b, const Vector& x, double rho1,
                             double rho2, double m);

struct ReferenceOptions {
  int max_outer = 2000;
  int max_inner = 20000;
  double objective_tol = 1e-10;
};

/// High-accuracy minimizer of ||Ax - b||_m + rho1 ||theta||_1 + rho2 ||w||_1
/// for small dense systems; the brute-force reference the stochastic solvers
/// are certified against. Deterministic. Throws NumericError with the best
/// objective found when the iteration cap is hit before the objective
/// stabilizes below `objective_tol`.
Vector reference_solve(const Matrix& A, const Vector& b, double rho1, double rho2, double m,
                       const ReferenceOptions& options = {});

/// Largest coordinate-wise violation of the first-order optimality inclusion
/// of the reference objective at x (m = 2, residual away from zero).
double stationarity_gap(const Matrix& A, const Vector& b, double rho1, double rho2,
                        const Vector& x);

}  // namespace rotd
