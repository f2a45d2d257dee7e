#pragma once

#include <cstdint>
#include <limits>
#include <utility>

#include "rotd/environments.hpp"

namespace rotd {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Algorithm { TD, TDC, ROTD, GQ, ROGQ, ROTD_EXT };

enum class StepKind { Constant, InvSqrt };

struct StepSchedule {
  StepKind kind = StepKind::Constant;
  double value = 0.01;

  /// Stepsize for iteration t (1-based): `value` or `value / sqrt(t)`.
  double at(std::int64_t t) const;
};

struct SolverConfig {
  StepSchedule alpha;
  double eta = 1.0;
  double rho1 = 0.0;  // l1 threshold on theta
  double rho2 = 0.0;  // l1 threshold on w
  double norm_m = 2.0;
  double norm_n = 2.0;
  double gamma = 0.99;
  double lambda = 0.0;
  Algorithm algorithm = Algorithm::ROTD;

  /// Checks stepsizes, thresholds, lambda/gamma ranges and that (m, n) is one
  /// of the supported conjugate pairs (2,2), (1,inf), (inf,1).
  void validate() const;
};

// Primal iterate x = [w; theta], dual iterate y = [y1; y2], plus the
// stepsize-weighted running sums that produce the averaged saddle point.
struct PrimalDualState {
  Vector w, theta, y1, y2;
  double sum_alpha = 0.0;
  Vector x_weighted_sum, y_weighted_sum;
  std::int64_t t = 0;
  double last_delta = 0.0;

  static PrimalDualState zero(int d);
  int dim() const { return static_cast<int>(theta.size()); }
  Vector x() const;
  Vector y() const;
};

struct TraceState {
  Vector e;
  double lambda = 0.0;

  static TraceState zero(int d, double lambda);
  void reset() { e.setZero(); }
};

// State for the squared-residual formulation solved without a proximal step:
// primal x, residual dual y and the sign dual u constrained to the unit
// sup-norm ball.
struct DualExtensionState {
  Vector x, y, u;
  double sum_alpha = 0.0;
  Vector x_weighted_sum, y_weighted_sum;
  std::int64_t t = 0;

  static DualExtensionState zero(int x_dim, int y_dim);
};

/// delta_t = r + gamma phi_next . theta - phi . theta.
double td_error(const Sample& sample, const Vector& theta, double gamma);

/// Same, against the target-policy expected next features phi_bar.
double td_error_bar(const Sample& sample, const Vector& theta, double gamma);

/// theta += alpha delta phi. Returns delta.
double td_step(PrimalDualState& state, const Sample& sample, double alpha, double gamma);

/// theta += alpha [delta phi - gamma (phi . w) phi_next];
/// w += eta alpha (delta - phi . w) phi. Returns delta.
double tdc_step(PrimalDualState& state, const Sample& sample, double alpha, double eta,
                double gamma);

/// Entry-wise shrinkage: max(x - rho, 0) - max(-x - rho, 0).
Vector soft_threshold(const Vector& x, double rho);

/// Projection onto the unit n-ball: radial scaling for finite n, entrywise
/// clamping for n = inf.
Vector project_ball(const Vector& y, double n);

/// ||v||_m for m in {1, 2, inf}.
double vector_norm(const Vector& v, double m);

// The per-sample system matrix has the 2x2 block form
//   A_t = [ eta phi phi', eta phi (phi - gamma phi_next)' ;
//           gamma phi_next phi', phi (phi - gamma phi_next)' ],
//   b_t = [ eta r phi ; r phi ],
// and both products below are assembled from inner products in O(d) without
// ever forming A_t.

/// (y' A_t)' for y = [y1; y2]; returns a 2d vector.
Vector matfree_yta(const Sample& sample, const Vector& y1, const Vector& y2, double eta,
                   double gamma);

/// A_t x - b_t for x = [w; theta]; returns a 2d vector.
Vector matfree_axb(const Sample& sample, const Vector& w, const Vector& theta, double eta,
                   double gamma);

// Trace-based analogues, where the trace e replaces phi in the off-diagonal
// blocks and phi_bar replaces phi_next:
//   A_t = [ eta phi phi', eta e (phi - gamma phi_bar)' ;
//           gamma (1-lambda) phi_bar e', e (phi - gamma phi_bar)' ],
//   b_t = [ eta r e ; r e ].

Vector trace_yta(const Sample& sample, const Vector& e, const Vector& y1, const Vector& y2,
                 double eta, double gamma, double lambda);

Vector trace_axb(const Sample& sample, const Vector& e, const Vector& w, const Vector& theta,
                 double eta, double gamma, double lambda);

/// One primal-dual iteration from precomputed products At'y and At x - bt:
/// gradient steps, separate shrinkage of the theta and w halves, dual
/// projection, and averaging-accumulator update. Throws DivergenceError when
/// an iterate goes non-finite.
void saddle_update(PrimalDualState& state, const Vector& aty, const Vector& axb, double alpha,
                   double rho1, double rho2, double norm_n);

/// One regularized primal-dual iteration on a sample, matrix-free. Returns
/// delta.
double rotd_step(PrimalDualState& state, const Sample& sample, const SolverConfig& config);

/// e <- gamma lambda e + phi. Reset at episode boundaries by the caller.
void gq_trace_update(TraceState& trace, const Sample& sample, double gamma);

/// theta += alpha [delta e - gamma (1-lambda) (w . e) phi_bar];
/// w += eta alpha (delta e - (w . phi) phi). delta uses phi_bar. Returns delta.
double gq_step(PrimalDualState& state, const TraceState& trace, const Sample& sample, double alpha,
               double eta, double gamma, double lambda);

/// Trace-based regularized primal-dual iteration, matrix-free. Returns delta.
double rogq_step(PrimalDualState& state, const TraceState& trace, const Sample& sample,
                 const SolverConfig& config);

// Iteration for min_x 1/2 ||Ax-b||_2^2 + rho ||x||_1 via its bilinear form,
// all updates taken from the time-t snapshot:
//   x <- x - alpha rho (u + At' y)
//   y <- y + (alpha/rho) (At x - bt - rho y)
//   u <- Pi_inf(u + (alpha/rho) x)

void rotd_ext_step(DualExtensionState& state, const Sample& sample, double alpha, double rho,
                   double eta, double gamma);
void rotd_ext_step(DualExtensionState& state, const Matrix& At, const Vector& bt, double alpha,
                   double rho);

/// Stepsize-weighted averages (x_bar, y_bar). Requires t >= 1.
std::pair<Vector, Vector> average_iterates(const PrimalDualState& state);
std::pair<Vector, Vector> average_iterates(const DualExtensionState& state);

}  // namespace rotd
