#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "rotd/errors.hpp"

namespace rotd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double width() const { return hi - lo; }
};

// Immutable basis-function family. A map evaluates either discrete states
// (index into a fixed row table) or continuous states (RBF grids, cosine
// basis), and can be stacked per action for state-action values. Every
// evaluation returns a dense vector of length dim().
class FeatureMap {
 public:
  enum class Kind { Tabular, Inverted, Dependent, RbfGrid, Fourier, ActionStacked, Table };

  /// phi(s) = e_s, one indicator per state.
  static FeatureMap tabular(int n_states);

  /// phi(s) has a zero at position s and 1/sqrt(n_states-1) elsewhere.
  /// Requires n_states >= 2.
  static FeatureMap inverted(int n_states);

  /// Overlapping ramp basis with d = (n_states+1)/2 columns; each row is the
  /// unit-normalized 0/1 window covering columns max(0,s-d+1)..min(s,d-1).
  /// Requires odd n_states >= 3.
  static FeatureMap dependent(int n_states);

  /// Explicit row-per-state basis.
  static FeatureMap table(Matrix phi);

  /// Concatenated square grids of Gaussian bumps over a 2-d box. A g x g grid
  /// places centers at the box corners and evenly between them; the Gaussian
  /// width per dimension is the center spacing (the full interval when g = 1).
  /// Appends a constant feature when include_constant is set.
  static FeatureMap rbf_grid(const std::array<Interval, 2>& bounds,
                             const std::vector<int>& grid_sizes, bool include_constant);

  /// cos(pi * c . s~) over all integer coefficient vectors c in
  /// {0..order}^state_dim, with s~ the state rescaled (and clamped) into the
  /// unit box. d = (order+1)^state_dim.
  static FeatureMap fourier(int state_dim, int order, const std::vector<Interval>& bounds);

  /// Block layout for state-action values: phi(s,a) places the base features
  /// in the a-th block of n_actions blocks.
  static FeatureMap stacked(FeatureMap base, int n_actions);

  Kind kind() const { return kind_; }
  int dim() const { return d_; }
  bool discrete() const;

  /// Number of rows for discrete maps.
  int n_states() const;

  /// Input dimension for continuous maps.
  int state_dim() const;

  int n_actions() const { return n_actions_; }

  Vector at(int state) const;
  Vector at(const Vector& state) const;
  Vector at(int state, int action) const;
  Vector at(const Vector& state, int action) const;

  /// Full n_states x d basis matrix (discrete maps only).
  Matrix matrix() const;

  /// Grid sizes of an RBF map, in construction order.
  const std::vector<int>& rbf_grid_sizes() const;
  bool rbf_has_constant() const;

 private:
  FeatureMap() = default;

  Kind kind_ = Kind::Table;
  int d_ = 0;

  // discrete kinds
  Matrix table_;

  // rbf-grid
  std::vector<int> grid_sizes_;
  bool include_constant_ = false;
  Matrix centers_;         // one row per bump
  Matrix inv_two_sigma2_;  // per-bump, per-dimension 1/(2 sigma^2)

  // fourier
  Eigen::MatrixXi fourier_coeffs_;  // d x state_dim
  std::vector<Interval> bounds_;

  // action-stacked
  std::shared_ptr<const FeatureMap> base_;
  int n_actions_ = 1;
};

}  // namespace rotd
