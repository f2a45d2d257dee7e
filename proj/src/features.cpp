#include "rotd/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rotd {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

FeatureMap FeatureMap::tabular(int n_states) {
  if (n_states < 1) throw InvalidArgument("tabular: n_states must be >= 1");
  FeatureMap m;
  m.kind_ = Kind::Tabular;
  m.d_ = n_states;
  m.table_ = Matrix::Identity(n_states, n_states);
  return m;
}

FeatureMap FeatureMap::inverted(int n_states) {
  if (n_states < 2)
    throw InvalidArgument("inverted: n_states must be >= 2 (single state gives a zero vector)");
  FeatureMap m;
  m.kind_ = Kind::Inverted;
  m.d_ = n_states;
  const double v = 1.0 / std::sqrt(static_cast<double>(n_states - 1));
  m.table_ = Matrix::Constant(n_states, n_states, v);
  m.table_.diagonal().setZero();
  return m;
}

FeatureMap FeatureMap::dependent(int n_states) {
  if (n_states < 3 || n_states % 2 == 0)
    throw InvalidArgument("dependent: n_states must be odd and >= 3");
  FeatureMap m;
  m.kind_ = Kind::Dependent;
  m.d_ = (n_states + 1) / 2;
  m.table_ = Matrix::Zero(n_states, m.d_);
  for (int s = 0; s < n_states; ++s) {
    const int first = std::max(0, s - m.d_ + 1);
    const int last = std::min(s, m.d_ - 1);
    for (int j = first; j <= last; ++j) m.table_(s, j) = 1.0;
    m.table_.row(s).normalize();
  }
  return m;
}

FeatureMap FeatureMap::table(Matrix phi) {
  if (phi.rows() < 1 || phi.cols() < 1) throw InvalidArgument("table: empty basis matrix");
  FeatureMap m;
  m.kind_ = Kind::Table;
  m.d_ = static_cast<int>(phi.cols());
  m.table_ = std::move(phi);
  return m;
}

FeatureMap FeatureMap::rbf_grid(const std::array<Interval, 2>& bounds,
                                const std::vector<int>& grid_sizes, bool include_constant) {
  if (grid_sizes.empty()) throw InvalidArgument("rbf_grid: grid_sizes must be nonempty");
  for (const Interval& b : bounds) {
    if (!(b.width() > 0.0)) throw InvalidArgument("rbf_grid: degenerate bounds interval");
  }
  int n_bumps = 0;
  for (int g : grid_sizes) {
    if (g < 1) throw InvalidArgument("rbf_grid: grid sizes must be positive");
    n_bumps += g * g;
  }
  FeatureMap m;
  m.kind_ = Kind::RbfGrid;
  m.grid_sizes_ = grid_sizes;
  m.include_constant_ = include_constant;
  m.d_ = n_bumps + (include_constant ? 1 : 0);
  m.centers_.resize(n_bumps, 2);
  m.inv_two_sigma2_.resize(n_bumps, 2);
  int row = 0;
  for (int g : grid_sizes) {
    double sigma[2], lo[2], step[2];
    for (int k = 0; k < 2; ++k) {
      lo[k] = bounds[k].lo;
      if (g >= 2) {
        step[k] = bounds[k].width() / (g - 1);
        sigma[k] = step[k];
      } else {
        step[k] = 0.0;
        lo[k] = bounds[k].lo + 0.5 * bounds[k].width();
        sigma[k] = bounds[k].width();
      }
    }
    for (int i = 0; i < g; ++i) {
      for (int j = 0; j < g; ++j, ++row) {
        m.centers_(row, 0) = lo[0] + i * step[0];
        m.centers_(row, 1) = lo[1] + j * step[1];
        m.inv_two_sigma2_(row, 0) = 1.0 / (2.0 * sigma[0] * sigma[0]);
        m.inv_two_sigma2_(row, 1) = 1.0 / (2.0 * sigma[1] * sigma[1]);
      }
    }
  }
  m.bounds_.assign(bounds.begin(), bounds.end());
  return m;
}

FeatureMap FeatureMap::fourier(int state_dim, int order, const std::vector<Interval>& bounds) {
  if (state_dim < 1) throw InvalidArgument("fourier: state_dim must be >= 1");
  if (order < 0) throw InvalidArgument("fourier: order must be >= 0");
  if (static_cast<int>(bounds.size()) != state_dim)
    throw InvalidArgument("fourier: need one bounds interval per state dimension");
  for (const Interval& b : bounds) {
    if (!(b.width() > 0.0)) throw InvalidArgument("fourier: degenerate bounds interval");
  }
  double count = std::pow(static_cast<double>(order + 1), state_dim);
  if (count > 1e8) throw InvalidArgument("fourier: basis would have more than 1e8 functions");
  FeatureMap m;
  m.kind_ = Kind::Fourier;
  m.d_ = static_cast<int>(count);
  m.bounds_ = bounds;
  m.fourier_coeffs_.resize(m.d_, state_dim);
  Eigen::VectorXi c = Eigen::VectorXi::Zero(state_dim);
  for (int i = 0; i < m.d_; ++i) {
    m.fourier_coeffs_.row(i) = c.transpose();
    for (int k = 0; k < state_dim; ++k) {  // odometer, first dimension fastest
      if (++c[k] <= order) break;
      c[k] = 0;
    }
  }
  return m;
}

FeatureMap FeatureMap::stacked(FeatureMap base, int n_actions) {
  if (n_actions < 1) throw InvalidArgument("stacked: n_actions must be >= 1");
  FeatureMap m;
  m.kind_ = Kind::ActionStacked;
  m.d_ = base.dim() * n_actions;
  m.n_actions_ = n_actions;
  m.base_ = std::make_shared<const FeatureMap>(std::move(base));
  return m;
}

bool FeatureMap::discrete() const {
  switch (kind_) {
    case Kind::Tabular:
    case Kind::Inverted:
    case Kind::Dependent:
    case Kind::Table:
      return true;
    case Kind::ActionStacked:
      return base_->discrete();
    default:
      return false;
  }
}

int FeatureMap::n_states() const {
  if (kind_ == Kind::ActionStacked) return base_->n_states();
  if (!discrete()) throw InvalidArgument("n_states: not a discrete feature map");
  return static_cast<int>(table_.rows());
}

int FeatureMap::state_dim() const {
  switch (kind_) {
    case Kind::RbfGrid:
      return 2;
    case Kind::Fourier:
      return static_cast<int>(bounds_.size());
    case Kind::ActionStacked:
      return base_->state_dim();
    default:
      return 1;
  }
}

Vector FeatureMap::at(int state) const {
  if (!discrete() || kind_ == Kind::ActionStacked)
    throw InvalidArgument("at(state): map is not a plain discrete feature map");
  if (state < 0 || state >= table_.rows())
    throw InvalidArgument("at(state): state index " + std::to_string(state) + " out of range");
  return table_.row(state).transpose();
}

Vector FeatureMap::at(const Vector& state) const {
  switch (kind_) {
    case Kind::RbfGrid: {
      if (state.size() != 2) throw InvalidArgument("rbf features expect a 2-d state");
      Vector out(d_);
      for (int r = 0; r < centers_.rows(); ++r) {
        const double dx = state[0] - centers_(r, 0);
        const double dy = state[1] - centers_(r, 1);
        out[r] = std::exp(-(dx * dx * inv_two_sigma2_(r, 0) + dy * dy * inv_two_sigma2_(r, 1)));
      }
      if (include_constant_) out[d_ - 1] = 1.0;
      return out;
    }
    case Kind::Fourier: {
      const int k = static_cast<int>(bounds_.size());
      if (state.size() != k) throw InvalidArgument("fourier features: state dimension mismatch");
      Vector scaled(k);
      for (int j = 0; j < k; ++j) {
        double u = (state[j] - bounds_[j].lo) / bounds_[j].width();
        scaled[j] = std::clamp(u, 0.0, 1.0);
      }
      Vector out(d_);
      for (int i = 0; i < d_; ++i) {
        double dot = 0.0;
        for (int j = 0; j < k; ++j) dot += fourier_coeffs_(i, j) * scaled[j];
        out[i] = std::cos(kPi * dot);
      }
      return out;
    }
    default:
      // Discrete maps accept a 1-d vector carrying the state index; this is
      // what lets serialized batches rebuild features uniformly.
      if (discrete() && state.size() == 1) return at(static_cast<int>(state[0]));
      throw InvalidArgument("at(vector): map does not evaluate continuous states");
  }
}

Vector FeatureMap::at(int state, int action) const {
  if (kind_ != Kind::ActionStacked)
    throw InvalidArgument("at(state, action): not an action-stacked map");
  if (action < 0 || action >= n_actions_)
    throw InvalidArgument("action index " + std::to_string(action) + " out of range");
  Vector out = Vector::Zero(d_);
  out.segment(action * base_->dim(), base_->dim()) = base_->at(state);
  return out;
}

Vector FeatureMap::at(const Vector& state, int action) const {
  if (kind_ != Kind::ActionStacked)
    throw InvalidArgument("at(state, action): not an action-stacked map");
  if (action < 0 || action >= n_actions_)
    throw InvalidArgument("action index " + std::to_string(action) + " out of range");
  Vector out = Vector::Zero(d_);
  out.segment(action * base_->dim(), base_->dim()) = base_->at(state);
  return out;
}

Matrix FeatureMap::matrix() const {
  if (!discrete() || kind_ == Kind::ActionStacked)
    throw InvalidArgument("matrix(): only plain discrete maps have a basis matrix");
  return table_;
}

const std::vector<int>& FeatureMap::rbf_grid_sizes() const {
  if (kind_ != Kind::RbfGrid) throw InvalidArgument("rbf_grid_sizes: not an RBF map");
  return grid_sizes_;
}

bool FeatureMap::rbf_has_constant() const {
  if (kind_ != Kind::RbfGrid) throw InvalidArgument("rbf_has_constant: not an RBF map");
  return include_constant_;
}

}  // namespace rotd
