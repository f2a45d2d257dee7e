#include "rotd/solvers.hpp"

#include <cmath>

namespace rotd {

double StepSchedule::at(std::int64_t t) const {
  switch (kind) {
    case StepKind::Constant:
      return value;
    case StepKind::InvSqrt:
      return value / std::sqrt(static_cast<double>(t));
  }
  return value;
}

void SolverConfig::validate() const {
  if (!(alpha.value > 0.0)) throw InvalidArgument("alpha must be positive");
  if (!(eta > 0.0)) throw InvalidArgument("eta must be positive");
  if (rho1 < 0.0 || rho2 < 0.0) throw InvalidArgument("rho1 and rho2 must be nonnegative");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must be in [0,1)");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must be in [0,1]");
  const bool ok = (norm_m == 2.0 && norm_n == 2.0) || (norm_m == 1.0 && norm_n == kInf) ||
                  (norm_m == kInf && norm_n == 1.0);
  if (!ok)
    throw InvalidArgument("(m, n) must be a supported conjugate pair: (2,2), (1,inf) or (inf,1)");
  if (algorithm == Algorithm::ROTD_EXT && !(rho1 > 0.0))
    throw InvalidArgument("the extension iteration requires rho1 > 0");
}

PrimalDualState PrimalDualState::zero(int d) {
  PrimalDualState s;
  s.w = Vector::Zero(d);
  s.theta = Vector::Zero(d);
  s.y1 = Vector::Zero(d);
  s.y2 = Vector::Zero(d);
  s.x_weighted_sum = Vector::Zero(2 * d);
  s.y_weighted_sum = Vector::Zero(2 * d);
  return s;
}

Vector PrimalDualState::x() const {
  Vector out(2 * dim());
  out << w, theta;
  return out;
}

Vector PrimalDualState::y() const {
  Vector out(2 * dim());
  out << y1, y2;
  return out;
}

TraceState TraceState::zero(int d, double lambda) {
  TraceState t;
  t.e = Vector::Zero(d);
  t.lambda = lambda;
  return t;
}

DualExtensionState DualExtensionState::zero(int x_dim, int y_dim) {
  DualExtensionState s;
  s.x = Vector::Zero(x_dim);
  s.y = Vector::Zero(y_dim);
  s.u = Vector::Zero(x_dim);
  s.x_weighted_sum = Vector::Zero(x_dim);
  s.y_weighted_sum = Vector::Zero(y_dim);
  return s;
}

double td_error(const Sample& sample, const Vector& theta, double gamma) {
  return sample.reward + gamma * sample.phi_next.dot(theta) - sample.phi.dot(theta);
}

double td_error_bar(const Sample& sample, const Vector& theta, double gamma) {
  return sample.reward + gamma * sample.phi_bar().dot(theta) - sample.phi.dot(theta);
}

namespace {

void check_finite(const PrimalDualState& s) {
  if (!(s.w.allFinite() && s.theta.allFinite() && s.y1.allFinite() && s.y2.allFinite()))
    throw DivergenceError(s.t);
}

void accumulate(PrimalDualState& s, double alpha) {
  const int d = s.dim();
  s.sum_alpha += alpha;
  s.x_weighted_sum.head(d) += alpha * s.w;
  s.x_weighted_sum.tail(d) += alpha * s.theta;
  s.y_weighted_sum.head(d) += alpha * s.y1;
  s.y_weighted_sum.tail(d) += alpha * s.y2;
}

}  // namespace

double td_step(PrimalDualState& state, const Sample& sample, double alpha, double gamma) {
  const double delta = td_error(sample, state.theta, gamma);
  state.theta += alpha * delta * sample.phi;
  state.t += 1;
  state.last_delta = delta;
  accumulate(state, alpha);
  check_finite(state);
  return delta;
}

double tdc_step(PrimalDualState& state, const Sample& sample, double alpha, double eta,
                double gamma) {
  const double delta = td_error(sample, state.theta, gamma);
  const double phi_w = sample.phi.dot(state.w);
  state.theta += alpha * delta * sample.phi - alpha * gamma * phi_w * sample.phi_next;
  state.w += eta * alpha * (delta - phi_w) * sample.phi;
  state.t += 1;
  state.last_delta = delta;
  accumulate(state, alpha);
  check_finite(state);
  return delta;
}

Vector soft_threshold(const Vector& x, double rho) {
  if (rho < 0.0) throw InvalidArgument("soft_threshold: rho must be nonnegative");
  return x.unaryExpr([rho](double v) {
    return std::max(v - rho, 0.0) - std::max(-v - rho, 0.0);
  });
}

Vector project_ball(const Vector& y, double n) {
  if (n == kInf) {
    return y.unaryExpr([](double v) { return v * std::min(1.0, 1.0 / std::abs(v)); });
  }
  if (n == 1.0 || n == 2.0) {
    const double norm = vector_norm(y, n);
    return norm > 1.0 ? Vector(y / norm) : y;
  }
  throw InvalidArgument("project_ball: unsupported exponent");
}

double vector_norm(const Vector& v, double m) {
  if (m == 1.0) return v.lpNorm<1>();
  if (m == 2.0) return v.norm();
  if (m == kInf) return v.size() > 0 ? v.lpNorm<Eigen::Infinity>() : 0.0;
  throw InvalidArgument("vector_norm: unsupported exponent");
}

Vector matfree_yta(const Sample& sample, const Vector& y1, const Vector& y2, double eta,
                   double gamma) {
  const int d = static_cast<int>(sample.phi.size());
  const double y1_phi = y1.dot(sample.phi);
  const double y2_phi_next = y2.dot(sample.phi_next);
  const double y2_phi = y2.dot(sample.phi);
  Vector out(2 * d);
  out.head(d) = (eta * y1_phi + gamma * y2_phi_next) * sample.phi;
  out.tail(d) = (eta * y1_phi + y2_phi) * (sample.phi - gamma * sample.phi_next);
  return out;
}

Vector matfree_axb(const Sample& sample, const Vector& w, const Vector& theta, double eta,
                   double gamma) {
  const int d = static_cast<int>(sample.phi.size());
  const double delta = td_error(sample, theta, gamma);
  const double phi_w = sample.phi.dot(w);
  Vector out(2 * d);
  out.head(d) = -eta * (delta - phi_w) * sample.phi;
  out.tail(d) = gamma * phi_w * sample.phi_next - delta * sample.phi;
  return out;
}

Vector trace_yta(const Sample& sample, const Vector& e, const Vector& y1, const Vector& y2,
                 double eta, double gamma, double lambda) {
  const int d = static_cast<int>(sample.phi.size());
  const Vector& phi_bar = sample.phi_bar();
  const double y1_phi = y1.dot(sample.phi);
  const double y2_bar = y2.dot(phi_bar);
  const double y1_e = y1.dot(e);
  const double y2_e = y2.dot(e);
  Vector out(2 * d);
  out.head(d) = eta * y1_phi * sample.phi + gamma * (1.0 - lambda) * y2_bar * e;
  out.tail(d) = (eta * y1_e + y2_e) * (sample.phi - gamma * phi_bar);
  return out;
}

Vector trace_axb(const Sample& sample, const Vector& e, const Vector& w, const Vector& theta,
                 double eta, double gamma, double lambda) {
  const int d = static_cast<int>(sample.phi.size());
  const Vector& phi_bar = sample.phi_bar();
  const double delta = td_error_bar(sample, theta, gamma);
  const double phi_w = sample.phi.dot(w);
  const double e_w = e.dot(w);
  Vector out(2 * d);
  out.head(d) = -eta * (delta * e - phi_w * sample.phi);
  out.tail(d) = gamma * (1.0 - lambda) * e_w * phi_bar - delta * e;
  return out;
}

void saddle_update(PrimalDualState& state, const Vector& aty, const Vector& axb, double alpha,
                   double rho1, double rho2, double norm_n) {
  const int d = state.dim();
  const Vector w_half = state.w - alpha * aty.head(d);
  const Vector theta_half = state.theta - alpha * aty.tail(d);
  Vector y_half(2 * d);
  y_half.head(d) = state.y1 + alpha * axb.head(d);
  y_half.tail(d) = state.y2 + alpha * axb.tail(d);

  state.w = soft_threshold(w_half, alpha * rho2);
  state.theta = soft_threshold(theta_half, alpha * rho1);
  const Vector y_new = project_ball(y_half, norm_n);
  state.y1 = y_new.head(d);
  state.y2 = y_new.tail(d);

  state.t += 1;
  accumulate(state, alpha);
  check_finite(state);
}

double rotd_step(PrimalDualState& state, const Sample& sample, const SolverConfig& config) {
  const double alpha = config.alpha.at(state.t + 1);
  const double delta = td_error(sample, state.theta, config.gamma);
  const Vector aty = matfree_yta(sample, state.y1, state.y2, config.eta, config.gamma);
  const Vector axb = matfree_axb(sample, state.w, state.theta, config.eta, config.gamma);
  saddle_update(state, aty, axb, alpha, config.rho1, config.rho2, config.norm_n);
  state.last_delta = delta;
  return delta;
}

void gq_trace_update(TraceState& trace, const Sample& sample, double gamma) {
  trace.e = gamma * trace.lambda * trace.e + sample.phi;
}

double gq_step(PrimalDualState& state, const TraceState& trace, const Sample& sample, double alpha,
               double eta, double gamma, double lambda) {
  const double delta = td_error_bar(sample, state.theta, gamma);
  const double w_e = state.w.dot(trace.e);
  const double w_phi = state.w.dot(sample.phi);
  state.theta += alpha * (delta * trace.e - gamma * (1.0 - lambda) * w_e * sample.phi_bar());
  state.w += eta * alpha * (delta * trace.e - w_phi * sample.phi);
  state.t += 1;
  state.last_delta = delta;
  accumulate(state, alpha);
  check_finite(state);
  return delta;
}

double rogq_step(PrimalDualState& state, const TraceState& trace, const Sample& sample,
                 const SolverConfig& config) {
  const double alpha = config.alpha.at(state.t + 1);
  const double delta = td_error_bar(sample, state.theta, config.gamma);
  const Vector aty =
      trace_yta(sample, trace.e, state.y1, state.y2, config.eta, config.gamma, config.lambda);
  const Vector axb = trace_axb(sample, trace.e, state.w, state.theta, config.eta, config.gamma,
                               config.lambda);
  saddle_update(state, aty, axb, alpha, config.rho1, config.rho2, config.norm_n);
  state.last_delta = delta;
  return delta;
}

namespace {

void ext_update(DualExtensionState& state, const Vector& aty, const Vector& axb, double alpha,
                double rho) {
  if (!(rho > 0.0)) throw InvalidArgument("extension iteration requires rho > 0");
  const Vector x_new = state.x - alpha * rho * (state.u + aty);
  const Vector y_new = state.y + (alpha / rho) * (axb - rho * state.y);
  const Vector u_half = state.u + (alpha / rho) * state.x;
  state.x = x_new;
  state.y = y_new;
  state.u = project_ball(u_half, kInf);
  state.t += 1;
  state.sum_alpha += alpha;
  state.x_weighted_sum += alpha * state.x;
  state.y_weighted_sum += alpha * state.y;
  if (!(state.x.allFinite() && state.y.allFinite() && state.u.allFinite()))
    throw DivergenceError(state.t);
}

}  // namespace

void rotd_ext_step(DualExtensionState& state, const Sample& sample, double alpha, double rho,
                   double eta, double gamma) {
  const int d = static_cast<int>(sample.phi.size());
  const Vector aty = matfree_yta(sample, state.y.head(d), state.y.tail(d), eta, gamma);
  const Vector axb = matfree_axb(sample, state.x.head(d), state.x.tail(d), eta, gamma);
  ext_update(state, aty, axb, alpha, rho);
}

void rotd_ext_step(DualExtensionState& state, const Matrix& At, const Vector& bt, double alpha,
                   double rho) {
  const Vector aty = At.transpose() * state.y;
  const Vector axb = At * state.x - bt;
  ext_update(state, aty, axb, alpha, rho);
}

std::pair<Vector, Vector> average_iterates(const PrimalDualState& state) {
  if (state.t < 1) throw InvalidArgument("average_iterates: no iterations have run");
  return {state.x_weighted_sum / state.sum_alpha, state.y_weighted_sum / state.sum_alpha};
}

std::pair<Vector, Vector> average_iterates(const DualExtensionState& state) {
  if (state.t < 1) throw InvalidArgument("average_iterates: no iterations have run");
  return {state.x_weighted_sum / state.sum_alpha, state.y_weighted_sum / state.sum_alpha};
}

}  // namespace rotd
