#include "fvtl/hitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/LU>

#include "fvtl/error.hpp"

namespace fvtl {

namespace {

constexpr double kRescaleBelow = 1e-200;

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> v) {
  double sum = 0.0;
  double carry = 0.0;
  for (double e : v) {
    const double t = sum + e;
    if (std::abs(sum) >= std::abs(e)) {
      carry += (sum - t) + e;
    } else {
      carry += (e - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

double safe_log(double v) {
  return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
}

}  // namespace

SurvivalSequence::SurvivalSequence(const SubKernel& q, std::vector<double> alpha_local)
    : q_(&q), current_(std::move(alpha_local)), scratch_(q.size()) {
  if (current_.size() != q.size()) {
    throw ShapeError("survival: starting measure is not on the complement");
  }
}

double SurvivalSequence::log_mass() const { return log_scale_ + safe_log(compensated_sum(current_)); }

double SurvivalSequence::mass() const { return std::exp(log_mass()); }

void SurvivalSequence::step() {
  q_->sparse().left_multiply(current_, scratch_);
  std::swap(current_, scratch_);
  ++time_;
  const double m = compensated_sum(current_);
  if (m > 0.0 && m < kRescaleBelow) {
    for (auto& e : current_) e /= m;
    log_scale_ += std::log(m);
  }
}

StartwiseSurvival::StartwiseSurvival(const SubKernel& q)
    : q_(&q), current_(q.size(), 1.0), scratch_(q.size()) {}

void StartwiseSurvival::step() {
  q_->sparse().right_multiply(current_, scratch_);
  std::swap(current_, scratch_);
  ++time_;
  const double top = *std::max_element(current_.begin(), current_.end());
  if (top > 0.0 && top < kRescaleBelow) {
    for (auto& e : current_) e /= top;
    log_scale_ += std::log(top);
  }
}

TailCurve survival_tail(const SubKernel& q, std::span<const double> alpha_local, Steps t_max,
                        std::string start) {
  TailCurve curve;
  curve.target = q.excluded();
  curve.start = std::move(start);
  curve.values.reserve(t_max + 1);
  curve.log_values.reserve(t_max + 1);
  SurvivalSequence seq(q, {alpha_local.begin(), alpha_local.end()});
  for (Steps t = 0;; ++t) {
    const double lm = seq.log_mass();
    curve.log_values.push_back(lm);
    curve.values.push_back(std::exp(lm));
    if (t == t_max) break;
    seq.step();
  }
  return curve;
}

TailCurve survival_tail(const SubKernel& q, const Distribution& alpha, Steps t_max,
                        std::string start) {
  if (alpha.size() != q.size() + 1) {
    throw ShapeError("survival_tail: distribution is not on the full state space");
  }
  return survival_tail(q, q.restrict(alpha.weights()), t_max, std::move(start));
}

std::vector<double> expected_hitting_times_to(const StochasticMatrix& p, State x) {
  if (!connectivity(p).irreducible) {
    throw NotIrreducible("expected hitting times need an irreducible chain");
  }
  const SubKernel q(p, x);
  const auto m = static_cast<Eigen::Index>(q.size());
  Eigen::MatrixXd a = -q.dense();
  a.diagonal().array() += 1.0;
  const Eigen::VectorXd h = a.partialPivLu().solve(Eigen::VectorXd::Ones(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!std::isfinite(h(i))) {
      throw NumericalFailure("expected hitting times: singular system", h(i));
    }
  }
  return q.extend({h.data(), static_cast<std::size_t>(m)}, 0.0);
}

double expected_hitting_linear(const StochasticMatrix& p, const Distribution& pi, State x) {
  const auto h = expected_hitting_times_to(p, x);
  std::vector<double> terms(h.size());
  for (std::size_t y = 0; y < h.size(); ++y) terms[y] = pi[y] * h[y];
  return compensated_sum(terms);
}

MixingEnvelope mixing_envelope(const StochasticMatrix& p, const Distribution& pi, Steps cap) {
  PowerSequence seq(p, pi);
  while (seq.time() < cap) {
    seq.step();
    if (seq.l1_distance() <= 0.5) return {seq.time(), seq.l1_distance()};
  }
  throw TruncationFailure("fundamental matrix: rows of P^t do not approach pi within the cap");
}

double fundamental_diag(const StochasticMatrix& p, const Distribution& pi, State x, double tol,
                        const MixingEnvelope& envelope, Steps cap) {
  if (!(tol > 0.0)) throw SpecError("fundamental_diag: tolerance must be positive");
  if (x >= p.size()) throw IndexError("fundamental_diag: state outside the chain");
  if (envelope.block == 0 || !(envelope.contraction < 1.0)) {
    throw TruncationFailure("fundamental_diag: envelope does not contract");
  }
  const double c = envelope.contraction;
  const double block = static_cast<double>(envelope.block);
  std::vector<double> cur(p.size(), 0.0), next(p.size());
  cur[x] = 1.0;
  double sum = 0.0;
  double carry = 0.0;
  for (Steps t = 0; t < cap; ++t) {
    const double term = cur[x] - pi[x];
    const double s = sum + term;
    carry += std::abs(sum) >= std::abs(term) ? (sum - s) + term : (term - s) + sum;
    sum = s;
    if ((t + 1) % envelope.block == 0) {
      const double k = static_cast<double>((t + 1) / envelope.block);
      const double remainder = c == 0.0 ? 0.0 : block * std::pow(c, k) / (1.0 - c);
      if (remainder <= tol) return sum + carry;
    }
    p.sparse().left_multiply(cur, next);
    std::swap(cur, next);
  }
  throw TruncationFailure("fundamental_diag: remainder not certified below tol within the cap");
}

double fundamental_diag(const StochasticMatrix& p, State x, double tol) {
  const auto pi = stationary_distribution(p);
  return fundamental_diag(p, pi, x, tol, mixing_envelope(p, pi));
}

double expected_hitting_from_stationarity(const StochasticMatrix& p, const Distribution& pi,
                                          State x, const MixingEnvelope& envelope) {
  const double via_fundamental = fundamental_diag(p, pi, x, 1e-13, envelope) / pi[x];
  const double via_linear = expected_hitting_linear(p, pi, x);
  const double rel = std::abs(via_fundamental - via_linear) / std::abs(via_linear);
  if (!(rel <= 1e-8)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "E_pi[tau_" << x << "]: fundamental matrix gives " << via_fundamental
        << ", linear solve gives " << via_linear;
    throw NumericalInconsistency(msg.str(), via_fundamental, via_linear);
  }
  return via_linear;
}

double expected_hitting_from_stationarity(const StochasticMatrix& p, State x) {
  const auto pi = stationary_distribution(p);
  return expected_hitting_from_stationarity(p, pi, x, mixing_envelope(p, pi));
}

double returns_within_T(const StochasticMatrix& p, State x, Steps T) {
  if (x >= p.size()) throw IndexError("returns_within_T: state outside the chain");
  std::vector<double> cur(p.size(), 0.0), next(p.size());
  cur[x] = 1.0;
  double r = 1.0;
  for (Steps t = 1; t <= T; ++t) {
    p.sparse().left_multiply(cur, next);
    std::swap(cur, next);
    r += cur[x];
  }
  return r;
}

std::vector<double> local_times_from(const StochasticMatrix& p, State y, Steps T) {
  if (y >= p.size()) throw IndexError("local_times_from: state outside the chain");
  std::vector<double> cur(p.size(), 0.0), next(p.size()), acc(p.size(), 0.0);
  cur[y] = 1.0;
  for (Steps s = 0; s < T; ++s) {
    for (std::size_t z = 0; z < acc.size(); ++z) acc[z] += cur[z];
    p.sparse().left_multiply(cur, next);
    std::swap(cur, next);
  }
  return acc;
}

std::vector<double> local_times_to(const StochasticMatrix& p, State x, Steps T) {
  if (x >= p.size()) throw IndexError("local_times_to: state outside the chain");
  std::vector<double> cur(p.size(), 0.0), next(p.size()), acc(p.size(), 0.0);
  cur[x] = 1.0;
  for (Steps s = 0; s < T; ++s) {
    for (std::size_t z = 0; z < acc.size(); ++z) acc[z] += cur[z];
    p.sparse().right_multiply(cur, next);
    std::swap(cur, next);
  }
  return acc;
}

double local_time(const StochasticMatrix& p, State y, State x, Steps T) {
  if (x >= p.size()) throw IndexError("local_time: state outside the chain");
  return local_times_from(p, y, T)[x];
}

TailBounds tail_bounds(const PerronTriple& triple, const DoobChain& doob,
                       std::span<const double> alpha_local, Steps t) {
  const double gamma_min = triple.gamma_min();
  if (!(gamma_min > 0.0)) throw PositivityError("tail_bounds: gamma has a nonpositive entry");
  const double mass = dot(alpha_local, triple.gamma);
  const auto tilted = tilt_measure(alpha_local, triple.gamma);
  const double s = doob_separation(doob, tilted, t);
  const double scale = std::pow(triple.lambda, static_cast<double>(t)) * mass;
  return {scale * (1.0 - s), scale * (1.0 + s * (1.0 / gamma_min - 1.0))};
}

GammaBoundsCheck gamma_bounds_check(const PerronTriple& triple,
                                    std::span<const double> local_times, double epsilon) {
  if (!(epsilon >= 0.0)) throw SpecError("gamma_bounds_check: epsilon must be nonnegative");
  if (local_times.size() != triple.gamma.size()) {
    throw ShapeError("gamma_bounds_check: local times are not on the complement");
  }
  GammaBoundsCheck out;
  out.ub_ok = triple.gamma_max() <= 1.0 + epsilon;
  out.lb_slack = std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < local_times.size(); ++y) {
    const double floor = std::max(0.0, 1.0 - epsilon - local_times[y]);
    out.lb_slack = std::min(out.lb_slack, triple.gamma[y] - floor);
  }
  return out;
}

namespace {

/// Per-t quantities along the stationary start, shared by the report and the
/// residual curve.
struct StationarySweep {
  std::vector<double> log_tail;   // log P_pi(tau_x > t)
  std::vector<double> doob_sep;   // s~ of the tilted pi at t
  double pi_dot_gamma = 0.0;
  std::vector<double> startwise_scaled;  // Q^{t_max} 1, scaled
  double startwise_log_scale = 0.0;
};

StationarySweep run_stationary_sweep(const SubKernel& q, const PerronTriple& triple,
                                     const DoobChain& doob, std::span<const double> pi_local,
                                     Steps t_max, bool startwise) {
  StationarySweep out;
  out.pi_dot_gamma = dot(pi_local, triple.gamma);
  out.log_tail.reserve(t_max + 1);
  out.doob_sep.reserve(t_max + 1);
  SurvivalSequence tail(q, {pi_local.begin(), pi_local.end()});
  DoobSeparationSequence sep(doob, tilt_measure(pi_local, triple.gamma));
  std::optional<StartwiseSurvival> from_states;
  if (startwise) from_states.emplace(q);
  for (Steps t = 0;; ++t) {
    out.log_tail.push_back(tail.log_mass());
    out.doob_sep.push_back(sep.separation());
    if (t == t_max) break;
    tail.step();
    sep.step();
    if (from_states) from_states->step();
  }
  if (from_states) {
    out.startwise_scaled.assign(from_states->scaled().begin(), from_states->scaled().end());
    out.startwise_log_scale = from_states->log_scale();
  }
  return out;
}

double qsd_separation_from_pi(const PerronTriple& triple, std::span<const double> pi_local) {
  return separation(triple.mu_star.weights(), pi_local);
}

}  // namespace

CsqstResidual csqst_residual(const StochasticMatrix& p, State x, Steps t_max) {
  const auto pi = stationary_distribution(p);
  const SubKernel q(p, x);
  const auto triple = perron_pair(q);
  const auto doob = doob_transform(q, triple);
  const auto pi_local = q.restrict(pi.weights());
  const auto sweep = run_stationary_sweep(q, triple, doob, pi_local, t_max, false);
  CsqstResidual out;
  out.residuals.resize(t_max + 1);
  const double log_lambda = std::log(triple.lambda);
  for (Steps t = 0; t <= t_max; ++t) {
    const double lt = static_cast<double>(t) * log_lambda;
    out.residuals[t] = std::exp(sweep.log_tail[t]) -
                       std::exp(lt) * sweep.pi_dot_gamma * (1.0 - sweep.doob_sep[t]);
  }
  out.sep0 = sweep.doob_sep[0];
  out.qsd_vs_pi_sep = qsd_separation_from_pi(triple, pi_local);
  return out;
}

ChainContext ChainContext::with_T(const StochasticMatrix& p, Steps T) {
  auto pi = stationary_distribution(p);
  PowerSequence seq(p, pi);
  seq.advance_to(T);
  ChainContext ctx{p, pi, T, 0.0, seq.power(), seq.distance(), {}};
  if (T >= 1 && seq.l1_distance() <= 0.5) {
    ctx.envelope = {T, seq.l1_distance()};
  } else {
    ctx.envelope = mixing_envelope(p, pi);
  }
  return ctx;
}

ChainContext ChainContext::with_c(const StochasticMatrix& p, double c, Steps cap) {
  auto pi = stationary_distribution(p);
  auto mix = mixing_time(p, pi, c, cap);
  ChainContext ctx{p, pi, mix.T, c, std::move(mix.power), mix.distance, {}};
  if (mix.l1_distance <= 0.5) {
    ctx.envelope = {mix.T, mix.l1_distance};
  } else {
    ctx.envelope = mixing_envelope(p, pi);
  }
  return ctx;
}

TailCurve stationary_tail(const StochasticMatrix& p, const Distribution& pi, State x,
                          Steps t_max) {
  const SubKernel q(p, x);
  return survival_tail(q, pi, t_max, "stationary");
}

FvtlReport fvtl_report(const ChainContext& ctx, State x, const FvtlOptions& options) {
  const auto& p = ctx.p;
  const auto n = p.size();
  if (x >= n) throw IndexError("fvtl_report: target outside the chain");
  const SubKernel q(p, x);
  const auto triple = perron_pair(q, options.perron);
  const auto doob = doob_transform(q, triple);
  const auto pi_local = q.restrict(ctx.pi.weights());

  FvtlReport r;
  r.x = x;
  r.n = n;
  r.T = ctx.T;
  r.lambda = triple.lambda;
  r.left_residual = triple.left_residual;
  r.right_residual = triple.right_residual;
  r.pi_x = ctx.pi[x];
  r.expected_hitting = expected_hitting_from_stationarity(p, ctx.pi, x, ctx.envelope);
  r.t_max = options.t_max.value_or(static_cast<Steps>(
      std::min(std::ceil(10.0 * r.expected_hitting), 1e6)));
  r.R_T = returns_within_T(p, x, ctx.T);
  r.lambda_T = std::pow(triple.lambda, static_cast<double>(ctx.T));
  r.lambda_approx_dev = std::abs(triple.lambda / (1.0 - r.pi_x / r.R_T) - 1.0);

  r.gamma_min = triple.gamma_min();
  r.gamma_max = triple.gamma_max();
  const auto zeta = q.restrict(local_times_to(p, x, ctx.T));
  r.gamma_lb_slack = gamma_bounds_check(triple, zeta, 0.0).lb_slack;
  const auto eps_check = gamma_bounds_check(triple, zeta, options.epsilon);
  r.gamma_ub_ok = eps_check.ub_ok;
  r.gamma_lb_slack_eps = eps_check.lb_slack;

  const auto sweep = run_stationary_sweep(q, triple, doob, pi_local, r.t_max, true);
  r.pi_dot_gamma = sweep.pi_dot_gamma;
  const double log_lambda = std::log(triple.lambda);
  const double spread = 1.0 / r.gamma_min - 1.0;
  r.csqst_residual_sup = -std::numeric_limits<double>::infinity();
  r.csqst_residual_min = std::numeric_limits<double>::infinity();
  for (Steps t = 0; t <= r.t_max; ++t) {
    const double lt = static_cast<double>(t) * log_lambda;
    const double ratio = std::exp(sweep.log_tail[t] - lt);
    const double dev = std::abs(ratio - 1.0);
    if (dev > r.sup_ratio_dev) {
      r.sup_ratio_dev = dev;
      r.sup_ratio_dev_at = t;
    }
    const double s = sweep.doob_sep[t];
    const double lower = sweep.pi_dot_gamma * (1.0 - s);
    const double upper = sweep.pi_dot_gamma * (1.0 + s * spread);
    if (ratio < lower - options.bounds_slack || ratio > upper + options.bounds_slack) {
      ++r.bounds_violations;
    }
    const double residual = std::exp(lt) * (ratio - lower);
    r.csqst_residual_sup = std::max(r.csqst_residual_sup, residual);
    r.csqst_residual_min = std::min(r.csqst_residual_min, residual);
  }
  r.sep0 = sweep.doob_sep[0];
  r.qsd_vs_pi_sep = qsd_separation_from_pi(triple, pi_local);

  // Start-dependence diagnostics at t_max, in log space relative to P_pi.
  const double log_pi_tail = sweep.log_tail[r.t_max];
  const double log_scale = sweep.startwise_log_scale - log_pi_tail;
  const auto& u = sweep.startwise_scaled;
  r.max_start_ratio = std::exp(log_scale) * *std::max_element(u.begin(), u.end());
  for (std::size_t y = 0; y < n; ++y) {
    double mixed = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      mixed += ctx.power_T(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(q.to_full(i))) *
               u[i];
    }
    r.mixed_start_ratio_dev =
        std::max(r.mixed_start_ratio_dev, std::abs(std::exp(log_scale) * mixed - 1.0));
  }
  return r;
}

FvtlReport fvtl_report(const StochasticMatrix& p, State x, Steps T, std::optional<Steps> t_max) {
  FvtlOptions options;
  options.t_max = t_max;
  return fvtl_report(ChainContext::with_T(p, T), x, options);
}

}  // namespace fvtl
