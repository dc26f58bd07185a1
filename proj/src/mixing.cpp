#include "fvtl/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fvtl/error.hpp"

namespace fvtl {

PowerSequence::PowerSequence(StochasticMatrix p, Distribution pi)
    : p_(std::move(p)), pi_(std::move(pi)) {
  if (pi_.size() != p_.size()) throw ShapeError("PowerSequence: pi size does not match chain");
  const auto n = static_cast<Eigen::Index>(p_.size());
  power_ = DenseMatrix::Identity(n, n);
  scratch_.resize(n, n);
  update_distance();
}

void PowerSequence::step() {
  const auto n = p_.size();
  for (std::size_t x = 0; x < n; ++x) {
    const auto row = static_cast<Eigen::Index>(x);
    p_.sparse().left_multiply({power_.row(row).data(), n}, {scratch_.row(row).data(), n});
  }
  power_.swap(scratch_);
  ++time_;
  update_distance();
}

void PowerSequence::advance_to(Steps t) {
  while (time_ < t) step();
}

void PowerSequence::update_distance() {
  const auto n = static_cast<Eigen::Index>(p_.size());
  double d = 0.0;
  double l1 = 0.0;
  for (Eigen::Index x = 0; x < n; ++x) {
    double row = 0.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      const double e = std::abs(power_(x, y) - pi_[static_cast<std::size_t>(y)]);
      d = std::max(d, e);
      row += e;
    }
    l1 = std::max(l1, row);
  }
  distance_ = d;
  l1_distance_ = l1;
}

double uniform_distance(const StochasticMatrix& p, const Distribution& pi, Steps t) {
  PowerSequence seq(p, pi);
  seq.advance_to(t);
  return seq.distance();
}

double uniform_distance(const StochasticMatrix& p, Steps t) {
  return uniform_distance(p, stationary_distribution(p), t);
}

MixingTime mixing_time(const StochasticMatrix& p, const Distribution& pi, double c, Steps cap) {
  if (!(c > 0.0)) throw SpecError("mixing exponent c must be positive");
  if (cap < 1) throw SpecError("mixing cap must be at least 1");
  const double threshold = std::pow(static_cast<double>(p.size()), -c);
  PowerSequence seq(p, pi);
  while (seq.time() < cap) {
    seq.step();
    if (seq.distance() <= threshold) return {seq.time(), seq.distance(), seq.l1_distance(), seq.power()};
  }
  std::ostringstream msg;
  msg.precision(6);
  msg << "D(" << cap << ") = " << seq.distance() << " exceeds n^-c = " << threshold;
  throw MixingTooSlow(msg.str(), seq.distance());
}

Steps find_T(const StochasticMatrix& p, double c, Steps cap) {
  return mixing_time(p, stationary_distribution(p), c, cap).T;
}

HypothesisReport check_hypotheses(const Distribution& pi, const DenseMatrix& power_T, Steps T,
                                  double c, const std::vector<State>& targets) {
  const auto n = pi.size();
  if (static_cast<std::size_t>(power_T.rows()) != n) {
    throw ShapeError("check_hypotheses: P^T size does not match pi");
  }
  HypothesisReport r;
  r.T = T;
  r.c = c;
  const double nd = static_cast<double>(n);
  for (std::size_t z = 0; z < n; ++z) {
    for (std::size_t y = 0; y < n; ++y) {
      const double v = power_T(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(y));
      r.D_T = std::max(r.D_T, std::abs(v - pi[y]));
      r.eps2 = std::max(r.eps2, std::abs(v / pi[y] - 1.0));
    }
  }
  r.hp1_ok = r.D_T <= std::pow(nd, -c);
  r.hp2_value = static_cast<double>(T) * pi.max();
  r.hp3_value = pi.min() * nd * nd;
  for (auto x : targets) {
    if (x >= n) throw IndexError("check_hypotheses: target outside the state space");
    r.eps1[x] = (2.0 * static_cast<double>(T) + 1.0) * pi[x];
  }
  return r;
}

HypothesisReport check_hypotheses(const StochasticMatrix& p, Steps T, double c,
                                  const std::vector<State>& targets) {
  PowerSequence seq(p, stationary_distribution(p));
  seq.advance_to(T);
  return check_hypotheses(seq.stationary(), seq.power(), T, c, targets);
}

}  // namespace fvtl
