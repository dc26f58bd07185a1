#pragma once

#include <map>
#include <vector>

#include "fvtl/chain.hpp"

namespace fvtl {

/// P^t advanced one step at a time together with the uniform distance
/// D(t) = max_{x,y} |P^t(x,y) - pi(y)|.
class PowerSequence {
 public:
  PowerSequence(StochasticMatrix p, Distribution pi);

  Steps time() const noexcept { return time_; }
  const DenseMatrix& power() const noexcept { return power_; }
  double distance() const noexcept { return distance_; }
  /// max_x sum_y |P^t(x,y) - pi(y)|, which bounds the contraction of P^t on
  /// zero-mass signed measures in the l1 norm.
  double l1_distance() const noexcept { return l1_distance_; }
  const StochasticMatrix& chain() const noexcept { return p_; }
  const Distribution& stationary() const noexcept { return pi_; }

  void step();
  void advance_to(Steps t);

 private:
  void update_distance();

  StochasticMatrix p_;
  Distribution pi_;
  DenseMatrix power_;
  DenseMatrix scratch_;
  Steps time_ = 0;
  double distance_ = 0.0;
  double l1_distance_ = 0.0;
};

double uniform_distance(const StochasticMatrix& p, const Distribution& pi, Steps t);
double uniform_distance(const StochasticMatrix& p, Steps t);

struct MixingTime {
  Steps T = 0;
  double distance = 0.0;     // D(T)
  double l1_distance = 0.0;  // max_x ||P^T(x,.) - pi||_1
  DenseMatrix power;      // P^T, reused by per-target analyses
};

/// Smallest T <= cap with D(T) <= n^{-c}, compared without slack.
/// Throws MixingTooSlow carrying D(cap).
MixingTime mixing_time(const StochasticMatrix& p, const Distribution& pi, double c, Steps cap);
Steps find_T(const StochasticMatrix& p, double c, Steps cap);

struct HypothesisReport {
  Steps T = 0;
  double c = 0.0;
  double D_T = 0.0;
  bool hp1_ok = false;     // D_T <= n^{-c}
  double hp2_value = 0.0;  // T * pi_max
  double hp3_value = 0.0;  // pi_min * n^2
  std::map<State, double> eps1;  // (2T+1) pi(x) per requested target
  double eps2 = 0.0;             // max_z || P^T(z,.)/pi - 1 ||_inf
};

HypothesisReport check_hypotheses(const StochasticMatrix& p, Steps T, double c,
                                  const std::vector<State>& targets);
/// Same, reusing a precomputed pi and P^T.
HypothesisReport check_hypotheses(const Distribution& pi, const DenseMatrix& power_T, Steps T,
                                  double c, const std::vector<State>& targets);

}  // namespace fvtl
