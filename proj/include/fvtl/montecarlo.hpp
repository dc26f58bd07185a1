#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fvtl/chain.hpp"

namespace fvtl {

struct McEstimate {
  Steps t = 0;
  double point = 0.0;
  double std_error = 0.0;  // sqrt(p(1-p)/N)
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// Trajectories are simulated in blocks of this many; block b draws from
/// Rng::substream(seed, b), so results do not depend on the worker count.
inline constexpr std::size_t kTrajectoryBlock = 4096;

/// Inverse-CDF sampler over the nonzero entries of each row.
class TransitionSampler {
 public:
  explicit TransitionSampler(const StochasticMatrix& p);
  template <class Rng>
  State next(State from, Rng& rng) const {
    return draw(from, rng.uniform());
  }
  State draw(State from, double u) const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<double> cumulative_;
  std::vector<State> states_;
};

/// Fraction of N trajectories started from alpha with tau_x > t, for each t in
/// ts (sorted ascending); trajectories stop at max(ts) or on hitting x.
std::vector<McEstimate> sample_hitting_tail(const StochasticMatrix& p, const Distribution& alpha,
                                            State x, const std::vector<Steps>& ts, std::size_t N,
                                            std::uint64_t seed, std::size_t threads = 0);

struct OccupationEstimate {
  std::vector<double> frequency;
  /// Between-trajectory standard error when N >= 2, binomial otherwise.
  std::vector<double> std_error;
  Steps burn_in = 0;
  Steps horizon = 0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// Visit frequencies of X_t for t = burn_in+1..horizon over N trajectories from x0.
/// Default burn-in is 10 * find_T(P, 2) when that is below the horizon, else horizon/10.
OccupationEstimate occupation_frequency(const StochasticMatrix& p, State x0, Steps horizon,
                                        std::size_t N, std::uint64_t seed,
                                        std::optional<Steps> burn_in = std::nullopt);

}  // namespace fvtl
