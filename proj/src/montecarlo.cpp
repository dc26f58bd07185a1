#include "fvtl/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "fvtl/error.hpp"
#include "fvtl/mixing.hpp"
#include "fvtl/parallel.hpp"
#include "fvtl/rng.hpp"

namespace fvtl {

TransitionSampler::TransitionSampler(const StochasticMatrix& p) {
  const auto& rows = p.sparse();
  offsets_.reserve(p.size() + 1);
  offsets_.push_back(0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    double acc = 0.0;
    const auto cols = rows.row_columns(i);
    const auto vals = rows.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      acc += vals[k];
      cumulative_.push_back(acc);
      states_.push_back(cols[k]);
    }
    offsets_.push_back(cumulative_.size());
  }
}

State TransitionSampler::draw(State from, double u) const {
  const auto begin = cumulative_.begin() + static_cast<std::ptrdiff_t>(offsets_[from]);
  const auto end = cumulative_.begin() + static_cast<std::ptrdiff_t>(offsets_[from + 1]);
  // u is scaled by the row total so roundoff in the last cumulative value never
  // leaves a gap at the top.
  const double target = u * *(end - 1);
  auto it = std::upper_bound(begin, end, target);
  if (it == end) --it;
  return states_[static_cast<std::size_t>(it - cumulative_.begin())];
}

namespace {

State draw_start(std::span<const double> cumulative, double u) {
  const double target = u * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  if (it == cumulative.end()) --it;
  return static_cast<State>(it - cumulative.begin());
}

}  // namespace

std::vector<McEstimate> sample_hitting_tail(const StochasticMatrix& p, const Distribution& alpha,
                                            State x, const std::vector<Steps>& ts, std::size_t N,
                                            std::uint64_t seed, std::size_t threads) {
  if (N < 1) throw SpecError("sample_hitting_tail: need at least one sample");
  if (alpha.size() != p.size()) throw ShapeError("sample_hitting_tail: start is not on the chain");
  if (x >= p.size()) throw IndexError("sample_hitting_tail: target outside the chain");
  if (!std::is_sorted(ts.begin(), ts.end())) throw SpecError("sample_hitting_tail: ts must be sorted");
  if (ts.empty()) return {};
  const Steps horizon = ts.back();
  const TransitionSampler sampler(p);
  std::vector<double> start_cdf(alpha.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) start_cdf[i] = acc += alpha[i];

  const std::size_t blocks = (N + kTrajectoryBlock - 1) / kTrajectoryBlock;
  // survivors[b][k]: trajectories of block b with tau_x > ts[k].
  std::vector<std::vector<std::size_t>> survivors(blocks, std::vector<std::size_t>(ts.size(), 0));
  parallel_for(blocks, threads > 0 ? threads : thread_count(), [&](std::size_t b) {
    auto rng = Rng::substream(seed, b);
    const std::size_t first = b * kTrajectoryBlock;
    const std::size_t last = std::min(N, first + kTrajectoryBlock);
    for (std::size_t i = first; i < last; ++i) {
      State s = draw_start(start_cdf, rng.uniform());
      // Hitting time, or horizon + 1 when x is not reached by the horizon.
      Steps tau = 0;
      while (s != x && tau <= horizon) {
        s = sampler.next(s, rng);
        ++tau;
      }
      for (std::size_t k = 0; k < ts.size(); ++k) {
        if (tau > ts[k]) ++survivors[b][k];
      }
    }
  });

  std::vector<McEstimate> out;
  out.reserve(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) {
    std::size_t count = 0;
    for (const auto& block : survivors) count += block[k];
    const double p_hat = static_cast<double>(count) / static_cast<double>(N);
    out.push_back({ts[k], p_hat, std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(N)), N, seed});
  }
  return out;
}

OccupationEstimate occupation_frequency(const StochasticMatrix& p, State x0, Steps horizon,
                                        std::size_t N, std::uint64_t seed,
                                        std::optional<Steps> burn_in) {
  if (horizon < 1) throw SpecError("occupation_frequency: horizon must be at least 1");
  if (N < 1) throw SpecError("occupation_frequency: need at least one trajectory");
  if (x0 >= p.size()) throw IndexError("occupation_frequency: start outside the chain");
  Steps burn = 0;
  if (burn_in) {
    burn = *burn_in;
  } else {
    burn = horizon / 10;
    try {
      const Steps mix = 10 * find_T(p, 2.0, 10000);
      if (mix < horizon) burn = mix;
    } catch (const MixingTooSlow&) {
    } catch (const NotIrreducible&) {
    }
  }
  if (burn >= horizon) throw SpecError("occupation_frequency: burn-in must be below the horizon");

  const auto n = p.size();
  const TransitionSampler sampler(p);
  const double window = static_cast<double>(horizon - burn);
  std::vector<std::vector<double>> per_trajectory(N, std::vector<double>(n, 0.0));
  parallel_for(N, thread_count(), [&](std::size_t i) {
    auto rng = Rng::substream(seed, i);
    State s = x0;
    auto& counts = per_trajectory[i];
    for (Steps t = 1; t <= horizon; ++t) {
      s = sampler.next(s, rng);
      if (t > burn) counts[s] += 1.0;
    }
    for (auto& c : counts) c /= window;
  });

  OccupationEstimate est;
  est.frequency.assign(n, 0.0);
  est.std_error.assign(n, 0.0);
  est.burn_in = burn;
  est.horizon = horizon;
  est.n_samples = N;
  est.seed = seed;
  const double nd = static_cast<double>(N);
  for (const auto& f : per_trajectory) {
    for (std::size_t y = 0; y < n; ++y) est.frequency[y] += f[y] / nd;
  }
  for (std::size_t y = 0; y < n; ++y) {
    if (N >= 2) {
      double ss = 0.0;
      for (const auto& f : per_trajectory) ss += (f[y] - est.frequency[y]) * (f[y] - est.frequency[y]);
      est.std_error[y] = std::sqrt(ss / (nd - 1.0) / nd);
    } else {
      const double q = est.frequency[y];
      est.std_error[y] = std::sqrt(q * (1.0 - q) / window);
    }
  }
  return est;
}

}  // namespace fvtl
