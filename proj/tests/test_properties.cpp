#include <gtest/gtest.h>

#include <cmath>

#include "fvtl/generators.hpp"
#include "fvtl/hitting.hpp"
#include "support.hpp"

using namespace fvtl;

namespace {

struct Case {
  std::string name;
  StochasticMatrix p;
};

std::vector<Case> corpus() {
  std::vector<Case> out;
  for (std::uint64_t s = 1; s <= 4; ++s) {
    out.push_back({"dense" + std::to_string(s), random_dense_chain(8 + 8 * s, s, 1.0 + 0.5 * s)});
    out.push_back({"rrd" + std::to_string(s), random_regular_digraph_walk(10 + 10 * s, 3, s)});
  }
  out.push_back({"er", erdos_renyi_walk(40, 0.1, 2)});
  out.push_back({"lazy_cycle", lazy(cycle_walk(9), 0.5)});
  out.push_back({"sparse", check::sparse_random_chain(25, 3)});
  return out;
}

}  // namespace

TEST(Properties, GeneratedChainsAreStochasticAndErgodic) {
  for (const auto& c : corpus()) {
    EXPECT_LE(c.p.max_row_sum_deviation(), 1e-12) << c.name;
    EXPECT_TRUE(connectivity(c.p).primitive()) << c.name;
  }
}

TEST(Properties, SemigroupEvolution) {
  for (const auto& c : corpus()) {
    const auto n = c.p.size();
    const auto alpha = Distribution::point_mass(n, n / 2);
    for (Steps s : {0u, 3u, 7u}) {
      for (Steps t : {1u, 5u}) {
        const auto direct = evolve(c.p, alpha, s + t);
        const auto split = evolve(c.p, evolve(c.p, alpha, s), t);
        EXPECT_LE(check::max_abs_diff(direct.weights(), split.weights()), 1e-12) << c.name;
      }
    }
  }
}

TEST(Properties, SeparationNonincreasing) {
  for (const auto& c : corpus()) {
    const auto pi = stationary_distribution(c.p);
    auto mu = Distribution::point_mass(c.p.size(), 0);
    double prev = separation(mu, pi);
    for (Steps t = 1; t <= 60; ++t) {
      mu = evolve(c.p, mu, 1);
      const double s = separation(mu, pi);
      EXPECT_LE(s, prev + 1e-12) << c.name << " t=" << t;
      prev = s;
    }
  }
}

TEST(Properties, QuasiStationaryTailIsGeometric) {
  for (const auto& c : corpus()) {
    for (State x : {State{0}, c.p.size() - 1}) {
      const auto q = sub_kernel(c.p, x);
      const auto t = perron_pair(q);
      const auto tail = survival_tail(q, t.mu_star.weights(), 200);
      for (Steps s = 0; s <= 200; ++s) {
        EXPECT_LE(std::abs(tail.values[s] - std::pow(t.lambda, s)), 1e-9 * s + 1e-15) << c.name;
      }
    }
  }
}

TEST(Properties, EigentimeIndependentOfStart) {
  for (const auto& c : corpus()) {
    const auto n = c.p.size();
    if (n > 50) continue;
    const auto pi = stationary_distribution(c.p);
    std::vector<double> sums(n, 0.0);
    for (State x = 0; x < n; ++x) {
      const auto h = expected_hitting_times_to(c.p, x);
      for (State y = 0; y < n; ++y) sums[y] += pi[x] * h[y];
    }
    const auto [lo, hi] = std::minmax_element(sums.begin(), sums.end());
    EXPECT_LE((*hi - *lo) / *hi, 1e-8) << c.name;
  }
}

TEST(Properties, DualMethodHittingTimes) {
  for (const auto& c : corpus()) {
    const auto pi = stationary_distribution(c.p);
    const auto env = mixing_envelope(c.p, pi);
    for (State x : {State{1}, c.p.size() / 2}) {
      const double z = fundamental_diag(c.p, pi, x, 1e-13, env);
      EXPECT_LE(check::relative_diff(z / pi[x], expected_hitting_linear(c.p, pi, x)), 1e-8) << c.name;
    }
  }
}

TEST(Properties, TailMonotoneAndInRange) {
  for (const auto& c : corpus()) {
    const auto p = c.p;
    const auto q = sub_kernel(p, 2);
    const auto tail = survival_tail(q, Distribution::point_mass(p.size(), 0), 300);
    EXPECT_EQ(tail.values[0], 1.0);
    for (Steps t = 1; t <= 300; ++t) {
      EXPECT_LE(tail.values[t], tail.values[t - 1] + 1e-12) << c.name;
      EXPECT_GE(tail.values[t], 0.0);
    }
  }
}

TEST(Properties, LocalTimeMass) {
  for (const auto& c : corpus()) {
    for (Steps T : {1u, 6u, 25u}) {
      const auto row = local_times_from(c.p, 0, T);
      double s = 0.0;
      for (double v : row) s += v;
      EXPECT_NEAR(s, static_cast<double>(T), 1e-10) << c.name;
    }
  }
}

TEST(Properties, BoundsSandwichAndCsqstResiduals) {
  for (const auto& c : corpus()) {
    const State x = 1;
    const auto q = sub_kernel(c.p, x);
    const auto t = perron_pair(q);
    const auto d = doob_transform(q, t);
    const auto pi = stationary_distribution(c.p);
    const auto alpha = q.restrict(pi.weights());
    const auto tail = survival_tail(q, alpha, 100);
    for (Steps s = 0; s <= 100; ++s) {
      const auto b = tail_bounds(t, d, alpha, s);
      EXPECT_LE(b.lower, tail.values[s] + 1e-9) << c.name;
      EXPECT_GE(b.upper, tail.values[s] - 1e-9) << c.name;
    }
    const auto r = csqst_residual(c.p, x, 100);
    for (double v : r.residuals) EXPECT_GE(v, -1e-9) << c.name;
  }
}

TEST(Properties, LazyPreservesStationary) {
  for (const auto& c : corpus()) {
    const auto pi = stationary_distribution(c.p);
    const auto lpi = stationary_distribution(lazy(c.p, 0.4));
    EXPECT_LE(check::max_abs_diff(pi.weights(), lpi.weights()), 1e-12) << c.name;
  }
}
