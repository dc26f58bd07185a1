// Acceptance run: one line per criterion, nonzero exit if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fvtl/error.hpp"
#include "fvtl/generators.hpp"
#include "fvtl/hitting.hpp"
#include "fvtl/montecarlo.hpp"
#include "fvtl/parallel.hpp"

using namespace fvtl;

namespace {

// criterion 1
constexpr double kLambdaTol = 1e-12;
constexpr double kSupRatioTol = 1e-10;
constexpr double kPiGammaTol = 1e-10;
constexpr double kCsqstTol = 1e-12;
constexpr double kCompleteSeconds = 10.0;
// criterion 2
constexpr double kQuasiExpSlope = 1e-9;
constexpr Steps kQuasiExpHorizon = 200;
constexpr double kQuasiExpSeconds = 60.0;
// criteria 3, 4
constexpr double kDualRelTol = 1e-8;
constexpr double kEigentimeRelTol = 1e-8;
// criterion 5
constexpr Steps kSandwichHorizon = 100;
constexpr double kSandwichSlack = 1e-9;
// criterion 6
constexpr double kRrdC = 2.2;
constexpr double kSupRatioAt200 = 0.15;
constexpr double kLambdaApproxAt1000 = 0.05;
constexpr double kRrdSeconds = 600.0;
// criterion 7
constexpr double kGammaMax = 1.1;
constexpr double kGammaLbSlack = -0.1;
// criterion 8
constexpr double kSigmas = 3.0;
constexpr std::size_t kMcSamples = 100000;
constexpr double kMcSeconds = 30.0;
// criterion 9
constexpr Steps kMixingCap = 100000;
// criterion 10
constexpr double kQsdSepAt1000 = 0.15;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& title, const std::string& detail, double secs) {
  std::printf("criterion %2d %s  %s: %s [%.2f s]\n", id, ok ? "PASS" : "FAIL", title.c_str(),
              detail.c_str(), secs);
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void criterion_1() {
  const auto start = Clock::now();
  double lambda_err = 0, sup_err = 0, pg_err = 0, csqst = 0;
  for (std::size_t n : {50u, 100u, 200u}) {
    const auto ctx = ChainContext::with_c(complete_graph_walk(n), 2.5);
    const auto r = fvtl_report(ctx, 0);
    const double nd = static_cast<double>(n);
    lambda_err = std::max(lambda_err, std::abs(r.lambda - (nd - 2) / (nd - 1)));
    sup_err = std::max(sup_err, std::abs(r.sup_ratio_dev - 1 / nd));
    pg_err = std::max(pg_err, std::abs(r.pi_dot_gamma - (nd - 1) / nd));
    csqst = std::max({csqst, std::abs(r.csqst_residual_sup), std::abs(r.csqst_residual_min)});
  }
  const double secs = seconds_since(start);
  const bool ok = lambda_err <= kLambdaTol && sup_err <= kSupRatioTol && pg_err <= kPiGammaTol &&
                  csqst <= kCsqstTol && secs <= kCompleteSeconds;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "max |lambda err| %.2e, |sup_ratio_dev - 1/n| %.2e, |<pi,gamma> err| %.2e, "
                "max |csqst residual| %.2e",
                lambda_err, sup_err, pg_err, csqst);
  report(1, ok, "complete-graph control n=50,100,200", buf, secs);
}

struct DenseCase {
  StochasticMatrix p;
  std::vector<State> targets;
};

std::vector<DenseCase> dense_corpus() {
  std::vector<DenseCase> out;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const std::size_t n = 20 + 4 * k;  // 20..96
    auto p = random_dense_chain(n, 1000 + k, 1.0 + 0.1 * static_cast<double>(k % 5));
    out.push_back({p, sample_targets(n, 3, 2000 + k)});
  }
  return out;
}

void criterion_2(const std::vector<DenseCase>& corpus) {
  const auto start = Clock::now();
  double worst_ratio = 0;  // max_t |diff| / t
  double worst_t0 = 0;
  std::vector<double> per(corpus.size() * 3, 0.0), per0(corpus.size() * 3, 0.0);
  parallel_for(per.size(), thread_count(), [&](std::size_t j) {
    const auto& c = corpus[j / 3];
    const auto q = sub_kernel(c.p, c.targets[j % 3]);
    const auto t = perron_pair(q);
    const auto tail = survival_tail(q, t.mu_star.weights(), kQuasiExpHorizon);
    per0[j] = std::abs(tail.values[0] - 1.0);
    for (Steps s = 1; s <= kQuasiExpHorizon; ++s) {
      const double d = std::abs(tail.values[s] - std::pow(t.lambda, static_cast<double>(s)));
      per[j] = std::max(per[j], d / static_cast<double>(s));
    }
  });
  for (std::size_t j = 0; j < per.size(); ++j) {
    worst_ratio = std::max(worst_ratio, per[j]);
    worst_t0 = std::max(worst_t0, per0[j]);
  }
  const double secs = seconds_since(start);
  // at t = 0 the identity is the normalization of mu*, checked to roundoff
  const bool ok = worst_ratio <= kQuasiExpSlope && worst_t0 <= 1e-14 && secs <= kQuasiExpSeconds;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "20 dense chains n=20..96 x 3 targets: max_t |P_mu*(tau>t) - lambda^t|/t = %.2e "
                "(t=1..200), |sum mu* - 1| = %.1e",
                worst_ratio, worst_t0);
  report(2, ok, "quasi-stationary law", buf, secs);
}

void criterion_3(const std::vector<DenseCase>& corpus) {
  const auto start = Clock::now();
  std::vector<double> rel(corpus.size() * 3, 0.0);
  parallel_for(rel.size(), thread_count(), [&](std::size_t j) {
    const auto& c = corpus[j / 3];
    const State x = c.targets[j % 3];
    const auto pi = stationary_distribution(c.p);
    const auto env = mixing_envelope(c.p, pi);
    const double a = fundamental_diag(c.p, pi, x, 1e-13, env) / pi[x];
    const double b = expected_hitting_linear(c.p, pi, x);
    rel[j] = std::abs(a - b) / std::max(std::abs(a), std::abs(b));
  });
  const double worst = *std::max_element(rel.begin(), rel.end());
  report(3, worst <= kDualRelTol, "dual-method E_pi[tau_x]",
         fmt("max relative gap Z(x,x)/pi(x) vs linear solve = %.2e over 60 cells", worst),
         seconds_since(start));
}

void criterion_4(const std::vector<DenseCase>& corpus) {
  const auto start = Clock::now();
  std::vector<StochasticMatrix> chains;
  for (const auto& c : corpus) {
    if (c.p.size() <= 50) chains.push_back(c.p);
  }
  for (std::uint64_t s = 1; s <= 3; ++s) chains.push_back(random_regular_digraph_walk(50, 3, s));
  std::vector<double> spread(chains.size(), 0.0);
  parallel_for(chains.size(), thread_count(), [&](std::size_t i) {
    const auto& p = chains[i];
    const auto n = p.size();
    const auto pi = stationary_distribution(p);
    std::vector<double> sums(n, 0.0);
    for (State x = 0; x < n; ++x) {
      const auto h = expected_hitting_times_to(p, x);
      for (State y = 0; y < n; ++y) sums[y] += pi[x] * h[y];
    }
    const auto [lo, hi] = std::minmax_element(sums.begin(), sums.end());
    spread[i] = (*hi - *lo) / *hi;
  });
  const double worst = *std::max_element(spread.begin(), spread.end());
  char buf[200];
  std::snprintf(buf, sizeof buf, "%zu chains with n<=50: max relative spread over y = %.2e",
                chains.size(), worst);
  report(4, worst <= kEigentimeRelTol, "eigentime y-independence", buf, seconds_since(start));
}

void criterion_5() {
  const auto start = Clock::now();
  std::vector<StochasticMatrix> chains;
  for (std::uint64_t s = 1; s <= 5; ++s) chains.push_back(random_dense_chain(20 + 5 * s, 300 + s, 2.0));
  for (std::uint64_t s = 1; s <= 5; ++s) chains.push_back(random_regular_digraph_walk(20 + 5 * s, 3, 400 + s));
  std::vector<std::size_t> violations(chains.size(), 0), checks(chains.size(), 0);
  parallel_for(chains.size(), thread_count(), [&](std::size_t i) {
    const auto& p = chains[i];
    const State x = 0;
    const auto q = sub_kernel(p, x);
    const auto triple = perron_pair(q);
    const auto doob = doob_transform(q, triple);
    const auto pi = stationary_distribution(p);
    std::vector<std::vector<double>> starts;
    std::vector<double> point(q.size(), 0.0);
    point[q.size() / 2] = 1.0;
    starts.push_back(point);
    starts.push_back(q.restrict(pi.weights()));
    starts.push_back(triple.mu_star.vector());
    for (const auto& alpha : starts) {
      const auto tail = survival_tail(q, alpha, kSandwichHorizon);
      for (Steps t = 0; t <= kSandwichHorizon; ++t) {
        const auto b = tail_bounds(triple, doob, alpha, t);
        ++checks[i];
        if (b.lower > tail.values[t] + kSandwichSlack || b.upper < tail.values[t] - kSandwichSlack) {
          ++violations[i];
        }
      }
    }
  });
  std::size_t v = 0, c = 0;
  for (std::size_t i = 0; i < chains.size(); ++i) {
    v += violations[i];
    c += checks[i];
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "%zu violations in %zu checks (10 chains x 3 starts x t=0..100)", v, c);
  report(5, v == 0, "tail bounds sandwich", buf, seconds_since(start));
}

struct RrdRun {
  std::size_t n;
  std::uint64_t seed;
  bool ok = false;
  std::string error;
  FvtlReport report;
};

std::vector<RrdRun> rrd_runs(double& secs) {
  const auto start = Clock::now();
  std::vector<RrdRun> runs;
  for (std::size_t n : {200u, 500u, 1000u}) {
    for (std::uint64_t s = 1; s <= 3; ++s) {
      RrdRun run;
      run.n = n;
      run.seed = s;
      runs.push_back(run);
    }
  }
  parallel_for(runs.size(), thread_count(), [&](std::size_t i) {
    auto& run = runs[i];
    try {
      const auto ctx = ChainContext::with_c(random_regular_digraph_walk(run.n, 3, run.seed), kRrdC);
      run.report = fvtl_report(ctx, 0);
      run.ok = true;
    } catch (const std::exception& e) {
      run.error = error_name(e) + ": " + e.what();
    }
  });
  secs = seconds_since(start);
  return runs;
}

std::vector<double> medians_by_n(const std::vector<RrdRun>& runs, double FvtlReport::*field) {
  std::vector<double> out;
  for (std::size_t n : {200u, 500u, 1000u}) {
    std::vector<double> v;
    for (const auto& r : runs) {
      if (r.n == n && r.ok) v.push_back(r.report.*field);
    }
    out.push_back(v.empty() ? NAN : median(v));
  }
  return out;
}

bool nonincreasing(const std::vector<double>& m) {
  for (std::size_t i = 1; i < m.size(); ++i) {
    if (!(m[i] <= m[i - 1])) return false;
  }
  return true;
}

void criterion_6(const std::vector<RrdRun>& runs, double secs) {
  bool ok = secs <= kRrdSeconds;
  std::string notes;
  double sup200 = 0, approx1000 = 0;
  for (const auto& r : runs) {
    if (!r.ok) {
      ok = false;
      notes += " n=" + std::to_string(r.n) + " seed=" + std::to_string(r.seed) + " " + r.error;
      continue;
    }
    if (!std::isfinite(r.report.sup_ratio_dev)) ok = false;
    if (r.n == 200) sup200 = std::max(sup200, r.report.sup_ratio_dev);
    if (r.n == 1000) approx1000 = std::max(approx1000, r.report.lambda_approx_dev);
  }
  const auto med = medians_by_n(runs, &FvtlReport::sup_ratio_dev);
  ok = ok && sup200 <= kSupRatioAt200 && nonincreasing(med) && approx1000 <= kLambdaApproxAt1000;
  char buf[400];
  std::snprintf(buf, sizeof buf,
                "max sup_ratio_dev at n=200 %.4f; medians (200,500,1000) = (%.5f, %.5f, %.5f); "
                "max lambda_approx_dev at n=1000 %.2e%s",
                sup200, med[0], med[1], med[2], approx1000, notes.c_str());
  report(6, ok, "FVTL trend on random 3-regular digraphs, c=2.2", buf, secs);
}

void criterion_7(const std::vector<RrdRun>& runs) {
  double gmax = 0, slack = INFINITY;
  bool ok = true;
  for (const auto& r : runs) {
    if (!r.ok) {
      ok = false;
      continue;
    }
    gmax = std::max(gmax, r.report.gamma_max);
    slack = std::min(slack, r.report.gamma_lb_slack);
  }
  ok = ok && gmax <= kGammaMax && slack >= kGammaLbSlack;
  char buf[200];
  std::snprintf(buf, sizeof buf, "max gamma %.4f, min lower-bound slack %.4f over 9 instances", gmax, slack);
  report(7, ok, "gamma bounds", buf, 0.0);
}

void criterion_8() {
  const auto start = Clock::now();
  const std::vector<StochasticMatrix> chains{complete_graph_walk(4), random_dense_chain(30, 81),
                                             random_regular_digraph_walk(30, 3, 82)};
  const std::vector<Steps> ts{1, 5, 20};
  int cells = 0, inside = 0;
  double worst_z = 0;
  for (std::size_t i = 0; i < chains.size(); ++i) {
    const auto& p = chains[i];
    const auto pi = stationary_distribution(p);
    const auto exact = survival_tail(sub_kernel(p, 0), pi, ts.back());
    const auto est = sample_hitting_tail(p, pi, 0, ts, kMcSamples, 9000 + i);
    for (const auto& e : est) {
      const double z = std::abs(e.point - exact.values[e.t]) / e.std_error;
      worst_z = std::max(worst_z, z);
      ++cells;
      inside += z <= kSigmas;
    }
  }
  const double secs = seconds_since(start);
  char buf[200];
  std::snprintf(buf, sizeof buf, "%d/%d cells within 3 stderr, max |z| = %.2f", inside, cells, worst_z);
  report(8, inside == cells && secs <= kMcSeconds, "Monte Carlo cross-validation", buf, secs);
}

void criterion_9() {
  const auto start = Clock::now();
  const auto cycle = cycle_walk(20);
  const auto pi = stationary_distribution(cycle);
  bool all_slow = true;
  for (double c : {2.0 + 1e-9, 2.1, 2.5, 3.0, 5.0}) {
    try {
      find_T(cycle, c, kMixingCap);
      all_slow = false;
    } catch (const MixingTooSlow&) {
    }
  }
  // D(t) > 20^-2 for every t <= cap rules out every c > 2 at once
  PowerSequence seq(cycle, pi);
  double min_d = seq.distance();
  while (seq.time() < kMixingCap) {
    seq.step();
    min_d = std::min(min_d, seq.distance());
  }
  const bool bound = min_d > std::pow(20.0, -2.0);
  Steps lazy_T = 0;
  try {
    lazy_T = find_T(lazy(cycle, 0.5), 2.5, kMixingCap);
  } catch (const MixingTooSlow&) {
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "min_{t<=1e5} D(t) = %.4f > 1/400; lazy cycle find_T(c=2.5) = %zu",
                min_d, lazy_T);
  report(9, all_slow && bound && lazy_T > 0, "periodic negative control", buf, seconds_since(start));
}

void criterion_10(const std::vector<RrdRun>& runs) {
  bool ok = true;
  double at1000 = 0;
  for (const auto& r : runs) {
    if (!r.ok) {
      ok = false;
      continue;
    }
    if (r.n == 1000) at1000 = std::max(at1000, r.report.qsd_vs_pi_sep);
  }
  const auto med = medians_by_n(runs, &FvtlReport::qsd_vs_pi_sep);
  ok = ok && at1000 <= kQsdSepAt1000 && nonincreasing(med);
  char buf[300];
  std::snprintf(buf, sizeof buf, "max at n=1000 %.4f; medians (200,500,1000) = (%.4f, %.4f, %.4f)",
                at1000, med[0], med[1], med[2]);
  report(10, ok, "quasi-stationary vs stationary separation", buf, 0.0);
}

}  // namespace

int main() {
  const auto corpus = dense_corpus();
  const std::vector<std::function<void()>> early = {
      criterion_1, [&] { criterion_2(corpus); }, [&] { criterion_3(corpus); },
      [&] { criterion_4(corpus); }, criterion_5};
  for (const auto& f : early) {
    try {
      f();
    } catch (const std::exception& e) {
      std::printf("unexpected %s: %s\n", error_name(e).c_str(), e.what());
      ++failures;
    }
  }
  double rrd_secs = 0;
  const auto runs = rrd_runs(rrd_secs);
  criterion_6(runs, rrd_secs);
  criterion_7(runs);
  criterion_8();
  criterion_9();
  criterion_10(runs);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
