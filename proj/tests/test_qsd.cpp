#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "fvtl/error.hpp"
#include "fvtl/generators.hpp"
#include "fvtl/hitting.hpp"
#include "fvtl/qsd.hpp"
#include "support.hpp"

using namespace fvtl;

TEST(SubKernel, TwoState) {
  const auto q = sub_kernel(two_state(0.3, 0.2), 0);
  ASSERT_EQ(q.size(), 1u);
  EXPECT_DOUBLE_EQ(q(0, 0), 0.8);
  EXPECT_EQ(q.to_full(0), 1u);
}

TEST(SubKernel, CompleteGraph) {
  const auto q = sub_kernel(complete_graph_walk(4), 0);
  ASSERT_EQ(q.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(q(i, j), i == j ? 0.0 : 1.0 / 3);
  }
}

TEST(SubKernel, EntryExactAndRowSums) {
  const auto p = random_dense_chain(50, 5);
  const State x = 17;
  const auto q = sub_kernel(p, x);
  for (std::size_t i = 0; i < q.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      EXPECT_EQ(q(i, j), p(q.to_full(i), q.to_full(j)));
      row += q(i, j);
    }
    double expected = 0.0;
    for (State y = 0; y < 50; ++y) expected += y == x ? 0.0 : p(q.to_full(i), y);
    EXPECT_NEAR(row, expected, 1e-15);
  }
  EXPECT_FALSE(q.to_local(x).has_value());
  EXPECT_EQ(*q.to_local(x + 1), x);
  EXPECT_THROW(sub_kernel(p, 50), IndexError);
}

TEST(SubKernel, RestrictExtendRoundTrip) {
  const auto q = sub_kernel(complete_graph_walk(5), 2);
  const std::vector<double> local{1, 2, 3, 4};
  const auto full = q.extend(local, -1.0);
  EXPECT_EQ(full, (std::vector<double>{1, 2, -1, 3, 4}));
  EXPECT_EQ(q.restrict(full), local);
}

TEST(Primitivity, Examples) {
  EXPECT_TRUE(primitivity_check(sub_kernel(complete_graph_walk(4), 0)).primitive());
  const auto path = primitivity_check(sub_kernel(cycle_walk(6), 0));
  EXPECT_TRUE(path.irreducible);
  EXPECT_EQ(path.period, 2u);
  EXPECT_EQ(primitivity_check(sub_kernel(lazy(cycle_walk(6), 0.5), 0)).period, 1u);
}

TEST(PerronPair, CompleteGraph) {
  const auto t = perron_pair(sub_kernel(complete_graph_walk(4), 1));
  EXPECT_NEAR(t.lambda, 2.0 / 3, 1e-14);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(t.mu_star[i], 1.0 / 3, 1e-14);
    EXPECT_NEAR(t.gamma[i], 1.0, 1e-14);
  }
}

TEST(PerronPair, OneByOne) {
  const auto t = perron_pair(sub_kernel(two_state(0.3, 0.2), 0));
  EXPECT_DOUBLE_EQ(t.lambda, 0.8);
  EXPECT_EQ(t.mu_star[0], 1.0);
  EXPECT_EQ(t.gamma[0], 1.0);
}

TEST(PerronPair, PeriodTwoSubKernel) {
  // path of five states with 1/2 steps: spectrum cos(k pi / 6)
  const auto t = perron_pair(sub_kernel(cycle_walk(6), 0));
  EXPECT_NEAR(t.lambda, std::cos(std::numbers::pi / 6), 1e-11);
  EXPECT_LE(t.left_residual, 1e-10);
  EXPECT_LE(t.right_residual, 1e-10);
}

TEST(PerronPair, InvariantsOnRandomChain) {
  const auto p = random_dense_chain(100, 8);
  const auto q = sub_kernel(p, 3);
  const auto t = perron_pair(q);
  EXPECT_GT(t.lambda, 0.0);
  EXPECT_LT(t.lambda, 1.0);
  EXPECT_LE(t.left_residual, 1e-10);
  EXPECT_LE(t.right_residual, 1e-10);
  EXPECT_NEAR(dot(t.mu_star.weights(), t.gamma), 1.0, 1e-12);
  double sum = 0.0;
  for (double m : t.mu_star.weights()) sum += m;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_GT(t.gamma_min(), 0.0);

  // independent residuals
  const Eigen::Map<const Eigen::RowVectorXd> mu(t.mu_star.weights().data(), 99);
  const Eigen::Map<const Eigen::VectorXd> g(t.gamma.data(), 99);
  EXPECT_LE((mu * q.dense() - t.lambda * mu).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((q.dense() * g - t.lambda * g).cwiseAbs().maxCoeff(), 1e-10);

  // growth-rate oracle
  SurvivalSequence seq(q, std::vector<double>(99, 1.0 / 99));
  for (int s = 0; s < 2000; ++s) seq.step();
  EXPECT_NEAR(std::exp(seq.log_mass() / 2000.0), t.lambda, 1e-6);

  // eigensolver oracle
  Eigen::EigenSolver<Eigen::MatrixXd> es(q.dense());
  double top = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) top = std::max(top, std::abs(es.eigenvalues()(i)));
  EXPECT_NEAR(t.lambda, top, 1e-12);
}

TEST(PerronPair, SeedStability) {
  for (std::uint64_t chain_seed : {1u, 2u, 3u}) {
    const auto q = sub_kernel(random_dense_chain(40, chain_seed), 0);
    const auto a = perron_pair(q);
    for (std::uint64_t s : {7u, 99u}) {
      PerronOptions opt;
      opt.seed = s;
      const auto b = perron_pair(q, opt);
      EXPECT_LE(std::abs(a.lambda - b.lambda), 1e-10);
      EXPECT_LE(check::max_abs_diff(a.mu_star.weights(), b.mu_star.weights()), 1e-8);
      EXPECT_LE(check::max_abs_diff(a.gamma, b.gamma), 1e-8);
    }
  }
}

TEST(PerronPair, ReducibleSubKernelThrows) {
  // star: removing the hub leaves isolated leaves
  std::vector<std::vector<double>> rows(4, std::vector<double>(4, 0.0));
  rows[0] = {0.0, 1.0 / 3, 1.0 / 3, 1.0 / 3};
  for (int i = 1; i < 4; ++i) rows[i][0] = 1.0;
  const auto p = StochasticMatrix::from_rows(rows);
  EXPECT_THROW(perron_pair(sub_kernel(p, 0)), NotIrreducible);
}

TEST(PerronPair, IterationCapGivesNumericalFailure) {
  PerronOptions opt;
  opt.max_iterations = 2;
  opt.seed = 5;
  try {
    perron_pair(sub_kernel(random_dense_chain(30, 1), 0), opt);
    FAIL() << "expected NumericalFailure";
  } catch (const NumericalFailure& e) {
    EXPECT_GT(e.last_residual(), 0.0);
  }
}

TEST(DoobTransform, CompleteGraph) {
  const auto q = sub_kernel(complete_graph_walk(4), 0);
  const auto d = doob_transform(q, perron_pair(q));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(d.nu[i], 1.0 / 3, 1e-14);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(d.p_tilde(i, j), i == j ? 0.0 : 0.5, 1e-14);
  }
}

TEST(DoobTransform, TwoState) {
  const auto q = sub_kernel(two_state(0.3, 0.2), 0);
  const auto d = doob_transform(q, perron_pair(q));
  EXPECT_EQ(d.p_tilde.size(), 1u);
  EXPECT_EQ(d.p_tilde(0, 0), 1.0);
  EXPECT_EQ(d.nu[0], 1.0);
}

TEST(DoobTransform, InvariantsAndPowerIdentity) {
  const auto p = random_dense_chain(50, 13);
  const auto q = sub_kernel(p, 9);
  const auto t = perron_pair(q);
  const auto d = doob_transform(q, t);
  EXPECT_LE(d.p_tilde.max_row_sum_deviation(), 1e-12);
  std::vector<double> nup(49);
  d.p_tilde.sparse().left_multiply(d.nu.weights(), nup);
  EXPECT_LE(check::max_abs_diff(nup, d.nu.weights()), 1e-10);
  for (std::size_t z = 0; z < 49; ++z) {
    for (std::size_t y = 0; y < 49; ++y) {
      EXPECT_NEAR(d.p_tilde(z, y), t.gamma[y] * q(z, y) / (t.gamma[z] * t.lambda), 1e-12);
    }
  }
  DenseMatrix pt = DenseMatrix::Identity(49, 49);
  DenseMatrix qt = DenseMatrix::Identity(49, 49);
  double worst = 0.0;
  for (Steps s = 1; s <= 50; ++s) {
    pt = pt * d.p_tilde.dense();
    qt = qt * q.dense();
    const double lt = std::pow(t.lambda, static_cast<double>(s));
    for (Eigen::Index z = 0; z < 49; ++z) {
      for (Eigen::Index y = 0; y < 49; ++y) {
        worst = std::max(worst, std::abs(pt(z, y) - t.gamma[y] * qt(z, y) / (t.gamma[z] * lt)));
      }
    }
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(DoobTransform, RejectsNonPositiveGamma) {
  const auto q = sub_kernel(complete_graph_walk(4), 0);
  auto t = perron_pair(q);
  t.gamma[1] = 0.0;
  EXPECT_THROW(doob_transform(q, t), PositivityError);
}

TEST(DoobSeparation, CompleteGraphExamples) {
  const auto q = sub_kernel(complete_graph_walk(4), 0);
  const auto d = doob_transform(q, perron_pair(q));
  EXPECT_NEAR(doob_separation(d, d.nu, 0), 0.0, 1e-15);
  const auto z = Distribution::point_mass(3, 1);
  EXPECT_NEAR(doob_separation(d, z, 2), 0.25, 1e-14);
  EXPECT_NEAR(doob_separation(d, z, 1), 1.0, 1e-14);
  DoobSeparationSequence seq(d, z);
  seq.step();
  seq.step();
  EXPECT_NEAR(seq.separation(), 0.25, 1e-14);
}

TEST(DoobSeparation, Submultiplicative) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto q = sub_kernel(random_regular_digraph_walk(20, 3, seed), 0);
    const auto d = doob_transform(q, perron_pair(q));
    std::vector<double> s;
    for (Steps t = 0; t <= 12; ++t) s.push_back(doob_worst_separation(d, t));
    for (Steps t = 0; t <= 6; ++t) {
      for (Steps u = 0; u <= 6; ++u) EXPECT_LE(s[t + u], s[t] * s[u] + 1e-9);
    }
  }
}

TEST(TiltMeasure, Examples) {
  const std::vector<double> alpha{0.2, 0.3, 0.5};
  const std::vector<double> ones(3, 1.0);
  EXPECT_LE(check::max_abs_diff(tilt_measure(alpha, ones).weights(), alpha), 1e-16);

  const auto q = sub_kernel(random_dense_chain(20, 4), 2);
  const auto t = perron_pair(q);
  const auto d = doob_transform(q, t);
  EXPECT_LE(check::max_abs_diff(tilt_measure(t.mu_star.weights(), t.gamma).weights(),
                                  d.nu.weights()),
            1e-15);

  const std::vector<double> gamma{0.5, 2.0, 1.25};
  const auto tilted = tilt_measure(alpha, gamma);
  double sum = 0.0;
  for (double v : tilted.weights()) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_THROW(tilt_measure(std::vector<double>{0, 0, 0}, gamma), DegenerateTilt);
}

TEST(GammaRatio, MatchesTailRatios) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const std::size_t n = 10 + 10 * seed;
    const auto q = sub_kernel(random_dense_chain(n, seed), 0);
    const auto t = perron_pair(q);
    Eigen::EigenSolver<Eigen::MatrixXd> es(q.dense());
    std::vector<double> mods;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) mods.push_back(std::abs(es.eigenvalues()(i)));
    std::sort(mods.rbegin(), mods.rend());
    const double ratio = mods[1] / mods[0];
    const auto steps = static_cast<Steps>(std::ceil(std::log(1e-8) / std::log(ratio)));
    StartwiseSurvival surv(q);
    for (Steps s = 0; s < steps; ++s) surv.step();
    const auto tail = surv.scaled();
    for (std::size_t y = 0; y < q.size(); ++y) {
      EXPECT_NEAR(tail[y] / tail[0], t.gamma[y] / t.gamma[0], 1e-6);
    }
  }
}
