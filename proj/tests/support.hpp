#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "fvtl/chain.hpp"
#include "fvtl/generators.hpp"

namespace fvtl::check {

inline DenseMatrix naive_power(const StochasticMatrix& p, Steps t) {
  const auto n = static_cast<Eigen::Index>(p.size());
  DenseMatrix out = DenseMatrix::Identity(n, n);
  for (Steps s = 0; s < t; ++s) out = out * p.dense();
  return out;
}

inline DenseMatrix naive_power(const DenseMatrix& q, Steps t) {
  DenseMatrix out = DenseMatrix::Identity(q.rows(), q.cols());
  for (Steps s = 0; s < t; ++s) out = out * q;
  return out;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double relative_diff(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

/// Random dense chain with a few exact zeros, so the sparse path is exercised.
inline StochasticMatrix sparse_random_chain(std::size_t n, std::uint64_t seed) {
  const StochasticMatrix base = random_dense_chain(n, seed, 2.0);
  DenseMatrix m = base.dense();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    m(i, (i + 1) % m.cols()) = 0.0;
    m.row(i) /= m.row(i).sum();
  }
  return StochasticMatrix(m);
}

}  // namespace fvtl::check
