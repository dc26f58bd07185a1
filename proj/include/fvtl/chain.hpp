#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fvtl/sparse_rows.hpp"

namespace fvtl {

using State = std::size_t;
using Steps = std::size_t;

/// Row-stochastic transition kernel. Immutable; copies share storage.
class StochasticMatrix {
 public:
  /// Validates entries in [0,1] and unit row sums within `tolerance`.
  /// Throws ValidationError naming the first offending row.
  explicit StochasticMatrix(DenseMatrix entries, double tolerance = 1e-12);
  static StochasticMatrix from_rows(const std::vector<std::vector<double>>& rows,
                                    double tolerance = 1e-12);

  std::size_t size() const noexcept { return static_cast<std::size_t>(data_->dense.rows()); }
  double operator()(State from, State to) const {
    return data_->dense(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
  }
  const DenseMatrix& dense() const noexcept { return data_->dense; }
  const SparseRows& sparse() const noexcept { return data_->sparse; }

  /// Largest |row sum - 1|.
  double max_row_sum_deviation() const;

  friend bool operator==(const StochasticMatrix& a, const StochasticMatrix& b) {
    return a.data_ == b.data_ || a.data_->dense == b.data_->dense;
  }

 private:
  struct Data {
    DenseMatrix dense;
    SparseRows sparse;
  };
  std::shared_ptr<const Data> data_;
};

/// Probability vector.
class Distribution {
 public:
  /// Validates nonnegative weights summing to 1 within 1e-12.
  explicit Distribution(std::vector<double> weights);
  /// Wraps a computed vector without re-validating the sum (roundoff from
  /// long evolutions is tolerated).
  static Distribution from_computed(std::vector<double> weights);
  static Distribution point_mass(std::size_t n, State s);
  static Distribution uniform(std::size_t n);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }
  const std::vector<double>& vector() const noexcept { return weights_; }

  double min() const;
  double max() const;

 private:
  struct Unchecked {};
  Distribution(std::vector<double> weights, Unchecked) : weights_(std::move(weights)) {}
  std::vector<double> weights_;
};

struct Connectivity {
  bool irreducible = false;
  /// gcd of cycle lengths; 0 when the digraph is not strongly connected.
  std::size_t period = 0;

  bool primitive() const noexcept { return irreducible && period == 1; }
};

/// Strong connectivity and period of the support digraph.
Connectivity connectivity(const SparseRows& kernel);
inline Connectivity connectivity(const StochasticMatrix& p) { return connectivity(p.sparse()); }

/// Solves pi P = pi with one equation replaced by the normalization.
/// Throws NotIrreducible or NumericalFailure.
Distribution stationary_distribution(const StochasticMatrix& p);

/// mu_t = alpha P^t.
Distribution evolve(const StochasticMatrix& p, const Distribution& alpha, Steps t);

/// max_y [1 - mu(y)/pi(y)]. Throws PositivityError if pi has a zero entry.
double separation(const Distribution& mu, const Distribution& pi);
double separation(std::span<const double> mu, std::span<const double> pi);

/// beta I + (1 - beta) P.
StochasticMatrix lazy(const StochasticMatrix& p, double beta);

}  // namespace fvtl
