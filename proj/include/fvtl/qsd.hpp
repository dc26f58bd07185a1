#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fvtl/chain.hpp"

namespace fvtl {

/// The substochastic kernel [P]_x: P with row and column x deleted.
/// Local index i corresponds to full state i for i < x and i + 1 otherwise.
class SubKernel {
 public:
  SubKernel(const StochasticMatrix& p, State excluded);

  State excluded() const noexcept { return excluded_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(data_->dense.rows()); }
  State to_full(std::size_t local) const noexcept {
    return local < excluded_ ? local : local + 1;
  }
  std::optional<std::size_t> to_local(State full) const noexcept {
    if (full == excluded_) return std::nullopt;
    return full < excluded_ ? full : full - 1;
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_->dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const DenseMatrix& dense() const noexcept { return data_->dense; }
  const SparseRows& sparse() const noexcept { return data_->sparse; }

  /// Restriction of a full-space vector to the complement of x.
  std::vector<double> restrict(std::span<const double> full) const;
  /// Extension to the full space with value `at_excluded` at x.
  std::vector<double> extend(std::span<const double> local, double at_excluded = 0.0) const;

 private:
  struct Data {
    DenseMatrix dense;
    SparseRows sparse;
  };
  State excluded_;
  std::shared_ptr<const Data> data_;
};

/// Throws IndexError if x is not a state of p.
SubKernel sub_kernel(const StochasticMatrix& p, State x);

Connectivity primitivity_check(const SubKernel& q);

struct PerronOptions {
  double tolerance = 1e-12;  // successive-iterate inf-difference, relative to the iterate's max
  std::size_t max_iterations = 1'000'000;
  /// 0 starts both iterations from the constant vector; any other value
  /// draws a strictly positive random start from this seed.
  std::uint64_t seed = 0;
};

/// Perron eigenvalue with its left (probability) and right eigenvectors,
/// normalized so that <mu_star, gamma> = 1.
struct PerronTriple {
  double lambda = 0.0;
  Distribution mu_star = Distribution::uniform(1);
  std::vector<double> gamma;
  double left_residual = 0.0;   // || mu Q - lambda mu ||_inf
  double right_residual = 0.0;  // || Q gamma - lambda gamma ||_inf
  std::size_t iterations = 0;

  double gamma_min() const;
  double gamma_max() const;
};

/// Power iteration on (Q + I)/2, which is aperiodic whenever Q is irreducible.
/// Throws NotIrreducible or NumericalFailure.
PerronTriple perron_pair(const SubKernel& q, const PerronOptions& options = {});

/// Doob transform of the chain killed at x.
struct DoobChain {
  StochasticMatrix p_tilde;
  Distribution nu;  // nu(y) = gamma(y) mu_star(y)
  State excluded;
  PerronTriple triple;
};

/// P~(z,y) = gamma(y) Q(z,y) / (gamma(z) lambda). Throws PositivityError if gamma
/// has a nonpositive entry.
DoobChain doob_transform(const SubKernel& q, const PerronTriple& triple);

/// max_y [1 - (alpha~ P~^t)(y) / nu(y)].
double doob_separation(const DoobChain& doob, const Distribution& alpha_tilde, Steps t);
/// sup_z of the point-mass separation, i.e. the worst case over starting states.
double doob_worst_separation(const DoobChain& doob, Steps t);

/// alpha~ P~^t advanced one step at a time, with its separation from nu.
class DoobSeparationSequence {
 public:
  DoobSeparationSequence(const DoobChain& doob, const Distribution& alpha_tilde);
  Steps time() const noexcept { return time_; }
  double separation() const;
  std::span<const double> current() const noexcept { return current_; }
  void step();

 private:
  const DoobChain* doob_;
  std::vector<double> current_;
  std::vector<double> scratch_;
  Steps time_ = 0;
};

/// alpha~(y) = alpha(y) gamma(y) / <alpha, gamma>. `alpha` may be a
/// sub-probability measure on the complement.
Distribution tilt_measure(std::span<const double> alpha, std::span<const double> gamma);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace fvtl
