#include "fvtl/qsd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fvtl/error.hpp"
#include "fvtl/rng.hpp"

namespace fvtl {

namespace {

std::vector<double> start_vector(std::size_t m, std::uint64_t seed, std::uint64_t stream) {
  std::vector<double> v(m, 1.0);
  if (seed != 0) {
    auto rng = Rng::substream(seed, stream);
    for (auto& e : v) e = 0.5 + rng.uniform();
  }
  return v;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

}  // namespace

SubKernel::SubKernel(const StochasticMatrix& p, State excluded) : excluded_(excluded) {
  const auto n = p.size();
  if (excluded >= n) {
    std::ostringstream msg;
    msg << "sub_kernel: state " << excluded << " outside 0.." << n - 1;
    throw IndexError(msg.str());
  }
  if (n < 2) throw ShapeError("sub_kernel: chain needs at least two states");
  const auto m = static_cast<Eigen::Index>(n - 1);
  DenseMatrix q(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto fi = static_cast<Eigen::Index>(to_full(static_cast<std::size_t>(i)));
    for (Eigen::Index j = 0; j < m; ++j) {
      q(i, j) = p.dense()(fi, static_cast<Eigen::Index>(to_full(static_cast<std::size_t>(j))));
    }
  }
  SparseRows sparse(q);
  data_ = std::make_shared<const Data>(Data{std::move(q), std::move(sparse)});
}

std::vector<double> SubKernel::restrict(std::span<const double> full) const {
  if (full.size() != size() + 1) throw ShapeError("restrict: vector is not on the full space");
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = full[to_full(i)];
  return out;
}

std::vector<double> SubKernel::extend(std::span<const double> local, double at_excluded) const {
  if (local.size() != size()) throw ShapeError("extend: vector is not on the complement");
  std::vector<double> out(size() + 1);
  out[excluded_] = at_excluded;
  for (std::size_t i = 0; i < local.size(); ++i) out[to_full(i)] = local[i];
  return out;
}

SubKernel sub_kernel(const StochasticMatrix& p, State x) { return SubKernel(p, x); }

Connectivity primitivity_check(const SubKernel& q) { return connectivity(q.sparse()); }

double PerronTriple::gamma_min() const { return *std::min_element(gamma.begin(), gamma.end()); }
double PerronTriple::gamma_max() const { return *std::max_element(gamma.begin(), gamma.end()); }

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

PerronTriple perron_pair(const SubKernel& q, const PerronOptions& options) {
  const auto m = q.size();
  const auto shape = primitivity_check(q);
  if (!shape.irreducible) {
    throw NotIrreducible("perron_pair: sub-kernel without state " + std::to_string(q.excluded()) +
                         " is not irreducible");
  }
  PerronTriple triple;
  if (m == 1) {
    triple.lambda = q(0, 0);
    triple.mu_star = Distribution::point_mass(1, 0);
    triple.gamma = {1.0};
    return triple;
  }

  std::vector<double> next(m);
  double last_diff = 0.0;

  // Left vector, kept summing to 1.
  auto mu = start_vector(m, options.seed, 0);
  double total = std::accumulate(mu.begin(), mu.end(), 0.0);
  for (auto& e : mu) e /= total;
  std::size_t iter = 0;
  bool converged = false;
  for (; iter < options.max_iterations; ++iter) {
    q.sparse().left_multiply(mu, next);
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      next[i] = 0.5 * (next[i] + mu[i]);
      sum += next[i];
    }
    last_diff = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      next[i] /= sum;
      last_diff = std::max(last_diff, std::abs(next[i] - mu[i]));
    }
    std::swap(mu, next);
    if (last_diff <= options.tolerance * max_abs(mu)) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NumericalFailure("perron_pair: left iteration did not converge", last_diff);
  }
  triple.iterations = iter + 1;

  // Right vector, kept with unit max.
  auto gamma = start_vector(m, options.seed, 1);
  converged = false;
  for (iter = 0; iter < options.max_iterations; ++iter) {
    q.sparse().right_multiply(gamma, next);
    double top = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      next[i] = 0.5 * (next[i] + gamma[i]);
      top = std::max(top, next[i]);
    }
    last_diff = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      next[i] /= top;
      last_diff = std::max(last_diff, std::abs(next[i] - gamma[i]));
    }
    std::swap(gamma, next);
    if (last_diff <= options.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NumericalFailure("perron_pair: right iteration did not converge", last_diff);
  }
  triple.iterations = std::max(triple.iterations, iter + 1);

  q.sparse().left_multiply(mu, next);
  const double lambda = std::accumulate(next.begin(), next.end(), 0.0) /
                        std::accumulate(mu.begin(), mu.end(), 0.0);
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw NumericalFailure("perron_pair: eigenvalue outside (0,1)", lambda);
  }
  double left_residual = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    left_residual = std::max(left_residual, std::abs(next[i] - lambda * mu[i]));
  }

  const double scale = dot(mu, gamma);
  for (auto& e : gamma) e /= scale;
  q.sparse().right_multiply(gamma, next);
  double right_residual = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    right_residual = std::max(right_residual, std::abs(next[i] - lambda * gamma[i]));
  }
  const double worst = std::max(left_residual, right_residual);
  if (worst > 1e-10) {
    throw NumericalFailure("perron_pair: eigen-residual above 1e-10", worst);
  }
  if (*std::min_element(gamma.begin(), gamma.end()) <= 0.0) {
    throw NumericalFailure("perron_pair: right eigenvector is not strictly positive", 0.0);
  }

  triple.lambda = lambda;
  triple.mu_star = Distribution::from_computed(std::move(mu));
  triple.gamma = std::move(gamma);
  triple.left_residual = left_residual;
  triple.right_residual = right_residual;
  return triple;
}

DoobChain doob_transform(const SubKernel& q, const PerronTriple& triple) {
  const auto m = q.size();
  if (triple.gamma.size() != m || triple.mu_star.size() != m) {
    throw ShapeError("doob_transform: triple does not match the sub-kernel");
  }
  for (double g : triple.gamma) {
    if (!(g > 0.0)) throw PositivityError("doob_transform: gamma has a nonpositive entry");
  }
  const auto mi = static_cast<Eigen::Index>(m);
  DenseMatrix pt(mi, mi);
  for (Eigen::Index z = 0; z < mi; ++z) {
    const double gz = triple.gamma[static_cast<std::size_t>(z)];
    double row = 0.0;
    for (Eigen::Index y = 0; y < mi; ++y) {
      pt(z, y) = triple.gamma[static_cast<std::size_t>(y)] * q.dense()(z, y) / (gz * triple.lambda);
      row += pt(z, y);
    }
    // Absorb the O(residual) defect so the row is stochastic to machine precision.
    pt.row(z) /= row;
  }
  std::vector<double> nu(m);
  double total = 0.0;
  for (std::size_t y = 0; y < m; ++y) {
    nu[y] = triple.gamma[y] * triple.mu_star[y];
    total += nu[y];
  }
  for (auto& e : nu) e /= total;
  return DoobChain{StochasticMatrix(std::move(pt)), Distribution::from_computed(std::move(nu)),
                   q.excluded(), triple};
}

double doob_separation(const DoobChain& doob, const Distribution& alpha_tilde, Steps t) {
  if (alpha_tilde.size() != doob.nu.size()) {
    throw ShapeError("doob_separation: starting measure is not on the complement");
  }
  const auto evolved = evolve(doob.p_tilde, alpha_tilde, t);
  return separation(evolved, doob.nu);
}

double doob_worst_separation(const DoobChain& doob, Steps t) {
  double worst = 0.0;
  for (std::size_t z = 0; z < doob.nu.size(); ++z) {
    worst = std::max(worst, doob_separation(doob, Distribution::point_mass(doob.nu.size(), z), t));
  }
  return worst;
}

DoobSeparationSequence::DoobSeparationSequence(const DoobChain& doob,
                                               const Distribution& alpha_tilde)
    : doob_(&doob), current_(alpha_tilde.vector()), scratch_(alpha_tilde.size()) {
  if (alpha_tilde.size() != doob.nu.size()) {
    throw ShapeError("DoobSeparationSequence: starting measure is not on the complement");
  }
}

double DoobSeparationSequence::separation() const {
  return fvtl::separation(current_, doob_->nu.weights());
}

void DoobSeparationSequence::step() {
  doob_->p_tilde.sparse().left_multiply(current_, scratch_);
  std::swap(current_, scratch_);
  ++time_;
}

Distribution tilt_measure(std::span<const double> alpha, std::span<const double> gamma) {
  const double mass = dot(alpha, gamma);
  if (!(mass > 0.0)) throw DegenerateTilt("tilt_measure: <alpha, gamma> is zero");
  std::vector<double> out(alpha.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha[i] * gamma[i] / mass;
  return Distribution::from_computed(std::move(out));
}

}  // namespace fvtl
