#include "fvtl/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include <Eigen/LU>

#include "fvtl/error.hpp"

namespace fvtl {

namespace {

double infinity_residual(const StochasticMatrix& p, std::span<const double> pi) {
  std::vector<double> next(pi.size());
  p.sparse().left_multiply(pi, next);
  double r = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) r = std::max(r, std::abs(next[i] - pi[i]));
  return r;
}

std::vector<std::size_t> bfs_levels(const std::vector<std::vector<std::size_t>>& adj,
                                    std::size_t root) {
  constexpr auto unseen = static_cast<std::size_t>(-1);
  std::vector<std::size_t> level(adj.size(), unseen);
  std::queue<std::size_t> frontier;
  level[root] = 0;
  frontier.push(root);
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop();
    for (auto v : adj[u]) {
      if (level[v] == unseen) {
        level[v] = level[u] + 1;
        frontier.push(v);
      }
    }
  }
  return level;
}

}  // namespace

StochasticMatrix::StochasticMatrix(DenseMatrix entries, double tolerance) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw ShapeError("transition matrix must be square and nonempty");
  }
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
      const double v = entries(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        std::ostringstream msg;
        msg << "row " << i << ": entry " << j << " = " << v << " is outside [0,1]";
        throw ValidationError(msg.str());
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "row " << i << " sums to " << sum << " (expected 1)";
      throw ValidationError(msg.str());
    }
  }
  SparseRows sparse(entries);
  data_ = std::make_shared<const Data>(Data{std::move(entries), std::move(sparse)});
}

StochasticMatrix StochasticMatrix::from_rows(const std::vector<std::vector<double>>& rows,
                                             double tolerance) {
  const auto n = rows.size();
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      std::ostringstream msg;
      msg << "row " << i << " has " << rows[i].size() << " entries, expected " << n;
      throw ShapeError(msg.str());
    }
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return StochasticMatrix(std::move(m), tolerance);
}

double StochasticMatrix::max_row_sum_deviation() const {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < data_->dense.rows(); ++i) {
    dev = std::max(dev, std::abs(data_->dense.row(i).sum() - 1.0));
  }
  return dev;
}

Distribution::Distribution(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ShapeError("distribution must be nonempty");
  double sum = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i]) || weights_[i] < 0.0) {
      std::ostringstream msg;
      msg << "distribution weight " << i << " = " << weights_[i] << " is negative";
      throw ValidationError(msg.str());
    }
    sum += weights_[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "distribution weights sum to " << sum;
    throw ValidationError(msg.str());
  }
}

Distribution Distribution::from_computed(std::vector<double> weights) {
  return Distribution(std::move(weights), Unchecked{});
}

Distribution Distribution::point_mass(std::size_t n, State s) {
  if (s >= n) throw IndexError("point mass outside the state space");
  std::vector<double> w(n, 0.0);
  w[s] = 1.0;
  return Distribution(std::move(w), Unchecked{});
}

Distribution Distribution::uniform(std::size_t n) {
  if (n == 0) throw ShapeError("distribution must be nonempty");
  return Distribution(std::vector<double>(n, 1.0 / static_cast<double>(n)), Unchecked{});
}

double Distribution::min() const { return *std::min_element(weights_.begin(), weights_.end()); }
double Distribution::max() const { return *std::max_element(weights_.begin(), weights_.end()); }

Connectivity connectivity(const SparseRows& kernel) {
  const auto n = kernel.rows();
  if (n == 0) return {};
  std::vector<std::vector<std::size_t>> forward(n), backward(n);
  for (std::size_t u = 0; u < n; ++u) {
    for (auto v : kernel.row_columns(u)) {
      forward[u].push_back(v);
      backward[v].push_back(u);
    }
  }
  if (n == 1) {
    const bool loop = !forward[0].empty();
    return {loop, loop ? 1u : 0u};
  }
  const auto level = bfs_levels(forward, 0);
  const auto reverse_level = bfs_levels(backward, 0);
  constexpr auto unseen = static_cast<std::size_t>(-1);
  for (std::size_t v = 0; v < n; ++v) {
    if (level[v] == unseen || reverse_level[v] == unseen) return {};
  }
  std::size_t g = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (auto v : forward[u]) {
      const auto a = level[u] + 1;
      const auto b = level[v];
      g = std::gcd(g, a > b ? a - b : b - a);
    }
  }
  return {true, g};
}

Distribution stationary_distribution(const StochasticMatrix& p) {
  if (!connectivity(p).irreducible) {
    throw NotIrreducible("stationary_distribution: chain is not irreducible");
  }
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd a = p.dense().transpose();
  a -= Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::VectorXd solution = a.partialPivLu().solve(b);

  std::vector<double> pi(solution.data(), solution.data() + n);
  for (auto& v : pi) v = std::max(v, 0.0);
  double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (auto& v : pi) v /= sum;
  if (infinity_residual(p, pi) <= 1e-10) return Distribution::from_computed(std::move(pi));

  // Fallback: power iteration on the lazy kernel.
  std::vector<double> cur(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
  std::vector<double> next(cur.size());
  double diff = 1.0;
  for (int iter = 0; iter < 1000000 && diff > 1e-15; ++iter) {
    p.sparse().left_multiply(cur, next);
    diff = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      next[i] = 0.5 * (next[i] + cur[i]);
      diff = std::max(diff, std::abs(next[i] - cur[i]));
    }
    std::swap(cur, next);
  }
  sum = std::accumulate(cur.begin(), cur.end(), 0.0);
  for (auto& v : cur) v /= sum;
  const double residual = infinity_residual(p, cur);
  if (residual > 1e-10) {
    throw NumericalFailure("stationary_distribution: residual above 1e-10", residual);
  }
  return Distribution::from_computed(std::move(cur));
}

Distribution evolve(const StochasticMatrix& p, const Distribution& alpha, Steps t) {
  if (alpha.size() != p.size()) throw ShapeError("evolve: distribution size does not match chain");
  std::vector<double> cur = alpha.vector();
  std::vector<double> next(cur.size());
  for (Steps s = 0; s < t; ++s) {
    p.sparse().left_multiply(cur, next);
    std::swap(cur, next);
  }
  return Distribution::from_computed(std::move(cur));
}

double separation(std::span<const double> mu, std::span<const double> pi) {
  if (mu.size() != pi.size()) throw ShapeError("separation: size mismatch");
  double sep = -std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < pi.size(); ++y) {
    if (!(pi[y] > 0.0)) throw PositivityError("separation: reference measure has a zero entry");
    sep = std::max(sep, 1.0 - mu[y] / pi[y]);
  }
  return sep;
}

double separation(const Distribution& mu, const Distribution& pi) {
  return separation(mu.weights(), pi.weights());
}

StochasticMatrix lazy(const StochasticMatrix& p, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw SpecError("laziness must lie in (0,1)");
  DenseMatrix m = (1.0 - beta) * p.dense();
  m.diagonal().array() += beta;
  return StochasticMatrix(std::move(m));
}

}  // namespace fvtl
