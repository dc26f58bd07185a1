#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fvtl/chain.hpp"
#include "fvtl/hitting.hpp"
#include "fvtl/mixing.hpp"

namespace fvtl {

enum class Family {
  two_state,
  complete,
  cycle,
  lazy,
  random_regular_digraph,
  erdos_renyi,
  random_dense,
};

std::string to_string(Family family);
/// Throws SpecError for unknown names.
Family family_from_string(const std::string& name);

/// Recipe for a model chain. `lazy` wraps a base spec.
struct ChainSpec {
  Family family = Family::complete;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;
  std::shared_ptr<const ChainSpec> base;

  /// Canonical `family:key=val,...` form, parseable by parse_chain_spec.
  std::string to_string() const;
  double param(const std::string& key) const;
  double param_or(const std::string& key, double fallback) const;

  friend bool operator==(const ChainSpec& a, const ChainSpec& b);
};

/// Parses `family:key=val,...,seed=S`; lazy takes `base=<family>` plus the
/// base's own keys, e.g. `lazy:base=cycle,n=6,beta=0.5`.
ChainSpec parse_chain_spec(const std::string& text);
/// Throws SpecError when a parameter is missing or out of range.
void validate(const ChainSpec& spec);

ChainSpec two_state_spec(double p, double q);
ChainSpec complete_spec(std::size_t n);
ChainSpec cycle_spec(std::size_t n);
ChainSpec lazy_spec(ChainSpec base, double beta);
ChainSpec random_regular_digraph_spec(std::size_t n, std::size_t r, std::uint64_t seed);
ChainSpec erdos_renyi_spec(std::size_t n, double p, std::uint64_t seed);
ChainSpec random_dense_spec(std::size_t n, std::uint64_t seed, double skew = 1.0);

/// Pure function of the spec, seed included. Throws SpecError or GenerationFailure.
StochasticMatrix build(const ChainSpec& spec);

StochasticMatrix two_state(double p, double q);
StochasticMatrix complete_graph_walk(std::size_t n);
StochasticMatrix cycle_walk(std::size_t n);
/// Uniform pairing of r out-stubs with r in-stubs per state; multi-edges are
/// aggregated and self-loops kept. Resamples (substream per attempt) until the
/// walk is irreducible and aperiodic; with `simple`, also until no loop or
/// multi-edge remains.
StochasticMatrix random_regular_digraph_walk(std::size_t n, std::size_t r, std::uint64_t seed,
                                             bool simple = false);
/// Lazy simple random walk on the largest component of G(n, p).
StochasticMatrix erdos_renyi_walk(std::size_t n, double p, std::uint64_t seed);
/// Rows of i.i.d. uniform^skew entries, normalized.
StochasticMatrix random_dense_chain(std::size_t n, std::uint64_t seed, double skew = 1.0);

/// min(count, n) distinct states chosen deterministically from the seed.
std::vector<State> sample_targets(std::size_t n, std::size_t count, std::uint64_t seed);

struct SweepParams {
  double c = 2.5;
  std::optional<Steps> T;       // overrides the mixing search
  Steps cap = 100000;
  std::size_t targets_per_chain = 5;
  bool all_targets = false;
  std::optional<Steps> t_max;
  double epsilon = 0.01;
  std::uint64_t seed = 1;       // target sampling
  std::size_t threads = 0;      // 0 means thread_count()
};

struct SweepRow {
  std::string spec;
  std::size_t n = 0;
  std::optional<State> x;
  std::string status = "ok";    // "ok" or the error class name
  std::string message;
  std::optional<HypothesisReport> hypotheses;
  std::optional<FvtlReport> report;
};

/// One row per (spec, target), in input order; failures are recorded per row
/// and never abort the sweep.
std::vector<SweepRow> sweep(const std::vector<ChainSpec>& specs, const SweepParams& params);

}  // namespace fvtl
