#include "fvtl/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "fvtl/error.hpp"
#include "fvtl/parallel.hpp"
#include "fvtl/rng.hpp"

namespace fvtl {

namespace {

constexpr int kMaxAttempts = 1000;

const std::vector<std::pair<Family, std::string>>& family_names() {
  static const std::vector<std::pair<Family, std::string>> names = {
      {Family::two_state, "two_state"},
      {Family::complete, "complete"},
      {Family::cycle, "cycle"},
      {Family::lazy, "lazy"},
      {Family::random_regular_digraph, "random_regular_digraph"},
      {Family::erdos_renyi, "erdos_renyi"},
      {Family::random_dense, "random_dense"},
  };
  return names;
}

bool uses_seed(Family f) {
  return f == Family::random_regular_digraph || f == Family::erdos_renyi ||
         f == Family::random_dense;
}

std::size_t count_param(const ChainSpec& spec, const std::string& key, std::size_t minimum) {
  const double v = spec.param(key);
  if (v != std::floor(v) || v < static_cast<double>(minimum)) {
    std::ostringstream msg;
    msg << to_string(spec.family) << ": " << key << " must be an integer >= " << minimum;
    throw SpecError(msg.str());
  }
  return static_cast<std::size_t>(v);
}

double open_unit_param(const ChainSpec& spec, const std::string& key) {
  const double v = spec.param(key);
  if (!(v > 0.0 && v < 1.0)) {
    throw SpecError(to_string(spec.family) + ": " + key + " must lie in (0,1)");
  }
  return v;
}

std::string format_value(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(Family family) {
  for (const auto& [f, name] : family_names()) {
    if (f == family) return name;
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  for (const auto& [f, n] : family_names()) {
    if (n == name) return f;
  }
  // Short aliases used on the command line.
  if (name == "rrd" || name == "regular_digraph") return Family::random_regular_digraph;
  if (name == "er") return Family::erdos_renyi;
  if (name == "dense") return Family::random_dense;
  throw SpecError("unknown chain family '" + name + "'");
}

double ChainSpec::param(const std::string& key) const {
  const auto it = params.find(key);
  if (it == params.end()) throw SpecError(fvtl::to_string(family) + ": missing parameter " + key);
  return it->second;
}

double ChainSpec::param_or(const std::string& key, double fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::string ChainSpec::to_string() const {
  std::ostringstream os;
  os << fvtl::to_string(family) << ':';
  bool first = true;
  auto emit = [&](const std::string& k, const std::string& v) {
    if (!first) os << ',';
    os << k << '=' << v;
    first = false;
  };
  const ChainSpec* inner = this;
  if (family == Family::lazy && base) {
    emit("base", fvtl::to_string(base->family));
    for (const auto& [k, v] : params) emit(k, format_value(v));
    inner = base.get();
  }
  for (const auto& [k, v] : inner == this ? params : inner->params) emit(k, format_value(v));
  if (uses_seed(inner->family)) emit("seed", std::to_string(inner->seed));
  return os.str();
}

bool operator==(const ChainSpec& a, const ChainSpec& b) {
  if (a.family != b.family || a.params != b.params || a.seed != b.seed) return false;
  if (!a.base || !b.base) return !a.base && !b.base;
  return *a.base == *b.base;
}

ChainSpec parse_chain_spec(const std::string& text) {
  const auto colon = text.find(':');
  ChainSpec spec;
  spec.family = family_from_string(text.substr(0, colon));
  std::map<std::string, std::string> raw;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw SpecError("malformed chain parameter '" + item + "' (expected key=value)");
      }
      raw[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  auto numeric = [](const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (...) {
      used = 0;
    }
    if (used != value.size() || value.empty()) {
      throw SpecError("parameter " + key + " = '" + value + "' is not a number");
    }
    return v;
  };
  auto seed_of = [](const std::string& value) {
    try {
      std::size_t used = 0;
      const auto s = std::stoull(value, &used);
      if (used == value.size()) return static_cast<std::uint64_t>(s);
    } catch (...) {
    }
    throw SpecError("seed '" + value + "' is not an unsigned integer");
  };

  if (spec.family == Family::lazy) {
    const auto b = raw.find("base");
    if (b == raw.end()) throw SpecError("lazy: missing base=<family>");
    ChainSpec inner;
    inner.family = family_from_string(b->second);
    if (inner.family == Family::lazy) throw SpecError("lazy: base may not itself be lazy");
    for (const auto& [k, v] : raw) {
      if (k == "base") continue;
      if (k == "beta") {
        spec.params[k] = numeric(k, v);
      } else if (k == "seed") {
        inner.seed = seed_of(v);
      } else {
        inner.params[k] = numeric(k, v);
      }
    }
    spec.base = std::make_shared<const ChainSpec>(std::move(inner));
  } else {
    for (const auto& [k, v] : raw) {
      if (k == "seed") {
        spec.seed = seed_of(v);
      } else {
        spec.params[k] = numeric(k, v);
      }
    }
  }
  validate(spec);
  return spec;
}

void validate(const ChainSpec& spec) {
  auto allow = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : spec.params) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
        throw SpecError(to_string(spec.family) + ": unknown parameter " + k);
      }
    }
  };
  switch (spec.family) {
    case Family::two_state:
      allow({"p", "q"});
      open_unit_param(spec, "p");
      open_unit_param(spec, "q");
      break;
    case Family::complete:
    case Family::cycle:
      allow({"n"});
      count_param(spec, "n", 2);
      break;
    case Family::lazy:
      allow({"beta"});
      open_unit_param(spec, "beta");
      if (!spec.base) throw SpecError("lazy: missing base chain");
      validate(*spec.base);
      break;
    case Family::random_regular_digraph:
      allow({"n", "r", "simple"});
      count_param(spec, "n", 2);
      count_param(spec, "r", 2);
      break;
    case Family::erdos_renyi:
      allow({"n", "p"});
      count_param(spec, "n", 2);
      open_unit_param(spec, "p");
      break;
    case Family::random_dense:
      allow({"n", "skew"});
      count_param(spec, "n", 2);
      if (!(spec.param_or("skew", 1.0) > 0.0)) throw SpecError("random_dense: skew must be positive");
      break;
  }
}

ChainSpec two_state_spec(double p, double q) {
  return {Family::two_state, {{"p", p}, {"q", q}}, 0, nullptr};
}
ChainSpec complete_spec(std::size_t n) {
  return {Family::complete, {{"n", static_cast<double>(n)}}, 0, nullptr};
}
ChainSpec cycle_spec(std::size_t n) {
  return {Family::cycle, {{"n", static_cast<double>(n)}}, 0, nullptr};
}
ChainSpec lazy_spec(ChainSpec base, double beta) {
  return {Family::lazy, {{"beta", beta}}, 0, std::make_shared<const ChainSpec>(std::move(base))};
}
ChainSpec random_regular_digraph_spec(std::size_t n, std::size_t r, std::uint64_t seed) {
  return {Family::random_regular_digraph,
          {{"n", static_cast<double>(n)}, {"r", static_cast<double>(r)}},
          seed,
          nullptr};
}
ChainSpec erdos_renyi_spec(std::size_t n, double p, std::uint64_t seed) {
  return {Family::erdos_renyi, {{"n", static_cast<double>(n)}, {"p", p}}, seed, nullptr};
}
ChainSpec random_dense_spec(std::size_t n, std::uint64_t seed, double skew) {
  ChainSpec s{Family::random_dense, {{"n", static_cast<double>(n)}}, seed, nullptr};
  if (skew != 1.0) s.params["skew"] = skew;
  return s;
}

StochasticMatrix two_state(double p, double q) {
  if (!(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0)) throw SpecError("two_state: p, q must lie in (0,1)");
  DenseMatrix m(2, 2);
  m << 1.0 - p, p, q, 1.0 - q;
  return StochasticMatrix(std::move(m));
}

StochasticMatrix complete_graph_walk(std::size_t n) {
  if (n < 2) throw SpecError("complete: n must be at least 2");
  const auto k = static_cast<Eigen::Index>(n);
  DenseMatrix m = DenseMatrix::Constant(k, k, 1.0 / static_cast<double>(n - 1));
  m.diagonal().setZero();
  return StochasticMatrix(std::move(m));
}

StochasticMatrix cycle_walk(std::size_t n) {
  if (n < 2) throw SpecError("cycle: n must be at least 2");
  const auto k = static_cast<Eigen::Index>(n);
  DenseMatrix m = DenseMatrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    m(i, (i + 1) % k) += 0.5;
    m(i, (i + k - 1) % k) += 0.5;
  }
  return StochasticMatrix(std::move(m));
}

StochasticMatrix random_regular_digraph_walk(std::size_t n, std::size_t r, std::uint64_t seed,
                                             bool simple) {
  if (n < 2 || r < 2) throw SpecError("random_regular_digraph: need n >= 2 and r >= 2");
  const auto k = static_cast<Eigen::Index>(n);
  std::vector<std::size_t> heads(n * r);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    auto rng = Rng::substream(seed, static_cast<std::uint64_t>(attempt));
    for (std::size_t i = 0; i < heads.size(); ++i) heads[i] = i / r;
    rng.shuffle(std::span<std::size_t>(heads));
    DenseMatrix counts = DenseMatrix::Zero(k, k);
    bool clean = true;
    for (std::size_t i = 0; i < heads.size(); ++i) {
      const auto tail = static_cast<Eigen::Index>(i / r);
      const auto head = static_cast<Eigen::Index>(heads[i]);
      if (counts(tail, head) > 0.0 || tail == head) clean = false;
      counts(tail, head) += 1.0;
    }
    if (simple && !clean) continue;
    DenseMatrix m = counts / static_cast<double>(r);
    SparseRows support(m);
    if (!connectivity(support).primitive()) continue;
    return StochasticMatrix(std::move(m));
  }
  throw GenerationFailure("random_regular_digraph: no ergodic sample within the retry budget");
}

StochasticMatrix erdos_renyi_walk(std::size_t n, double p, std::uint64_t seed) {
  if (n < 2 || !(p > 0.0 && p < 1.0)) throw SpecError("erdos_renyi: need n >= 2 and p in (0,1)");
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    auto rng = Rng::substream(seed, static_cast<std::uint64_t>(attempt));
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (rng.uniform() < p) {
          adj[i].push_back(j);
          adj[j].push_back(i);
        }
      }
    }
    // Largest connected component; ties go to the one containing the smallest vertex.
    std::vector<std::size_t> component(n, n);
    std::vector<std::size_t> best;
    for (std::size_t s = 0; s < n; ++s) {
      if (component[s] != n) continue;
      std::vector<std::size_t> members{s};
      component[s] = s;
      for (std::size_t h = 0; h < members.size(); ++h) {
        for (auto v : adj[members[h]]) {
          if (component[v] == n) {
            component[v] = s;
            members.push_back(v);
          }
        }
      }
      if (members.size() > best.size()) best = std::move(members);
    }
    if (best.size() < 2) continue;
    std::sort(best.begin(), best.end());
    std::vector<std::size_t> index(n, n);
    for (std::size_t i = 0; i < best.size(); ++i) index[best[i]] = i;
    const auto m = static_cast<Eigen::Index>(best.size());
    DenseMatrix walk = DenseMatrix::Zero(m, m);
    for (std::size_t i = 0; i < best.size(); ++i) {
      const auto& nb = adj[best[i]];
      const auto row = static_cast<Eigen::Index>(i);
      walk(row, row) = 0.5;
      for (auto v : nb) {
        walk(row, static_cast<Eigen::Index>(index[v])) += 0.5 / static_cast<double>(nb.size());
      }
    }
    return StochasticMatrix(std::move(walk));
  }
  throw GenerationFailure("erdos_renyi: giant component smaller than two vertices");
}

StochasticMatrix random_dense_chain(std::size_t n, std::uint64_t seed, double skew) {
  if (n < 2) throw SpecError("random_dense: n must be at least 2");
  auto rng = Rng::substream(seed, 0);
  const auto k = static_cast<Eigen::Index>(n);
  DenseMatrix m(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      m(i, j) = skew == 1.0 ? rng.uniform() : std::pow(rng.uniform(), skew);
      sum += m(i, j);
    }
    m.row(i) /= sum;
  }
  return StochasticMatrix(std::move(m));
}

StochasticMatrix build(const ChainSpec& spec) {
  validate(spec);
  switch (spec.family) {
    case Family::two_state:
      return two_state(spec.param("p"), spec.param("q"));
    case Family::complete:
      return complete_graph_walk(count_param(spec, "n", 2));
    case Family::cycle:
      return cycle_walk(count_param(spec, "n", 2));
    case Family::lazy:
      return lazy(build(*spec.base), spec.param("beta"));
    case Family::random_regular_digraph:
      return random_regular_digraph_walk(count_param(spec, "n", 2), count_param(spec, "r", 2),
                                         spec.seed, spec.param_or("simple", 0.0) != 0.0);
    case Family::erdos_renyi:
      return erdos_renyi_walk(count_param(spec, "n", 2), spec.param("p"), spec.seed);
    case Family::random_dense:
      return random_dense_chain(count_param(spec, "n", 2), spec.seed, spec.param_or("skew", 1.0));
  }
  throw SpecError("unhandled chain family");
}

std::vector<State> sample_targets(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::vector<State> states(n);
  std::iota(states.begin(), states.end(), State{0});
  auto rng = Rng::substream(seed, 0x7a72676574ULL);
  rng.shuffle(std::span<State>(states));
  states.resize(std::min(count, n));
  return states;
}

std::vector<SweepRow> sweep(const std::vector<ChainSpec>& specs, const SweepParams& params) {
  if (specs.empty()) throw SpecError("sweep: no chain specs given");
  const std::size_t workers = params.threads > 0 ? params.threads : thread_count();

  struct Prepared {
    std::optional<ChainContext> context;
    std::optional<HypothesisReport> hypotheses;
    std::vector<State> targets;
    std::string status = "ok";
    std::string message;
    std::size_t n = 0;
  };
  std::vector<Prepared> prepared(specs.size());
  parallel_for(specs.size(), workers, [&](std::size_t i) {
    auto& prep = prepared[i];
    try {
      const auto p = build(specs[i]);
      prep.n = p.size();
      prep.context = params.T ? ChainContext::with_T(p, *params.T)
                              : ChainContext::with_c(p, params.c, params.cap);
      if (params.all_targets) {
        prep.targets.resize(prep.n);
        std::iota(prep.targets.begin(), prep.targets.end(), State{0});
      } else {
        prep.targets = sample_targets(prep.n, params.targets_per_chain,
                                      params.seed ^ splitmix64(specs[i].seed));
      }
      prep.hypotheses = check_hypotheses(prep.context->pi, prep.context->power_T,
                                         prep.context->T, params.T ? params.c : prep.context->c,
                                         prep.targets);
    } catch (const std::exception& e) {
      prep.context.reset();
      prep.status = error_name(e);
      prep.message = e.what();
    }
  });

  std::vector<SweepRow> rows;
  std::vector<std::pair<std::size_t, State>> jobs;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& prep = prepared[i];
    if (!prep.context) {
      SweepRow row;
      row.spec = specs[i].to_string();
      row.n = prep.n;
      row.status = prep.status;
      row.message = prep.message;
      rows.push_back(std::move(row));
      continue;
    }
    for (auto x : prep.targets) {
      SweepRow row;
      row.spec = specs[i].to_string();
      row.n = prep.n;
      row.x = x;
      row.hypotheses = prep.hypotheses;
      jobs.emplace_back(i, rows.size());
      rows.push_back(std::move(row));
    }
  }

  FvtlOptions options;
  options.t_max = params.t_max;
  options.epsilon = params.epsilon;
  parallel_for(jobs.size(), workers, [&](std::size_t j) {
    const auto [spec_index, row_index] = jobs[j];
    auto& row = rows[row_index];
    try {
      row.report = fvtl_report(*prepared[spec_index].context, *row.x, options);
    } catch (const std::exception& e) {
      row.status = error_name(e);
      row.message = e.what();
    }
  });
  return rows;
}

}  // namespace fvtl
