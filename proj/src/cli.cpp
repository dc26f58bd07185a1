#include "fvtl/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "fvtl/error.hpp"
#include "fvtl/generators.hpp"
#include "fvtl/hitting.hpp"
#include "fvtl/io.hpp"
#include "fvtl/mixing.hpp"
#include "fvtl/montecarlo.hpp"
#include "fvtl/qsd.hpp"

namespace fvtl::cli {

namespace {

constexpr double kDefaultC = 2.5;
constexpr Steps kMixingCap = 100000;
constexpr std::size_t kDefaultTargets = 5;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::size_t parse_index(const std::string& s, const char* what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty() || s[0] == '-') {
    throw ValidationError(std::string(what) + ": '" + s + "' is not a nonnegative integer");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::analyze: return "analyze";
    case Command::verify_fvtl: return "verify-fvtl";
    case Command::hypotheses: return "hypotheses";
    case Command::sweep: return "sweep";
    case Command::simulate: return "simulate";
  }
  return "?";
}

std::string to_string(Format f) {
  switch (f) {
    case Format::json: return "json";
    case Format::csv: return "csv";
    case Format::pretty: return "pretty";
  }
  return "?";
}

Format RunConfig::effective_format() const {
  if (format) return *format;
  return command == Command::sweep ? Format::csv : Format::json;
}

double RunConfig::effective_c() const { return c.value_or(kDefaultC); }

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = {{"command", to_string(command)},
                      {"target", target.empty() ? "default" : target},
                      {"c", effective_c()},
                      {"samples", samples},
                      {"seed", seed},
                      {"format", to_string(effective_format())},
                      {"emit_tails", emit_tails}};
  if (matrix) j["matrix"] = *matrix;
  if (!chains.empty()) j["chain"] = chains;
  j["T"] = T ? nlohmann::json(*T) : nlohmann::json(nullptr);
  j["t_max"] = t_max ? nlohmann::json(*t_max) : nlohmann::json(nullptr);
  if (command == Command::simulate) {
    j["times"] = times;
    j["start"] = start;
  }
  if (out) j["out"] = *out;
  return j;
}

void validate(const RunConfig& config) {
  const bool has_matrix = config.matrix.has_value();
  if (has_matrix == !config.chains.empty()) {
    throw ValidationError("exactly one chain source is required (--chain or --matrix)");
  }
  if (config.command != Command::sweep && config.chains.size() > 1) {
    throw ValidationError("--chain may be repeated only for sweep");
  }
  if (!config.T && config.effective_c() <= 2.0) {
    throw ValidationError("--c must be greater than 2");
  }
  if (config.T && *config.T == 0) throw ValidationError("--T must be positive");
  if (config.samples == 0) throw ValidationError("--samples must be positive");
  if (config.command == Command::sweep && !config.target.empty() && config.target != "all") {
    throw ValidationError("sweep accepts only --target all");
  }
  for (std::size_t i = 1; i < config.times.size(); ++i) {
    if (config.times[i] < config.times[i - 1]) throw ValidationError("--t must be sorted");
  }
}

std::optional<RunConfig> parse_command_line(const std::vector<std::string>& args,
                                            std::ostream& help) {
  CLI::App app{"Quasi-stationary data and first visit time checks for finite Markov chains",
               "fvtl"};
  app.require_subcommand(1);

  RunConfig config;
  std::string matrix, format, out, save_matrix, times;
  double c = 0.0;
  Steps T = 0, t_max = 0;

  struct Sub {
    Command command;
    const char* name;
    const char* description;
  };
  const Sub subs[] = {
      {Command::analyze, "analyze", "Perron triple, Doob chain summary and E_pi[tau_x]"},
      {Command::verify_fvtl, "verify-fvtl", "Tail approximation report per target"},
      {Command::hypotheses, "hypotheses", "Mixing hypothesis report"},
      {Command::sweep, "sweep", "Verification table over several generated chains"},
      {Command::simulate, "simulate", "Monte Carlo tails next to exact values"},
  };
  std::vector<std::pair<CLI::App*, Command>> commands;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.description);
    commands.emplace_back(sub, s.command);
    sub->add_option("--chain", config.chains, "Generator spec family:key=val,...,seed=S");
    sub->add_option("--matrix", matrix, "Chain file (TSV or JSON)");
    sub->add_option("--target", config.target, "all, a state, or a comma list");
    sub->add_option("--c", c, "Mixing exponent (> 2)");
    sub->add_option("--T", T, "Mixing time override");
    sub->add_option("--t-max", t_max, "Tail horizon");
    sub->add_option("--samples", config.samples, "Monte Carlo trajectories");
    sub->add_option("--seed", config.seed, "Master seed");
    sub->add_option("--out", out, "Output file");
    sub->add_option("--format", format, "json, csv or pretty")
        ->check(CLI::IsMember({"json", "csv", "pretty"}));
    sub->add_flag("--emit-tails", config.emit_tails, "Write the exact tail curve per target");
    sub->add_option("--save-matrix", save_matrix, "Also write the chain as TSV");
    if (s.command == Command::simulate) {
      sub->add_option("--t", times, "Comma-separated times (default 1,2,5,10,20)");
      sub->add_option("--start", config.start, "pi or a state index");
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    help << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw ValidationError(e.what());
  }

  for (const auto& [sub, command] : commands) {
    if (!sub->parsed()) continue;
    config.command = command;
    if (sub->count("--matrix")) config.matrix = matrix;
    if (sub->count("--c")) config.c = c;
    if (sub->count("--T")) config.T = T;
    if (sub->count("--t-max")) config.t_max = t_max;
    if (sub->count("--out")) config.out = out;
    if (sub->count("--save-matrix")) config.save_matrix = save_matrix;
    if (sub->count("--format")) {
      config.format = format == "csv" ? Format::csv : format == "pretty" ? Format::pretty : Format::json;
    }
    if (command == Command::simulate) {
      if (sub->count("--t")) {
        for (const auto& item : split(times, ',')) config.times.push_back(parse_index(item, "--t"));
      } else {
        config.times = {1, 2, 5, 10, 20};
      }
    }
  }
  validate(config);
  return config;
}

namespace {

using nlohmann::json;

struct Loaded {
  StochasticMatrix p;
  std::string name;
};

Loaded load_chain(const RunConfig& config) {
  if (config.matrix) return {load_matrix(*config.matrix), *config.matrix};
  const ChainSpec spec = parse_chain_spec(config.chains.front());
  return {build(spec), spec.to_string()};
}

std::vector<State> resolve_targets(const RunConfig& config, std::size_t n) {
  if (config.target.empty()) return sample_targets(n, kDefaultTargets, config.seed);
  std::vector<State> out;
  if (config.target == "all") {
    for (State x = 0; x < n; ++x) out.push_back(x);
    return out;
  }
  for (const auto& item : split(config.target, ',')) {
    const State x = parse_index(item, "--target");
    if (x >= n) {
      throw IndexError("target " + std::to_string(x) + " out of range for n=" + std::to_string(n));
    }
    out.push_back(x);
  }
  if (out.empty()) throw ValidationError("--target is empty");
  return out;
}

ChainContext make_context(const RunConfig& config, const StochasticMatrix& p) {
  if (config.T) {
    ChainContext ctx = ChainContext::with_T(p, *config.T);
    ctx.c = config.effective_c();
    return ctx;
  }
  return ChainContext::with_c(p, config.effective_c(), kMixingCap);
}

std::string format_pretty_number(const json& v) {
  if (v.is_number_float()) return format_digits(v.get<double>(), 6);
  return v.dump();
}

void print_pretty(std::ostream& os, const json& j, const std::string& indent = "") {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_structured()) {
        os << indent << key << ":\n";
        print_pretty(os, value, indent + "  ");
      } else {
        os << indent << key << ": " << format_pretty_number(value) << '\n';
      }
    }
  } else if (j.is_array()) {
    const bool scalars = std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_primitive(); });
    if (scalars) {
      os << indent;
      for (std::size_t i = 0; i < j.size(); ++i) os << (i ? " " : "") << format_pretty_number(j[i]);
      os << '\n';
    } else {
      for (std::size_t i = 0; i < j.size(); ++i) {
        os << indent << "- [" << i << "]\n";
        print_pretty(os, j[i], indent + "  ");
      }
    }
  } else {
    os << indent << format_pretty_number(j) << '\n';
  }
}

/// Emits a document in the configured format. `csv` writes the table produced by
/// `write_csv`; every format carries the run configuration.
template <class CsvWriter>
void emit(const RunConfig& config, std::ostream& stdout_stream, json document, CsvWriter write_csv) {
  std::ofstream file;
  std::ostream* os = &stdout_stream;
  if (config.out) {
    file.open(*config.out);
    if (!file) throw ValidationError("cannot write " + *config.out);
    os = &file;
  }
  const json cfg = config.to_json();
  switch (config.effective_format()) {
    case Format::json: {
      json wrapped = {{"config", cfg}};
      for (auto& [key, value] : document.items()) wrapped[key] = value;
      *os << wrapped.dump(2) << '\n';
      break;
    }
    case Format::csv:
      *os << "# config: " << cfg.dump() << '\n';
      write_csv(*os);
      break;
    case Format::pretty:
      *os << "# config: " << cfg.dump() << '\n';
      print_pretty(*os, document);
      break;
  }
}

std::string tail_path(const RunConfig& config, State x) {
  std::string stem = config.out.value_or("fvtl");
  const auto slash = stem.find_last_of('/');
  const auto dot = stem.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) stem.resize(dot);
  return stem + ".tail_x" + std::to_string(x) + ".csv";
}

void write_tail_file(const RunConfig& config, const TailCurve& curve) {
  const std::string path = tail_path(config, curve.target);
  std::ofstream file(path);
  if (!file) throw ValidationError("cannot write " + path);
  file << "# config: " << config.to_json().dump() << '\n';
  write_tail_csv(file, curve);
}

int run_analyze(const RunConfig& config, const Loaded& chain, std::ostream& out) {
  const StochasticMatrix& p = chain.p;
  const Distribution pi = stationary_distribution(p);
  const auto targets = resolve_targets(config, p.size());
  json entries = json::array();
  for (const State x : targets) {
    const SubKernel q = sub_kernel(p, x);
    const PerronTriple triple = perron_pair(q);
    const DoobChain doob = doob_transform(q, triple);
    const double hitting = expected_hitting_from_stationarity(p, x);
    entries.push_back({{"x", x},
                       {"lambda", triple.lambda},
                       {"pi_x", pi[x]},
                       {"expected_hitting", hitting},
                       {"perron", perron_to_json(triple, q)},
                       {"doob", doob_to_json(doob, q)}});
  }
  json doc = {{"chain", chain.name}, {"n", p.size()}, {"pi", pi.vector()}, {"targets", entries}};
  emit(config, out, doc, [&](std::ostream& os) {
    os << "x,lambda,pi_x,expected_hitting,gamma_min,gamma_max,left_residual,right_residual\n";
    for (const auto& e : entries) {
      const auto& perron = e["perron"];
      const auto gamma = perron["gamma"].get<std::vector<double>>();
      os << e["x"].get<State>() << ',' << format_exact(e["lambda"].get<double>()) << ','
         << format_exact(e["pi_x"].get<double>()) << ','
         << format_exact(e["expected_hitting"].get<double>()) << ','
         << format_exact(*std::min_element(gamma.begin(), gamma.end())) << ','
         << format_exact(*std::max_element(gamma.begin(), gamma.end())) << ','
         << format_exact(perron["left_residual"].get<double>()) << ','
         << format_exact(perron["right_residual"].get<double>()) << '\n';
    }
  });
  return 0;
}

int run_verify(const RunConfig& config, const Loaded& chain, std::ostream& out) {
  const ChainContext ctx = make_context(config, chain.p);
  const auto targets = resolve_targets(config, chain.p.size());
  FvtlOptions options;
  options.t_max = config.t_max;
  std::vector<FvtlReport> reports;
  for (const State x : targets) {
    reports.push_back(fvtl_report(ctx, x, options));
    if (config.emit_tails) {
      write_tail_file(config, stationary_tail(ctx.p, ctx.pi, x, reports.back().t_max));
    }
  }
  bool failed = false;
  json rows = json::array();
  for (const auto& r : reports) {
    rows.push_back(r);
    failed = failed || r.hard_failure();
  }
  json doc = {{"chain", chain.name}, {"n", chain.p.size()}, {"T", ctx.T}, {"c", ctx.c},
              {"D_T", ctx.D_T}, {"reports", rows}};
  emit(config, out, doc, [&](std::ostream& os) {
    write_fvtl_csv_header(os);
    for (const auto& r : reports) write_fvtl_csv_row(os, chain.name, r);
  });
  return failed ? 2 : 0;
}

int run_hypotheses(const RunConfig& config, const Loaded& chain, std::ostream& out) {
  const ChainContext ctx = make_context(config, chain.p);
  const auto targets = resolve_targets(config, chain.p.size());
  const HypothesisReport report =
      check_hypotheses(ctx.pi, ctx.power_T, ctx.T, ctx.c, targets);
  json doc = {{"chain", chain.name}, {"n", chain.p.size()}, {"hypotheses", report}};
  emit(config, out, doc, [&](std::ostream& os) {
    os << "x,T,c,D_T,hp1_ok,hp2_value,hp3_value,eps1,eps2\n";
    for (const auto& [x, eps1] : report.eps1) {
      os << x << ',' << report.T << ',' << format_exact(report.c) << ','
         << format_exact(report.D_T) << ',' << (report.hp1_ok ? 1 : 0) << ','
         << format_exact(report.hp2_value) << ',' << format_exact(report.hp3_value) << ','
         << format_exact(eps1) << ',' << format_exact(report.eps2) << '\n';
    }
  });
  return 0;
}

int run_sweep(const RunConfig& config, std::ostream& out) {
  std::vector<ChainSpec> specs;
  for (const auto& text : config.chains) specs.push_back(parse_chain_spec(text));
  SweepParams params;
  params.c = config.effective_c();
  params.T = config.T;
  params.cap = kMixingCap;
  params.all_targets = config.target == "all";
  params.t_max = config.t_max;
  params.seed = config.seed;
  const auto rows = sweep(specs, params);
  bool failed = false;
  for (const auto& row : rows) failed = failed || (row.report && row.report->hard_failure());
  emit(config, out, {{"rows", sweep_to_json(rows)}},
       [&](std::ostream& os) { write_sweep_csv(os, rows); });
  return failed ? 2 : 0;
}

int run_simulate(const RunConfig& config, const Loaded& chain, std::ostream& out) {
  const StochasticMatrix& p = chain.p;
  const Distribution pi = stationary_distribution(p);
  const auto targets = resolve_targets(config, p.size());
  const Steps horizon = config.times.empty() ? 0 : config.times.back();
  std::optional<State> start;
  if (config.start != "pi") {
    start = parse_index(config.start, "--start");
    if (*start >= p.size()) throw IndexError("--start out of range");
  }
  const Distribution alpha = start ? Distribution::point_mass(p.size(), *start) : pi;

  struct Row {
    State x;
    McEstimate e;
    double exact;
    double z;
  };
  std::vector<Row> rows;
  for (const State x : targets) {
    const TailCurve exact = survival_tail(sub_kernel(p, x), alpha, horizon);
    const auto estimates = sample_hitting_tail(p, alpha, x, config.times, config.samples, config.seed);
    for (const auto& e : estimates) {
      const double v = exact.values[e.t];
      double z = 0.0;
      if (e.std_error > 0.0) {
        z = (e.point - v) / e.std_error;
      } else if (e.point != v) {
        z = std::numeric_limits<double>::infinity();
      }
      rows.push_back({x, e, v, z});
    }
  }
  json estimates = json::array();
  for (const auto& r : rows) {
    json j = r.e;
    j["x"] = r.x;
    j["exact"] = r.exact;
    j["z"] = std::isfinite(r.z) ? json(r.z) : json("inf");
    estimates.push_back(std::move(j));
  }
  json doc = {{"chain", chain.name}, {"n", p.size()}, {"start", config.start},
              {"estimates", estimates}};
  emit(config, out, doc, [&](std::ostream& os) {
    os << "t,estimate,stderr,N,seed,x,exact,z\n";
    for (const auto& r : rows) {
      os << r.e.t << ',' << format_exact(r.e.point) << ',' << format_exact(r.e.std_error) << ','
         << r.e.n_samples << ',' << r.e.seed << ',' << r.x << ',' << format_exact(r.exact) << ','
         << format_exact(r.z) << '\n';
    }
  });
  return 0;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericalInconsistency*>(&e)) return 2;
  return 1;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    validate(config);
    if (config.command == Command::sweep) {
      if (config.matrix) throw ValidationError("sweep takes generator specs, not --matrix");
      return run_sweep(config, out);
    }
    const Loaded chain = load_chain(config);
    if (config.save_matrix) {
      std::ofstream file(*config.save_matrix);
      if (!file) throw ValidationError("cannot write " + *config.save_matrix);
      write_tsv(file, chain.p);
    }
    switch (config.command) {
      case Command::analyze: return run_analyze(config, chain, out);
      case Command::verify_fvtl: return run_verify(config, chain, out);
      case Command::hypotheses: return run_hypotheses(config, chain, out);
      case Command::simulate: return run_simulate(config, chain, out);
      case Command::sweep: break;
    }
    return 1;
  } catch (const std::exception& e) {
    err << "fvtl: " << error_name(e) << ": " << e.what() << '\n';
    return exit_code_for(e);
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<RunConfig> config;
  try {
    config = parse_command_line(args, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "fvtl: " << e.what() << '\n';
    return 1;
  }
  if (!config) return 0;
  return run(*config, std::cout, std::cerr);
}

}  // namespace fvtl::cli
