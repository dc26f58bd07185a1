#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fvtl/chain.hpp"

namespace fvtl::cli {

enum class Command { analyze, verify_fvtl, hypotheses, sweep, simulate };
enum class Format { json, csv, pretty };

std::string to_string(Command c);
std::string to_string(Format f);

struct RunConfig {
  Command command = Command::analyze;
  std::vector<std::string> chains;     // ChainSpec strings; several only for sweep
  std::optional<std::string> matrix;   // TSV or JSON chain file
  std::string target;                  // "all", "3" or "0,4,7"; empty samples min(5, n) from seed
  std::optional<double> c;
  std::optional<Steps> T;
  std::optional<Steps> t_max;
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  std::vector<Steps> times;            // simulate; default 1,2,5,10,20
  std::string start = "pi";            // simulate: "pi" or a state index
  std::optional<std::string> out;
  std::optional<Format> format;        // default csv for sweep, json otherwise
  bool emit_tails = false;
  std::optional<std::string> save_matrix;

  Format effective_format() const;
  /// Exponent used by the mixing search: c, or 2.5 when neither c nor T was given.
  double effective_c() const;
  nlohmann::json to_json() const;
};

/// Throws ValidationError: exactly one chain source, c > 2 when T is searched for.
void validate(const RunConfig& config);

/// Parses argv (without the program name). Throws ValidationError on bad flags;
/// `--help` output goes to `help` and yields std::nullopt.
std::optional<RunConfig> parse_command_line(const std::vector<std::string>& args,
                                            std::ostream& help);

/// Runs the command. Reports go to config.out when set, else to `out`; diagnostics to
/// `err`. Exit status: 0 success, 1 input error or failed precondition, 2 verification
/// failure.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_command_line + run.
int main(int argc, char** argv);

}  // namespace fvtl::cli
