#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "fvtl/chain.hpp"
#include "fvtl/generators.hpp"
#include "fvtl/hitting.hpp"
#include "fvtl/mixing.hpp"
#include "fvtl/montecarlo.hpp"
#include "fvtl/qsd.hpp"

namespace fvtl {

using json = nlohmann::json;

/// `%.17g`: enough digits for an exact round trip through strtod.
std::string format_exact(double v);
/// `%.*g` with the given number of significant digits.
std::string format_digits(double v, int digits);

/// n lines of n tab-separated reals; blank lines and lines starting with '#'
/// are skipped. Diagnostics name the offending row.
StochasticMatrix read_tsv(std::istream& in);
void write_tsv(std::ostream& out, const StochasticMatrix& p);

/// {"n": int, "rows": [[...], ...]}
StochasticMatrix matrix_from_json(const json& j);
json matrix_to_json(const StochasticMatrix& p);

/// Reads a chain file, JSON when its first non-space character is '{', TSV otherwise.
StochasticMatrix load_matrix(const std::string& path);

void to_json(json& j, const HypothesisReport& r);
void to_json(json& j, const FvtlReport& r);
void to_json(json& j, const TailCurve& c);
void to_json(json& j, const McEstimate& e);
void to_json(json& j, const ChainSpec& s);
void from_json(const json& j, ChainSpec& s);

/// PerronTriple with vectors ordered by the sub-kernel's local index, plus the
/// full-state index map.
json perron_to_json(const PerronTriple& t, const SubKernel& q);
/// Doob chain summary; `include_matrix` adds the rows of P~.
json doob_to_json(const DoobChain& d, const SubKernel& q, bool include_matrix = false);

/// Fixed column order for FvtlReport rows.
const std::vector<std::string>& fvtl_csv_columns();
void write_fvtl_csv_header(std::ostream& out);
void write_fvtl_csv_row(std::ostream& out, const std::string& chain, const FvtlReport& r);

/// Sweep table: spec, status, message, then the hypothesis and report columns.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
json sweep_to_json(const std::vector<SweepRow>& rows);

/// Two columns: t, value.
void write_tail_csv(std::ostream& out, const TailCurve& c);
/// Columns: t, estimate, stderr, N, seed.
void write_mc_csv(std::ostream& out, const std::vector<McEstimate>& estimates);

}  // namespace fvtl
