#include "fvtl/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fvtl/error.hpp"

namespace fvtl {

std::string format_digits(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string format_exact(double v) { return format_digits(v, 17); }

StochasticMatrix read_tsv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) {
      const auto a = cell.find_first_not_of(' ');
      if (a == std::string::npos) continue;
      const auto b = cell.find_last_not_of(' ');
      const std::string token = cell.substr(a, b - a + 1);
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(token.c_str(), &end);
      if (end != token.c_str() + token.size() || errno == ERANGE) {
        std::ostringstream msg;
        msg << "row " << rows.size() << ": '" << token << "' is not a number";
        throw ValidationError(msg.str());
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw ShapeError("chain file needs at least two rows");
  return StochasticMatrix::from_rows(rows);
}

void write_tsv(std::ostream& out, const StochasticMatrix& p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (j) out << '\t';
      out << format_exact(p(i, j));
    }
    out << '\n';
  }
}

StochasticMatrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("rows")) throw ShapeError("chain JSON needs a \"rows\" array");
  const auto rows = j.at("rows").get<std::vector<std::vector<double>>>();
  if (j.contains("n") && j.at("n").get<std::size_t>() != rows.size()) {
    throw ShapeError("chain JSON: n does not match the number of rows");
  }
  if (rows.size() < 2) throw ShapeError("chain needs at least two states");
  return StochasticMatrix::from_rows(rows);
}

json matrix_to_json(const StochasticMatrix& p) {
  json rows = json::array();
  for (std::size_t i = 0; i < p.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < p.size(); ++j) row.push_back(p(i, j));
    rows.push_back(std::move(row));
  }
  return {{"n", p.size()}, {"rows", std::move(rows)}};
}

StochasticMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open chain file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ValidationError(path + ": " + e.what());
    }
    return matrix_from_json(j);
  }
  std::istringstream tsv(text);
  return read_tsv(tsv);
}

void to_json(json& j, const HypothesisReport& r) {
  json eps1 = json::object();
  for (const auto& [x, v] : r.eps1) eps1[std::to_string(x)] = v;
  j = {{"T", r.T},
       {"c", r.c},
       {"D_T", r.D_T},
       {"hp1_ok", r.hp1_ok},
       {"hp2_value", r.hp2_value},
       {"hp3_value", r.hp3_value},
       {"eps1", std::move(eps1)},
       {"eps2", r.eps2}};
}

namespace {

struct Column {
  const char* name;
  std::string (*get)(const FvtlReport&);
};

#define FVTL_NUM(field) \
  Column { #field, [](const FvtlReport& r) { return format_exact(static_cast<double>(r.field)); } }
#define FVTL_INT(field) \
  Column { #field, [](const FvtlReport& r) { return std::to_string(r.field); } }

const std::vector<Column>& report_columns() {
  static const std::vector<Column> columns = {
      FVTL_INT(x),
      FVTL_INT(n),
      FVTL_INT(T),
      FVTL_INT(t_max),
      FVTL_NUM(lambda),
      FVTL_NUM(lambda_T),
      FVTL_NUM(R_T),
      FVTL_NUM(pi_x),
      FVTL_NUM(expected_hitting),
      FVTL_NUM(sup_ratio_dev),
      FVTL_INT(sup_ratio_dev_at),
      FVTL_NUM(lambda_approx_dev),
      FVTL_NUM(pi_dot_gamma),
      FVTL_NUM(gamma_min),
      FVTL_NUM(gamma_max),
      FVTL_NUM(gamma_lb_slack),
      Column{"gamma_ub_ok", [](const FvtlReport& r) { return std::string(r.gamma_ub_ok ? "1" : "0"); }},
      FVTL_NUM(gamma_lb_slack_eps),
      FVTL_INT(bounds_violations),
      FVTL_NUM(csqst_residual_sup),
      FVTL_NUM(csqst_residual_min),
      FVTL_NUM(sep0),
      FVTL_NUM(qsd_vs_pi_sep),
      FVTL_NUM(max_start_ratio),
      FVTL_NUM(mixed_start_ratio_dev),
      FVTL_NUM(left_residual),
      FVTL_NUM(right_residual),
  };
  return columns;
}

#undef FVTL_NUM
#undef FVTL_INT

const std::vector<std::string> kHypothesisColumns = {"D_T", "hp1_ok", "hp2_value", "hp3_value",
                                                     "eps1", "eps2"};

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

}  // namespace

void to_json(json& j, const FvtlReport& r) {
  j = {{"x", r.x},
       {"n", r.n},
       {"T", r.T},
       {"t_max", r.t_max},
       {"lambda", r.lambda},
       {"lambda_T", r.lambda_T},
       {"R_T", r.R_T},
       {"pi_x", r.pi_x},
       {"expected_hitting", r.expected_hitting},
       {"sup_ratio_dev", r.sup_ratio_dev},
       {"sup_ratio_dev_at", r.sup_ratio_dev_at},
       {"lambda_approx_dev", r.lambda_approx_dev},
       {"pi_dot_gamma", r.pi_dot_gamma},
       {"limit_ratio", r.pi_dot_gamma},
       {"gamma_min", r.gamma_min},
       {"gamma_max", r.gamma_max},
       {"gamma_lb_slack", r.gamma_lb_slack},
       {"gamma_ub_ok", r.gamma_ub_ok},
       {"gamma_lb_slack_eps", r.gamma_lb_slack_eps},
       {"bounds_violations", r.bounds_violations},
       {"csqst_residual_sup", r.csqst_residual_sup},
       {"csqst_residual_min", r.csqst_residual_min},
       {"sep0", r.sep0},
       {"qsd_vs_pi_sep", r.qsd_vs_pi_sep},
       {"max_start_ratio", r.max_start_ratio},
       {"mixed_start_ratio_dev", r.mixed_start_ratio_dev},
       {"left_residual", r.left_residual},
       {"right_residual", r.right_residual}};
}

void to_json(json& j, const TailCurve& c) {
  j = {{"target", c.target}, {"start", c.start}, {"t_max", c.t_max()}, {"values", c.values}};
}

void to_json(json& j, const McEstimate& e) {
  j = {{"t", e.t}, {"estimate", e.point}, {"stderr", e.std_error}, {"N", e.n_samples},
       {"seed", e.seed}};
}

void to_json(json& j, const ChainSpec& s) {
  j = {{"family", to_string(s.family)}, {"params", s.params}};
  if (s.seed != 0) j["seed"] = s.seed;
  if (s.base) j["base"] = *s.base;
}

void from_json(const json& j, ChainSpec& s) {
  s.family = family_from_string(j.at("family").get<std::string>());
  s.params = j.value("params", std::map<std::string, double>{});
  s.seed = j.value("seed", std::uint64_t{0});
  s.base.reset();
  if (j.contains("base")) s.base = std::make_shared<const ChainSpec>(j.at("base").get<ChainSpec>());
  validate(s);
}

json perron_to_json(const PerronTriple& t, const SubKernel& q) {
  std::vector<State> index_map(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) index_map[i] = q.to_full(i);
  return {{"excluded", q.excluded()},
          {"lambda", t.lambda},
          {"mu_star", t.mu_star.vector()},
          {"gamma", t.gamma},
          {"index_map", index_map},
          {"left_residual", t.left_residual},
          {"right_residual", t.right_residual},
          {"iterations", t.iterations}};
}

json doob_to_json(const DoobChain& d, const SubKernel& q, bool include_matrix) {
  json j = {{"excluded", d.excluded},
            {"n", d.nu.size()},
            {"nu", d.nu.vector()},
            {"max_row_sum_deviation", d.p_tilde.max_row_sum_deviation()},
            {"perron", perron_to_json(d.triple, q)}};
  if (include_matrix) j["p_tilde"] = matrix_to_json(d.p_tilde)["rows"];
  return j;
}

const std::vector<std::string>& fvtl_csv_columns() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out{"chain"};
    for (const auto& c : report_columns()) out.push_back(c.name);
    return out;
  }();
  return names;
}

void write_fvtl_csv_header(std::ostream& out) {
  const auto& cols = fvtl_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

void write_fvtl_csv_row(std::ostream& out, const std::string& chain, const FvtlReport& r) {
  out << csv_quote(chain);
  for (const auto& c : report_columns()) out << ',' << c.get(r);
  out << '\n';
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "chain,status,message";
  for (const auto& h : kHypothesisColumns) out << ",hyp_" << h;
  const auto& cols = report_columns();
  for (const auto& c : cols) out << ',' << c.name;
  out << '\n';
  for (const auto& row : rows) {
    out << csv_quote(row.spec) << ',' << row.status << ',' << csv_quote(row.message);
    if (row.hypotheses) {
      const auto& h = *row.hypotheses;
      double eps1 = 0.0;
      if (row.x && h.eps1.count(*row.x)) eps1 = h.eps1.at(*row.x);
      out << ',' << format_exact(h.D_T) << ',' << (h.hp1_ok ? 1 : 0) << ','
          << format_exact(h.hp2_value) << ',' << format_exact(h.hp3_value) << ','
          << format_exact(eps1) << ',' << format_exact(h.eps2);
    } else {
      for (std::size_t i = 0; i < kHypothesisColumns.size(); ++i) out << ',';
    }
    if (row.report) {
      for (const auto& c : cols) out << ',' << c.get(*row.report);
    } else {
      for (const auto& c : cols) {
        out << ',';
        if (std::string(c.name) == "x" && row.x) out << *row.x;
        if (std::string(c.name) == "n" && row.n) out << row.n;
      }
    }
    out << '\n';
  }
}

json sweep_to_json(const std::vector<SweepRow>& rows) {
  json out = json::array();
  for (const auto& row : rows) {
    json j = {{"chain", row.spec}, {"n", row.n}, {"status", row.status}};
    if (!row.message.empty()) j["message"] = row.message;
    if (row.x) j["x"] = *row.x;
    if (row.hypotheses) j["hypotheses"] = *row.hypotheses;
    if (row.report) j["report"] = *row.report;
    out.push_back(std::move(j));
  }
  return out;
}

void write_tail_csv(std::ostream& out, const TailCurve& c) {
  out << "t,value\n";
  for (std::size_t t = 0; t < c.values.size(); ++t) {
    out << t << ',' << format_exact(c.values[t]) << '\n';
  }
}

void write_mc_csv(std::ostream& out, const std::vector<McEstimate>& estimates) {
  out << "t,estimate,stderr,N,seed\n";
  for (const auto& e : estimates) {
    out << e.t << ',' << format_exact(e.point) << ',' << format_exact(e.std_error) << ','
        << e.n_samples << ',' << e.seed << '\n';
  }
}

}  // namespace fvtl
