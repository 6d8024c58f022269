#include "hybridsw/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hybridsw/error.hpp"

namespace hybridsw {
namespace {

using nlohmann::json;

constexpr const char* kModule = "io";

[[noreturn]] void parse_error(const std::string& what) {
  throw Error(ErrorKind::ConfigParse, kModule, "parse", what);
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    parse_error(std::string("missing field \"") + key + "\"");
  }
  return j.at(key);
}

double number(const json& j, const char* what) {
  if (!j.is_number()) parse_error(std::string(what) + " must be a number");
  return j.get<double>();
}

Eigen::VectorXd vector_of(const json& j, const char* what) {
  if (!j.is_array()) parse_error(std::string(what) + " must be a list");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(k) = number(j[k], what);
  return v;
}

std::vector<double> list_of(const json& j, const char* what) {
  const Eigen::VectorXd v = vector_of(j, what);
  return std::vector<double>(v.data(), v.data() + v.size());
}

// Null entries are reported through `has_null` and read as 0.
Eigen::MatrixXd matrix_of(const json& j, const char* what,
                          bool* has_null = nullptr) {
  if (j.is_number()) return Eigen::MatrixXd::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) {
    parse_error(std::string(what) + " must be a number or a list of rows");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) parse_error(std::string(what) + " rows must be lists");
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      parse_error(std::string(what) + " rows must have equal length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (j[r][c].is_null() && has_null != nullptr) {
        *has_null = true;
        m(r, c) = 0.0;
      } else {
        m(r, c) = number(j[r][c], what);
      }
    }
  }
  return m;
}

std::vector<Eigen::MatrixXd> matrices_of(const json& j, const char* what) {
  if (!j.is_array()) parse_error(std::string(what) + " must be a list");
  std::vector<Eigen::MatrixXd> out;
  for (const json& e : j) out.push_back(matrix_of(e, what));
  return out;
}

// Rows of length n-1 list only the off-diagonal rates.
Eigen::MatrixXd expand_omitted_diagonal(const json& rows, int n) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    if (!rows[r].is_array() || static_cast<int>(rows[r].size()) != n - 1) {
      parse_error("rate rows must all have n or n-1 entries");
    }
    for (int c = 0, k = 0; c < n; ++c) {
      if (c != r) m(r, c) = number(rows[r][k++], "rate");
    }
  }
  return m;
}

QMatrix qmatrix_of(const json& j) {
  const json* rows = &j;
  if (j.is_object()) {
    rows = &field(j, "rates");
    const json& n = field(j, "n");
    if (!n.is_number_integer() || !rows->is_array() ||
        static_cast<std::size_t>(n.get<int>()) != rows->size()) {
      parse_error("rate matrix \"n\" must equal the number of rows");
    }
  }
  if (rows->is_array() && !rows->empty() && (*rows)[0].is_array() &&
      (*rows)[0].size() + 1 == rows->size()) {
    return QMatrix::from_off_diagonal(
        expand_omitted_diagonal(*rows, static_cast<int>(rows->size())));
  }
  bool has_null = false;
  const Eigen::MatrixXd raw = matrix_of(*rows, "rate matrix", &has_null);
  if (raw.rows() != raw.cols()) parse_error("rate matrix must be square");
  return has_null ? QMatrix::from_off_diagonal(raw) : QMatrix::validate(raw);
}

std::vector<QMatrix> cells_of(const json& j) {
  if (!j.is_array() || j.empty()) parse_error("cells must be a non-empty list");
  std::vector<QMatrix> out;
  for (const json& e : j) out.push_back(qmatrix_of(e));
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  if (m.rows() == 1 && m.cols() == 1) return m(0, 0);
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json rates_json(const QMatrix& q) {
  json rows = json::array();
  for (int r = 0; r < q.size(); ++r) {
    json row = json::array();
    for (int c = 0; c < q.size(); ++c) row.push_back(q.rate(r, c));
    rows.push_back(std::move(row));
  }
  return json{{"n", q.size()}, {"rates", std::move(rows)}};
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

json matrices_json(const std::vector<Eigen::MatrixXd>& ms) {
  json out = json::array();
  for (const auto& m : ms) out.push_back(matrix_json(m));
  return out;
}

json cells_json(const std::vector<QMatrix>& cells) {
  json out = json::array();
  for (const auto& c : cells) out.push_back(rates_json(c));
  return out;
}

SmoothShape shape_of(const std::string& name) {
  if (name == "tanh_signed") return SmoothShape::kTanhSigned;
  if (name == "tanh_radius") return SmoothShape::kTanhRadius;
  if (name == "sigmoid_radius") return SmoothShape::kSigmoidRadius;
  parse_error("unknown shape \"" + name + "\"");
}

std::string shape_name(SmoothShape s) {
  switch (s) {
    case SmoothShape::kTanhSigned:
      return "tanh_signed";
    case SmoothShape::kTanhRadius:
      return "tanh_radius";
    case SmoothShape::kSigmoidRadius:
      return "sigmoid_radius";
  }
  return "";
}

SwitchingSpec switching_of(const json& j) {
  if (j.contains("thresholds")) {
    return RadialThresholdQ(list_of(j.at("thresholds"), "thresholds"),
                            cells_of(field(j, "cells")));
  }
  if (j.contains("cuts")) {
    return SignedThresholdQ(list_of(j.at("cuts"), "cuts"),
                            cells_of(field(j, "cells")));
  }
  if (j.contains("base")) {
    const json& shape = field(j, "shape");
    if (!shape.is_string()) parse_error("shape must be a string");
    return SmoothQ(qmatrix_of(j.at("base")),
                   matrix_of(field(j, "modulation"), "modulation"),
                   shape_of(shape.get<std::string>()));
  }
  parse_error("switching needs thresholds, cuts or base");
}

std::string family_of(const json& j) {
  const json& f = field(j, "family");
  if (!f.is_string()) parse_error("family must be a string");
  return f.get<std::string>();
}

DriftSpec drift_of(const json& j) {
  const std::string family = family_of(j);
  if (family == "linear") {
    return LinearDrift{matrices_of(field(j, "coefficient"), "coefficient")};
  }
  if (family == "power_sgn") {
    return PowerSgnDrift{vector_of(field(j, "b"), "b"),
                         number(field(j, "power"), "power")};
  }
  if (family == "bounded") {
    return BoundedDrift{vector_of(field(j, "bounded"), "bounded"),
                        matrix_of(field(j, "linear"), "linear")};
  }
  parse_error("unknown drift family \"" + family + "\"");
}

DiffusionSpec diffusion_of(const json& j) {
  const std::string family = family_of(j);
  if (family == "constant") {
    return ConstantDiffusion{matrices_of(field(j, "sigma"), "sigma")};
  }
  if (family == "power") {
    return PowerDiffusion{vector_of(field(j, "sigma"), "sigma"),
                          number(field(j, "power"), "power")};
  }
  if (family == "ou_cutoff") {
    return OUCutoffDiffusion{vector_of(field(j, "sigma"), "sigma")};
  }
  parse_error("unknown diffusion family \"" + family + "\"");
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::IoFailure, kModule, "read", "cannot open " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

HybridModel model_from_json(const json& j) {
  const json& dim = field(j, "d");
  if (!dim.is_number_integer()) parse_error("d must be an integer");
  try {
    HybridModel m(dim.get<int>(), drift_of(field(j, "drift")),
                  diffusion_of(field(j, "diffusion")),
                  switching_of(field(j, "switching")));
    if (j.contains("N") &&
        (!j.at("N").is_number_integer() || j.at("N").get<int>() != m.regimes())) {
      throw Error(ErrorKind::ModelInvalid, kModule, "model_from_json",
                  "N does not match the regime count of the switching spec");
    }
    return m;
  } catch (const json::exception& e) {
    parse_error(e.what());
  }
}

json model_to_json(const HybridModel& m) {
  json out;
  out["d"] = m.dim();
  out["N"] = m.regimes();
  out["drift"] = std::visit(
      Overloaded{[](const LinearDrift& d) {
                   return json{{"family", "linear"},
                               {"coefficient", matrices_json(d.coefficient)}};
                 },
                 [](const PowerSgnDrift& d) {
                   return json{{"family", "power_sgn"},
                               {"b", vector_json(d.b)},
                               {"power", d.power}};
                 },
                 [](const BoundedDrift& d) {
                   return json{{"family", "bounded"},
                               {"bounded", vector_json(d.bounded)},
                               {"linear", matrix_json(d.linear)}};
                 }},
      m.drift());
  out["diffusion"] = std::visit(
      Overloaded{[](const ConstantDiffusion& s) {
                   return json{{"family", "constant"},
                               {"sigma", matrices_json(s.sigma)}};
                 },
                 [](const PowerDiffusion& s) {
                   return json{{"family", "power"},
                               {"sigma", vector_json(s.sigma)},
                               {"power", s.power}};
                 },
                 [](const OUCutoffDiffusion& s) {
                   return json{{"family", "ou_cutoff"},
                               {"sigma", vector_json(s.sigma)}};
                 }},
      m.diffusion());
  out["switching"] = std::visit(
      Overloaded{[](const RadialThresholdQ& r) {
                   return json{{"thresholds", r.thresholds()},
                               {"cells", cells_json(r.cells())}};
                 },
                 [](const SignedThresholdQ& s) {
                   return json{{"cuts", s.cuts()},
                               {"cells", cells_json(s.cells())}};
                 },
                 [](const SmoothQ& s) {
                   return json{{"base", rates_json(s.base())},
                               {"modulation", matrix_json(s.modulation())},
                               {"shape", shape_name(s.shape())}};
                 }},
      m.switching());
  return out;
}

json load_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigParse, kModule, "load_json",
                path + ": " + e.what());
  }
}

HybridModel load_model(const std::string& path) {
  return model_from_json(load_json(path));
}

LyapunovData lyapunov_from_json(const json& j, const HybridModel& m,
                                std::string* note) {
  const json& kind_j = field(j, "kind");
  const json& behavior_j = field(j, "behavior");
  if (!kind_j.is_string() || !behavior_j.is_string()) {
    parse_error("kind and behavior must be strings");
  }
  const auto kind = parse_lyapunov_kind(kind_j.get<std::string>());
  const auto behavior = parse_rho_behavior(behavior_j.get<std::string>());
  if (!kind) parse_error("unknown Lyapunov kind " + kind_j.dump());
  if (!behavior) parse_error("unknown rho behavior " + behavior_j.dump());

  LyapunovData ld{*kind, BetaVector(), *behavior, std::nullopt, std::nullopt};
  const json& beta = field(j, "beta");
  if (beta.is_string() && beta.get<std::string>() == "derive") {
    const std::optional<DerivedBeta> derived =
        j.contains("gamma")
            ? derive_inverse_power_beta(m, number(j.at("gamma"), "gamma"))
            : derive_beta(m);
    if (!derived) parse_error("beta cannot be derived for this model family");
    ld.beta = derived->beta;
    if (note != nullptr) *note = derived->note;
  } else {
    ld.beta = vector_of(beta, "beta");
  }
  if (j.contains("rho_power")) ld.rho_power = number(j.at("rho_power"), "rho_power");
  if (j.contains("h_power")) ld.h_power = number(j.at("h_power"), "h_power");
  return ld;
}

json report_to_json(const CriteriaReport& report) {
  json cells = json::array();
  for (const CellCertificate& c : report.cells) {
    json cell{{"label", c.label},
              {"q", rates_json(c.q)},
              {"pi", vector_json(c.pi.weights())},
              {"weighted_beta", c.weighted_beta}};
    if (c.p) cell["p"] = *c.p;
    if (c.perron) {
      cell["eta_p"] = c.perron->eta;
      cell["xi"] = vector_json(c.perron->xi);
    }
    if (c.fredholm) {
      cell["c"] = c.fredholm->c;
      cell["xi"] = vector_json(c.fredholm->xi);
    }
    cells.push_back(std::move(cell));
  }
  return json{{"verdict", std::string(to_string(report.verdict))},
              {"theorem", report.theorem},
              {"cells", std::move(cells)},
              {"notes", report.notes}};
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string ensemble_csv(const EnsembleSummary& summary, RecordMode mode,
                         int dim) {
  std::string out;
  const auto row_end = [&out] { out += '\n'; };
  if (mode == RecordMode::kTerminal) {
    out += "path";
    for (int k = 1; k <= dim; ++k) out += ",x_T_" + std::to_string(k);
    out += ",regime_T,sup_norm\n";
    for (int p = 0; p < summary.path_count; ++p) {
      out += std::to_string(p);
      for (int k = 0; k < dim; ++k) {
        out += ',' + format_double(summary.terminal_states[p](k));
      }
      out += ',' + std::to_string(summary.terminal_regimes[p] + 1);
      out += ',' + format_double(summary.sup_norms[p]);
      row_end();
    }
    return out;
  }
  if (mode == RecordMode::kFullPath) {
    out += "path,t";
    for (int k = 1; k <= dim; ++k) out += ",x_" + std::to_string(k);
    out += ",regime\n";
    for (std::size_t p = 0; p < summary.paths.size(); ++p) {
      const Trajectory& tr = summary.paths[p];
      for (std::size_t n = 0; n < tr.times.size(); ++n) {
        out += std::to_string(p) + ',' + format_double(tr.times[n]);
        for (int k = 0; k < dim; ++k) out += ',' + format_double(tr.states[n](k));
        out += ',' + std::to_string(tr.regimes[n] + 1);
        row_end();
      }
    }
    return out;
  }
  out += "path,time,from,to,mark\n";
  for (std::size_t p = 0; p < summary.paths.size(); ++p) {
    for (const SwitchEvent& e : summary.paths[p].switches) {
      out += std::to_string(p) + ',' + format_double(e.time) + ',' +
             std::to_string(e.from + 1) + ',' + std::to_string(e.to + 1) + ',' +
             format_double(e.mark);
      row_end();
    }
  }
  return out;
}

std::string rate_table_csv(const RateTable& table) {
  std::string out =
      "n,theta_n,w1_hat_t1,w1_hat_t2,w1_hat_t3,w1_hat_t4,coupled_mean,bound,"
      "stderr,mismatch_lhs,mismatch_rhs,mismatch_lhs_stderr,"
      "mismatch_rhs_stderr\n";
  for (const RateRow& r : table.rows) {
    out += std::to_string(r.levels) + ',' + format_double(r.theta);
    for (double w : r.w1) out += ',' + format_double(w);
    for (double v : {r.coupled_mean, r.bound, r.std_error, r.mismatch_lhs,
                     r.mismatch_rhs, r.mismatch_lhs_stderr,
                     r.mismatch_rhs_stderr}) {
      out += ',' + format_double(v);
    }
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw Error(ErrorKind::IoFailure, kModule, "write", "cannot open " + path);
  }
  file.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!file) {
    throw Error(ErrorKind::IoFailure, kModule, "write", "cannot write " + path);
  }
}

}  // namespace hybridsw
