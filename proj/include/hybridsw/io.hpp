#ifndef HYBRIDSW_IO_HPP_
#define HYBRIDSW_IO_HPP_

// JSON model/Lyapunov configs, report JSON and CSV emission.
//
// Model JSON:
//   {"d": 1, "N": 2 (optional check),
//    "drift": {"family": "linear", "coefficient": [B_1, ..., B_N]}
//           | {"family": "power_sgn", "b": [...], "power": p}
//           | {"family": "bounded", "bounded": [...], "linear": Z},
//    "diffusion": {"family": "constant", "sigma": [S_1, ..., S_N]}
//               | {"family": "power", "sigma": [...], "power": q}
//               | {"family": "ou_cutoff", "sigma": [...]},
//    "switching": {"thresholds": [...], "cells": [Q, ...]}
//               | {"cuts": [...], "cells": [Q, ...]}
//               | {"base": Q, "modulation": B,
//                  "shape": "tanh_signed" | "tanh_radius" | "sigmoid_radius"}}
// A coefficient matrix is a list of rows, or a bare number when it is 1 x 1.
// A rate matrix Q is {"n": n, "rates": rows} or just the rows. Its diagonal
// may be null or omitted (rows of n-1 off-diagonal entries); it is then
// filled in from the off-diagonal row sums.

#include <string>
#include <string_view>

#include <json.hpp>

#include "hybridsw/classify.hpp"
#include "hybridsw/couple.hpp"
#include "hybridsw/model.hpp"
#include "hybridsw/simulate.hpp"

namespace hybridsw {

HybridModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const HybridModel& m);

/// Reads and parses a model file. IoFailure when unreadable, ConfigParse on
/// malformed JSON or missing fields.
HybridModel load_model(const std::string& path);
nlohmann::json load_json(const std::string& path);

/// Lyapunov JSON: {"kind": "L1".."L4", "behavior": "...",
///                 "beta": [...] | "derive", "gamma": g (optional)}.
/// With "derive", beta comes from derive_beta, or from
/// derive_inverse_power_beta when gamma is given. The derivation note is
/// returned through `note`.
LyapunovData lyapunov_from_json(const nlohmann::json& j, const HybridModel& m,
                                std::string* note);

nlohmann::json report_to_json(const CriteriaReport& report);

/// Shortest text that is stable across runs: printf %.17g.
std::string format_double(double v);

/// Full-path: path,t,x_1..x_d,regime. Terminal: path,x_T_1..,regime_T,sup_norm.
/// Events-only: path,time,from,to,mark. Regimes are written 1-based.
std::string ensemble_csv(const EnsembleSummary& summary, RecordMode mode,
                         int dim);

std::string rate_table_csv(const RateTable& table);

void write_text_file(const std::string& path, std::string_view content);

}  // namespace hybridsw

#endif  // HYBRIDSW_IO_HPP_
