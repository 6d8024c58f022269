#include "hybridsw/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <ostream>

#include "hybridsw/classify.hpp"
#include "hybridsw/couple.hpp"
#include "hybridsw/error.hpp"
#include "hybridsw/io.hpp"
#include "hybridsw/simulate.hpp"

namespace hybridsw::cli {
namespace {

using nlohmann::json;

struct RunOptions {
  std::string model;
  std::string out;
  double T = 0.0;
  std::vector<double> horizons;
  double dt = 0.0;
  int paths = 1;
  std::uint64_t seed = 0;
  std::vector<double> x0;
  int i0 = 1;
  int threads = 1;
  std::string record = "terminal";
  std::vector<int> levels;
  double radius = 4.0;
  std::string lyapunov;
  double eps = 0.1;
  std::vector<double> x0_norms{1e-1, 1e-2, 1e-3};
};

[[noreturn]] void config_error(const std::string& op, const std::string& why) {
  throw Error(ErrorKind::ConfigParse, "cli", op, why);
}

void add_run_params(CLI::App* app, RunOptions& o, bool single_horizon) {
  if (single_horizon) {
    app->add_option("--T", o.T, "time horizon")->required();
  }
  app->add_option("--dt", o.dt, "Euler step")->required();
  app->add_option("--paths", o.paths, "number of paths");
  app->add_option("--seed", o.seed, "master seed")->required();
  app->add_option("--x0", o.x0, "initial state, comma separated")
      ->delimiter(',');
  app->add_option("--i0", o.i0, "initial regime (1-based)");
  app->add_option("--threads", o.threads, "worker threads");
  app->add_option("--out", o.out, "output file")->required();
}

SimParams sim_params(const RunOptions& o, double horizon, const char* op) {
  if (!(o.dt > 0.0) || !(horizon > 0.0)) {
    config_error(op, "T and dt must be positive");
  }
  if (o.dt > horizon) config_error(op, "dt must not exceed T");
  if (o.paths < 1) config_error(op, "paths must be >= 1");
  if (o.threads < 1) config_error(op, "threads must be >= 1");
  SimParams sp;
  sp.T = horizon;
  sp.dt = o.dt;
  sp.paths = o.paths;
  sp.seed = o.seed;
  sp.threads = o.threads;
  return sp;
}

Eigen::VectorXd start_state(const RunOptions& o, int dim, const char* op) {
  if (o.x0.empty()) return Eigen::VectorXd::Zero(dim);
  if (static_cast<int>(o.x0.size()) != dim) {
    config_error(op, "--x0 needs " + std::to_string(dim) + " components");
  }
  return Eigen::Map<const Eigen::VectorXd>(o.x0.data(), dim);
}

int start_regime(const RunOptions& o, const HybridModel& m, const char* op) {
  if (o.i0 < 1 || o.i0 > m.regimes()) {
    config_error(op, "--i0 must lie in 1.." + std::to_string(m.regimes()));
  }
  return o.i0 - 1;
}

void warn_coarse(const HybridModel& m, const SimParams& sp, std::ostream& err) {
  if (step_too_coarse(m, sp)) {
    err << "warning: dt times the rate bound exceeds 0.1\n";
  }
}

void run_simulate(const RunOptions& o, std::ostream& out, std::ostream& err) {
  constexpr const char* op = "simulate";
  SimParams sp = sim_params(o, o.T, op);
  if (o.record == "terminal") {
    sp.record = RecordMode::kTerminal;
  } else if (o.record == "full-path") {
    sp.record = RecordMode::kFullPath;
  } else if (o.record == "events-only") {
    sp.record = RecordMode::kEventsOnly;
  } else {
    config_error(op, "--record must be terminal, full-path or events-only");
  }
  const HybridModel m = load_model(o.model);
  warn_coarse(m, sp, err);
  const EnsembleSummary summary =
      ensemble(m, start_state(o, m.dim(), op), start_regime(o, m, op), sp);
  write_text_file(o.out, ensemble_csv(summary, sp.record, m.dim()));
  double mean_sup = 0.0;
  for (double s : summary.sup_norms) mean_sup += s;
  mean_sup /= summary.path_count;
  out << "simulate: " << summary.path_count << " paths, T="
      << format_double(sp.T) << ", dt=" << format_double(sp.dt)
      << ", mean sup|X|=" << format_double(mean_sup) << "\n";
}

void run_couple(const RunOptions& o, std::ostream& out, std::ostream& err) {
  constexpr const char* op = "couple";
  const SimParams sp = sim_params(o, o.T, op);
  if (o.levels.empty()) config_error(op, "--levels is empty");
  const HybridModel m = load_model(o.model);
  warn_coarse(m, sp, err);
  const RateTable table = convergence_experiment(
      m, o.levels, o.radius, start_state(o, m.dim(), op),
      start_regime(o, m, op), sp);
  write_text_file(o.out, rate_table_csv(table));
  const RateRow& last = table.rows.back();
  out << "couple: " << table.rows.size() << " levels, n=" << last.levels
      << " theta=" << format_double(last.theta)
      << " w1(T)=" << format_double(last.w1.back())
      << " bound=" << format_double(last.bound)
      << (table.w1_exact ? "" : " (w1 columns are coupled upper bounds)")
      << "\n";
}

void run_classify(const RunOptions& o, std::ostream& out) {
  const HybridModel m = load_model(o.model);
  std::string note;
  const LyapunovData ld = lyapunov_from_json(load_json(o.lyapunov), m, &note);
  CriteriaReport report = classify(m, ld);
  if (!note.empty()) report.notes.insert(report.notes.begin(), note);
  json doc = report_to_json(report);
  doc["lyapunov"] = {{"kind", std::string(to_string(ld.kind))},
                     {"behavior", std::string(to_string(ld.behavior))}};
  write_text_file(o.out, doc.dump(2) + "\n");
  out << "classify: " << to_string(report.verdict) << " (" << report.theorem
      << ")\n";
}

void run_stability(const RunOptions& o, std::ostream& out, std::ostream& err) {
  constexpr const char* op = "experiment stability";
  const SimParams sp = sim_params(o, o.T, op);
  if (!(o.eps > 0.0)) config_error(op, "--eps must be positive");
  if (o.x0_norms.empty()) config_error(op, "--x0-norms is empty");
  const HybridModel m = load_model(o.model);
  warn_coarse(m, sp, err);
  const int i0 = start_regime(o, m, op);
  Eigen::VectorXd direction = start_state(o, m.dim(), op);
  if (direction.norm() == 0.0) direction = Eigen::VectorXd::Unit(m.dim(), 0);
  direction /= direction.norm();

  std::string csv = "x0_norm,eps,exceedance,stderr,T\n";
  double last = 0.0;
  for (double r : o.x0_norms) {
    const ExceedanceEstimate e =
        estimate_sup_exceedance(m, r * direction, i0, o.eps, sp);
    csv += format_double(r) + ',' + format_double(o.eps) + ',' +
           format_double(e.probability) + ',' + format_double(e.std_error) +
           ',' + format_double(e.horizon) + '\n';
    last = e.probability;
  }
  write_text_file(o.out, csv);
  out << "experiment stability: " << o.x0_norms.size()
      << " starting radii, exceedance at smallest |x0| = " << format_double(last)
      << " (T=" << format_double(sp.T) << ")\n";
}

void run_recurrence(const RunOptions& o, std::ostream& out, std::ostream& err) {
  constexpr const char* op = "experiment recurrence";
  if (o.horizons.empty()) config_error(op, "--T is empty");
  if (!(o.radius > 0.0)) config_error(op, "--radius must be positive");
  const HybridModel m = load_model(o.model);
  const Eigen::VectorXd x0 = start_state(o, m.dim(), op);
  const int i0 = start_regime(o, m, op);
  std::string csv =
      "T,radius,occupation,occupation_stderr,mean_entries,q10,q25,q50,q75,q90\n";
  double last = 0.0;
  for (double horizon : o.horizons) {
    const SimParams sp = sim_params(o, horizon, op);
    warn_coarse(m, sp, err);
    const RecurrenceStats s = occupation_and_recurrence(m, x0, i0, sp, o.radius);
    csv += format_double(horizon) + ',' + format_double(o.radius) + ',' +
           format_double(s.occupation) + ',' +
           format_double(s.occupation_stderr) + ',' +
           format_double(s.mean_entries);
    for (double q : s.terminal_quantiles) csv += ',' + format_double(q);
    csv += '\n';
    last = s.occupation;
  }
  write_text_file(o.out, csv);
  out << "experiment recurrence: occupation of |x| <= "
      << format_double(o.radius) << " at T=" << format_double(o.horizons.back())
      << " is " << format_double(last) << "\n";
}

void report_error(std::ostream& err, const std::string& kind,
                  const std::string& module, const std::string& operation,
                  const std::string& message) {
  const json doc{{"error", kind},
                 {"module", module},
                 {"operation", operation},
                 {"message", message}};
  err << doc.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  RunOptions o;
  CLI::App app{"Stochastic hybrid systems with threshold-type switching"};
  app.require_subcommand(1);

  CLI::App* simulate = app.add_subcommand("simulate", "sample paths");
  simulate->add_option("--model", o.model, "model JSON")->required();
  simulate->add_option("--record", o.record,
                       "terminal | full-path | events-only");
  add_run_params(simulate, o, true);

  CLI::App* couple = app.add_subcommand("couple", "smooth-vs-threshold rates");
  couple->add_option("--smooth", o.model, "smooth model JSON")->required();
  couple->add_option("--levels", o.levels, "quantization levels")
      ->delimiter(',')
      ->required();
  couple->add_option("--radius", o.radius, "quantization radius R");
  add_run_params(couple, o, true);

  CLI::App* classify_cmd = app.add_subcommand("classify", "criteria verdict");
  classify_cmd->add_option("--model", o.model, "model JSON")->required();
  classify_cmd->add_option("--lyapunov", o.lyapunov, "Lyapunov JSON")
      ->required();
  classify_cmd->add_option("--out", o.out, "report JSON")->required();

  CLI::App* experiment = app.add_subcommand("experiment", "ensemble studies");
  experiment->require_subcommand(1);
  CLI::App* stability =
      experiment->add_subcommand("stability", "exceedance as |x0| shrinks");
  stability->add_option("--model", o.model, "model JSON")->required();
  stability->add_option("--eps", o.eps, "exceedance radius");
  stability->add_option("--x0-norms", o.x0_norms, "starting radii")
      ->delimiter(',');
  add_run_params(stability, o, true);
  CLI::App* recurrence =
      experiment->add_subcommand("recurrence", "occupation of a ball");
  recurrence->add_option("--model", o.model, "model JSON")->required();
  recurrence->add_option("--radius", o.radius, "ball radius")->required();
  recurrence->add_option("--T", o.horizons, "horizons, comma separated")
      ->delimiter(',')
      ->required();
  add_run_params(recurrence, o, false);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "ConfigParse", "cli", "parse", e.what());
    return 1;
  }

  try {
    if (simulate->parsed()) {
      run_simulate(o, out, err);
    } else if (couple->parsed()) {
      run_couple(o, out, err);
    } else if (classify_cmd->parsed()) {
      run_classify(o, out);
    } else if (stability->parsed()) {
      run_stability(o, out, err);
    } else {
      run_recurrence(o, out, err);
    }
  } catch (const Error& e) {
    report_error(err, std::string(to_string(e.kind())), e.module(),
                 e.operation(), e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error(err, "InvalidArgument", "cli", "run", e.what());
    return 1;
  }
  return 0;
}

}  // namespace hybridsw::cli
