#include "hybridsw/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "engine.hpp"
#include "hybridsw/error.hpp"

namespace hybridsw {
namespace {

constexpr const char* kModule = "simulate";

void check_start(const HybridModel& m, const Eigen::VectorXd& x0, int i0,
                 const char* op) {
  if (x0.size() != m.dim() || !x0.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, kModule, op,
                "initial state must be a finite vector of the model dimension");
  }
  if (i0 < 0 || i0 >= m.regimes()) {
    throw Error(ErrorKind::RegimeOutOfRange, kModule, op,
                "initial regime outside the regime set");
  }
}

// Time in the ball is integrated with the left-point rule on the Euler grid.
struct BallObserver {
  explicit BallObserver(double radius) : radius(radius) {}

  void on_step(double, double h, const Eigen::VectorXd&,
               std::span<const detail::EngineSystem>) {
    if (inside) time_inside += h;
  }
  void on_candidate(double, double, std::span<const detail::EngineSystem>,
                    std::span<const int>) {}
  void on_node(double, std::span<const detail::EngineSystem> systems) {
    const detail::EngineSystem& s = systems.front();
    const double r = s.x.norm();
    const bool now_inside = r <= radius;
    if (started && now_inside && !inside) ++entries;
    inside = now_inside;
    started = true;
    terminal_norm = r;
  }
  void on_checkpoint(std::size_t, std::span<const detail::EngineSystem>) {}

  double radius;
  bool started = false;
  bool inside = false;
  double time_inside = 0.0;
  int entries = 0;
  double terminal_norm = 0.0;
};

template <class Observer>
void run_single(const HybridModel& m, const Eigen::VectorXd& x0, int i0,
                const SimParams& sp, std::uint64_t stream, const char* op,
                Observer& obs) {
  const double bound = detail::engine_bound(rate_bound(m.switching()));
  detail::EngineSystem system(m, x0, i0, bound);
  const detail::EngineConfig cfg{sp.T, sp.dt, bound, sp.seed, stream,
                                 &sp.checkpoints, op};
  detail::drive(std::span<detail::EngineSystem>(&system, 1), cfg, obs);
}

std::string with_path(const Error& e, int path) {
  return "path " + std::to_string(path) + ": " + e.what();
}

}  // namespace

void validate(const SimParams& sp) {
  const auto bad = [](const std::string& why) {
    throw Error(ErrorKind::InvalidArgument, kModule, "validate", why);
  };
  if (!(sp.T > 0.0) || !std::isfinite(sp.T)) bad("T must be positive");
  if (!(sp.dt > 0.0) || !(sp.dt <= sp.T)) bad("dt must satisfy 0 < dt <= T");
  if (sp.paths < 1) bad("path count must be >= 1");
  if (sp.threads < 1) bad("thread count must be >= 1");
  for (std::size_t k = 0; k < sp.checkpoints.size(); ++k) {
    const double c = sp.checkpoints[k];
    if (!(c > 0.0) || c > sp.T || (k > 0 && !(c > sp.checkpoints[k - 1]))) {
      bad("checkpoints must be increasing and lie in (0, T]");
    }
  }
}

bool step_too_coarse(const HybridModel& m, const SimParams& sp) {
  return sp.dt * rate_bound(m.switching()) > 0.1;
}

Trajectory sample_path(const HybridModel& m, const Eigen::VectorXd& x0, int i0,
                       const SimParams& sp, std::uint64_t stream) {
  constexpr const char* op = "sample_path";
  validate(sp);
  check_start(m, x0, i0, op);
  Trajectory traj;
  detail::PathRecorder recorder(traj, sp.record, 0);
  recorder.reserve(sp);
  run_single(m, x0, i0, sp, stream, op, recorder);
  return traj;
}

EnsembleSummary ensemble(const HybridModel& m, const Eigen::VectorXd& x0,
                         int i0, const SimParams& sp) {
  validate(sp);
  check_start(m, x0, i0, "ensemble");
  std::vector<Trajectory> paths(static_cast<std::size_t>(sp.paths));
  detail::parallel_for(sp.paths, sp.threads, [&](int p) {
    try {
      paths[p] = sample_path(m, x0, i0, sp, static_cast<std::uint64_t>(p));
    } catch (const Error& e) {
      throw Error(e.kind(), e.module(), "ensemble", with_path(e, p));
    }
  });

  EnsembleSummary out;
  out.path_count = sp.paths;
  out.seed = sp.seed;
  out.terminal_states.reserve(paths.size());
  for (const Trajectory& tr : paths) {
    out.terminal_states.push_back(tr.terminal_state);
    out.terminal_regimes.push_back(tr.terminal_regime);
    out.sup_norms.push_back(tr.sup_norm);
  }
  if (sp.record != RecordMode::kTerminal) out.paths = std::move(paths);
  return out;
}

ExceedanceEstimate estimate_sup_exceedance(const HybridModel& m,
                                           const Eigen::VectorXd& x0, int i0,
                                           double eps, const SimParams& sp) {
  if (!(eps > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, kModule, "estimate_sup_exceedance",
                "eps must be positive");
  }
  SimParams terminal = sp;
  terminal.record = RecordMode::kTerminal;
  const EnsembleSummary summary = ensemble(m, x0, i0, terminal);
  const auto hits = std::count_if(summary.sup_norms.begin(),
                                  summary.sup_norms.end(),
                                  [eps](double s) { return s > eps; });
  const double n = summary.path_count;
  const double p = static_cast<double>(hits) / n;
  return ExceedanceEstimate{p, std::sqrt(p * (1.0 - p) / n), sp.T};
}

RecurrenceStats occupation_and_recurrence(const HybridModel& m,
                                          const Eigen::VectorXd& x0, int i0,
                                          const SimParams& sp, double radius) {
  constexpr const char* op = "occupation_and_recurrence";
  if (!(radius > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, kModule, op,
                "ball radius must be positive");
  }
  validate(sp);
  check_start(m, x0, i0, op);
  const auto count = static_cast<std::size_t>(sp.paths);
  RecurrenceStats out;
  out.per_path_occupation.resize(count);
  out.per_path_entries.resize(count);
  std::vector<double> terminal(count);
  detail::parallel_for(sp.paths, sp.threads, [&](int p) {
    BallObserver obs(radius);
    try {
      run_single(m, x0, i0, sp, static_cast<std::uint64_t>(p), op, obs);
    } catch (const Error& e) {
      throw Error(e.kind(), e.module(), op, with_path(e, p));
    }
    out.per_path_occupation[p] = obs.time_inside / sp.T;
    out.per_path_entries[p] = obs.entries;
    terminal[p] = obs.terminal_norm;
  });

  const double n = static_cast<double>(count);
  double sum = 0.0;
  double sum_sq = 0.0;
  double entries = 0.0;
  for (std::size_t p = 0; p < count; ++p) {
    sum += out.per_path_occupation[p];
    sum_sq += out.per_path_occupation[p] * out.per_path_occupation[p];
    entries += out.per_path_entries[p];
  }
  out.occupation = sum / n;
  const double var =
      count > 1 ? std::max(0.0, (sum_sq - n * out.occupation * out.occupation) /
                                    (n - 1.0))
                : 0.0;
  out.occupation_stderr = std::sqrt(var / n);
  out.mean_entries = entries / n;
  constexpr std::array<double, 5> levels{0.1, 0.25, 0.5, 0.75, 0.9};
  for (std::size_t k = 0; k < levels.size(); ++k) {
    out.terminal_quantiles[k] = sample_quantile(terminal, levels[k]);
  }
  out.horizon = sp.T;
  return out;
}

double sample_quantile(std::vector<double> values, double level) {
  if (values.empty() || !(level >= 0.0 && level <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, kModule, "sample_quantile",
                "need a non-empty sample and a level in [0, 1]");
  }
  std::sort(values.begin(), values.end());
  const double pos = level * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace hybridsw
