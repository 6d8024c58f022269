#include "hybridsw/couple.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "engine.hpp"
#include "hybridsw/error.hpp"

namespace hybridsw {
namespace {

constexpr const char* kModule = "couple";

struct PairObserver {
  PairObserver(CoupledRun& run, RecordMode mode, int regimes)
      : run(run),
        mode(mode),
        first(run.first, mode, 0),
        second(run.second, mode, 1),
        qa(regimes, regimes),
        qb(regimes, regimes) {}

  void on_step(double t, double h, const Eigen::VectorXd& dW,
               std::span<const detail::EngineSystem> s) {
    first.on_step(t, h, dW, s);
    second.on_step(t, h, dW, s);
  }

  void on_candidate(double t, double z, std::span<const detail::EngineSystem> s,
                    std::span<const int> from) {
    first.on_candidate(t, z, s, from);
    second.on_candidate(t, z, s, from);
  }

  void on_node(double t, std::span<const detail::EngineSystem> s) {
    first.on_node(t, s);
    second.on_node(t, s);
    const detail::EngineSystem& a = s[0];
    const detail::EngineSystem& b = s[1];
    run.sup_distance = std::max(run.sup_distance, (a.x - b.x).norm());
    evaluate_into(a.model->switching(), a.x, qa);
    evaluate_into(b.model->switching(), b.x, qb);
    const double gap = l1_row_distance(qa, qb);
    if (started) {
      const double h = t - prev_time;
      if (prev_mismatch) mismatch_time += h;
      run.gap_integral += 0.5 * (prev_gap + gap) * h;
    }
    if (mode == RecordMode::kFullPath) run.rate_gap.push_back(gap);
    started = true;
    prev_time = t;
    prev_gap = gap;
    prev_mismatch = a.regime != b.regime;
  }

  void on_checkpoint(std::size_t k, std::span<const detail::EngineSystem> s) {
    first.on_checkpoint(k, s);
    second.on_checkpoint(k, s);
  }

  CoupledRun& run;
  RecordMode mode;
  detail::PathRecorder first;
  detail::PathRecorder second;
  Eigen::MatrixXd qa;
  Eigen::MatrixXd qb;
  bool started = false;
  bool prev_mismatch = false;
  double prev_time = 0.0;
  double prev_gap = 0.0;
  double mismatch_time = 0.0;
};

struct MeanAndError {
  double mean;
  double std_error;
};

MeanAndError mean_and_error(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

void require_hypotheses(const HybridModel& m, double& k2, double& k3) {
  constexpr const char* op = "convergence_experiment";
  const auto* smooth = std::get_if<SmoothQ>(&m.switching());
  if (smooth == nullptr) {
    throw Error(ErrorKind::InvalidArgument, kModule, op,
                "switching must be a smooth rate specification");
  }
  try {
    k2 = bounded_split_constant(m.drift(), m.dim());
  } catch (const Error& e) {
    throw Error(ErrorKind::HypothesisViolated, kModule, op, e.what());
  }
  const auto* diffusion = std::get_if<ConstantDiffusion>(&m.diffusion());
  if (diffusion == nullptr) {
    throw Error(ErrorKind::HypothesisViolated, kModule, op,
                "diffusion must be constant");
  }
  for (const Eigen::MatrixXd& s : diffusion->sigma) {
    if (s != diffusion->sigma.front()) {
      throw Error(ErrorKind::HypothesisViolated, kModule, op,
                  "diffusion must not depend on the regime");
    }
  }
  if (!(diffusion->sigma.front().determinant() > 0.0)) {
    throw Error(ErrorKind::HypothesisViolated, kModule, op,
                "diffusion matrix must have positive determinant");
  }
  k3 = smooth->lipschitz();
}

}  // namespace

CoupledRun coupled_paths(const HybridModel& first, const HybridModel& second,
                         const Eigen::VectorXd& x0, int i0, const SimParams& sp,
                         std::uint64_t stream) {
  constexpr const char* op = "coupled_paths";
  if (!first.same_coefficients(second)) {
    throw Error(ErrorKind::ModelMismatch, kModule, op,
                "coupled models must share dimension, regimes, drift and "
                "diffusion");
  }
  validate(sp);
  if (x0.size() != first.dim() || !x0.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, kModule, op,
                "initial state must be a finite vector of the model dimension");
  }
  if (i0 < 0 || i0 >= first.regimes()) {
    throw Error(ErrorKind::RegimeOutOfRange, kModule, op,
                "initial regime outside the regime set");
  }

  const double bound = detail::engine_bound(
      std::max(rate_bound(first.switching()), rate_bound(second.switching())));
  std::array<detail::EngineSystem, 2> systems{
      detail::EngineSystem(first, x0, i0, bound),
      detail::EngineSystem(second, x0, i0, bound)};

  CoupledRun run;
  run.horizon = sp.T;
  run.seed = sp.seed;
  run.stream = stream;
  PairObserver obs(run, sp.record, first.regimes());
  obs.first.reserve(sp);
  obs.second.reserve(sp);
  if (sp.record == RecordMode::kFullPath) {
    run.rate_gap.reserve(run.first.times.capacity());
  }
  const detail::EngineConfig cfg{sp.T, sp.dt, bound, sp.seed, stream,
                                 &sp.checkpoints, op};
  detail::drive(std::span<detail::EngineSystem>(systems), cfg, obs);
  run.mismatch_fraction = obs.mismatch_time / sp.T;
  return run;
}

std::vector<CoupledRun> coupled_ensemble(const HybridModel& first,
                                         const HybridModel& second,
                                         const Eigen::VectorXd& x0, int i0,
                                         const SimParams& sp) {
  validate(sp);
  std::vector<CoupledRun> runs(static_cast<std::size_t>(sp.paths));
  detail::parallel_for(sp.paths, sp.threads, [&](int p) {
    runs[p] = coupled_paths(first, second, x0, i0, sp,
                            static_cast<std::uint64_t>(p));
  });
  return runs;
}

MismatchEstimate mismatch_check(std::span<const CoupledRun> runs, double t) {
  constexpr const char* op = "mismatch_check";
  if (runs.empty()) {
    throw Error(ErrorKind::InvalidArgument, kModule, op, "no runs supplied");
  }
  std::vector<double> lhs;
  std::vector<double> rhs;
  for (const CoupledRun& run : runs) {
    const std::vector<double>& times = run.first.times;
    if (times.empty() || run.rate_gap.size() != times.size() ||
        run.second.regimes.size() != times.size()) {
      throw Error(ErrorKind::InsufficientRecordMode, kModule, op,
                  "mismatch_check needs full-path coupled runs");
    }
    if (!(t > 0.0) || t > times.back() * (1.0 + 1e-12)) {
      throw Error(ErrorKind::InvalidArgument, kModule, op,
                  "t must lie in (0, T]");
    }
    double indicator = 0.0;
    double gap = 0.0;
    for (std::size_t k = 0; k + 1 < times.size() && times[k] < t; ++k) {
      const double end = std::min(times[k + 1], t);
      const double h = end - times[k];
      if (run.first.regimes[k] != run.second.regimes[k]) indicator += h;
      const double full = times[k + 1] - times[k];
      const double g_end =
          run.rate_gap[k] + (run.rate_gap[k + 1] - run.rate_gap[k]) * (h / full);
      gap += 0.5 * (run.rate_gap[k] + g_end) * h;
    }
    lhs.push_back(indicator / t);
    rhs.push_back(gap);
  }
  const MeanAndError l = mean_and_error(lhs);
  const MeanAndError r = mean_and_error(rhs);
  return MismatchEstimate{l.mean, l.std_error, r.mean, r.std_error, t};
}

W1Estimate w1_empirical(const std::vector<Eigen::VectorXd>& a,
                        const std::vector<Eigen::VectorXd>& b) {
  constexpr const char* op = "w1_empirical";
  if (a.size() != b.size()) {
    throw Error(ErrorKind::UnequalCounts, kModule, op,
                "samples have " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()) + " points");
  }
  if (a.empty()) {
    throw Error(ErrorKind::InvalidArgument, kModule, op, "samples are empty");
  }
  const Eigen::Index d = a.front().size();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].size() != d || b[k].size() != d) {
      throw Error(ErrorKind::InvalidArgument, kModule, op,
                  "sample points must share one dimension");
    }
  }
  const double m = static_cast<double>(a.size());
  double total = 0.0;
  if (d == 1) {
    std::vector<double> xs(a.size());
    std::vector<double> ys(b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      xs[k] = a[k](0);
      ys[k] = b[k](0);
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    for (std::size_t k = 0; k < xs.size(); ++k) total += std::abs(xs[k] - ys[k]);
    return W1Estimate{total / m, true};
  }
  for (std::size_t k = 0; k < a.size(); ++k) total += (a[k] - b[k]).norm();
  return W1Estimate{total / m, false};
}

RateTable convergence_experiment(const HybridModel& smooth,
                                 std::vector<int> levels, double radius,
                                 const Eigen::VectorXd& x0, int i0,
                                 const SimParams& sp) {
  constexpr const char* op = "convergence_experiment";
  RateTable table{};
  require_hypotheses(smooth, table.k2, table.k3);
  if (levels.empty() ||
      *std::min_element(levels.begin(), levels.end()) < 1 || !(radius > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, kModule, op,
                "levels must be positive and the radius must be positive");
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  const auto& sq = std::get<SmoothQ>(smooth.switching());
  const int n_regimes = smooth.regimes();
  table.horizon = sp.T;
  table.checkpoints = {sp.T / 4.0, sp.T / 2.0, 3.0 * sp.T / 4.0, sp.T};
  table.w1_exact = smooth.dim() == 1;

  SimParams run_params = sp;
  run_params.record = RecordMode::kTerminal;
  run_params.checkpoints.assign(table.checkpoints.begin(),
                                table.checkpoints.end());
  validate(run_params);
  const double growth =
      std::exp((table.k2 + 2.0 * (n_regimes - 1) * table.k3) * sp.T);

  for (int n : levels) {
    const SwitchingSpec quantized = quantize(sq, n, radius);
    const HybridModel coarse(smooth.dim(), smooth.drift(), smooth.diffusion(),
                             quantized);
    const double theta_n =
        theta_distance(smooth.switching(), quantized, radius, radius / (64.0 * n));
    const std::vector<CoupledRun> runs =
        coupled_ensemble(smooth, coarse, x0, i0, run_params);

    RateRow row{};
    row.levels = n;
    row.theta = theta_n;
    for (std::size_t c = 0; c < table.checkpoints.size(); ++c) {
      std::vector<Eigen::VectorXd> a;
      std::vector<Eigen::VectorXd> b;
      a.reserve(runs.size());
      b.reserve(runs.size());
      for (const CoupledRun& r : runs) {
        a.push_back(r.first.checkpoint_states[c]);
        b.push_back(r.second.checkpoint_states[c]);
      }
      row.w1[c] = w1_empirical(a, b).value;
    }
    std::vector<double> sup;
    std::vector<double> lhs;
    std::vector<double> rhs;
    for (const CoupledRun& r : runs) {
      sup.push_back(r.sup_distance);
      lhs.push_back(r.mismatch_fraction);
      rhs.push_back(r.gap_integral);
    }
    const MeanAndError s = mean_and_error(sup);
    const MeanAndError l = mean_and_error(lhs);
    const MeanAndError g = mean_and_error(rhs);
    row.coupled_mean = s.mean;
    row.std_error = s.std_error;
    row.bound = 2.0 * sp.T * growth * theta_n;
    row.mismatch_lhs = l.mean;
    row.mismatch_lhs_stderr = l.std_error;
    row.mismatch_rhs = g.mean;
    row.mismatch_rhs_stderr = g.std_error;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace hybridsw
