#ifndef HYBRIDSW_SIMULATE_HPP_
#define HYBRIDSW_SIMULATE_HPP_

// Path sampler for (X, Lambda): Poisson jump candidates with uniform marks,
// Euler-Maruyama between nodes, and mark-based switching through theta.

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hybridsw/model.hpp"

namespace hybridsw {

enum class RecordMode { kTerminal, kFullPath, kEventsOnly };

struct SimParams {
  double T = 1.0;
  double dt = 1e-3;
  int paths = 1;
  std::uint64_t seed = 0;
  RecordMode record = RecordMode::kTerminal;
  int threads = 1;
  /// Extra integration nodes where the state is stored in
  /// Trajectory::checkpoint_states. Must lie in (0, T].
  std::vector<double> checkpoints;
};

/// Throws InvalidArgument unless 0 < dt <= T, paths >= 1 and threads >= 1.
void validate(const SimParams& sp);

/// True when dt times the rate bound exceeds 0.1 (advisory only).
bool step_too_coarse(const HybridModel& m, const SimParams& sp);

struct SwitchEvent {
  double time;
  int from;
  int to;
  double mark;
};

struct Candidate {
  double time;
  double mark;
};

/// One sampled path. The heavy members are filled according to the record
/// mode: `times`, `states`, `regimes`, `increments` only in full-path mode;
/// `switches` and `candidates` in full-path and events-only modes. States
/// and regimes are right-continuous: entry k holds the values after any
/// switch at times[k]. increments[k] drives the step times[k] -> times[k+1].
struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<int> regimes;
  std::vector<Eigen::VectorXd> increments;
  std::vector<SwitchEvent> switches;
  std::vector<Candidate> candidates;

  std::vector<Eigen::VectorXd> checkpoint_states;
  Eigen::VectorXd terminal_state;
  int terminal_regime = 0;
  /// max |X| over every integration node, including t = 0.
  double sup_norm = 0.0;
  std::int64_t candidate_count = 0;
  std::int64_t switch_count = 0;
};

/// Deterministic in (sp.seed, stream). Throws NonFiniteState on blow-up.
Trajectory sample_path(const HybridModel& m, const Eigen::VectorXd& x0, int i0,
                       const SimParams& sp, std::uint64_t stream);

struct EnsembleSummary {
  std::vector<Eigen::VectorXd> terminal_states;
  std::vector<int> terminal_regimes;
  std::vector<double> sup_norms;
  /// Per-path trajectories, kept unless the record mode is terminal-only.
  std::vector<Trajectory> paths;
  int path_count = 0;
  std::uint64_t seed = 0;
};

/// Paths use stream ids 0..M-1 and may run on sp.threads threads; the result
/// does not depend on the thread count.
EnsembleSummary ensemble(const HybridModel& m, const Eigen::VectorXd& x0,
                         int i0, const SimParams& sp);

struct ExceedanceEstimate {
  double probability;
  double std_error;
  double horizon;
};

/// Fraction of paths with max |X| > eps on the integration grid up to T.
ExceedanceEstimate estimate_sup_exceedance(const HybridModel& m,
                                           const Eigen::VectorXd& x0, int i0,
                                           double eps, const SimParams& sp);

struct RecurrenceStats {
  /// Pooled fraction of time spent in |x| <= R, with the standard error of
  /// the per-path fractions.
  double occupation;
  double occupation_stderr;
  /// Mean number of entries into the ball per path.
  double mean_entries;
  /// Terminal |X| quantiles at 0.1, 0.25, 0.5, 0.75, 0.9.
  std::array<double, 5> terminal_quantiles;
  std::vector<double> per_path_occupation;
  std::vector<int> per_path_entries;
  double horizon;
};

RecurrenceStats occupation_and_recurrence(const HybridModel& m,
                                          const Eigen::VectorXd& x0, int i0,
                                          const SimParams& sp, double radius);

/// Linear-interpolation sample quantile (the usual "type 7" rule).
double sample_quantile(std::vector<double> values, double level);

}  // namespace hybridsw

#endif  // HYBRIDSW_SIMULATE_HPP_
