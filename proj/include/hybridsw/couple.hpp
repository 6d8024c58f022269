#ifndef HYBRIDSW_COUPLE_HPP_
#define HYBRIDSW_COUPLE_HPP_

// Synchronous coupling of a smooth-rate system with its threshold
// quantization: one Brownian stream and one candidate/mark stream drive both.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hybridsw/model.hpp"
#include "hybridsw/simulate.hpp"

namespace hybridsw {

struct CoupledRun {
  Trajectory first;
  Trajectory second;
  /// max-row l1 distance between Q(X_t) and Q_n(X^n_t) at every node of
  /// first.times (full-path mode only).
  std::vector<double> rate_gap;
  /// max |X_t - X^n_t| over the integration nodes.
  double sup_distance = 0.0;
  /// (1/T) * integral of 1{Lambda != Lambda^n} over [0, T].
  double mismatch_fraction = 0.0;
  /// Integral of the rate gap over [0, T] (trapezoid rule on the nodes).
  double gap_integral = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Throws ModelMismatch unless the two models share dimension, regime count,
/// drift and diffusion. The mark space uses the larger of the two rate bounds.
CoupledRun coupled_paths(const HybridModel& first, const HybridModel& second,
                         const Eigen::VectorXd& x0, int i0, const SimParams& sp,
                         std::uint64_t stream);

/// Runs sp.paths coupled pairs with stream ids 0..M-1.
std::vector<CoupledRun> coupled_ensemble(const HybridModel& first,
                                         const HybridModel& second,
                                         const Eigen::VectorXd& x0, int i0,
                                         const SimParams& sp);

struct MismatchEstimate {
  double lhs;
  double lhs_stderr;
  double rhs;
  double rhs_stderr;
  double t;
};

/// lhs = mean of (1/t) int_0^t 1{Lambda != Lambda^n} ds and
/// rhs = mean of int_0^t |Q(X_s) - Q_n(X^n_s)| ds over the runs.
/// Throws InsufficientRecordMode unless every run is a full-path record.
MismatchEstimate mismatch_check(std::span<const CoupledRun> runs, double t);

struct W1Estimate {
  double value;
  /// False when d >= 2 and `value` is the coupled-plan upper bound.
  bool exact;
};

/// Throws UnequalCounts when the sample sizes differ.
W1Estimate w1_empirical(const std::vector<Eigen::VectorXd>& a,
                        const std::vector<Eigen::VectorXd>& b);

struct RateRow {
  int levels;
  double theta;
  std::array<double, 4> w1;
  double coupled_mean;
  double bound;
  double std_error;
  double mismatch_lhs;
  double mismatch_rhs;
  double mismatch_lhs_stderr;
  double mismatch_rhs_stderr;
};

struct RateTable {
  std::vector<RateRow> rows;
  std::array<double, 4> checkpoints;
  double k2;
  double k3;
  double horizon;
  bool w1_exact;
};

/// For each n: quantize the smooth switching on radius R, run sp.paths
/// coupled pairs and record W1 at T/4, T/2, 3T/4, T next to Theta_n and the
/// bound 2T exp((K2 + 2(N-1)K3)T) Theta_n. Rows are sorted by n.
///
/// Throws HypothesisViolated unless the drift splits into a bounded part plus
/// a regime-independent Lipschitz part and the diffusion is one constant
/// matrix with positive determinant.
RateTable convergence_experiment(const HybridModel& smooth,
                                 std::vector<int> levels, double radius,
                                 const Eigen::VectorXd& x0, int i0,
                                 const SimParams& sp);

}  // namespace hybridsw

#endif  // HYBRIDSW_COUPLE_HPP_
