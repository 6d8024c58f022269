#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hybridsw/couple.hpp"
#include "hybridsw/error.hpp"
#include "support.hpp"

namespace hybridsw {
namespace {

using testing::error_kind_of;
using testing::q;
using testing::rows;
using testing::vec;

SimParams params(double T, double dt, int paths, std::uint64_t seed,
                 RecordMode record = RecordMode::kFullPath) {
  SimParams sp;
  sp.T = T;
  sp.dt = dt;
  sp.paths = paths;
  sp.seed = seed;
  sp.record = record;
  return sp;
}

HybridModel with_switching(const HybridModel& m, SwitchingSpec sw) {
  return HybridModel(m.dim(), m.drift(), m.diffusion(), std::move(sw));
}

HybridModel constant_smooth() {
  const HybridModel base = testing::tanh_coupling_model();
  return with_switching(base, SmoothQ(q({{-2, 2}, {2, -2}}),
                                      Eigen::MatrixXd::Zero(2, 2),
                                      SmoothShape::kTanhSigned));
}

std::vector<Eigen::VectorXd> points(const std::vector<double>& xs) {
  std::vector<Eigen::VectorXd> out;
  for (double x : xs) out.push_back(vec({x}));
  return out;
}

TEST(CoupledPaths, ConstantSmoothMatchesSingleCellExactly) {
  const HybridModel smooth = constant_smooth();
  const HybridModel single =
      with_switching(smooth, RadialThresholdQ({}, {q({{-2, 2}, {2, -2}})}));
  for (std::uint64_t stream = 0; stream < 20; ++stream) {
    const CoupledRun run =
        coupled_paths(smooth, single, vec({0.2}), 0, params(2, 1e-2, 1, 3), stream);
    EXPECT_EQ(run.first.states, run.second.states);
    EXPECT_EQ(run.first.regimes, run.second.regimes);
    EXPECT_EQ(run.sup_distance, 0.0);
    EXPECT_EQ(run.mismatch_fraction, 0.0);
    EXPECT_EQ(run.gap_integral, 0.0);
  }
}

TEST(CoupledPaths, SharedNoise) {
  const HybridModel smooth = testing::tanh_coupling_model();
  const HybridModel coarse = with_switching(
      smooth, quantize(std::get<SmoothQ>(smooth.switching()), 4, 4.0));
  const CoupledRun run =
      coupled_paths(smooth, coarse, vec({0.0}), 0, params(3, 1e-2, 1, 5), 2);
  EXPECT_EQ(run.first.times, run.second.times);
  EXPECT_EQ(run.first.increments, run.second.increments);
  ASSERT_EQ(run.first.candidates.size(), run.second.candidates.size());
  for (std::size_t k = 0; k < run.first.candidates.size(); ++k) {
    EXPECT_EQ(run.first.candidates[k].time, run.second.candidates[k].time);
    EXPECT_EQ(run.first.candidates[k].mark, run.second.candidates[k].mark);
  }
  EXPECT_EQ(run.rate_gap.size(), run.first.times.size());
}

TEST(CoupledPaths, MismatchedCoefficientsAreRejected) {
  const HybridModel a = testing::ou_model(-3, 1);
  const HybridModel b = testing::ou_model(-3, 2);
  EXPECT_EQ(error_kind_of([&] {
              coupled_paths(a, b, vec({0.0}), 0, params(1, 0.1, 1, 1), 0);
            }),
            ErrorKind::ModelMismatch);
}

TEST(CoupledPaths, ZeroThetaQuantizationNeverMismatches) {
  // A smooth spec whose modulation vanishes is its own piecewise-constant
  // limit, so any quantization agrees with it everywhere.
  const HybridModel smooth = constant_smooth();
  const HybridModel coarse = with_switching(
      smooth, quantize(std::get<SmoothQ>(smooth.switching()), 8, 4.0));
  const std::vector<CoupledRun> runs =
      coupled_ensemble(smooth, coarse, vec({0.0}), 0, params(1, 1e-2, 50, 9));
  for (const CoupledRun& r : runs) EXPECT_EQ(r.mismatch_fraction, 0.0);
}

TEST(CoupledPaths, TanhMismatchObeysTheLemma) {
  const HybridModel smooth = testing::tanh_coupling_model();
  const auto& sq = std::get<SmoothQ>(smooth.switching());
  const SwitchingSpec eight = quantize(sq, 8, 4.0);
  const double theta = theta_distance(sq, eight, 4.0, 4.0 / 512);
  const std::vector<CoupledRun> runs = coupled_ensemble(
      smooth, with_switching(smooth, eight), vec({0.0}), 0, params(1, 1e-3, 1000, 17));
  double sum = 0.0, sq_sum = 0.0;
  for (const CoupledRun& r : runs) {
    sum += r.mismatch_fraction;
    sq_sum += r.mismatch_fraction * r.mismatch_fraction;
  }
  const double n = static_cast<double>(runs.size());
  const double mean = sum / n;
  const double se = std::sqrt((sq_sum / n - mean * mean) / n);
  EXPECT_GT(mean, 0.0);
  EXPECT_LE(mean, 1.0 * theta + 3.0 * se);

  const MismatchEstimate check = mismatch_check(runs, 1.0);
  EXPECT_NEAR(check.lhs, mean, 1e-12);
  EXPECT_LE(check.lhs, check.rhs + 3.0 * std::hypot(check.lhs_stderr, check.rhs_stderr));
  const MismatchEstimate half = mismatch_check(runs, 0.5);
  EXPECT_LE(half.lhs, half.rhs + 3.0 * std::hypot(half.lhs_stderr, half.rhs_stderr));
}

TEST(MismatchCheck, IdenticalSpecsGiveZero) {
  const HybridModel m = testing::tanh_coupling_model();
  const std::vector<CoupledRun> runs =
      coupled_ensemble(m, m, vec({0.0}), 0, params(1, 1e-2, 20, 2));
  const MismatchEstimate e = mismatch_check(runs, 1.0);
  EXPECT_EQ(e.lhs, 0.0);
  EXPECT_EQ(e.rhs, 0.0);
}

TEST(MismatchCheck, ConstantRateGapIntegratesExactly) {
  const HybridModel a = testing::frozen_model(q({{-1, 1}, {2, -2}}));
  const HybridModel b = with_switching(a, RadialThresholdQ({}, {q({{-1.25, 1.25}, {2, -2}})}));
  const std::vector<CoupledRun> runs =
      coupled_ensemble(a, b, vec({0.0}), 0, params(2, 1e-2, 10, 4));
  for (double t : {0.37, 1.0, 2.0}) {
    const MismatchEstimate e = mismatch_check(runs, t);
    EXPECT_NEAR(e.rhs, 0.25 * t, 1e-12);
    EXPECT_NEAR(e.rhs_stderr, 0.0, 1e-12);
  }
}

TEST(MismatchCheck, NeedsFullPathRuns) {
  const HybridModel m = testing::tanh_coupling_model();
  const std::vector<CoupledRun> runs = coupled_ensemble(
      m, m, vec({0.0}), 0, params(1, 1e-2, 3, 2, RecordMode::kTerminal));
  EXPECT_EQ(error_kind_of([&] { mismatch_check(runs, 1.0); }),
            ErrorKind::InsufficientRecordMode);
}

TEST(W1, Examples) {
  const auto a = points({0.3, -1.0, 2.5, 0.0});
  EXPECT_EQ(w1_empirical(a, a).value, 0.0);
  EXPECT_TRUE(w1_empirical(a, a).exact);
  const auto shifted = points({0.3 + 1.5, -1.0 + 1.5, 2.5 + 1.5, 1.5});
  EXPECT_NEAR(w1_empirical(a, shifted).value, 1.5, 1e-15);
  EXPECT_EQ(error_kind_of([&] { w1_empirical(a, points({1.0})); }),
            ErrorKind::UnequalCounts);
}

TEST(W1, TwoDimensionalIsTheCoupledUpperBound) {
  const std::vector<Eigen::VectorXd> a{vec({0, 0}), vec({1, 1})};
  const std::vector<Eigen::VectorXd> b{vec({1, 1}), vec({0, 0})};
  const W1Estimate e = w1_empirical(a, b);
  EXPECT_FALSE(e.exact);
  EXPECT_NEAR(e.value, std::sqrt(2.0), 1e-15);
}

TEST(W1Property, MatchesExhaustiveAssignment) {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> g(0.0, 2.0);
  std::uniform_int_distribution<int> size(1, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = size(rng);
    std::vector<double> xs(m), ys(m);
    for (int k = 0; k < m; ++k) {
      xs[k] = g(rng);
      ys[k] = g(rng) + 1.0;
    }
    EXPECT_NEAR(w1_empirical(points(xs), points(ys)).value,
                testing::w1_brute_force(xs, ys), 1e-12);
  }
}

TEST(W1Property, IsAMetric) {
  std::mt19937_64 rng(67);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> xs(12), ys(12), zs(12);
    for (int k = 0; k < 12; ++k) {
      xs[k] = g(rng);
      ys[k] = 2.0 * g(rng);
      zs[k] = g(rng) - 0.5;
    }
    const double xy = w1_empirical(points(xs), points(ys)).value;
    const double yx = w1_empirical(points(ys), points(xs)).value;
    const double yz = w1_empirical(points(ys), points(zs)).value;
    const double xz = w1_empirical(points(xs), points(zs)).value;
    EXPECT_EQ(xy, yx);
    EXPECT_LE(xz, xy + yz + 1e-12);
    EXPECT_GE(xy, 0.0);
  }
}

TEST(ConvergenceExperiment, ConstantSpecHasZeroDistance) {
  const RateTable t = convergence_experiment(constant_smooth(), {4, 2}, 4.0,
                                             vec({0.0}), 0, params(1, 1e-2, 100, 3));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0].levels, 2);
  EXPECT_EQ(t.rows[1].levels, 4);
  for (const RateRow& r : t.rows) {
    EXPECT_EQ(r.theta, 0.0);
    EXPECT_EQ(r.bound, 0.0);
    for (double w : r.w1) EXPECT_EQ(w, 0.0);
    EXPECT_EQ(r.coupled_mean, 0.0);
  }
}

TEST(ConvergenceExperiment, TanhTableIsConsistent) {
  const RateTable t = convergence_experiment(testing::tanh_coupling_model(),
                                             {2, 4, 8, 16}, 4.0, vec({0.0}), 0,
                                             params(1, 1e-2, 400, 7));
  EXPECT_DOUBLE_EQ(t.k2, 1.0);
  EXPECT_DOUBLE_EQ(t.k3, 0.5);
  EXPECT_TRUE(t.w1_exact);
  EXPECT_EQ(t.checkpoints, (std::array<double, 4>{0.25, 0.5, 0.75, 1.0}));
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const RateRow& r = t.rows[k];
    EXPECT_GE(r.bound, 0.0);
    EXPECT_NEAR(r.bound, 2.0 * std::exp(2.0) * r.theta, 1e-12);
    for (double w : r.w1) {
      EXPECT_LE(w, r.bound);
      EXPECT_LE(w, r.coupled_mean + 3.0 * r.std_error + 1e-15);
    }
    if (k > 0) EXPECT_LE(r.theta, t.rows[k - 1].theta + 1e-12);
  }
}

TEST(ConvergenceExperiment, HypothesesAreChecked) {
  const SmoothQ sq = std::get<SmoothQ>(testing::tanh_coupling_model().switching());
  const HybridModel power(1, PowerSgnDrift{vec({1, 1}), 3.0},
                          PowerDiffusion{vec({1, 1}), 2.0}, sq);
  EXPECT_EQ(error_kind_of([&] {
              convergence_experiment(power, {2}, 4.0, vec({0.0}), 0, params(1, 0.1, 2, 1));
            }),
            ErrorKind::HypothesisViolated);
  const HybridModel regime_sigma(
      1, BoundedDrift{vec({1, -1}), Eigen::MatrixXd::Zero(1, 1)},
      ConstantDiffusion{{Eigen::MatrixXd::Constant(1, 1, 1.0),
                         Eigen::MatrixXd::Constant(1, 1, 2.0)}},
      sq);
  EXPECT_EQ(error_kind_of([&] {
              convergence_experiment(regime_sigma, {2}, 4.0, vec({0.0}), 0,
                                     params(1, 0.1, 2, 1));
            }),
            ErrorKind::HypothesisViolated);
  const HybridModel threshold = testing::ou_model(-1, -1);
  EXPECT_EQ(error_kind_of([&] {
              convergence_experiment(threshold, {2}, 4.0, vec({0.0}), 0,
                                     params(1, 0.1, 2, 1));
            }),
            ErrorKind::InvalidArgument);
}

}  // namespace
}  // namespace hybridsw
