#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hybridsw/error.hpp"
#include "hybridsw/threshold.hpp"
#include "support.hpp"

namespace hybridsw {
namespace {

using testing::error_kind_of;
using testing::q;
using testing::rows;
using testing::vec;

Eigen::VectorXd point(double x) { return vec({x}); }

SmoothQ tanh_signed() {
  return SmoothQ(q({{-2, 2}, {2, -2}}), rows({{0, 0.5}, {0.5, 0}}),
                 SmoothShape::kTanhSigned);
}

// Max-row l1 gap between two specs on a fine grid of the scalar axis, as a
// brute-force lower bound on the true supremum.
double fine_grid_gap(const SwitchingSpec& a, const SwitchingSpec& b, double lo,
                     double hi, double h) {
  double out = 0.0;
  for (double u = lo; u <= hi; u += h) {
    out = std::max(out, l1_row_distance(evaluate(a, point(u)).rates(),
                                        evaluate(b, point(u)).rates()));
  }
  return out;
}

TEST(Evaluate, RadialCellsAreLeftClosed) {
  const QMatrix inner = q({{-1, 1}, {2, -2}});
  const QMatrix outer = q({{-3, 3}, {1, -1}});
  const SwitchingSpec spec = RadialThresholdQ({2.0}, {inner, outer});
  EXPECT_EQ(evaluate(spec, vec({1.5, 0.0})), inner);
  EXPECT_EQ(evaluate(spec, vec({0.0, 2.0})), outer);
  EXPECT_EQ(evaluate(spec, point(-1.999)), inner);
  EXPECT_EQ(evaluate(spec, point(0.0)), inner);
}

TEST(Evaluate, SignedCellsAreLeftClosed) {
  const QMatrix a = q({{-1, 1}, {1, -1}});
  const QMatrix b = q({{-2, 2}, {1, -1}});
  const QMatrix c = q({{-3, 3}, {1, -1}});
  const SwitchingSpec spec = SignedThresholdQ({-1.0, 1.0}, {a, b, c});
  EXPECT_EQ(evaluate(spec, point(-5.0)), a);
  EXPECT_EQ(evaluate(spec, point(-1.0)), b);
  EXPECT_EQ(evaluate(spec, point(0.999)), b);
  EXPECT_EQ(evaluate(spec, point(1.0)), c);
}

TEST(Evaluate, SmoothAtOriginIsBase) {
  const SwitchingSpec spec = tanh_signed();
  EXPECT_EQ(evaluate(spec, point(0.0)), q({{-2, 2}, {2, -2}}));
  const QMatrix at1 = evaluate(spec, point(1.0));
  EXPECT_NEAR(at1.rate(0, 1), 2.0 + 0.5 * std::tanh(1.0), 1e-15);
  EXPECT_NEAR(at1.rate(0, 0), -2.0 - 0.5 * std::tanh(1.0), 1e-15);
}

TEST(Evaluate, RightContinuousAtEveryThreshold) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> thresholds{0.5, 1.0, 1.7, 3.0};
    std::vector<QMatrix> cells;
    for (int k = 0; k < 5; ++k) cells.push_back(testing::random_irreducible(rng, 3));
    const SwitchingSpec spec = RadialThresholdQ(thresholds, cells);
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      EXPECT_EQ(evaluate(spec, point(thresholds[k])), cells[k + 1]);
      EXPECT_EQ(evaluate(spec, point(std::nextafter(thresholds[k], 0.0))),
                cells[k]);
    }
  }
}

TEST(ThresholdConstruction, RejectsBadInput) {
  const QMatrix a = q({{-1, 1}, {1, -1}});
  EXPECT_EQ(error_kind_of([&] { RadialThresholdQ({2.0, 1.0}, {a, a, a}); }),
            ErrorKind::InvalidArgument);
  EXPECT_EQ(error_kind_of([&] { RadialThresholdQ({-1.0}, {a, a}); }),
            ErrorKind::InvalidArgument);
  EXPECT_EQ(error_kind_of([&] { SignedThresholdQ({0.0}, {a}); }),
            ErrorKind::InvalidArgument);
  EXPECT_EQ(error_kind_of([&] { SignedThresholdQ({0.0}, {a, q({{0, 0}, {1, -1}})}); }),
            ErrorKind::NotIrreducible);
  EXPECT_EQ(error_kind_of([] {
              SmoothQ(q({{-1, 1}, {1, -1}}), rows({{0, 2}, {0, 0}}),
                      SmoothShape::kTanhRadius);
            }),
            ErrorKind::NegativeOffDiagonal);
}

TEST(RateBound, Examples) {
  const SwitchingSpec two = RadialThresholdQ(
      {1.0}, {q({{-1, 1}, {2, -2}}), q({{-3, 3}, {1, -1}})});
  EXPECT_EQ(rate_bound(two), 3.0);
  EXPECT_EQ(rate_bound(RadialThresholdQ({}, {q({{-5, 5}, {5, -5}})})), 5.0);
  const SwitchingSpec smooth =
      SmoothQ(q({{-2, 2}, {2, -2}}), rows({{-1, 1}, {1, -1}}),
              SmoothShape::kTanhSigned);
  EXPECT_EQ(rate_bound(smooth), 3.0);
  double grid = 0.0;
  for (double u = -30.0; u <= 30.0; u += 0.01) {
    grid = std::max(grid, evaluate(smooth, point(u)).max_exit_rate());
  }
  EXPECT_LE(grid, 3.0);
  EXPECT_GT(grid, 3.0 - 1e-9);
}

TEST(GammaLayout, TwoStateHandExample) {
  const GammaLayout layout = gamma_layout(q({{-1, 1}, {2, -2}}), 2.0);
  EXPECT_EQ(layout.start(0, 1), 0.0);
  EXPECT_EQ(layout.length(0, 1), 1.0);
  EXPECT_EQ(layout.start(1, 0), 6.0);
  EXPECT_EQ(layout.length(1, 0), 2.0);
  EXPECT_EQ(layout.mark_space(), 12.0);
}

TEST(GammaLayout, ThreeStateSlot) {
  const GammaLayout layout =
      gamma_layout(q({{-1, 0.5, 0.5}, {0, -1, 1}, {1, 0, -1}}), 1.0);
  EXPECT_EQ(layout.start(1, 2), 6.0);
  EXPECT_EQ(layout.length(1, 2), 1.0);
  EXPECT_EQ(layout.block_begin(1), 3);
  EXPECT_EQ(layout.block_end(1), 9);
  EXPECT_EQ(layout.mark_space(), 15.0);
}

TEST(GammaLayout, ZeroRateGivesEmptyInterval) {
  const GammaLayout layout =
      gamma_layout(q({{-1, 1, 0}, {0, -1, 1}, {1, 0, -1}}), 1.0);
  EXPECT_EQ(layout.length(0, 2), 0.0);
  for (double z = 0.0; z < layout.mark_space(); z += 0.01) {
    EXPECT_NE(theta(layout, 0, z), 2);
  }
}

TEST(GammaLayout, RateAboveBoundIsRejected) {
  EXPECT_EQ(error_kind_of([] { gamma_layout(q({{-3, 3}, {1, -1}}), 2.0); }),
            ErrorKind::RateExceedsBound);
}

TEST(Theta, HandExamples) {
  const GammaLayout layout = gamma_layout(q({{-1, 1}, {2, -2}}), 2.0);
  EXPECT_EQ(theta(layout, 0, 0.5), 1);
  EXPECT_EQ(theta(layout, 0, 7.0), 0);
  EXPECT_EQ(theta(layout, 1, 7.0), -1);
  EXPECT_EQ(theta(layout, 0, 1.0), 0);
  EXPECT_EQ(theta(layout, 1, 8.0), 0);
}

TEST(SymmDiff, Examples) {
  const GammaLayout a = gamma_layout(q({{-1, 1}, {2, -2}}), 2.0);
  const GammaLayout b = gamma_layout(q({{-1.4, 1.4}, {2, -2}}), 2.0);
  EXPECT_EQ(symm_diff(a, a, 0, 1), 0.0);
  EXPECT_NEAR(symm_diff(a, b, 0, 1), 0.4, 1e-15);
  EXPECT_EQ(error_kind_of([&] {
              symm_diff(a, gamma_layout(q({{-1, 1}, {2, -2}}), 3.0), 0, 1);
            }),
            ErrorKind::LayoutMismatch);
}

// Layout laws on random instances: checked interval by interval with plain
// interval arithmetic, independent of the slot formula.
TEST(GammaLayoutProperty, DisjointContainedAndExact) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> size(1, 6);
  std::uniform_real_distribution<double> slack(1.0, 2.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = size(rng);
    const QMatrix m = testing::random_irreducible(rng, n);
    double max_rate = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j) max_rate = std::max(max_rate, m.rate(i, j));
      }
    }
    const double k = std::max(max_rate, 1e-3) * slack(rng);
    const GammaLayout layout = gamma_layout(m, k);
    ASSERT_DOUBLE_EQ(layout.mark_space(), (2 * n - 1) * n * k);
    for (int i = 0; i < n; ++i) {
      const double block_lo = layout.block_begin(i) * k;
      const double block_hi = layout.block_end(i) * k;
      for (int i2 = i + 1; i2 < n; ++i2) {
        EXPECT_LE(block_hi, layout.block_begin(i2) * k);
      }
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double s = layout.start(i, j);
        const double e = s + layout.length(i, j);
        EXPECT_EQ(layout.length(i, j), m.rate(i, j));
        EXPECT_GE(s, block_lo);
        EXPECT_LE(e, block_hi);
        EXPECT_GE(s, 0.0);
        EXPECT_LE(e, layout.mark_space());
        for (int j2 = j + 1; j2 < n; ++j2) {
          if (j2 == i) continue;
          const double s2 = layout.start(i, j2);
          const double e2 = s2 + layout.length(i, j2);
          EXPECT_TRUE(e <= s2 || e2 <= s);
        }
      }
    }
  }
}

TEST(GammaLayoutProperty, ThetaLevelSetsHaveMeasureEqualToRate) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3;
    const QMatrix m = testing::random_irreducible(rng, n);
    const GammaLayout layout = gamma_layout(m, 4.0);
    const int cells = 200000;
    const double h = layout.mark_space() / cells;
    for (int i = 0; i < n; ++i) {
      std::vector<double> measure(2 * n + 1, 0.0);
      for (int c = 0; c < cells; ++c) {
        measure[theta(layout, i, (c + 0.5) * h) + n] += h;
      }
      for (int j = 0; j < n; ++j) {
        if (j != i) EXPECT_NEAR(measure[j - i + n], m.rate(i, j), 2 * h);
      }
    }
  }
}

TEST(SymmDiffProperty, NeverExceedsLargestRateGap) {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<int> size(2, 6);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = size(rng);
    const QMatrix a = testing::random_irreducible(rng, n);
    const QMatrix b = testing::random_irreducible(rng, n);
    const double k = std::max(rate_bound(RadialThresholdQ({}, {a})),
                              rate_bound(RadialThresholdQ({}, {b})));
    const GammaLayout la = gamma_layout(a, k);
    const GammaLayout lb = gamma_layout(b, k);
    double max_gap = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j) max_gap = std::max(max_gap, std::abs(a.rate(i, j) - b.rate(i, j)));
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        // Interval arithmetic: |A| + |B| - 2 |A n B|.
        const double sa = la.start(i, j), ea = sa + la.length(i, j);
        const double sb = lb.start(i, j), eb = sb + lb.length(i, j);
        const double overlap = std::max(0.0, std::min(ea, eb) - std::max(sa, sb));
        const double oracle = (ea - sa) + (eb - sb) - 2.0 * overlap;
        EXPECT_NEAR(symm_diff(la, lb, i, j), oracle, 1e-12);
        EXPECT_LE(symm_diff(la, lb, i, j), max_gap);
      }
    }
  }
}

TEST(ThetaDistance, Examples) {
  const QMatrix a = q({{-1, 1}, {2, -2}});
  const QMatrix b = q({{-3, 3}, {1, -1}});
  const SwitchingSpec two = RadialThresholdQ({1.0}, {a, b});
  EXPECT_EQ(theta_distance(two, two, 2.0, 0.1), 0.0);
  EXPECT_EQ(theta_distance(RadialThresholdQ({}, {a}), RadialThresholdQ({}, {b}),
                           1.0, 0.1),
            2.0);
  // Refined partition of two radial specs: the gap is |a - b| on [1, 1.5)
  // and 0 elsewhere.
  const SwitchingSpec shifted = RadialThresholdQ({1.5}, {a, b});
  EXPECT_EQ(theta_distance(two, shifted, 3.0, 0.1), 2.0);
}

TEST(ThetaDistance, SmoothAgainstQuantizationIsAnUpperBound) {
  const SmoothQ sq = tanh_signed();
  const double radius = 4.0;
  for (int n : {2, 4, 8, 16, 32}) {
    const SwitchingSpec quantized = quantize(sq, n, radius);
    const double h = radius / (64.0 * n);
    const double theta = theta_distance(sq, quantized, radius, h);
    const double fine = fine_grid_gap(sq, quantized, -radius - 10.0,
                                      radius + 10.0, 1e-4);
    EXPECT_GE(theta, fine);
    EXPECT_LE(theta, fine + sq.lipschitz() * h + 1e-12);
    const double width = 2.0 * radius / n;
    const double tail = 0.5 * (1.0 - std::tanh(radius));
    EXPECT_LE(theta, sq.lipschitz() * width + tail);
  }
}

TEST(ThetaDistance, HalvesWithDoubledLevelsOnceCellsResolveTheSlope) {
  const SmoothQ sq = tanh_signed();
  const double radius = 4.0;
  double previous = 0.0;
  for (int n : {2, 4, 8, 16, 32}) {
    const double theta =
        theta_distance(sq, quantize(sq, n, radius), radius, radius / (64.0 * n));
    if (n > 2) EXPECT_LT(theta, previous);
    if (n >= 16) {
      EXPECT_GT(theta / previous, 0.4);
      EXPECT_LT(theta / previous, 0.6);
    }
    previous = theta;
  }
}

TEST(Quantize, RadialSingleLevel) {
  const SmoothQ sq(q({{-2, 2}, {2, -2}}), rows({{0, 1}, {1, 0}}),
                   SmoothShape::kTanhRadius);
  const SwitchingSpec spec = quantize(sq, 1, 1.0);
  const auto* radial = std::get_if<RadialThresholdQ>(&spec);
  ASSERT_NE(radial, nullptr);
  ASSERT_EQ(radial->thresholds(), std::vector<double>{1.0});
  EXPECT_EQ(radial->cells()[0], evaluate(sq, point(0.5)));
  EXPECT_EQ(radial->cells()[1], evaluate(sq, point(1.0)));
}

TEST(Quantize, ConstantSmoothSpecQuantizesExactly) {
  const SmoothQ sq(q({{-2, 2}, {1, -1}}), Eigen::MatrixXd::Zero(2, 2),
                   SmoothShape::kSigmoidRadius);
  for (int n : {1, 3, 8}) {
    const SwitchingSpec spec = quantize(sq, n, 2.0);
    for (const QMatrix& cell : std::get<RadialThresholdQ>(spec).cells()) {
      EXPECT_EQ(cell, sq.base());
    }
    EXPECT_EQ(theta_distance(sq, spec, 2.0, 0.01), 0.0);
  }
}

TEST(Quantize, SignedShapeGivesSignedCells) {
  const SwitchingSpec spec = quantize(tanh_signed(), 4, 4.0);
  const auto* s = std::get_if<SignedThresholdQ>(&spec);
  ASSERT_NE(s, nullptr);
  EXPECT_EQ(s->cuts(), (std::vector<double>{-4, -2, 0, 2, 4}));
  EXPECT_EQ(s->cells().size(), 6u);
  EXPECT_EQ(s->cells()[2], evaluate(tanh_signed(), point(-1.0)));
}

TEST(Quantize, ReducibleCellIsRejected) {
  const SmoothQ sq(q({{-1, 1}, {1, -1}}), rows({{0, -1}, {0, 0}}),
                   SmoothShape::kTanhSigned);
  EXPECT_EQ(error_kind_of([&] { quantize(sq, 2, 40.0); }),
            ErrorKind::QuantizationBreaksIrreducibility);
}

}  // namespace
}  // namespace hybridsw
