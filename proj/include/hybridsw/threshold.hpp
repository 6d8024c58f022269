#ifndef HYBRIDSW_THRESHOLD_HPP_
#define HYBRIDSW_THRESHOLD_HPP_

// State-dependent switching rates: threshold (step) rate functions, the
// smooth parametric family they approximate, and the mark-space interval
// layout that turns a rate matrix into a jump map for a Poisson random
// measure.

#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "hybridsw/qmatrix.hpp"

namespace hybridsw {

/// Rates that depend on |x| through thresholds 0 < a_1 < ... < a_m. Cell k
/// (0-based) applies on [a_k, a_{k+1}) with a_0 = 0 and a_{m+1} = inf, so a
/// point sitting exactly on a threshold belongs to the outer cell.
class RadialThresholdQ {
 public:
  RadialThresholdQ(std::vector<double> thresholds, std::vector<QMatrix> cells);

  const std::vector<double>& thresholds() const { return thresholds_; }
  const std::vector<QMatrix>& cells() const { return cells_; }
  int regimes() const { return cells_.front().size(); }

  int cell_index(double radius) const;
  const QMatrix& cell_at(double radius) const {
    return cells_[cell_index(radius)];
  }

 private:
  std::vector<double> thresholds_;
  std::vector<QMatrix> cells_;
};

/// One-dimensional rates with cut points c_1 < ... < c_r. Cell j (0-based)
/// applies on [c_j, c_{j+1}) with c_0 = -inf and c_{r+1} = inf.
class SignedThresholdQ {
 public:
  SignedThresholdQ(std::vector<double> cuts, std::vector<QMatrix> cells);

  const std::vector<double>& cuts() const { return cuts_; }
  const std::vector<QMatrix>& cells() const { return cells_; }
  int regimes() const { return cells_.front().size(); }

  int cell_index(double x) const;
  const QMatrix& cell_at(double x) const { return cells_[cell_index(x)]; }

 private:
  std::vector<double> cuts_;
  std::vector<QMatrix> cells_;
};

enum class SmoothShape {
  kTanhSigned,     // tanh(x_1), one-dimensional
  kTanhRadius,     // tanh(|x|)
  kSigmoidRadius,  // 2 / (1 + exp(-|x|)) - 1
};

/// q(x) = A + B s(x), where s maps the state into [-1, 1] and |B_ij| <= A_ij
/// off the diagonal keeps every rate nonnegative. The diagonal of B is
/// forced to minus its off-diagonal row sum so q(x) stays conservative.
class SmoothQ {
 public:
  SmoothQ(QMatrix base, const Eigen::MatrixXd& modulation, SmoothShape shape);

  const QMatrix& base() const { return base_; }
  const Eigen::MatrixXd& modulation() const { return modulation_; }
  SmoothShape shape() const { return shape_; }
  int regimes() const { return base_.size(); }
  bool is_signed() const { return shape_ == SmoothShape::kTanhSigned; }

  /// s(x).
  double shape_value(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// s as a function of the scalar axis coordinate (x_1 or |x|).
  double shape_of_axis(double u) const;
  /// Lipschitz constant of s.
  double shape_slope() const;
  /// Closure of the range of s over the state space.
  double shape_min() const { return is_signed() ? -1.0 : 0.0; }
  double shape_max() const { return 1.0; }

  /// Entrywise Lipschitz constant of x -> q_ij(x).
  double lipschitz() const;
  double max_modulation() const;

  void rates_for_shape(double s, Eigen::MatrixXd& out) const {
    out = base_.rates() + s * modulation_;
  }

 private:
  QMatrix base_;
  Eigen::MatrixXd modulation_;
  SmoothShape shape_;
};

using SwitchingSpec = std::variant<RadialThresholdQ, SignedThresholdQ, SmoothQ>;

int regimes(const SwitchingSpec& spec);

/// True when the rates depend on the sign of x (so the state must be 1-D).
bool is_signed(const SwitchingSpec& spec);

/// Q(x). Boundary points go to the right-hand cell.
QMatrix evaluate(const SwitchingSpec& spec, const Eigen::VectorXd& x);

/// Allocation-free variant of evaluate(); `out` must already be n x n.
void evaluate_into(const SwitchingSpec& spec,
                   const Eigen::Ref<const Eigen::VectorXd>& x,
                   Eigen::MatrixXd& out);

/// Largest total exit rate over every cell (sup over x for smooth specs).
double rate_bound(const SwitchingSpec& spec);

/// max_i sum_{j != i} |a_ij - b_ij|.
double l1_row_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Mark-space placement of the intervals Gamma_ij for one rate matrix.
///
/// Every interval starts on an integer multiple ("slot") of the rate bound K,
/// so starts depend only on (i, j, N, K) and never on the rates. Row i owns
/// the slot block [0, N) for i = 0 and [(2i-1)N, (2i+1)N) otherwise; the mark
/// space is [0, (2N-1) N K].
class GammaLayout {
 public:
  GammaLayout(const Eigen::MatrixXd& rates, double bound);

  /// Rebuilds in place for new rates, reusing storage when N is unchanged.
  void assign(const Eigen::MatrixXd& rates, double bound);

  int regimes() const { return regimes_; }
  double bound() const { return bound_; }
  double mark_space() const {
    return static_cast<double>(total_slots()) * bound_;
  }
  int total_slots() const { return (2 * regimes_ - 1) * regimes_; }

  /// Slot index of Gamma_ij (meaningless for i == j).
  static int slot(int regimes, int i, int j);
  int slot(int i, int j) const { return slot(regimes_, i, j); }
  int block_begin(int i) const;
  int block_end(int i) const;

  double start(int i, int j) const { return slot(i, j) * bound_; }
  double length(int i, int j) const { return lengths_[i * regimes_ + j]; }

 private:
  int regimes_ = 0;
  double bound_ = 0.0;
  std::vector<double> lengths_;
};

GammaLayout gamma_layout(const QMatrix& q, double bound);

/// j - i when z lies in Gamma_ij, else 0.
int theta(const GammaLayout& layout, int i, double z);

/// Lebesgue measure of Gamma_ij(a) symmetric-difference Gamma_ij(b).
double symm_diff(const GammaLayout& a, const GammaLayout& b, int i, int j);

/// Upper bound on sup_x max_i sum_{j != i} |a_ij(x) - b_ij(x)|.
///
/// Threshold-vs-threshold is exact. When a smooth spec is involved the scan
/// runs over a grid of spacing h on [0, R] (or [-R, R] for sign-dependent
/// specs) merged with every threshold, and each open sub-interval is charged
/// the Lipschitz slack (N-1) K3 (width / 2) on top of its midpoint value.
/// The tails beyond R are bounded through the monotone limit of the shape.
double theta_distance(const SwitchingSpec& a, const SwitchingSpec& b,
                      double radius, double step);

/// Uniform n-cell midpoint quantization of a smooth spec on [0, R] (or
/// [-R, R] for the signed shape) plus unbounded tail cells evaluated at the
/// finite boundary.
SwitchingSpec quantize(const SmoothQ& smooth, int levels, double radius);

}  // namespace hybridsw

#endif  // HYBRIDSW_THRESHOLD_HPP_
