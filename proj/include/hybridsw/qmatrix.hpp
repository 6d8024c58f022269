#ifndef HYBRIDSW_QMATRIX_HPP_
#define HYBRIDSW_QMATRIX_HPP_

// Rate-matrix algebra for finite-state continuous-time Markov chains.
//
// Regimes are indexed 0..n-1 throughout the library.

#include <optional>

#include <Eigen/Dense>

namespace hybridsw {

/// Tolerance on the row-sum defect accepted by QMatrix::validate before the
/// diagonal is rewritten.
inline constexpr double kRowSumTolerance = 1e-9;

/// A conservative rate matrix: off-diagonals >= 0 and rows summing to zero.
/// Instances only come out of validate(), so the invariants always hold.
class QMatrix {
 public:
  /// Checks squareness, finiteness, sign and conservativeness; on success the
  /// diagonal is overwritten with the negated off-diagonal row sum.
  static QMatrix validate(const Eigen::MatrixXd& raw);

  /// Builds the matrix from its off-diagonal part, filling the diagonal.
  static QMatrix from_off_diagonal(const Eigen::MatrixXd& raw);

  int size() const { return static_cast<int>(rates_.rows()); }
  const Eigen::MatrixXd& rates() const { return rates_; }
  double rate(int i, int j) const { return rates_(i, j); }
  /// q_i = -q_ii.
  double exit_rate(int i) const { return -rates_(i, i); }
  double max_exit_rate() const { return (-rates_.diagonal()).maxCoeff(); }

  friend bool operator==(const QMatrix& a, const QMatrix& b) {
    return a.rates_.rows() == b.rates_.rows() && a.rates_ == b.rates_;
  }

 private:
  explicit QMatrix(Eigen::MatrixXd rates) : rates_(std::move(rates)) {}

  Eigen::MatrixXd rates_;
};

/// A probability vector produced by stationary().
class ProbVector {
 public:
  explicit ProbVector(Eigen::VectorXd weights) : weights_(std::move(weights)) {}

  const Eigen::VectorXd& weights() const { return weights_; }
  double operator[](int i) const { return weights_(i); }
  int size() const { return static_cast<int>(weights_.size()); }

 private:
  Eigen::VectorXd weights_;
};

/// Per-regime Lyapunov drift exponents.
using BetaVector = Eigen::VectorXd;

/// True iff the graph with an edge i->j for every q_ij > 0 is strongly
/// connected.
bool is_irreducible(const QMatrix& q);

/// Invariant law pi of an irreducible chain (pi Q = 0, sum pi = 1).
ProbVector stationary(const QMatrix& q);

/// sum_i pi_i beta_i for the invariant law of q.
double weighted_beta(const QMatrix& q, const BetaVector& beta);

struct PerronFrobenius {
  /// Negated top eigenvalue of Q + p diag(beta).
  double eta;
  /// Positive eigenvector, scaled so that its smallest entry is 1.
  Eigen::VectorXd xi;
};

/// Top eigenpair of Q + p diag(beta). Throws EigenvectorNotPositive when the
/// dense solver returns a complex eigenvalue or a mixed-sign eigenvector.
PerronFrobenius pf_exponent(const QMatrix& q, const BetaVector& beta, double p);

/// Largest p in {2^-k : k = 0..40} with eta_p > 0, provided
/// weighted_beta(q, beta) < 0. Empty otherwise. eta_p must clear
/// kEtaMargin so that an eigenvalue sitting at 0 up to rounding is not
/// mistaken for a stabilizing one.
inline constexpr double kEtaMargin = 1e-12;
std::optional<double> find_stabilizing_p(const QMatrix& q,
                                         const BetaVector& beta);

struct FredholmSolution {
  double c;
  /// Solves Q xi = -c 1 - beta, shifted so that min xi = 1.
  Eigen::VectorXd xi;
};

FredholmSolution fredholm_solve(const QMatrix& q, const BetaVector& beta);

}  // namespace hybridsw

#endif  // HYBRIDSW_QMATRIX_HPP_
