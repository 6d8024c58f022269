#include "hybridsw/qmatrix.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "hybridsw/error.hpp"

namespace hybridsw {
namespace {

constexpr const char* kModule = "qmatrix";

void require_irreducible(const QMatrix& q, const char* op) {
  if (!is_irreducible(q)) {
    throw Error(ErrorKind::NotIrreducible, kModule, op,
                "rate matrix is not irreducible");
  }
}

void require_beta(const QMatrix& q, const BetaVector& beta, const char* op) {
  if (beta.size() != q.size() || !beta.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, kModule, op,
                "beta must be finite with one entry per regime");
  }
}

// Visits every state reachable from `start` along positive rates, forward
// (i->j when q_ij > 0) or reversed.
int count_reachable(const Eigen::MatrixXd& rates, int start, bool reversed) {
  const int n = static_cast<int>(rates.rows());
  std::vector<bool> seen(n, false);
  std::vector<int> stack{start};
  seen[start] = true;
  int count = 1;
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (int j = 0; j < n; ++j) {
      const double r = reversed ? rates(j, i) : rates(i, j);
      if (j != i && r > 0.0 && !seen[j]) {
        seen[j] = true;
        ++count;
        stack.push_back(j);
      }
    }
  }
  return count;
}

}  // namespace

QMatrix QMatrix::validate(const Eigen::MatrixXd& raw) {
  constexpr const char* op = "validate";
  if (raw.rows() != raw.cols() || raw.rows() == 0) {
    throw Error(ErrorKind::NonSquare, kModule, op,
                "rate matrix must be square and non-empty");
  }
  if (!raw.allFinite()) {
    throw Error(ErrorKind::NonFinite, kModule, op,
                "rate matrix has non-finite entries");
  }
  const Eigen::Index n = raw.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && raw(i, j) < 0.0) {
        throw Error(ErrorKind::NegativeOffDiagonal, kModule, op,
                    "negative off-diagonal rate at (" + std::to_string(i + 1) +
                        "," + std::to_string(j + 1) + ")");
      }
    }
  }
  Eigen::MatrixXd rates = raw;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double off = raw.row(i).sum() - raw(i, i);
    if (std::abs(raw(i, i) + off) > kRowSumTolerance) {
      throw Error(ErrorKind::NonConservative, kModule, op,
                  "row " + std::to_string(i + 1) + " sums to " +
                      std::to_string(raw(i, i) + off));
    }
    rates(i, i) = -off;
  }
  return QMatrix(std::move(rates));
}

QMatrix QMatrix::from_off_diagonal(const Eigen::MatrixXd& raw) {
  Eigen::MatrixXd full = raw;
  if (full.rows() == full.cols()) {
    for (Eigen::Index i = 0; i < full.rows(); ++i) {
      full(i, i) = 0.0;
      full(i, i) = -full.row(i).sum();
    }
  }
  return validate(full);
}

bool is_irreducible(const QMatrix& q) {
  const int n = q.size();
  return count_reachable(q.rates(), 0, false) == n &&
         count_reachable(q.rates(), 0, true) == n;
}

ProbVector stationary(const QMatrix& q) {
  require_irreducible(q, "stationary");
  const int n = q.size();
  // pi Q = 0 transposed, with the last balance equation replaced by sum = 1.
  Eigen::MatrixXd system = q.rates().transpose();
  system.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::VectorXd pi = system.fullPivLu().solve(rhs);
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  return ProbVector(std::move(pi));
}

double weighted_beta(const QMatrix& q, const BetaVector& beta) {
  require_beta(q, beta, "weighted_beta");
  return stationary(q).weights().dot(beta);
}

PerronFrobenius pf_exponent(const QMatrix& q, const BetaVector& beta,
                            double p) {
  constexpr const char* op = "pf_exponent";
  require_beta(q, beta, op);
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw Error(ErrorKind::InvalidArgument, kModule, op, "p must be positive");
  }
  require_irreducible(q, op);

  Eigen::MatrixXd perturbed = q.rates();
  perturbed.diagonal() += p * beta;

  Eigen::EigenSolver<Eigen::MatrixXd> solver(perturbed, true);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::EigenvectorNotPositive, kModule, op,
                "eigen decomposition failed");
  }
  const Eigen::VectorXcd& values = solver.eigenvalues();
  Eigen::Index top = 0;
  for (Eigen::Index k = 1; k < values.size(); ++k) {
    if (values(k).real() > values(top).real()) top = k;
  }
  if (std::abs(values(top).imag()) > 1e-8) {
    throw Error(ErrorKind::EigenvectorNotPositive, kModule, op,
                "top eigenvalue is not real");
  }

  Eigen::VectorXcd vec = solver.eigenvectors().col(top);
  Eigen::Index pivot = 0;
  vec.cwiseAbs().maxCoeff(&pivot);
  vec /= vec(pivot);  // removes the arbitrary complex phase
  const double scale = vec.cwiseAbs().maxCoeff();
  if (vec.imag().cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw Error(ErrorKind::EigenvectorNotPositive, kModule, op,
                "top eigenvector is not real");
  }
  Eigen::VectorXd xi = vec.real();
  if (xi.minCoeff() <= 1e-9 * xi.maxCoeff()) {
    throw Error(ErrorKind::EigenvectorNotPositive, kModule, op,
                "top eigenvector is not strictly positive");
  }
  xi /= xi.minCoeff();

  return PerronFrobenius{-values(top).real(), std::move(xi)};
}

std::optional<double> find_stabilizing_p(const QMatrix& q,
                                         const BetaVector& beta) {
  if (!(weighted_beta(q, beta) < 0.0)) return std::nullopt;
  double p = 1.0;
  for (int k = 0; k <= 40; ++k, p *= 0.5) {
    if (pf_exponent(q, beta, p).eta > kEtaMargin) return p;
  }
  return std::nullopt;
}

FredholmSolution fredholm_solve(const QMatrix& q, const BetaVector& beta) {
  constexpr const char* op = "fredholm_solve";
  const double weighted = weighted_beta(q, beta);
  if (!(weighted < 0.0)) {
    throw Error(ErrorKind::CriterionViolated, kModule, op,
                "sum pi_i beta_i must be negative");
  }
  const int n = q.size();
  const double c = -weighted;
  const Eigen::VectorXd target = -c * Eigen::VectorXd::Ones(n) - beta;

  // Q is singular with kernel span{1}; any one balance row is implied by the
  // others, so it is swapped for the gauge xi_{n-1} = 0.
  Eigen::MatrixXd system = q.rates();
  Eigen::VectorXd rhs = target;
  system.row(n - 1).setZero();
  system(n - 1, n - 1) = 1.0;
  rhs(n - 1) = 0.0;
  Eigen::VectorXd xi = system.fullPivLu().solve(rhs);
  xi.array() += 1.0 - xi.minCoeff();
  return FredholmSolution{c, std::move(xi)};
}

}  // namespace hybridsw
