#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hybridsw::testing {

Eigen::MatrixXd rows(std::initializer_list<std::initializer_list<double>> r) {
  const auto n_rows = static_cast<Eigen::Index>(r.size());
  const auto n_cols = static_cast<Eigen::Index>(r.begin()->size());
  Eigen::MatrixXd m(n_rows, n_cols);
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

QMatrix q(std::initializer_list<std::initializer_list<double>> r) {
  return QMatrix::validate(rows(r));
}

QMatrix random_irreducible(std::mt19937_64& rng, int n, double max_rate) {
  std::uniform_real_distribution<double> rate(0.0, max_rate);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && coin(rng) > 0.33) m(i, j) = rate(rng);
    }
  }
  if (n > 1) {
    for (int i = 0; i < n; ++i) {
      double& e = m(i, (i + 1) % n);
      if (e < 0.05) e = 0.05 + rate(rng);
    }
  }
  return QMatrix::from_off_diagonal(m);
}

double two_state_eta(double a, double c, double b1, double b2, double p) {
  const double m11 = -a + p * b1;
  const double m22 = -c + p * b2;
  const double tr = m11 + m22;
  const double det = m11 * m22 - a * c;
  return -(tr + std::sqrt(tr * tr - 4.0 * det)) / 2.0;
}

double w1_brute_force(const std::vector<double>& a,
                      const std::vector<double>& b) {
  std::vector<std::size_t> perm(b.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) cost += std::abs(a[k] - b[perm[k]]);
    best = std::min(best, cost / static_cast<double>(a.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Eigen::VectorXd stationary_by_power(const QMatrix& q, double t) {
  // Scaling and squaring: Taylor series of exp(tQ / 2^s) with the scaled
  // norm at most 1/2, then s squarings.
  const int n = q.size();
  const double norm = (q.rates() * t).cwiseAbs().rowwise().sum().maxCoeff();
  const int s = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 0.5))));
  const Eigen::MatrixXd a = q.rates() * (t / std::ldexp(1.0, s));
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd sum = term;
  for (int k = 1; k <= 20; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  for (int k = 0; k < s; ++k) sum = sum * sum;
  return sum.row(0).transpose();
}

HybridModel frozen_model(const QMatrix& cell) {
  const int n = cell.size();
  return HybridModel(
      1, LinearDrift{std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(1, 1))},
      ConstantDiffusion{
          std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(1, 1))},
      RadialThresholdQ({}, {cell}));
}

HybridModel stability_model(double b1, double b2) {
  const QMatrix inner = q({{-1, 1}, {1, -1}});
  const QMatrix outer = q({{-2, 2}, {1, -1}});
  return HybridModel(1, PowerSgnDrift{vec({b1, b2}), 3.0},
                     PowerDiffusion{vec({1.0, 1.0}), 2.0},
                     SignedThresholdQ({-1.0, 0.0, 1.0}, {outer, inner, inner, outer}));
}

HybridModel ou_model(double b1, double b2) {
  const QMatrix tail = q({{-1, 1}, {1, -1}});
  const QMatrix middle = q({{-3, 3}, {0.5, -0.5}});
  return HybridModel(
      1,
      LinearDrift{{Eigen::MatrixXd::Constant(1, 1, b1),
                   Eigen::MatrixXd::Constant(1, 1, b2)}},
      OUCutoffDiffusion{vec({0.5, 0.5})},
      SignedThresholdQ({-1.0, 1.0}, {tail, middle, tail}));
}

HybridModel tanh_coupling_model() {
  return HybridModel(
      1, BoundedDrift{vec({1.0, -1.0}), Eigen::MatrixXd::Zero(1, 1)},
      ConstantDiffusion{
          std::vector<Eigen::MatrixXd>(2, Eigen::MatrixXd::Identity(1, 1))},
      SmoothQ(q({{-2, 2}, {2, -2}}), rows({{-0.5, 0.5}, {0.5, -0.5}}),
              SmoothShape::kTanhSigned));
}

}  // namespace hybridsw::testing
