#ifndef HYBRIDSW_TESTS_SUPPORT_HPP_
#define HYBRIDSW_TESTS_SUPPORT_HPP_

// Shared fixtures for the unit tests and the acceptance binary: small model
// builders, random generators and independent oracles.

#include <initializer_list>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hybridsw/error.hpp"
#include "hybridsw/model.hpp"
#include "hybridsw/qmatrix.hpp"

namespace hybridsw::testing {

/// Kind of the hybridsw::Error thrown by fn, or nullopt when nothing is thrown.
template <class F>
std::optional<ErrorKind> error_kind_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

Eigen::MatrixXd rows(std::initializer_list<std::initializer_list<double>> r);
Eigen::VectorXd vec(std::initializer_list<double> v);
QMatrix q(std::initializer_list<std::initializer_list<double>> r);

/// Off-diagonal rates uniform on [0, max_rate) with roughly a third set to
/// zero, plus a positive cycle 0 -> 1 -> ... -> n-1 -> 0 so the result is
/// irreducible.
QMatrix random_irreducible(std::mt19937_64& rng, int n, double max_rate = 3.0);

/// Top eigenvalue of [[-a + p b1, a], [c, -c + p b2]] from the quadratic
/// formula, returned as eta = -lambda_max.
double two_state_eta(double a, double c, double b1, double b2, double p);

/// Brute-force 1-D W1 over every assignment (small samples only).
double w1_brute_force(const std::vector<double>& a, const std::vector<double>& b);

/// First row of exp(tQ) by a truncated Taylor series with scaling and squaring.
Eigen::VectorXd stationary_by_power(const QMatrix& q, double t);

// Model builders shared with the acceptance suite.

/// Zero drift and diffusion, one rate cell.
HybridModel frozen_model(const QMatrix& cell);

/// Power drift p = 3, power diffusion q = 2, sigma = (1, 1), cuts -1, 0, 1
/// with Q = [[-1,1],[1,-1]] on both sides of 0.
HybridModel stability_model(double b1, double b2);

/// Linear drift, OU cutoff diffusion sigma = (0.5, 0.5), cuts at -1 and 1
/// with tails [[-1,1],[1,-1]].
HybridModel ou_model(double b1, double b2);

/// Bounded drift (1, -1) tanh(x), sigma = 1, A = [[-2,2],[2,-2]],
/// B = [[-0.5,0.5],[0.5,-0.5]], signed tanh shape.
HybridModel tanh_coupling_model();

}  // namespace hybridsw::testing

#endif  // HYBRIDSW_TESTS_SUPPORT_HPP_
