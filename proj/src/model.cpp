#include "hybridsw/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hybridsw/error.hpp"

namespace hybridsw {
namespace {

constexpr const char* kModule = "model";

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorKind::ModelInvalid, kModule, "HybridModel", message);
}

void require_regime(const HybridModel& m, int regime, const char* op) {
  if (regime < 0 || regime >= m.regimes()) {
    throw Error(ErrorKind::RegimeOutOfRange, kModule, op,
                "regime " + std::to_string(regime) + " outside [0, " +
                    std::to_string(m.regimes()) + ")");
  }
}

void require_per_regime(const Eigen::VectorXd& v, int n, const char* what) {
  if (v.size() != n || !v.allFinite()) {
    invalid(std::string(what) + " needs one finite entry per regime");
  }
}

void require_square(const Eigen::MatrixXd& m, int dim, const char* what) {
  if (m.rows() != dim || m.cols() != dim || !m.allFinite()) {
    invalid(std::string(what) + " must be a finite d x d matrix");
  }
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

// |x|^p min |x| for p > 1 equals |x|^p inside the unit ball.
double power_cutoff(double abs_x, double power) {
  return abs_x < 1.0 ? std::pow(abs_x, power) : abs_x;
}

bool same_matrices(const std::vector<Eigen::MatrixXd>& a,
                   const std::vector<Eigen::MatrixXd>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].rows() != b[k].rows() || a[k].cols() != b[k].cols() ||
        a[k] != b[k]) {
      return false;
    }
  }
  return true;
}

bool same_vector(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && a == b;
}

}  // namespace

HybridModel::HybridModel(int dim, DriftSpec drift, DiffusionSpec diffusion,
                         SwitchingSpec switching)
    : dim_(dim),
      regimes_(hybridsw::regimes(switching)),
      drift_(std::move(drift)),
      diffusion_(std::move(diffusion)),
      switching_(std::move(switching)) {
  if (dim_ < 1) invalid("dimension must be >= 1");
  const int n = regimes_;
  if (is_signed(switching_) && dim_ != 1) {
    invalid("sign-dependent switching requires d = 1");
  }
  std::visit(Overloaded{[&](const LinearDrift& d) {
                          if (static_cast<int>(d.coefficient.size()) != n) {
                            invalid("linear drift needs one matrix per regime");
                          }
                          for (const auto& b : d.coefficient) {
                            require_square(b, dim_, "linear drift");
                          }
                        },
                        [&](const PowerSgnDrift& d) {
                          if (dim_ != 1) invalid("power drift is 1-D only");
                          require_per_regime(d.b, n, "power drift");
                          if (!(d.power > 1.0)) invalid("drift power must be > 1");
                        },
                        [&](const BoundedDrift& d) {
                          require_per_regime(d.bounded, n, "bounded drift");
                          require_square(d.linear, dim_, "bounded drift Z");
                        }},
             drift_);
  std::visit(
      Overloaded{[&](const ConstantDiffusion& s) {
                   if (static_cast<int>(s.sigma.size()) != n) {
                     invalid("constant diffusion needs one matrix per regime");
                   }
                   for (const auto& m : s.sigma) {
                     require_square(m, dim_, "constant diffusion");
                   }
                 },
                 [&](const PowerDiffusion& s) {
                   if (dim_ != 1) invalid("power diffusion is 1-D only");
                   require_per_regime(s.sigma, n, "power diffusion");
                   if (!(s.power > 1.0)) invalid("diffusion power must be > 1");
                 },
                 [&](const OUCutoffDiffusion& s) {
                   if (dim_ != 1) invalid("OU cutoff diffusion is 1-D only");
                   require_per_regime(s.sigma, n, "OU cutoff diffusion");
                 }},
      diffusion_);
  const auto* pd = std::get_if<PowerSgnDrift>(&drift_);
  const auto* ps = std::get_if<PowerDiffusion>(&diffusion_);
  if (pd != nullptr && ps != nullptr && pd->power > 2.0 * ps->power - 1.0) {
    invalid("power drift needs p <= 2q - 1");
  }
}

bool HybridModel::same_coefficients(const HybridModel& other) const {
  if (dim_ != other.dim_ || regimes_ != other.regimes_) return false;
  if (drift_.index() != other.drift_.index() ||
      diffusion_.index() != other.diffusion_.index()) {
    return false;
  }
  const bool drift_equal = std::visit(
      Overloaded{[&](const LinearDrift& d) {
                   return same_matrices(
                       d.coefficient,
                       std::get<LinearDrift>(other.drift_).coefficient);
                 },
                 [&](const PowerSgnDrift& d) {
                   const auto& o = std::get<PowerSgnDrift>(other.drift_);
                   return same_vector(d.b, o.b) && d.power == o.power;
                 },
                 [&](const BoundedDrift& d) {
                   const auto& o = std::get<BoundedDrift>(other.drift_);
                   return same_vector(d.bounded, o.bounded) &&
                          d.linear == o.linear;
                 }},
      drift_);
  const bool diffusion_equal = std::visit(
      Overloaded{[&](const ConstantDiffusion& s) {
                   return same_matrices(
                       s.sigma, std::get<ConstantDiffusion>(other.diffusion_).sigma);
                 },
                 [&](const PowerDiffusion& s) {
                   const auto& o = std::get<PowerDiffusion>(other.diffusion_);
                   return same_vector(s.sigma, o.sigma) && s.power == o.power;
                 },
                 [&](const OUCutoffDiffusion& s) {
                   return same_vector(
                       s.sigma, std::get<OUCutoffDiffusion>(other.diffusion_).sigma);
                 }},
      diffusion_);
  return drift_equal && diffusion_equal;
}

// ---------------------------------------------------------------------------

void drift_into(const HybridModel& m,
                const Eigen::Ref<const Eigen::VectorXd>& x, int regime,
                Eigen::Ref<Eigen::VectorXd> out) {
  std::visit(Overloaded{[&](const LinearDrift& d) {
                          out.noalias() = d.coefficient[regime] * x;
                        },
                        [&](const PowerSgnDrift& d) {
                          const double sgn = x(0) >= 0.0 ? 1.0 : -1.0;
                          out(0) = d.b(regime) * sgn *
                                   power_cutoff(std::abs(x(0)), d.power);
                        },
                        [&](const BoundedDrift& d) {
                          out.noalias() = d.linear * x;
                          out.array() += d.bounded(regime) * x.array().tanh();
                        }},
             m.drift());
}

void diffusion_into(const HybridModel& m,
                    const Eigen::Ref<const Eigen::VectorXd>& x, int regime,
                    Eigen::Ref<Eigen::MatrixXd> out) {
  std::visit(Overloaded{[&](const ConstantDiffusion& s) {
                          out = s.sigma[regime];
                        },
                        [&](const PowerDiffusion& s) {
                          out(0, 0) = s.sigma(regime) *
                                      power_cutoff(std::abs(x(0)), s.power);
                        },
                        [&](const OUCutoffDiffusion& s) {
                          const double a = std::abs(x(0));
                          out(0, 0) = s.sigma(regime) * std::min(a * a, a);
                        }},
             m.diffusion());
}

Eigen::VectorXd drift_at(const HybridModel& m, const Eigen::VectorXd& x,
                         int regime) {
  require_regime(m, regime, "drift_at");
  Eigen::VectorXd out(m.dim());
  drift_into(m, x, regime, out);
  return out;
}

Eigen::MatrixXd diffusion_at(const HybridModel& m, const Eigen::VectorXd& x,
                             int regime) {
  require_regime(m, regime, "diffusion_at");
  Eigen::MatrixXd out(m.dim(), m.dim());
  diffusion_into(m, x, regime, out);
  return out;
}

double drift_lipschitz(const DriftSpec& drift) {
  return std::visit(
      Overloaded{[](const LinearDrift& d) {
                   double k = 0.0;
                   for (const auto& b : d.coefficient) {
                     k = std::max(k, spectral_norm(b));
                   }
                   return k;
                 },
                 [](const PowerSgnDrift& d) {
                   return d.power * d.b.cwiseAbs().maxCoeff();
                 },
                 [](const BoundedDrift& d) {
                   return d.bounded.cwiseAbs().maxCoeff() +
                          spectral_norm(d.linear);
                 }},
      drift);
}

double diffusion_lipschitz(const DiffusionSpec& diffusion) {
  return std::visit(
      Overloaded{[](const ConstantDiffusion&) { return 0.0; },
                 [](const PowerDiffusion& s) {
                   return s.power * s.sigma.cwiseAbs().maxCoeff();
                 },
                 [](const OUCutoffDiffusion& s) {
                   return 2.0 * s.sigma.cwiseAbs().maxCoeff();
                 }},
      diffusion);
}

double bounded_split_constant(const DriftSpec& drift, int dim) {
  const auto violated = [](const char* why) -> double {
    throw Error(ErrorKind::HypothesisViolated, kModule,
                "bounded_split_constant", why);
  };
  return std::visit(
      Overloaded{
          [&](const LinearDrift& d) {
            for (const auto& b : d.coefficient) {
              if (b != d.coefficient.front()) {
                return violated(
                    "regime-dependent linear drift has no bounded part");
              }
            }
            return spectral_norm(d.coefficient.front());
          },
          [&](const PowerSgnDrift&) {
            return violated("power drift is unbounded");
          },
          [&](const BoundedDrift& d) {
            const double top = d.bounded.cwiseAbs().maxCoeff();
            return std::max(top + spectral_norm(d.linear),
                            top * std::sqrt(static_cast<double>(dim)));
          }},
      drift);
}

// ---------------------------------------------------------------------------

TestFunction::TestFunction(Eigen::VectorXd lead_weights, double lead_power,
                           Eigen::VectorXd tail_weights, double tail_power)
    : lead_weights_(std::move(lead_weights)),
      lead_power_(lead_power),
      tail_weights_(std::move(tail_weights)),
      tail_power_(tail_power) {
  if (tail_weights_.size() != lead_weights_.size() ||
      !lead_weights_.allFinite() || !tail_weights_.allFinite() ||
      !std::isfinite(lead_power_) || !std::isfinite(tail_power_)) {
    throw Error(ErrorKind::InvalidArgument, kModule, "TestFunction",
                "weights must be finite with one entry per regime");
  }
}

TestFunction TestFunction::power(Eigen::VectorXd weights, double power) {
  const Eigen::Index n = weights.size();
  return TestFunction(std::move(weights), power, Eigen::VectorXd::Zero(n), 0.0);
}

TestFunction TestFunction::constant(int regimes, double value) {
  return power(Eigen::VectorXd::Constant(regimes, value), 0.0);
}

namespace {

double radial_power(double r, double g) { return g == 0.0 ? 1.0 : std::pow(r, g); }

void add_power_gradient(const Eigen::VectorXd& x, double r, double g,
                        double weight, Eigen::VectorXd& out) {
  if (g == 0.0 || weight == 0.0 || r == 0.0) return;
  out += weight * g * std::pow(r, g - 2.0) * x;
}

void add_power_hessian(const Eigen::VectorXd& x, double r, double g,
                       double weight, Eigen::MatrixXd& out) {
  if (g == 0.0 || weight == 0.0) return;
  const Eigen::Index d = x.size();
  if (r == 0.0) {
    if (g == 2.0) out += 2.0 * weight * Eigen::MatrixXd::Identity(d, d);
    return;
  }
  const Eigen::VectorXd u = x / r;
  out += weight * g * std::pow(r, g - 2.0) *
         (Eigen::MatrixXd::Identity(d, d) + (g - 2.0) * u * u.transpose());
}

bool power_singular(double g, const Eigen::VectorXd& w) {
  return g != 0.0 && g < 2.0 && !w.isZero(0.0);
}

}  // namespace

double TestFunction::value(const Eigen::VectorXd& x, int regime) const {
  const double r = x.norm();
  return lead_weights_(regime) * radial_power(r, lead_power_) +
         tail_weights_(regime) * radial_power(r, tail_power_);
}

Eigen::VectorXd TestFunction::gradient(const Eigen::VectorXd& x,
                                       int regime) const {
  const double r = x.norm();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  add_power_gradient(x, r, lead_power_, lead_weights_(regime), out);
  add_power_gradient(x, r, tail_power_, tail_weights_(regime), out);
  return out;
}

Eigen::MatrixXd TestFunction::hessian(const Eigen::VectorXd& x,
                                      int regime) const {
  const double r = x.norm();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.size(), x.size());
  add_power_hessian(x, r, lead_power_, lead_weights_(regime), out);
  add_power_hessian(x, r, tail_power_, tail_weights_(regime), out);
  return out;
}

bool TestFunction::singular_at_origin() const {
  return power_singular(lead_power_, lead_weights_) ||
         power_singular(tail_power_, tail_weights_);
}

double generator_apply(const HybridModel& m, const TestFunction& f,
                       const Eigen::VectorXd& x, int regime) {
  constexpr const char* op = "generator_apply";
  require_regime(m, regime, op);
  if (f.regimes() != m.regimes() || x.size() != m.dim()) {
    throw Error(ErrorKind::InvalidArgument, kModule, op,
                "test function or state does not match the model");
  }
  if (f.singular_at_origin() && x.norm() == 0.0) {
    throw Error(ErrorKind::SingularPoint, kModule, op,
                "test function is not C^2 at the origin");
  }
  const Eigen::VectorXd b = drift_at(m, x, regime);
  const Eigen::MatrixXd sigma = diffusion_at(m, x, regime);
  const Eigen::MatrixXd a = sigma * sigma.transpose();
  double out = b.dot(f.gradient(x, regime)) +
               0.5 * (a.cwiseProduct(f.hessian(x, regime))).sum();

  Eigen::MatrixXd rates(m.regimes(), m.regimes());
  evaluate_into(m.switching(), x, rates);
  const double here = f.value(x, regime);
  for (int j = 0; j < m.regimes(); ++j) {
    if (j != regime) out += rates(regime, j) * (f.value(x, j) - here);
  }
  return out;
}

ScanResult lyapunov_scan(const HybridModel& m, const TestFunction& f,
                         const ScanRegion& region, double step) {
  constexpr const char* op = "lyapunov_scan";
  if (!(step > 0.0) || !(region.hi >= region.lo) ||
      (region.kind == ScanRegion::Kind::kAnnulus && region.hi < 0.0)) {
    throw Error(ErrorKind::EmptyRegion, kModule, op,
                "region is empty or the step is not positive");
  }
  const bool touches_origin = region.kind == ScanRegion::Kind::kAnnulus
                                  ? region.lo <= 0.0
                                  : (region.lo <= 0.0 && region.hi >= 0.0);
  if (f.singular_at_origin() && touches_origin) {
    throw Error(ErrorKind::SingularPoint, kModule, op,
                "region contains the singular point of the test function");
  }

  std::vector<double> coords;
  const double span = region.hi - region.lo;
  const auto count = static_cast<long>(std::floor(span / step * (1 + 1e-12)));
  for (long k = 0; k <= count; ++k) coords.push_back(region.lo + k * step);
  if (coords.back() < region.hi) coords.push_back(region.hi);

  std::vector<Eigen::VectorXd> points;
  const int d = m.dim();
  for (double c : coords) {
    if (region.kind == ScanRegion::Kind::kInterval) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
      x(0) = c;
      points.push_back(x);
      continue;
    }
    for (int k = 0; k < d; ++k) {
      for (double sign : {1.0, -1.0}) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
        x(k) = sign * c;
        points.push_back(x);
      }
    }
  }

  ScanResult best{-std::numeric_limits<double>::infinity(),
                  Eigen::VectorXd(), 0};
  for (const Eigen::VectorXd& x : points) {
    for (int i = 0; i < m.regimes(); ++i) {
      const double v = generator_apply(m, f, x, i);
      if (v > best.max_value) best = ScanResult{v, x, i};
    }
  }
  return best;
}

}  // namespace hybridsw
