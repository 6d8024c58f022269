#ifndef HYBRIDSW_MODEL_HPP_
#define HYBRIDSW_MODEL_HPP_

// Hybrid model assembly: per-regime drift and diffusion families, the
// generator of (X, Lambda) and grid checks of Lyapunov inequalities.

#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "hybridsw/threshold.hpp"

namespace hybridsw {

/// b(x, i) = B_i x.
struct LinearDrift {
  std::vector<Eigen::MatrixXd> coefficient;
};

/// b(x, i) = b_i sgn(x) (|x|^p min |x|), 1-D, sgn(0) = +1.
struct PowerSgnDrift {
  Eigen::VectorXd b;
  double power;
};

/// b(x, i) = bhat_i tanh(x) (componentwise) + Z x. The first part is bounded,
/// the second is the regime-independent Lipschitz part.
struct BoundedDrift {
  Eigen::VectorXd bounded;
  Eigen::MatrixXd linear;
};

using DriftSpec = std::variant<LinearDrift, PowerSgnDrift, BoundedDrift>;

/// sigma(x, i) = S_i.
struct ConstantDiffusion {
  std::vector<Eigen::MatrixXd> sigma;
};

/// sigma(x, i) = sigma_i (|x|^q min |x|), 1-D.
struct PowerDiffusion {
  Eigen::VectorXd sigma;
  double power;
};

/// sigma(x, i) = sigma_i (x^2 min |x|), 1-D.
struct OUCutoffDiffusion {
  Eigen::VectorXd sigma;
};

using DiffusionSpec =
    std::variant<ConstantDiffusion, PowerDiffusion, OUCutoffDiffusion>;

class HybridModel {
 public:
  /// Validates dimensions and family constraints; throws ModelInvalid.
  HybridModel(int dim, DriftSpec drift, DiffusionSpec diffusion,
              SwitchingSpec switching);

  int dim() const { return dim_; }
  int regimes() const { return regimes_; }
  const DriftSpec& drift() const { return drift_; }
  const DiffusionSpec& diffusion() const { return diffusion_; }
  const SwitchingSpec& switching() const { return switching_; }

  /// Same dimension, regime count and coefficients; switching may differ.
  bool same_coefficients(const HybridModel& other) const;

 private:
  int dim_;
  int regimes_;
  DriftSpec drift_;
  DiffusionSpec diffusion_;
  SwitchingSpec switching_;
};

Eigen::VectorXd drift_at(const HybridModel& m, const Eigen::VectorXd& x,
                         int regime);
Eigen::MatrixXd diffusion_at(const HybridModel& m, const Eigen::VectorXd& x,
                             int regime);

/// Allocation-free forms for the integrator. `regime` is not range-checked.
void drift_into(const HybridModel& m,
                const Eigen::Ref<const Eigen::VectorXd>& x, int regime,
                Eigen::Ref<Eigen::VectorXd> out);
void diffusion_into(const HybridModel& m,
                    const Eigen::Ref<const Eigen::VectorXd>& x, int regime,
                    Eigen::Ref<Eigen::MatrixXd> out);

/// Global Lipschitz constants of x -> b(x, i) and x -> sigma(x, i).
double drift_lipschitz(const DriftSpec& drift);
double diffusion_lipschitz(const DiffusionSpec& diffusion);

/// Smallest K2 with |bhat(x)-bhat(y)| + |Z(x)-Z(y)| <= K2 |x-y| and
/// sup |bhat| <= K2, for drifts that split into bounded + Lipschitz parts.
/// Throws HypothesisViolated for drifts with no such split.
double bounded_split_constant(const DriftSpec& drift, int dim);

/// f(x, i) = a_i |x|^g + c_i |x|^h. Covers xi_i |x|^g (c = 0), rho + xi_i h
/// for power rho and h, and constants (g = 0).
class TestFunction {
 public:
  TestFunction(Eigen::VectorXd lead_weights, double lead_power,
               Eigen::VectorXd tail_weights, double tail_power);

  static TestFunction power(Eigen::VectorXd weights, double power);
  static TestFunction constant(int regimes, double value);

  double value(const Eigen::VectorXd& x, int regime) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x, int regime) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x, int regime) const;

  /// True when the origin is outside the C^2 domain.
  bool singular_at_origin() const;
  int regimes() const { return static_cast<int>(lead_weights_.size()); }

 private:
  Eigen::VectorXd lead_weights_;
  double lead_power_;
  Eigen::VectorXd tail_weights_;
  double tail_power_;
};

/// Generator sum_k b_k d_k f + 1/2 sum a_kl d_kl f + sum_j q_ij(x)(f_j - f_i).
double generator_apply(const HybridModel& m, const TestFunction& f,
                       const Eigen::VectorXd& x, int regime);

struct ScanRegion {
  enum class Kind { kInterval, kAnnulus };
  Kind kind;
  double lo;
  double hi;
};

struct ScanResult {
  double max_value;
  Eigen::VectorXd argmax;
  int argmax_regime;
};

/// Maximum of the generator over grid points of the region times every regime.
/// Intervals are 1-D ranges of x; an annulus lo <= |x| <= hi is sampled along
/// +-e_k for each coordinate axis.
ScanResult lyapunov_scan(const HybridModel& m, const TestFunction& f,
                         const ScanRegion& region, double step);

}  // namespace hybridsw

#endif  // HYBRIDSW_MODEL_HPP_
