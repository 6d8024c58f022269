#ifndef HYBRIDSW_CLASSIFY_HPP_
#define HYBRIDSW_CLASSIFY_HPP_

// Stability and ergodicity verdicts from per-regime Lyapunov exponents beta
// and the rate matrix of the relevant threshold cell.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hybridsw/model.hpp"
#include "hybridsw/qmatrix.hpp"
#include "hybridsw/threshold.hpp"

namespace hybridsw {

/// Sum pi beta must be at most -kVerdictMargin to count as negative.
inline constexpr double kVerdictMargin = 1e-12;

enum class LyapunovKind { kL1, kL2, kL3, kL4 };

enum class RhoBehavior {
  kVanishesAtZero,
  kBlowsUpAtZero,
  kBlowsUpAtInfinity,
  kVanishesAtInfinity,
  kVanishesAtPlusInfinity,
  kVanishesAtMinusInfinity,
};

struct LyapunovData {
  LyapunovKind kind;
  BetaVector beta;
  RhoBehavior behavior;
  std::optional<double> rho_power;
  std::optional<double> h_power;
};

enum class Verdict {
  kAsymptoticallyStable,
  kUnstable,
  kErgodic,
  kExponentiallyErgodic,
  kTransient,
  kInconclusive,
};

std::string_view to_string(LyapunovKind kind);
std::string_view to_string(RhoBehavior behavior);
std::string_view to_string(Verdict verdict);
std::optional<LyapunovKind> parse_lyapunov_kind(std::string_view text);
std::optional<RhoBehavior> parse_rho_behavior(std::string_view text);

/// Numbers behind the verdict for one cell matrix.
struct CellCertificate {
  std::string label;
  QMatrix q;
  ProbVector pi;
  double weighted_beta;
  /// Present on the L1/L3 branch when sum pi beta < 0.
  std::optional<double> p;
  std::optional<PerronFrobenius> perron;
  /// Present on the L2/L4 branch when sum pi beta < 0.
  std::optional<FredholmSolution> fredholm;
};

struct CriteriaReport {
  Verdict verdict = Verdict::kInconclusive;
  std::string theorem;
  std::vector<CellCertificate> cells;
  std::vector<std::string> notes;
};

enum class BetaRegion { kNearZero, kNearInfinity };

struct DerivedBeta {
  BetaVector beta;
  BetaRegion region;
  std::string note;
};

/// beta for rho = |x| near the relevant end, or nullopt for an unsupported
/// drift/diffusion pair:
///   power drift + power diffusion near 0: b_i (p < 2q-1), b_i - sigma_i^2/2
///   (p = 2q-1);
///   linear drift + OU cutoff diffusion near infinity: the drift coefficient.
std::optional<DerivedBeta> derive_beta(const HybridModel& m);

/// beta for rho = |x|^(-gamma), the blow-up test function used for
/// instability (near 0) and transience (near infinity). Same family support
/// as derive_beta.
std::optional<DerivedBeta> derive_inverse_power_beta(const HybridModel& m,
                                                     double gamma);

/// Innermost cell of a radial threshold spec.
CriteriaReport stability_at_zero(const RadialThresholdQ& sw,
                                 const LyapunovData& ld);

/// Cells on both sides of the cut at 0. Throws NoCutAtZero.
CriteriaReport stability_two_sided(const SignedThresholdQ& sw,
                                   const LyapunovData& ld);

/// Outermost cell of a radial threshold spec.
CriteriaReport ergodicity_radial(const RadialThresholdQ& sw,
                                 const LyapunovData& ld);

/// Both tail cells of a one-dimensional threshold spec.
CriteriaReport ergodicity_signed(const SignedThresholdQ& sw,
                                 const LyapunovData& ld);

/// Limit matrix of a smooth spec at infinity. Throws NoLimit when the rates
/// approach different matrices along different directions.
CriteriaReport ergodicity_limit(const SmoothQ& sq, const LyapunovData& ld);

/// Dispatches on the switching family and the Lyapunov kind.
CriteriaReport classify(const HybridModel& m, const LyapunovData& ld);

}  // namespace hybridsw

#endif  // HYBRIDSW_CLASSIFY_HPP_
