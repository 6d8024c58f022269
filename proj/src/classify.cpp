#include "hybridsw/classify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "hybridsw/error.hpp"

namespace hybridsw {
namespace {

constexpr const char* kModule = "classify";
constexpr const char* kEllipticityNote =
    "uniform ellipticity (H1) is an assumed hypothesis and is not verified";

constexpr std::array<std::pair<LyapunovKind, std::string_view>, 4> kKindNames{{
    {LyapunovKind::kL1, "L1"},
    {LyapunovKind::kL2, "L2"},
    {LyapunovKind::kL3, "L3"},
    {LyapunovKind::kL4, "L4"},
}};

constexpr std::array<std::pair<RhoBehavior, std::string_view>, 6> kBehaviorNames{{
    {RhoBehavior::kVanishesAtZero, "vanishes-at-0"},
    {RhoBehavior::kBlowsUpAtZero, "blows-up-at-0"},
    {RhoBehavior::kBlowsUpAtInfinity, "blows-up-at-infinity"},
    {RhoBehavior::kVanishesAtInfinity, "vanishes-at-infinity"},
    {RhoBehavior::kVanishesAtPlusInfinity, "vanishes-at-plus-infinity"},
    {RhoBehavior::kVanishesAtMinusInfinity, "vanishes-at-minus-infinity"},
}};

bool near_zero_data(const LyapunovData& ld) {
  return (ld.kind == LyapunovKind::kL1 || ld.kind == LyapunovKind::kL2) &&
         (ld.behavior == RhoBehavior::kVanishesAtZero ||
          ld.behavior == RhoBehavior::kBlowsUpAtZero);
}

bool exponent_branch(const LyapunovData& ld) {
  return ld.kind == LyapunovKind::kL1 || ld.kind == LyapunovKind::kL3;
}

void require(bool ok, const char* op, const char* why) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, kModule, op, why);
}

CellCertificate certify(std::string label, const QMatrix& q,
                        const LyapunovData& ld) {
  const double w = weighted_beta(q, ld.beta);
  CellCertificate cert{std::move(label), q, stationary(q), w,
                       std::nullopt, std::nullopt, std::nullopt};
  if (w > -kVerdictMargin) return cert;
  if (exponent_branch(ld)) {
    cert.p = find_stabilizing_p(q, ld.beta);
    if (cert.p) cert.perron = pf_exponent(q, ld.beta, *cert.p);
  } else {
    cert.fredholm = fredholm_solve(q, ld.beta);
  }
  return cert;
}

bool negative(const CellCertificate& c) {
  return c.weighted_beta <= -kVerdictMargin;
}

Verdict ergodic_verdict(const LyapunovData& ld) {
  return ld.kind == LyapunovKind::kL3 ? Verdict::kExponentiallyErgodic
                                      : Verdict::kErgodic;
}

void require_far_data(const LyapunovData& ld, const char* op) {
  require(ld.kind == LyapunovKind::kL3 || ld.kind == LyapunovKind::kL4, op,
          "ergodicity criteria need L3 or L4 data");
  require(ld.behavior != RhoBehavior::kVanishesAtZero &&
              ld.behavior != RhoBehavior::kBlowsUpAtZero,
          op, "rho behavior must describe the limit at infinity");
}

CriteriaReport single_tail(const QMatrix& q, std::string label,
                           const LyapunovData& ld, std::string theorem) {
  CriteriaReport report;
  report.theorem = std::move(theorem);
  report.cells.push_back(certify(std::move(label), q, ld));
  if (negative(report.cells.front())) {
    if (ld.behavior == RhoBehavior::kBlowsUpAtInfinity) {
      report.verdict = ergodic_verdict(ld);
    } else if (ld.behavior == RhoBehavior::kVanishesAtInfinity) {
      report.verdict = Verdict::kTransient;
    }
  }
  return report;
}

std::optional<double> power_pair_exponent(const HybridModel& m, double& p,
                                          double& q) {
  const auto* drift = std::get_if<PowerSgnDrift>(&m.drift());
  const auto* diffusion = std::get_if<PowerDiffusion>(&m.diffusion());
  if (drift == nullptr || diffusion == nullptr) return std::nullopt;
  p = drift->power;
  q = diffusion->power;
  return 2.0 * q - 1.0 - p;
}

}  // namespace

std::string_view to_string(LyapunovKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::string_view to_string(RhoBehavior behavior) {
  for (const auto& [b, name] : kBehaviorNames) {
    if (b == behavior) return name;
  }
  return "?";
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kAsymptoticallyStable:
      return "asymptotically-stable-in-probability";
    case Verdict::kUnstable:
      return "unstable-in-probability";
    case Verdict::kErgodic:
      return "ergodic";
    case Verdict::kExponentiallyErgodic:
      return "exponentially-ergodic";
    case Verdict::kTransient:
      return "transient";
    case Verdict::kInconclusive:
      return "inconclusive";
  }
  return "?";
}

std::optional<LyapunovKind> parse_lyapunov_kind(std::string_view text) {
  for (const auto& [k, name] : kKindNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

std::optional<RhoBehavior> parse_rho_behavior(std::string_view text) {
  for (const auto& [b, name] : kBehaviorNames) {
    if (name == text) return b;
  }
  return std::nullopt;
}

std::optional<DerivedBeta> derive_beta(const HybridModel& m) {
  double p = 0.0;
  double q = 0.0;
  if (const auto gap = power_pair_exponent(m, p, q)) {
    const auto& b = std::get<PowerSgnDrift>(m.drift()).b;
    const auto& sigma = std::get<PowerDiffusion>(m.diffusion()).sigma;
    if (std::abs(*gap) <= 1e-12) {
      return DerivedBeta{b - 0.5 * sigma.cwiseAbs2(), BetaRegion::kNearZero,
                         "beta_i = b_i - sigma_i^2/2 (p = 2q - 1)"};
    }
    return DerivedBeta{b, BetaRegion::kNearZero, "beta_i = b_i (p < 2q - 1)"};
  }
  const auto* linear = std::get_if<LinearDrift>(&m.drift());
  if (linear != nullptr &&
      std::holds_alternative<OUCutoffDiffusion>(m.diffusion())) {
    BetaVector beta(m.regimes());
    for (int i = 0; i < m.regimes(); ++i) beta(i) = linear->coefficient[i](0, 0);
    return DerivedBeta{
        beta, BetaRegion::kNearInfinity,
        "mu_i identified with the linear drift coefficient b_i; "
        "L rho = b_i rho for rho = |x| and |x| >= 1"};
  }
  return std::nullopt;
}

std::optional<DerivedBeta> derive_inverse_power_beta(const HybridModel& m,
                                                     double gamma) {
  if (!(gamma > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, kModule,
                "derive_inverse_power_beta", "gamma must be positive");
  }
  double p = 0.0;
  double q = 0.0;
  if (const auto gap = power_pair_exponent(m, p, q)) {
    const auto& b = std::get<PowerSgnDrift>(m.drift()).b;
    const auto& sigma = std::get<PowerDiffusion>(m.diffusion()).sigma;
    if (std::abs(*gap) <= 1e-12) {
      BetaVector beta =
          gamma * (-b + 0.5 * (gamma + 1.0) * sigma.cwiseAbs2());
      return DerivedBeta{std::move(beta), BetaRegion::kNearZero,
                         "rho = |x|^-gamma, h = |x|^(p-1-gamma): "
                         "beta_i = gamma (-b_i + sigma_i^2 (gamma+1)/2)"};
    }
    return DerivedBeta{-gamma * b, BetaRegion::kNearZero,
                       "rho = |x|^-gamma: beta_i = -gamma b_i (p < 2q - 1)"};
  }
  const auto* linear = std::get_if<LinearDrift>(&m.drift());
  const auto* ou = std::get_if<OUCutoffDiffusion>(&m.diffusion());
  if (linear != nullptr && ou != nullptr) {
    BetaVector beta(m.regimes());
    for (int i = 0; i < m.regimes(); ++i) {
      const double s = ou->sigma(i);
      beta(i) = -gamma * linear->coefficient[i](0, 0) +
                0.5 * s * s * gamma * (gamma + 1.0);
    }
    return DerivedBeta{std::move(beta), BetaRegion::kNearInfinity,
                       "rho = |x|^-gamma on |x| >= 1: "
                       "beta_i = -gamma b_i + sigma_i^2 gamma (gamma+1)/2"};
  }
  return std::nullopt;
}

CriteriaReport stability_at_zero(const RadialThresholdQ& sw,
                                 const LyapunovData& ld) {
  require(near_zero_data(ld), "stability_at_zero",
          "stability criteria need L1 or L2 data with behavior at 0");
  CriteriaReport report;
  report.theorem = "radial stability at 0 (innermost cell)";
  report.cells.push_back(certify("Q(1)", sw.cells().front(), ld));
  if (negative(report.cells.front())) {
    report.verdict = ld.behavior == RhoBehavior::kVanishesAtZero
                         ? Verdict::kAsymptoticallyStable
                         : Verdict::kUnstable;
  }
  report.notes.emplace_back(kEllipticityNote);
  return report;
}

CriteriaReport stability_two_sided(const SignedThresholdQ& sw,
                                   const LyapunovData& ld) {
  constexpr const char* op = "stability_two_sided";
  require(near_zero_data(ld), op,
          "stability criteria need L1 or L2 data with behavior at 0");
  const auto& cuts = sw.cuts();
  const auto zero = std::find(cuts.begin(), cuts.end(), 0.0);
  if (zero == cuts.end()) {
    throw Error(ErrorKind::NoCutAtZero, kModule, op,
                "two-sided stability needs a cut point at 0");
  }
  const auto k = static_cast<std::size_t>(zero - cuts.begin());
  CriteriaReport report;
  report.theorem = "two-sided stability at 0 (cells adjacent to 0)";
  report.cells.push_back(certify("Q(1) right of 0", sw.cells()[k + 1], ld));
  report.cells.push_back(certify("Q~(1) left of 0", sw.cells()[k], ld));
  const bool right = negative(report.cells[0]);
  const bool left = negative(report.cells[1]);
  if (ld.behavior == RhoBehavior::kVanishesAtZero && right && left) {
    report.verdict = Verdict::kAsymptoticallyStable;
  } else if (ld.behavior == RhoBehavior::kBlowsUpAtZero && (right || left)) {
    report.verdict = Verdict::kUnstable;
  }
  report.notes.emplace_back(kEllipticityNote);
  return report;
}

CriteriaReport ergodicity_radial(const RadialThresholdQ& sw,
                                 const LyapunovData& ld) {
  require_far_data(ld, "ergodicity_radial");
  require(ld.behavior == RhoBehavior::kBlowsUpAtInfinity ||
              ld.behavior == RhoBehavior::kVanishesAtInfinity,
          "ergodicity_radial", "one-sided tails need a radial rho behavior");
  return single_tail(sw.cells().back(), "Q(m+1) outermost", ld,
                     "radial ergodicity (outermost cell)");
}

CriteriaReport ergodicity_signed(const SignedThresholdQ& sw,
                                 const LyapunovData& ld) {
  require_far_data(ld, "ergodicity_signed");
  CriteriaReport report;
  report.theorem = "two-tailed ergodicity (tail cells)";
  report.cells.push_back(certify("Q(0) left tail", sw.cells().front(), ld));
  report.cells.push_back(certify("Q(m+1) right tail", sw.cells().back(), ld));
  const bool left = negative(report.cells[0]);
  const bool right = negative(report.cells[1]);
  switch (ld.behavior) {
    case RhoBehavior::kBlowsUpAtInfinity:
      if (left && right) report.verdict = ergodic_verdict(ld);
      break;
    case RhoBehavior::kVanishesAtInfinity:
      if (left || right) report.verdict = Verdict::kTransient;
      break;
    case RhoBehavior::kVanishesAtPlusInfinity:
      if (right) report.verdict = Verdict::kTransient;
      break;
    case RhoBehavior::kVanishesAtMinusInfinity:
      if (left) report.verdict = Verdict::kTransient;
      break;
    default:
      break;
  }
  return report;
}

CriteriaReport ergodicity_limit(const SmoothQ& sq, const LyapunovData& ld) {
  constexpr const char* op = "ergodicity_limit";
  require_far_data(ld, op);
  require(ld.behavior == RhoBehavior::kBlowsUpAtInfinity ||
              ld.behavior == RhoBehavior::kVanishesAtInfinity,
          op, "the limit criterion needs a radial rho behavior");
  if (sq.is_signed() && !sq.modulation().isZero(0.0)) {
    throw Error(ErrorKind::NoLimit, kModule, op,
                "rates approach different matrices at +inf and -inf");
  }
  // Every supported shape tends to shape_max() = 1 along |x| -> inf.
  const QMatrix limit = sq.is_signed()
                            ? sq.base()
                            : QMatrix::validate(sq.base().rates() +
                                                sq.shape_max() * sq.modulation());
  CriteriaReport report =
      single_tail(limit, "Q limit at infinity", ld, "limit-matrix ergodicity");
  report.notes.emplace_back("limit matrix computed analytically as A + B");
  return report;
}

CriteriaReport classify(const HybridModel& m, const LyapunovData& ld) {
  const bool near_zero =
      ld.kind == LyapunovKind::kL1 || ld.kind == LyapunovKind::kL2;
  const SwitchingSpec& sw = m.switching();
  if (near_zero) {
    if (const auto* r = std::get_if<RadialThresholdQ>(&sw)) {
      return stability_at_zero(*r, ld);
    }
    if (const auto* s = std::get_if<SignedThresholdQ>(&sw)) {
      return stability_two_sided(*s, ld);
    }
    throw Error(ErrorKind::InvalidArgument, kModule, "classify",
                "stability criteria need threshold switching");
  }
  if (const auto* r = std::get_if<RadialThresholdQ>(&sw)) {
    return ergodicity_radial(*r, ld);
  }
  if (const auto* s = std::get_if<SignedThresholdQ>(&sw)) {
    return ergodicity_signed(*s, ld);
  }
  return ergodicity_limit(std::get<SmoothQ>(sw), ld);
}

}  // namespace hybridsw
