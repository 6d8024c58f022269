#include "hybridsw/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hybridsw/error.hpp"

namespace hybridsw {
namespace {

constexpr const char* kModule = "threshold";

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_cells(const std::vector<double>& points,
                 const std::vector<QMatrix>& cells, const char* what) {
  if (cells.size() != points.size() + 1) {
    throw Error(ErrorKind::InvalidArgument, kModule, what,
                "need exactly one more cell than thresholds");
  }
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (!std::isfinite(points[k]) || (k > 0 && !(points[k] > points[k - 1]))) {
      throw Error(ErrorKind::InvalidArgument, kModule, what,
                  "thresholds must be finite and strictly increasing");
    }
  }
  const int n = cells.front().size();
  for (const QMatrix& cell : cells) {
    if (cell.size() != n) {
      throw Error(ErrorKind::InvalidArgument, kModule, what,
                  "all cells must have the same regime count");
    }
    if (!is_irreducible(cell)) {
      throw Error(ErrorKind::NotIrreducible, kModule, what,
                  "every cell must be irreducible");
    }
  }
}

// Scalar coordinate the rates depend on: x_1 on the signed axis, |x| on the
// radial one.
bool uses_signed_axis(const SwitchingSpec& a, const SwitchingSpec& b) {
  return is_signed(a) || is_signed(b);
}

Eigen::MatrixXd rates_on_axis(const SwitchingSpec& spec, double u) {
  Eigen::VectorXd x(1);
  x(0) = u;
  Eigen::MatrixXd out(regimes(spec), regimes(spec));
  evaluate_into(spec, x, out);
  return out;
}

// Rates in the tail u -> +inf (direction > 0) or u -> -inf.
Eigen::MatrixXd limit_rates(const SwitchingSpec& spec, int direction) {
  return std::visit(
      Overloaded{
          [](const RadialThresholdQ& r) -> Eigen::MatrixXd {
            return r.cells().back().rates();
          },
          [&](const SignedThresholdQ& s) -> Eigen::MatrixXd {
            return direction > 0 ? s.cells().back().rates()
                                 : s.cells().front().rates();
          },
          [&](const SmoothQ& m) -> Eigen::MatrixXd {
            const double lim = (m.is_signed() && direction < 0) ? -1.0 : 1.0;
            Eigen::MatrixXd out;
            m.rates_for_shape(lim, out);
            return out;
          }},
      spec);
}

void collect_breakpoints(const SwitchingSpec& spec, bool signed_axis,
                         std::vector<double>& out) {
  std::visit(Overloaded{[&](const RadialThresholdQ& r) {
                          for (double a : r.thresholds()) {
                            out.push_back(a);
                            if (signed_axis) out.push_back(-a);
                          }
                        },
                        [&](const SignedThresholdQ& s) {
                          out.insert(out.end(), s.cuts().begin(),
                                     s.cuts().end());
                        },
                        [](const SmoothQ&) {}},
             spec);
}

const SmoothQ* as_smooth(const SwitchingSpec& spec) {
  return std::get_if<SmoothQ>(&spec);
}

}  // namespace

// ---------------------------------------------------------------------------

RadialThresholdQ::RadialThresholdQ(std::vector<double> thresholds,
                                   std::vector<QMatrix> cells)
    : thresholds_(std::move(thresholds)), cells_(std::move(cells)) {
  check_cells(thresholds_, cells_, "RadialThresholdQ");
  if (!thresholds_.empty() && !(thresholds_.front() > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, kModule, "RadialThresholdQ",
                "radial thresholds must be positive");
  }
}

int RadialThresholdQ::cell_index(double radius) const {
  return static_cast<int>(
      std::upper_bound(thresholds_.begin(), thresholds_.end(), radius) -
      thresholds_.begin());
}

SignedThresholdQ::SignedThresholdQ(std::vector<double> cuts,
                                   std::vector<QMatrix> cells)
    : cuts_(std::move(cuts)), cells_(std::move(cells)) {
  check_cells(cuts_, cells_, "SignedThresholdQ");
}

int SignedThresholdQ::cell_index(double x) const {
  return static_cast<int>(std::upper_bound(cuts_.begin(), cuts_.end(), x) -
                          cuts_.begin());
}

SmoothQ::SmoothQ(QMatrix base, const Eigen::MatrixXd& modulation,
                 SmoothShape shape)
    : base_(std::move(base)), modulation_(modulation), shape_(shape) {
  constexpr const char* op = "SmoothQ";
  const int n = base_.size();
  if (modulation_.rows() != n || modulation_.cols() != n) {
    throw Error(ErrorKind::NonSquare, kModule, op,
                "modulation must match the base matrix");
  }
  if (!modulation_.allFinite()) {
    throw Error(ErrorKind::NonFinite, kModule, op,
                "modulation has non-finite entries");
  }
  if (!is_irreducible(base_)) {
    throw Error(ErrorKind::NotIrreducible, kModule, op,
                "base matrix must be irreducible");
  }
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (std::abs(modulation_(i, j)) > base_.rate(i, j)) {
        throw Error(ErrorKind::NegativeOffDiagonal, kModule, op,
                    "|B_ij| must not exceed A_ij");
      }
      off += modulation_(i, j);
    }
    if (modulation_(i, i) != 0.0 &&
        std::abs(modulation_(i, i) + off) > kRowSumTolerance) {
      throw Error(ErrorKind::NonConservative, kModule, op,
                  "modulation row " + std::to_string(i + 1) +
                      " does not sum to zero");
    }
    modulation_(i, i) = -off;
  }
}

double SmoothQ::shape_of_axis(double u) const {
  switch (shape_) {
    case SmoothShape::kTanhSigned: return std::tanh(u);
    case SmoothShape::kTanhRadius: return std::tanh(std::abs(u));
    case SmoothShape::kSigmoidRadius:
      return 2.0 / (1.0 + std::exp(-std::abs(u))) - 1.0;
  }
  return 0.0;
}

double SmoothQ::shape_value(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return shape_of_axis(is_signed() ? x(0) : x.norm());
}

double SmoothQ::shape_slope() const {
  return shape_ == SmoothShape::kSigmoidRadius ? 0.5 : 1.0;
}

double SmoothQ::max_modulation() const {
  double out = 0.0;
  for (int i = 0; i < regimes(); ++i) {
    for (int j = 0; j < regimes(); ++j) {
      if (i != j) out = std::max(out, std::abs(modulation_(i, j)));
    }
  }
  return out;
}

double SmoothQ::lipschitz() const { return max_modulation() * shape_slope(); }

// ---------------------------------------------------------------------------

int regimes(const SwitchingSpec& spec) {
  return std::visit([](const auto& s) { return s.regimes(); }, spec);
}

bool is_signed(const SwitchingSpec& spec) {
  return std::visit(Overloaded{[](const RadialThresholdQ&) { return false; },
                               [](const SignedThresholdQ&) { return true; },
                               [](const SmoothQ& m) { return m.is_signed(); }},
                    spec);
}

void evaluate_into(const SwitchingSpec& spec,
                   const Eigen::Ref<const Eigen::VectorXd>& x,
                   Eigen::MatrixXd& out) {
  std::visit(
      Overloaded{[&](const RadialThresholdQ& r) {
                   out = r.cell_at(x.norm()).rates();
                 },
                 [&](const SignedThresholdQ& s) {
                   out = s.cell_at(x(0)).rates();
                 },
                 [&](const SmoothQ& m) {
                   m.rates_for_shape(m.shape_value(x), out);
                 }},
      spec);
}

QMatrix evaluate(const SwitchingSpec& spec, const Eigen::VectorXd& x) {
  return std::visit(
      Overloaded{[&](const RadialThresholdQ& r) { return r.cell_at(x.norm()); },
                 [&](const SignedThresholdQ& s) { return s.cell_at(x(0)); },
                 [&](const SmoothQ& m) {
                   Eigen::MatrixXd out;
                   m.rates_for_shape(m.shape_value(x), out);
                   return QMatrix::validate(out);
                 }},
      spec);
}

double rate_bound(const SwitchingSpec& spec) {
  const auto over_cells = [](const std::vector<QMatrix>& cells) {
    double k = 0.0;
    for (const QMatrix& c : cells) k = std::max(k, c.max_exit_rate());
    return k;
  };
  return std::visit(
      Overloaded{
          [&](const RadialThresholdQ& r) { return over_cells(r.cells()); },
          [&](const SignedThresholdQ& s) { return over_cells(s.cells()); },
          [](const SmoothQ& m) {
            // Exit rate A_i + B_i s is affine in s, so its sup sits at an end
            // of the shape range.
            double k = 0.0;
            for (int i = 0; i < m.regimes(); ++i) {
              const double a = m.base().exit_rate(i);
              const double b = -m.modulation()(i, i);
              k = std::max({k, a + b * m.shape_min(), a + b * m.shape_max()});
            }
            return k;
          }},
      spec);
}

double l1_row_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double out = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j != i) row += std::abs(a(i, j) - b(i, j));
    }
    out = std::max(out, row);
  }
  return out;
}

// ---------------------------------------------------------------------------

GammaLayout::GammaLayout(const Eigen::MatrixXd& rates, double bound) {
  assign(rates, bound);
}

void GammaLayout::assign(const Eigen::MatrixXd& rates, double bound) {
  const int n = static_cast<int>(rates.rows());
  if (!(bound > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, kModule, "gamma_layout",
                "rate bound must be positive");
  }
  regimes_ = n;
  bound_ = bound;
  lengths_.resize(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double q = (i == j) ? 0.0 : rates(i, j);
      if (q > bound) {
        throw Error(ErrorKind::RateExceedsBound, kModule, "gamma_layout",
                    "rate exceeds the layout bound K");
      }
      lengths_[i * n + j] = q;
    }
  }
}

int GammaLayout::slot(int regimes, int i, int j) {
  // 1-based source n = i + 1 and target k = j + 1:
  //   k > n: 2(n-1)N + (k-n-1),   k < n: 2(n-1)N - (n-k).
  return j > i ? 2 * i * regimes + (j - i - 1) : 2 * i * regimes - (i - j);
}

int GammaLayout::block_begin(int i) const {
  return i == 0 ? 0 : (2 * i - 1) * regimes_;
}

int GammaLayout::block_end(int i) const {
  return i == 0 ? regimes_ : (2 * i + 1) * regimes_;
}

GammaLayout gamma_layout(const QMatrix& q, double bound) {
  return GammaLayout(q.rates(), bound);
}

int theta(const GammaLayout& layout, int i, double z) {
  for (int j = 0; j < layout.regimes(); ++j) {
    if (j == i) continue;
    const double len = layout.length(i, j);
    if (len <= 0.0) continue;
    const double start = layout.start(i, j);
    if (z >= start && z < start + len) return j - i;
  }
  return 0;
}

double symm_diff(const GammaLayout& a, const GammaLayout& b, int i, int j) {
  if (a.regimes() != b.regimes() || a.bound() != b.bound()) {
    throw Error(ErrorKind::LayoutMismatch, kModule, "symm_diff",
                "layouts must share N and K");
  }
  if (i == j) return 0.0;
  // Shared N and K put both intervals on the same start, so they are nested.
  return std::abs(a.length(i, j) - b.length(i, j));
}

// ---------------------------------------------------------------------------

double theta_distance(const SwitchingSpec& a, const SwitchingSpec& b,
                      double radius, double step) {
  constexpr const char* op = "theta_distance";
  if (regimes(a) != regimes(b)) {
    throw Error(ErrorKind::InvalidArgument, kModule, op,
                "specs have different regime counts");
  }
  if (!(step > 0.0) || !(radius > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, kModule, op,
                "radius and grid step must be positive");
  }
  const int n = regimes(a);
  const bool signed_axis = uses_signed_axis(a, b);
  std::vector<double> points;
  collect_breakpoints(a, signed_axis, points);
  collect_breakpoints(b, signed_axis, points);
  for (double p : points) {
    if (!(std::abs(p) <= radius)) {
      throw Error(ErrorKind::InvalidArgument, kModule, op,
                  "radius must not be below any threshold");
    }
  }

  const SmoothQ* sa = as_smooth(a);
  const SmoothQ* sb = as_smooth(b);
  const double lo = signed_axis ? -radius : 0.0;
  const double hi = radius;
  if (sa != nullptr || sb != nullptr) {
    const auto cells = static_cast<long>(std::ceil((hi - lo) / step));
    for (long k = 0; k < cells; ++k) points.push_back(lo + k * step);
  }
  points.push_back(lo);
  points.push_back(hi);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  const auto gap = [&](double u) {
    return l1_row_distance(rates_on_axis(a, u), rates_on_axis(b, u));
  };
  double slope = 0.0;
  if (sa != nullptr) slope += (n - 1) * sa->lipschitz();
  if (sb != nullptr) slope += (n - 1) * sb->lipschitz();

  double sup = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    sup = std::max(sup, gap(points[k]));
    if (k + 1 < points.size()) {
      const double width = points[k + 1] - points[k];
      const double mid = points[k] + 0.5 * width;
      sup = std::max(sup, gap(mid) + slope * 0.5 * width);
    }
  }

  // Tails. Past R every threshold spec is constant (probed strictly outside
  // all breakpoints) and every shape is monotone towards its limit; with one
  // smooth side the row-l1 gap is convex in the shape value, so the two ends
  // of the shape range bound it.
  const auto tail = [&](int direction, double edge) {
    const double probe = direction > 0 ? edge : edge - 1.0;
    const auto side = [&](const SwitchingSpec& s, const SmoothQ* m,
                          bool at_limit) -> Eigen::MatrixXd {
      if (m == nullptr) return rates_on_axis(s, probe);
      return at_limit ? limit_rates(s, direction) : rates_on_axis(s, edge);
    };
    double out = l1_row_distance(side(a, sa, false), side(b, sb, false));
    if (sa != nullptr && sb != nullptr) {
      for (const SmoothQ* s : {sa, sb}) {
        const double lim = (s->is_signed() && direction < 0) ? -1.0 : 1.0;
        out += (n - 1) * s->max_modulation() *
               std::abs(lim - s->shape_of_axis(edge));
      }
    } else if (sa != nullptr || sb != nullptr) {
      out = std::max(out,
                     l1_row_distance(side(a, sa, true), side(b, sb, true)));
    }
    return out;
  };
  sup = std::max(sup, tail(+1, hi));
  if (signed_axis) sup = std::max(sup, tail(-1, lo));
  return sup;
}

SwitchingSpec quantize(const SmoothQ& smooth, int levels, double radius) {
  constexpr const char* op = "quantize";
  if (levels < 1 || !(radius > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, kModule, op,
                "levels must be >= 1 and radius positive");
  }
  const auto cell_at = [&](double u) {
    Eigen::MatrixXd rates;
    smooth.rates_for_shape(smooth.shape_of_axis(u), rates);
    QMatrix q = QMatrix::validate(rates);
    if (!is_irreducible(q)) {
      throw Error(ErrorKind::QuantizationBreaksIrreducibility, kModule, op,
                  "quantized cell is reducible");
    }
    return q;
  };

  std::vector<double> points;
  std::vector<QMatrix> cells;
  if (smooth.is_signed()) {
    const double width = 2.0 * radius / levels;
    cells.push_back(cell_at(-radius));
    for (int k = 0; k <= levels; ++k) points.push_back(-radius + k * width);
    points.back() = radius;
    for (int k = 0; k < levels; ++k) {
      cells.push_back(cell_at(-radius + (k + 0.5) * width));
    }
    cells.push_back(cell_at(radius));
    return SignedThresholdQ(std::move(points), std::move(cells));
  }
  const double width = radius / levels;
  for (int k = 1; k <= levels; ++k) points.push_back(k * width);
  points.back() = radius;
  for (int k = 0; k < levels; ++k) cells.push_back(cell_at((k + 0.5) * width));
  cells.push_back(cell_at(radius));
  return RadialThresholdQ(std::move(points), std::move(cells));
}

}  // namespace hybridsw
