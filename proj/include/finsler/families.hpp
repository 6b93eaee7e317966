#pragma once
// The metric families: descriptors with validation and domain data, the
// z-coordinate evaluators psi(z1^2, z2) shared by every scalar algebra
// (double, dual, jets, jets-over-duals), the coefficient pairs of the
// two-parameter families, and the quadrature-defined integral form.
//
// Conventions: p always denotes z1^2 (so every family is smooth across
// z1 = 0), z2 = <x,y>/|y|, and F(x,y) = |y| * psi(p, z2).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "finsler/curve.hpp"
#include "finsler/geometry.hpp"
#include "finsler/jet.hpp"

namespace finsler {

// ---------------------------------------------------------------------------
// Scalar-algebra helpers shared by the templated evaluators.
// ---------------------------------------------------------------------------

inline double scalar_value(double x) { return x; }
inline double scalar_value(const Dual& x) { return x.val; }
template <typename S>
double scalar_value(const Jet<S>& x) {
  return scalar_value(x.value());
}

inline double like(double, double v) { return v; }
inline Dual like(const Dual&, double v) { return Dual(v); }
template <typename S>
Jet<S> like(const Jet<S>& proto, double v) {
  return Jet<S>::constant(proto.layout(), S(v));
}

// ---------------------------------------------------------------------------
// Family descriptors.
// ---------------------------------------------------------------------------

enum class FamilyId {
  euclidean,
  berwald,
  projective_spherical,
  bryant_classic,
  klein,
  funk,
  randers_k_neg1,
  bryant_type,
  neg_pair,
  integral_form,
};

inline const char* family_name(FamilyId id) {
  switch (id) {
    case FamilyId::euclidean: return "euclidean";
    case FamilyId::berwald: return "berwald";
    case FamilyId::projective_spherical: return "projective_spherical";
    case FamilyId::bryant_classic: return "bryant_classic";
    case FamilyId::klein: return "klein";
    case FamilyId::funk: return "funk";
    case FamilyId::randers_k_neg1: return "randers_k_neg1";
    case FamilyId::bryant_type: return "bryant_type";
    case FamilyId::neg_pair: return "neg_pair";
    case FamilyId::integral_form: return "integral_form";
  }
  return "unknown";
}

struct FamilyDescriptor {
  FamilyId id = FamilyId::euclidean;
  int n = 3;            // ambient dimension
  double c = 1.0;       // berwald, klein, randers_k_neg1
  double alpha = 0.0;   // bryant_classic
  double d1 = 0.0;      // bryant_type, neg_pair
  double d2 = 0.0;      // bryant_type, neg_pair
  int branch_sign = 1;  // berwald, randers_k_neg1, bryant_type, neg_pair
  SmoothCurve f;        // integral_form integrand
  SmoothCurve g;        // integral_form linear-term factor

  static FamilyDescriptor euclidean(int n = 3) { return make(FamilyId::euclidean, n); }
  static FamilyDescriptor berwald(double c, int sign = 1, int n = 3) {
    FamilyDescriptor d = make(FamilyId::berwald, n);
    d.c = c;
    d.branch_sign = sign;
    return d;
  }
  static FamilyDescriptor projective_spherical(int n = 3) {
    return make(FamilyId::projective_spherical, n);
  }
  static FamilyDescriptor bryant_classic(double alpha, int n = 3) {
    FamilyDescriptor d = make(FamilyId::bryant_classic, n);
    d.alpha = alpha;
    return d;
  }
  static FamilyDescriptor klein(double c, int n = 3) {
    FamilyDescriptor d = make(FamilyId::klein, n);
    d.c = c;
    return d;
  }
  static FamilyDescriptor funk(int n = 3) { return make(FamilyId::funk, n); }
  static FamilyDescriptor randers_k_neg1(double c, int sign = 1, int n = 3) {
    FamilyDescriptor d = make(FamilyId::randers_k_neg1, n);
    d.c = c;
    d.branch_sign = sign;
    return d;
  }
  static FamilyDescriptor bryant_type(double d1, double d2, int sign = 1, int n = 3) {
    FamilyDescriptor d = make(FamilyId::bryant_type, n);
    d.d1 = d1;
    d.d2 = d2;
    d.branch_sign = sign;
    return d;
  }
  static FamilyDescriptor neg_pair(double d1, double d2, int sign = 1, int n = 3) {
    FamilyDescriptor d = make(FamilyId::neg_pair, n);
    d.d1 = d1;
    d.d2 = d2;
    d.branch_sign = sign;
    return d;
  }
  static FamilyDescriptor integral_form(SmoothCurve f, SmoothCurve g, int n = 3) {
    FamilyDescriptor d = make(FamilyId::integral_form, n);
    d.f = std::move(f);
    d.g = std::move(g);
    return d;
  }

  std::string name() const { return family_name(id); }

  void validate() const {
    if (n < 2) throw std::invalid_argument("dimension must be at least 2");
    switch (id) {
      case FamilyId::berwald:
      case FamilyId::klein:
      case FamilyId::randers_k_neg1:
        if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
        break;
      case FamilyId::bryant_classic:
        if (!(alpha >= 0.0 && alpha < 1.5707963267948966))
          throw std::invalid_argument("alpha must be in [0, pi/2)");
        break;
      case FamilyId::bryant_type:
        if (!(d1 > 0.0)) throw std::invalid_argument("d1 must be positive");
        break;
      case FamilyId::neg_pair:
        if (!(d1 > 0.0 && d2 > d1))
          throw std::invalid_argument("neg_pair requires d2 > d1 > 0");
        break;
      case FamilyId::integral_form: {
        if (!f.valid())
          throw std::invalid_argument("integral form requires an integrand curve");
        if (!f.bounded())
          throw std::invalid_argument("integrand curve must be bounded");
        // Differentiation under the integral sign is only exact when the
        // integrand joins its constant tails smoothly; a sloped end creates
        // moving-boundary terms the jets would silently miss.
        const auto& bp = f.breakpoints();
        if (!bp.empty()) {
          const double span = bp.back() - bp.front();
          for (double t : {bp.front() + 1e-9 * span, bp.back() - 1e-9 * span}) {
            const auto tc = f.taylor(t, 3);
            const double scale = 1.0 + std::fabs(tc[0]);
            if (std::fabs(tc[1]) > 1e-10 * scale ||
                std::fabs(tc[2]) > 1e-10 * scale)
              throw std::invalid_argument(
                  "integrand curve must flatten at its ends");
          }
        }
        if (!g.valid())
          throw std::invalid_argument("integral form requires a linear-term curve");
        break;
      }
      default:
        break;
    }
    if (branch_sign != 1 && branch_sign != -1)
      throw std::invalid_argument("sign must be +1 or -1");
  }

  bool has_lambda() const { return id != FamilyId::integral_form; }

  double lambda() const {
    switch (id) {
      case FamilyId::euclidean:
      case FamilyId::berwald: return 0.0;
      case FamilyId::projective_spherical:
      case FamilyId::bryant_classic:
      case FamilyId::bryant_type: return 1.0;
      case FamilyId::klein:
      case FamilyId::randers_k_neg1:
      case FamilyId::neg_pair: return -1.0;
      case FamilyId::funk: return -0.25;
      case FamilyId::integral_form:
        throw std::logic_error("flag curvature is not pinned for integral-form metrics");
    }
    return 0.0;
  }

  std::optional<double> domain_radius() const {
    switch (id) {
      case FamilyId::berwald:
      case FamilyId::klein:
      case FamilyId::randers_k_neg1: return std::sqrt(c);
      case FamilyId::funk: return 1.0;
      case FamilyId::neg_pair: return std::sqrt(2.0 * (d2 - d1));
      default: return std::nullopt;
    }
  }

  // Radius used when drawing samples: the true radius for bounded domains, a
  // fixed window for unbounded ones.
  double sampling_radius() const {
    auto rad = domain_radius();
    return rad ? *rad : 1.5;
  }

  bool contains(const EvalPoint& pt) const {
    auto rad = domain_radius();
    return !rad || pt.r < *rad;
  }

  // Parameters that actually apply to this family, in fixed (alphabetical)
  // order for reporting.
  std::vector<std::pair<std::string, double>> params_list() const {
    std::vector<std::pair<std::string, double>> out;
    switch (id) {
      case FamilyId::berwald:
      case FamilyId::randers_k_neg1:
        out = {{"c", c}, {"sign", static_cast<double>(branch_sign)}};
        break;
      case FamilyId::klein:
        out = {{"c", c}};
        break;
      case FamilyId::bryant_classic:
        out = {{"alpha", alpha}};
        break;
      case FamilyId::bryant_type:
      case FamilyId::neg_pair:
        out = {{"d1", d1}, {"d2", d2}, {"sign", static_cast<double>(branch_sign)}};
        break;
      default:
        break;
    }
    return out;
  }

 private:
  static FamilyDescriptor make(FamilyId id, int n) {
    FamilyDescriptor d;
    d.id = id;
    d.n = n;
    return d;
  }
};

// ---------------------------------------------------------------------------
// Coefficient pairs of the two-parameter families, in cancellation-free form.
// With T = 2 d2 + p (positive-curvature type) resp. T = 2 d2 - p
// (negative-curvature pair) and S the outer square root, the identities
// c1^2 -+ c2^2 = T and c1 c2 = sign * d1 pick the stable expression for the
// smaller square.
// ---------------------------------------------------------------------------

template <typename X>
std::pair<X, X> bryant_type_coeffs_p(double d1, double d2, int sign, const X& p) {
  using std::sqrt;
  if (!(d1 > 0.0)) throw std::invalid_argument("d1 must be positive");
  const X T = 2.0 * d2 + p;
  const X S = sqrt(sqr(T) + 4.0 * d1 * d1);
  X c1sq, c2sq;
  if (scalar_value(T) >= 0.0) {
    c1sq = 0.5 * (T + S);
    c2sq = (2.0 * d1 * d1) / (T + S);
  } else {
    c1sq = (2.0 * d1 * d1) / (S - T);
    c2sq = 0.5 * (S - T);
  }
  return {sqrt(c1sq), static_cast<double>(sign) * sqrt(c2sq)};
}

template <typename X>
std::pair<X, X> neg_pair_coeffs_p(double d1, double d2, int sign, const X& p) {
  using std::sqrt;
  if (!(d1 > 0.0 && d2 > d1))
    throw std::invalid_argument("neg_pair requires d2 > d1 > 0");
  const X T = 2.0 * d2 - p;
  const X rad = sqr(T) - 4.0 * d1 * d1;
  if (scalar_value(rad) < 0.0)
    throw std::domain_error("coefficient pair undefined beyond the domain radius");
  const X S = sqrt(rad);
  const X c1sq = 0.5 * (T + S);
  const X c2sq = (2.0 * d1 * d1) / (T + S);
  return {sqrt(c1sq), static_cast<double>(sign) * sqrt(c2sq)};
}

inline std::pair<double, double> bryant_type_coefficients(double d1, double d2,
                                                          double z1,
                                                          int branch_sign) {
  return bryant_type_coeffs_p(d1, d2, branch_sign, z1 * z1);
}

inline std::pair<double, double> neg_pair_coefficients(double d1, double d2,
                                                       double z1,
                                                       int branch_sign) {
  return neg_pair_coeffs_p(d1, d2, branch_sign, z1 * z1);
}

// ---------------------------------------------------------------------------
// psi(p, z2) = F / |y| for every closed-form family, generic over the scalar
// algebra X (double, Dual, Jet<double>, Jet<Dual>).
// ---------------------------------------------------------------------------

template <typename X>
X psi_eval(const FamilyDescriptor& fam, const X& p, const X& z2) {
  using std::sqrt;
  using std::sin;
  using std::cos;
  const double sg = static_cast<double>(fam.branch_sign);
  switch (fam.id) {
    case FamilyId::euclidean:
      return like(p, 1.0);
    case FamilyId::berwald: {
      const X B = sqrt(fam.c - p);
      return 1.0 / (B * sqr(z2 + sg * B));
    }
    case FamilyId::projective_spherical:
      return sqrt(1.0 + p) / (1.0 + p + sqr(z2));
    case FamilyId::bryant_classic: {
      const double c2a = std::cos(2.0 * fam.alpha);
      const double s2a = std::sin(2.0 * fam.alpha);
      const X B = c2a + p;
      const X A = sqr(B) + s2a * s2a;
      const X C = s2a * z2;
      const X q = p + sqr(z2);
      const X D = sqr(q) + 2.0 * c2a * q + 1.0;
      const X CD = C / D;
      return sqrt((sqrt(A) + B) / (2.0 * D) + sqr(CD)) + CD;
    }
    case FamilyId::klein: {
      const X B = sqrt(fam.c - p);
      return B / (fam.c - p - sqr(z2));
    }
    case FamilyId::funk: {
      const X B = sqrt(1.0 - p);
      return (B + z2) / (1.0 - p - sqr(z2));
    }
    case FamilyId::randers_k_neg1: {
      const X B = sqrt(fam.c - p);
      return (B + sg * z2) / (2.0 * (fam.c - p - sqr(z2)));
    }
    case FamilyId::bryant_type: {
      auto [c1, c2] = bryant_type_coeffs_p(fam.d1, fam.d2, fam.branch_sign, p);
      return c1 / (sqr(c1) + sqr(z2 + c2));
    }
    case FamilyId::neg_pair: {
      auto [c1, c2] = neg_pair_coeffs_p(fam.d1, fam.d2, fam.branch_sign, p);
      return c1 / (sqr(c1) - sqr(z2 + c2));
    }
    case FamilyId::integral_form:
      throw std::logic_error("integral-form metric has no closed z-form");
  }
  throw std::logic_error("unreachable family id");
}

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature on jet-valued integrands.
// ---------------------------------------------------------------------------

namespace detail {

inline double jet_max_abs_diff(const JetD& a, const JetD& b) {
  double m = 0.0;
  for (int i = 0; i < a.layout().size(); ++i)
    m = std::max(m, std::fabs(a.coeff(i) - b.coeff(i)));
  return m;
}

template <typename F>
JetD simpson_rec(F& f, double a, double b, const JetD& fa, const JetD& fm,
                 const JetD& fb, const JetD& whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const JetD flm = f(lm), frm = f(rm);
  const JetD left = (fa + 4.0 * flm + fm) * ((m - a) / 6.0);
  const JetD right = (fm + 4.0 * frm + fb) * ((b - m) / 6.0);
  const JetD sum = left + right;
  if (jet_max_abs_diff(sum, whole) <= 15.0 * tol)
    return sum + (sum - whole) * (1.0 / 15.0);
  if (depth <= 0)
    throw std::runtime_error("quadrature failed to converge");
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
JetD adaptive_simpson_jet(F&& f, double a, double b, double tol, int max_depth) {
  const JetD fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const JetD whole = (fa + 4.0 * fm + fb) * ((b - a) / 6.0);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Metric evaluation.
// ---------------------------------------------------------------------------

struct MetricValue {
  double F = 0.0;
  JetD phi;          // jets in (r, u, v); variables 0,1,2
  JetD phi_tilde;    // jets in (z1, z2); variables 0,1 — closed-form families
  bool has_phi_tilde = false;
};

namespace detail {

// phi(r, u, v) = Integral_0^u f(v^2/s^2 - r^2) ds + g(r) v, assembled as a
// full (r, u, v) jet: the u-degree-0 block by quadrature of (r, v) jets, the
// u-degree >= 1 block from the jet of the u-derivative f(v^2/u^2 - r^2)
// (fundamental theorem of calculus), plus the g(r) v term.
inline JetD integral_phi_jets(const FamilyDescriptor& fam, const EvalPoint& pt,
                              int order) {
  const JetLayout& L3 = JetLayout::get(3, order);
  JetD phi(L3);

  const JetLayout& L2 = JetLayout::get(2, order);
  const JetD rj = JetD::variable(L2, 0, pt.r);
  const JetD vj = JetD::variable(L2, 1, pt.v);

  // Limit jet at s -> 0+.  The argument runs off to +infinity (v != 0), where
  // bounded curves are flat; for v = 0 the argument is frozen at -r^2, which
  // must lie in a flat region of f or the v-derivatives diverge.
  auto lower_limit_jet = [&]() -> JetD {
    if (std::fabs(pt.v) > 1e-12) {
      const double f_inf = fam.f(std::numeric_limits<double>::max());
      return JetD::constant(L2, f_inf);
    }
    const auto tc = fam.f.taylor(-pt.r * pt.r, std::min(order, 3));
    for (int k = 1; k <= order; ++k)
      if (std::fabs(tc[k]) > 1e-13)
        throw std::domain_error(
            "integral endpoint singular: integrand varies at its lower limit");
    return JetD::constant(L2, tc[0]);
  };

  // The integrand is only piecewise smooth: where the argument v^2/s^2 - r^2
  // crosses a breakpoint of f, the curve switches branch, and bisection
  // across the switch stalls (the error and the budget both halve per
  // level).  The argument is strictly decreasing in s for v != 0, so each
  // breakpoint pulls back to at most one abscissa.  Cut there, and evaluate
  // each piece on the single branch its interior lies in (selected by the
  // piece midpoint), so the piece is the restriction of one smooth function
  // and its endpoint samples are the correct one-sided limits.
  std::vector<double> cuts;
  if (std::fabs(pt.v) > 1e-12) {
    for (double tau : fam.f.breakpoints()) {
      const double den = tau + pt.r * pt.r;
      if (den <= 0.0) continue;
      cuts.push_back(std::fabs(pt.v) / std::sqrt(den));
    }
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> edges{0.0};
  for (double c : cuts)  // drop colliding cuts, never the interval between
    if (c > edges.back() + 1e-13 * pt.u && c < pt.u * (1.0 - 1e-13))
      edges.push_back(c);
  edges.push_back(pt.u);

  JetD block0(L2);
  const double piece_tol = 1e-11 / static_cast<double>(edges.size() - 1);
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double a = edges[k], b = edges[k + 1];
    const double s_mid = 0.5 * (a + b);
    const double branch_at = (pt.v * pt.v) / (s_mid * s_mid) - pt.r * pt.r;
    // With no cuts (v ~ 0), keep value-based branch lookup: the argument can
    // still sweep the whole curve on a vanishing neighborhood of s = 0, and
    // pinning one branch would extrapolate its polynomial absurdly far.
    const bool pin = edges.size() > 2;
    auto piece = [&](double s) -> JetD {
      if (s <= 0.0) return lower_limit_jet();
      const JetD arg = sqr(vj) * (1.0 / (s * s)) - sqr(rj);
      return pin ? fam.f.apply_on_branch(arg, branch_at) : fam.f.apply(arg);
    };
    block0 += detail::adaptive_simpson_jet(piece, a, b, piece_tol, 48);
  }
  for (int idx = 0; idx < L2.size(); ++idx) {
    const auto& e2 = L2.exponents(idx);
    JetLayout::Exponents e3{};
    e3[0] = e2[0];
    e3[2] = e2[1];
    phi.coeff(L3.index_of(e3)) += block0.coeff(idx);
  }

  if (order >= 1) {
    const JetLayout& L3m = JetLayout::get(3, order - 1);
    const JetD rr = JetD::variable(L3m, 0, pt.r);
    const JetD uu = JetD::variable(L3m, 1, pt.u);
    const JetD vv = JetD::variable(L3m, 2, pt.v);
    const JetD H = fam.f.apply(sqr(vv) / sqr(uu) - sqr(rr));
    for (int idx = 0; idx < L3m.size(); ++idx) {
      JetLayout::Exponents e3 = L3m.exponents(idx);
      e3[1] += 1;
      phi.coeff(L3.index_of(e3)) += H.coeff(idx) / static_cast<double>(e3[1]);
    }
  }

  const JetD rA = JetD::variable(L3, 0, pt.r);
  const JetD vA = JetD::variable(L3, 2, pt.v);
  phi += fam.g.apply(rA) * vA;
  return phi;
}

}  // namespace detail

inline MetricValue phi_eval(const FamilyDescriptor& fam, const EvalPoint& pt,
                            int order) {
  fam.validate();
  if (order < 0 || order > kMaxJetOrder)
    throw std::invalid_argument("jet order out of range");
  if (pt.dim() != fam.n)
    throw std::invalid_argument("point dimension does not match descriptor");
  if (!fam.contains(pt))
    throw std::domain_error("point outside metric domain");

  MetricValue mv;
  if (fam.id == FamilyId::integral_form) {
    mv.phi = detail::integral_phi_jets(fam, pt, order);
  } else {
    RuvJets ruv = lift_ruv(pt, order);
    const JetD z2r = ruv.v / ruv.u;
    const JetD pr = sqr(ruv.r) - sqr(z2r);
    mv.phi = ruv.u * psi_eval(fam, pr, z2r);
    ZJets zz = lift_z(pt, order);
    mv.phi_tilde = psi_eval(fam, sqr(zz.z1), zz.z2);
    mv.has_phi_tilde = true;
  }
  mv.F = mv.phi.value();
  if (!(mv.F > 0.0))
    throw std::domain_error("metric value not positive inside claimed domain");
  return mv;
}

// Plain metric value in ambient coordinates.
inline double metric_value(const FamilyDescriptor& fam,
                           std::span<const double> x,
                           std::span<const double> y) {
  return phi_eval(fam, invariants_from(x, y), 0).F;
}

// F evaluated on jets of the ambient coordinates themselves; the independent
// route for Hessians and sprays (never goes through the (r, u, v) jets).
// Integral-form metrics have no closed z-form, so they are rejected here.
template <typename S>
Jet<S> metric_ambient(const FamilyDescriptor& fam, const std::vector<Jet<S>>& x,
                      const std::vector<Jet<S>>& y) {
  fam.validate();
  if (fam.id == FamilyId::integral_form)
    throw std::invalid_argument(
        "ambient-coordinate jets are not available for integral-form metrics");
  if (x.size() != y.size() || x.empty())
    throw std::invalid_argument("ambient jets need matching x and y blocks");
  Jet<S> r2 = sqr(x[0]);
  Jet<S> u2 = sqr(y[0]);
  Jet<S> v = x[0] * y[0];
  for (std::size_t i = 1; i < x.size(); ++i) {
    r2 += sqr(x[i]);
    u2 += sqr(y[i]);
    v += x[i] * y[i];
  }
  const Jet<S> u = sqrt(u2);
  const Jet<S> z2 = v / u;
  const Jet<S> p = r2 - sqr(z2);
  return u * psi_eval(fam, p, z2);
}

// The ten standing parameter choices exercised throughout the verification
// suite (every closed family, both sign branches where they exist).
inline std::vector<FamilyDescriptor> canonical_families(int n = 3) {
  const double pi6 = 0.5235987755982988;
  return {FamilyDescriptor::berwald(1.0, +1, n),
          FamilyDescriptor::berwald(1.0, -1, n),
          FamilyDescriptor::projective_spherical(n),
          FamilyDescriptor::bryant_classic(pi6, n),
          FamilyDescriptor::klein(1.0, n),
          FamilyDescriptor::funk(n),
          FamilyDescriptor::randers_k_neg1(1.0, +1, n),
          FamilyDescriptor::randers_k_neg1(1.0, -1, n),
          FamilyDescriptor::bryant_type(1.0, 0.3, +1, n),
          FamilyDescriptor::neg_pair(0.1, 0.6, +1, n)};
}

// Deterministic interior sample respecting the family's domain.
inline std::vector<EvalPoint> sample_domain(const FamilyDescriptor& fam,
                                            int count, std::uint64_t seed,
                                            double z1_floor,
                                            double boundary_margin = 0.05) {
  fam.validate();
  const auto rad = fam.domain_radius();
  return sample_points(fam.n, fam.sampling_radius(), rad.has_value(), count,
                       seed, z1_floor, boundary_margin);
}

}  // namespace finsler
