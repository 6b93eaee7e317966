// Metric families: validation, closed-form values against independent
// ambient-coordinate formulas, coefficient identities, branch symmetry,
// homogeneity/rotation properties, and the quadrature-defined integral form.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "finsler/families.hpp"

using namespace finsler;

namespace {

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
double nrm(const std::vector<double>& a) { return std::sqrt(dotv(a, a)); }

// Literal ambient-coordinate formulas, written independently of the library's
// z-form evaluators, for cross-checking.
double berwald_example_form(const std::vector<double>& x,
                            const std::vector<double>& y) {
  const double y2 = dotv(y, y), x2 = dotv(x, x), xy = dotv(x, y);
  const double root = std::sqrt(y2 - (x2 * y2 - xy * xy));
  return (root + xy) * (root + xy) / ((1 - x2) * (1 - x2) * root);
}

double proj_spherical_form(const std::vector<double>& x,
                           const std::vector<double>& y) {
  const double y2 = dotv(y, y), x2 = dotv(x, x), xy = dotv(x, y);
  return std::sqrt(y2 + (x2 * y2 - xy * xy)) / (1 + x2);
}

double bryant_form(double alpha, const std::vector<double>& x,
                   const std::vector<double>& y) {
  const double y2 = dotv(y, y), x2 = dotv(x, x), xy = dotv(x, y);
  const double c2a = std::cos(2 * alpha), s2a = std::sin(2 * alpha);
  const double A = std::pow(c2a * y2 + (x2 * y2 - xy * xy), 2) +
                   std::pow(s2a * y2, 2);
  const double B = c2a * y2 + (x2 * y2 - xy * xy);
  const double C = s2a * xy;
  const double D = x2 * x2 + 2 * c2a * x2 + 1;
  return std::sqrt((std::sqrt(A) + B) / (2 * D) + (C / D) * (C / D)) + C / D;
}

double klein_form(double c, const std::vector<double>& x,
                  const std::vector<double>& y) {
  const double y2 = dotv(y, y), x2 = dotv(x, x), xy = dotv(x, y);
  return std::sqrt(c * y2 - (x2 * y2 - xy * xy)) / (c - x2);
}

double funk_form(const std::vector<double>& x, const std::vector<double>& y) {
  const double y2 = dotv(y, y), x2 = dotv(x, x), xy = dotv(x, y);
  return (std::sqrt(y2 - (x2 * y2 - xy * xy)) + xy) / (1 - x2);
}

double randers_form(double c, int sign, const std::vector<double>& x,
                    const std::vector<double>& y) {
  const double y2 = dotv(y, y), x2 = dotv(x, x), xy = dotv(x, y);
  return (std::sqrt(c * y2 - (x2 * y2 - xy * xy)) + sign * xy) /
         (2 * (c - x2));
}

std::vector<double> scaled(const std::vector<double>& v, double s) {
  std::vector<double> out(v);
  for (auto& o : out) o *= s;
  return out;
}

std::vector<FamilyDescriptor> closed_families() {
  return {
      FamilyDescriptor::euclidean(3),
      FamilyDescriptor::berwald(1.0, +1, 3),
      FamilyDescriptor::berwald(1.0, -1, 3),
      FamilyDescriptor::projective_spherical(3),
      FamilyDescriptor::bryant_classic(3.14159265358979 / 6, 3),
      FamilyDescriptor::klein(1.0, 3),
      FamilyDescriptor::funk(3),
      FamilyDescriptor::randers_k_neg1(1.0, +1, 3),
      FamilyDescriptor::randers_k_neg1(1.0, -1, 3),
      FamilyDescriptor::bryant_type(1.0, 0.3, +1, 3),
      FamilyDescriptor::neg_pair(0.1, 0.6, +1, 3),
  };
}

}  // namespace

TEST_CASE("descriptor validation messages") {
  REQUIRE_THROWS_WITH(FamilyDescriptor::klein(-1.0).validate(),
                      "c must be positive");
  REQUIRE_THROWS_WITH(FamilyDescriptor::berwald(0.0).validate(),
                      "c must be positive");
  REQUIRE_THROWS_WITH(FamilyDescriptor::randers_k_neg1(-2.0).validate(),
                      "c must be positive");
  REQUIRE_THROWS_WITH(FamilyDescriptor::neg_pair(0.6, 0.1).validate(),
                      "neg_pair requires d2 > d1 > 0");
  REQUIRE_THROWS_WITH(FamilyDescriptor::bryant_type(-1.0, 0.5).validate(),
                      "d1 must be positive");
  REQUIRE_THROWS_WITH(FamilyDescriptor::bryant_classic(2.0).validate(),
                      "alpha must be in [0, pi/2)");
  REQUIRE_THROWS_WITH(FamilyDescriptor::euclidean(1).validate(),
                      "dimension must be at least 2");
  FamilyDescriptor bad = FamilyDescriptor::berwald(1.0);
  bad.branch_sign = 2;
  REQUIRE_THROWS_WITH(bad.validate(), "sign must be +1 or -1");
  REQUIRE_THROWS_WITH(
      FamilyDescriptor::integral_form(SmoothCurve::affine(1, 1),
                                      SmoothCurve::constant(0))
          .validate(),
      "integrand curve must be bounded");
  REQUIRE_THROWS_WITH(
      FamilyDescriptor::integral_form(SmoothCurve(), SmoothCurve::constant(0))
          .validate(),
      "integral form requires an integrand curve");
}

TEST_CASE("curvature constants and domain radii") {
  REQUIRE(FamilyDescriptor::euclidean().lambda() == 0.0);
  REQUIRE(FamilyDescriptor::berwald(2.0).lambda() == 0.0);
  REQUIRE(FamilyDescriptor::projective_spherical().lambda() == 1.0);
  REQUIRE(FamilyDescriptor::bryant_classic(0.5).lambda() == 1.0);
  REQUIRE(FamilyDescriptor::bryant_type(1, 0.3).lambda() == 1.0);
  REQUIRE(FamilyDescriptor::klein(1.0).lambda() == -1.0);
  REQUIRE(FamilyDescriptor::randers_k_neg1(1.0).lambda() == -1.0);
  REQUIRE(FamilyDescriptor::neg_pair(0.1, 0.6).lambda() == -1.0);
  REQUIRE(FamilyDescriptor::funk().lambda() == -0.25);

  REQUIRE(!FamilyDescriptor::euclidean().domain_radius().has_value());
  REQUIRE(!FamilyDescriptor::bryant_type(1, 0.3).domain_radius().has_value());
  REQUIRE_THAT(*FamilyDescriptor::berwald(4.0).domain_radius(),
               Catch::Matchers::WithinRel(2.0, 1e-15));
  REQUIRE(*FamilyDescriptor::funk().domain_radius() == 1.0);
  REQUIRE_THAT(*FamilyDescriptor::neg_pair(0.1, 0.6).domain_radius(),
               Catch::Matchers::WithinRel(1.0, 1e-15));

  SmoothCurve one = SmoothCurve::constant(1.0);
  auto integral = FamilyDescriptor::integral_form(one, SmoothCurve::constant(0));
  REQUIRE(!integral.has_lambda());
  REQUIRE_THROWS_AS(integral.lambda(), std::logic_error);
}

TEST_CASE("values at the center of the ball families") {
  std::vector<double> x0{0.0, 0.0, 0.0};
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    auto y = rng.unit_vector(3);
    EvalPoint p = invariants_from(x0, y);
    REQUIRE_THAT(phi_eval(FamilyDescriptor::klein(1.0), p, 0).F,
                 Catch::Matchers::WithinRel(1.0, 1e-14));
    REQUIRE_THAT(phi_eval(FamilyDescriptor::funk(), p, 0).F,
                 Catch::Matchers::WithinRel(1.0, 1e-14));
    REQUIRE_THAT(phi_eval(FamilyDescriptor::berwald(1.0, +1), p, 0).F,
                 Catch::Matchers::WithinRel(1.0, 1e-14));
    REQUIRE_THAT(phi_eval(FamilyDescriptor::berwald(1.0, -1), p, 0).F,
                 Catch::Matchers::WithinRel(1.0, 1e-14));
  }
}

TEST_CASE("z-form evaluators match literal ambient formulas") {
  Rng rng(2026);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto x = rng.in_ball(3, 0.9);
    auto y = rng.unit_vector(3);
    EvalPoint p = invariants_from(x, y);
    if (p.r < 1e-6) continue;

    REQUIRE_THAT(phi_eval(FamilyDescriptor::berwald(1.0, -1), p, 0).F,
                 Catch::Matchers::WithinRel(berwald_example_form(x, y), 1e-12));
    REQUIRE_THAT(phi_eval(FamilyDescriptor::projective_spherical(), p, 0).F,
                 Catch::Matchers::WithinRel(proj_spherical_form(x, y), 1e-12));
    const double a = 3.14159265358979 / 5;
    REQUIRE_THAT(phi_eval(FamilyDescriptor::bryant_classic(a), p, 0).F,
                 Catch::Matchers::WithinRel(bryant_form(a, x, y), 1e-12));
    REQUIRE_THAT(phi_eval(FamilyDescriptor::klein(1.0), p, 0).F,
                 Catch::Matchers::WithinRel(klein_form(1.0, x, y), 1e-12));
    REQUIRE_THAT(phi_eval(FamilyDescriptor::funk(), p, 0).F,
                 Catch::Matchers::WithinRel(funk_form(x, y), 1e-12));
    REQUIRE_THAT(phi_eval(FamilyDescriptor::randers_k_neg1(1.0, +1), p, 0).F,
                 Catch::Matchers::WithinRel(randers_form(1.0, +1, x, y), 1e-12));
    REQUIRE_THAT(phi_eval(FamilyDescriptor::randers_k_neg1(1.0, -1), p, 0).F,
                 Catch::Matchers::WithinRel(randers_form(1.0, -1, x, y), 1e-12));
    ++checked;
  }
  REQUIRE(checked >= 95);
}

TEST_CASE("zero-angle limit collapses to the spherical model") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    auto x = rng.in_ball(3, 1.4);
    auto y = rng.unit_vector(3);
    EvalPoint p = invariants_from(x, y);
    REQUIRE_THAT(phi_eval(FamilyDescriptor::bryant_classic(0.0), p, 0).F,
                 Catch::Matchers::WithinRel(
                     phi_eval(FamilyDescriptor::projective_spherical(), p, 0).F,
                     1e-12));
  }
}

TEST_CASE("two-parameter coefficient identities") {
  {
    auto [c1, c2] = bryant_type_coefficients(1.0, 0.0, 0.0, +1);
    REQUIRE_THAT(c1, Catch::Matchers::WithinRel(1.0, 1e-14));
    REQUIRE_THAT(c2, Catch::Matchers::WithinRel(1.0, 1e-14));
    auto [c1m, c2m] = bryant_type_coefficients(1.0, 0.0, 0.0, -1);
    REQUIRE(c1m == c1);
    REQUIRE(c2m == -c2);
  }
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const double d1 = rng.uniform(0.05, 2.0);
    const double d2 = rng.uniform(-1.0, 2.0);
    const double z1 = rng.uniform(0.0, 2.0);
    auto [c1, c2] = bryant_type_coefficients(d1, d2, z1, +1);
    REQUIRE(c1 > 0.0);
    REQUIRE_THAT(c1 * c1 * c2 * c2, Catch::Matchers::WithinRel(d1 * d1, 1e-12));
    REQUIRE_THAT(c1 * c1 - c2 * c2,
                 Catch::Matchers::WithinAbs(2 * d2 + z1 * z1, 1e-12));
    REQUIRE_THAT(c1 * c2, Catch::Matchers::WithinRel(d1, 1e-12));
  }
  {
    auto [c1, c2] = neg_pair_coefficients(0.1, 0.6, 0.0, +1);
    REQUIRE_THAT(c1 * c1 + c2 * c2, Catch::Matchers::WithinRel(1.2, 1e-13));
    REQUIRE_THAT(c1 * c1 * c2 * c2, Catch::Matchers::WithinRel(0.01, 1e-12));
    REQUIRE(c1 > std::fabs(c2));
  }
  for (int i = 0; i < 200; ++i) {
    const double d1 = rng.uniform(0.05, 0.5);
    const double d2 = d1 + rng.uniform(0.05, 1.0);
    const double zmax = std::sqrt(2 * (d2 - d1));
    const double z1 = rng.uniform(0.0, 0.999 * zmax);
    auto [c1, c2] = neg_pair_coefficients(d1, d2, z1, -1);
    REQUIRE_THAT(c1 * c2, Catch::Matchers::WithinRel(-d1, 1e-11));
    REQUIRE_THAT(c1 * c1 + c2 * c2,
                 Catch::Matchers::WithinRel(2 * d2 - z1 * z1, 1e-12));
  }
  // Boundary degeneracy: the two squares meet as the radicand closes.
  {
    const double d1 = 0.1, d2 = 0.6;
    const double zb = std::sqrt(2 * (d2 - d1));
    auto [c1, c2] = neg_pair_coefficients(d1, d2, zb * (1 - 1e-12), +1);
    REQUIRE_THAT(c1 * c1 - c2 * c2, Catch::Matchers::WithinAbs(0.0, 1e-5));
    REQUIRE_THROWS_AS(neg_pair_coefficients(d1, d2, zb * (1 + 1e-9), +1),
                      std::domain_error);
  }
}

TEST_CASE("homogeneity in the direction argument") {
  Rng rng(31);
  auto fams = closed_families();
  SmoothCurve one = SmoothCurve::constant(1.0);
  fams.push_back(FamilyDescriptor::integral_form(one, SmoothCurve::constant(0.5)));
  for (const auto& fam : fams) {
    double worst = 0.0;
    for (int i = 0; i < 40; ++i) {
      auto x = rng.in_ball(3, 0.9 * fam.sampling_radius());
      auto y = rng.unit_vector(3);
      const double base = phi_eval(fam, invariants_from(x, y), 0).F;
      for (double s : {0.5, 2.0, 7.0}) {
        const double fs =
            phi_eval(fam, invariants_from(x, scaled(y, s)), 0).F;
        worst = std::max(worst, std::fabs(fs - s * base) / (s * base));
      }
    }
    INFO("family " << fam.name());
    REQUIRE(worst < 1e-12);
  }
}

TEST_CASE("rotation invariance of metric values") {
  Rng rng(32);
  for (const auto& fam : closed_families()) {
    for (int i = 0; i < 20; ++i) {
      auto x = rng.in_ball(3, 0.9 * fam.sampling_radius());
      auto y = rng.unit_vector(3);
      // Rotation in the (0,1) plane by a random angle plus axis flip.
      const double t = rng.uniform(0.0, 6.28);
      auto rot = [&](const std::vector<double>& w) {
        return std::vector<double>{std::cos(t) * w[0] - std::sin(t) * w[1],
                                   std::sin(t) * w[0] + std::cos(t) * w[1],
                                   -w[2]};
      };
      const double a = phi_eval(fam, invariants_from(x, y), 0).F;
      const double b = phi_eval(fam, invariants_from(rot(x), rot(y)), 0).F;
      REQUIRE_THAT(b, Catch::Matchers::WithinRel(a, 1e-12));
    }
  }
}

TEST_CASE("sign branches are reverses of each other") {
  Rng rng(33);
  using Maker = FamilyDescriptor (*)(int);
  (void)static_cast<Maker>(nullptr);
  auto check_pair = [&](const FamilyDescriptor& plus,
                        const FamilyDescriptor& minus) {
    for (int i = 0; i < 50; ++i) {
      auto x = rng.in_ball(3, 0.9 * plus.sampling_radius());
      auto y = rng.unit_vector(3);
      const double fp = phi_eval(plus, invariants_from(x, y), 0).F;
      const double fm =
          phi_eval(minus, invariants_from(x, scaled(y, -1.0)), 0).F;
      REQUIRE_THAT(fp, Catch::Matchers::WithinRel(fm, 1e-12));
    }
  };
  check_pair(FamilyDescriptor::berwald(1.0, +1),
             FamilyDescriptor::berwald(1.0, -1));
  check_pair(FamilyDescriptor::randers_k_neg1(1.0, +1),
             FamilyDescriptor::randers_k_neg1(1.0, -1));
  check_pair(FamilyDescriptor::bryant_type(1.0, 0.3, +1),
             FamilyDescriptor::bryant_type(1.0, 0.3, -1));
  check_pair(FamilyDescriptor::neg_pair(0.1, 0.6, +1),
             FamilyDescriptor::neg_pair(0.1, 0.6, -1));
}

TEST_CASE("negative-curvature pair stays positive on its ball") {
  auto fam = FamilyDescriptor::neg_pair(0.1, 0.6, +1, 3);
  auto pts = sample_domain(fam, 10000, 11, 0.0, 0.001);
  for (const auto& p : pts) {
    const double F = phi_eval(fam, p, 0).F;  // throws if non-positive
    REQUIRE(F > 0.0);
  }
}

TEST_CASE("domain enforcement") {
  auto klein = FamilyDescriptor::klein(1.0, 3);
  std::vector<double> xout{1.05, 0.0, 0.0}, y{0.0, 1.0, 0.0};
  REQUIRE_THROWS_AS(phi_eval(klein, invariants_from(xout, y), 0),
                    std::domain_error);
  std::vector<double> x2{0.5, 0.5};
  REQUIRE_THROWS_AS(phi_eval(klein, invariants_from(x2, x2), 0),
                    std::invalid_argument);  // dimension mismatch
  std::vector<double> xin{0.5, 0.0, 0.0};
  REQUIRE_THROWS_AS(phi_eval(klein, invariants_from(xin, y), 7),
                    std::invalid_argument);  // order out of range
}

TEST_CASE("jets of the metric agree across scalar algebras") {
  // d(psi)/d(z2) from a jet must match the Dual directional derivative.
  auto fam = FamilyDescriptor::funk(3);
  const double p0 = 0.09, z20 = 0.2;
  const JetLayout& ly = JetLayout::get(2, 2);
  JetD p = JetD::variable(ly, 0, p0);
  JetD z2 = JetD::variable(ly, 1, z20);
  JetD psi = psi_eval(fam, p, z2);

  Dual pd(p0, 0.0), z2d(z20, 1.0);
  Dual psid = psi_eval(fam, pd, z2d);
  REQUIRE_THAT(psi.value(), Catch::Matchers::WithinRel(psid.val, 1e-14));
  REQUIRE_THAT(psi.deriv({1}), Catch::Matchers::WithinRel(psid.dot, 1e-14));

  // Jets over duals: the dual direction must reproduce the mixed partial.
  Jet<Dual> pjd = Jet<Dual>::variable(ly, 0, Dual(p0, 1.0));
  Jet<Dual> zjd = Jet<Dual>::variable(ly, 1, Dual(z20, 0.0));
  Jet<Dual> mixed = psi_eval(fam, pjd, zjd);
  REQUIRE_THAT(mixed.deriv({1}).dot,
               Catch::Matchers::WithinRel(psi.deriv({0, 1}), 1e-13));
}

// ---------------------------------------------------------------------------
// Curves and the integral form.
// ---------------------------------------------------------------------------

TEST_CASE("spline curves interpolate and differentiate") {
  std::vector<double> t{-1.0, 0.0, 1.0, 2.0, 3.5};
  std::vector<double> y{2.0, 1.5, 1.8, 2.5, 2.2};
  SmoothCurve s = SmoothCurve::cubic_spline(t, y);
  for (std::size_t i = 0; i < t.size(); ++i)
    REQUIRE_THAT(s(t[i]), Catch::Matchers::WithinAbs(y[i], 1e-12));
  // Constant extrapolation.
  REQUIRE(s(-5.0) == y.front());
  REQUIRE(s(99.0) == y.back());
  REQUIRE(s.taylor(-5.0, 3)[1] == 0.0);
  // Derivatives against central differences at interior points.
  const double h = 1e-6;
  for (double tt : {-0.5, 0.3, 1.7, 2.9}) {
    const auto tc = s.taylor(tt, 2);
    REQUIRE_THAT(tc[1], Catch::Matchers::WithinAbs(
                            (s(tt + h) - s(tt - h)) / (2 * h), 1e-7));
    REQUIRE_THAT(2 * tc[2],
                 Catch::Matchers::WithinAbs(
                     (s(tt + h) - 2 * s(tt) + s(tt - h)) / (h * h), 1e-3));
  }
  REQUIRE_THROWS_AS(SmoothCurve::cubic_spline({0.0, 0.0, 1.0}, {1, 2, 3}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(SmoothCurve::cubic_spline({0.0, 1.0}, {1, 2}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(SmoothCurve()(0.0), std::logic_error);
}

TEST_CASE("integral form reproduces its two closed-form instances") {
  SmoothCurve one = SmoothCurve::constant(1.0);
  SmoothCurve zero = SmoothCurve::constant(0.0);

  // f = 1, g = 0: phi = u.
  auto eu = FamilyDescriptor::integral_form(one, zero, 3);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    auto x = rng.in_ball(3, 1.2);
    auto y = rng.unit_vector(3);
    auto yv = scaled(y, rng.uniform(0.5, 2.0));
    EvalPoint p = invariants_from(x, yv);
    MetricValue mv = phi_eval(eu, p, 2);
    REQUIRE_THAT(mv.F, Catch::Matchers::WithinRel(p.u, 1e-11));
    REQUIRE_THAT(mv.phi.deriv({1}), Catch::Matchers::WithinAbs(1.0, 1e-10));
    REQUIRE_THAT(mv.phi.deriv({0}), Catch::Matchers::WithinAbs(0.0, 1e-10));
    REQUIRE_THAT(mv.phi.deriv({2}), Catch::Matchers::WithinAbs(0.0, 1e-10));
    REQUIRE_THAT(mv.phi.deriv({2, 2}), Catch::Matchers::WithinAbs(0.0, 1e-9));
    REQUIRE(!mv.has_phi_tilde);
  }

  // f = 1, g = 1: phi = u + v.
  auto rnd = FamilyDescriptor::integral_form(one, SmoothCurve::constant(1.0), 3);
  for (int i = 0; i < 20; ++i) {
    auto x = rng.in_ball(3, 0.45);  // keep u + v > 0
    auto y = rng.unit_vector(3);
    EvalPoint p = invariants_from(x, y);
    MetricValue mv = phi_eval(rnd, p, 2);
    REQUIRE_THAT(mv.F, Catch::Matchers::WithinRel(p.u + p.v, 1e-11));
    REQUIRE_THAT(mv.phi.deriv({2}), Catch::Matchers::WithinAbs(1.0, 1e-10));
    REQUIRE_THAT(mv.phi.deriv({1}), Catch::Matchers::WithinAbs(1.0, 1e-10));
  }
}

TEST_CASE("sloped-end integrand curves are rejected") {
  // The end clamping forces zero slope onto visibly sloped data, so the
  // spline bends hard near the ends; the validation reads that curvature
  // and refuses to integrate the curve.
  std::vector<double> kt, ky;
  for (int i = 0; i <= 12; ++i) {
    const double t = -3.0 + i * 0.75;
    kt.push_back(t);
    ky.push_back(1.0 + 0.25 * std::exp(-t * t / 4.0));
  }
  auto fam = FamilyDescriptor::integral_form(SmoothCurve::cubic_spline(kt, ky),
                                             SmoothCurve::constant(0.1), 3);
  REQUIRE_THROWS_WITH(fam.validate(), "integrand curve must flatten at its ends");
}

TEST_CASE("integral form with a varying integrand has consistent jets") {
  // Gaussian-bump data over a wide span: the tails are flat to ~1e-21, so the
  // constant extension is smooth to machine precision.
  std::vector<double> kt, ky;
  for (int i = 0; i <= 28; ++i) {
    const double t = -7.0 + i * 0.5;
    kt.push_back(t);
    ky.push_back(1.0 + 0.25 * std::exp(-t * t));
  }
  SmoothCurve f = SmoothCurve::cubic_spline(kt, ky);
  auto fam = FamilyDescriptor::integral_form(f, SmoothCurve::constant(0.1), 3);

  auto eval_at = [&](double r, double u, double v, int order) {
    const double yperp = std::sqrt(u * u - (v / r) * (v / r));
    std::vector<double> x{r, 0.0, 0.0}, y{v / r, yperp, 0.0};
    return phi_eval(fam, invariants_from(x, y), order);
  };
  const double r0 = 0.8, u0 = 1.1, v0 = 0.3;
  MetricValue mv = eval_at(r0, u0, v0, 2);

  // First-order jets vs. central differences of the plain value.
  const double h = 1e-4;
  const double fr =
      (eval_at(r0 + h, u0, v0, 0).F - eval_at(r0 - h, u0, v0, 0).F) / (2 * h);
  const double fu =
      (eval_at(r0, u0 + h, v0, 0).F - eval_at(r0, u0 - h, v0, 0).F) / (2 * h);
  const double fv =
      (eval_at(r0, u0, v0 + h, 0).F - eval_at(r0, u0, v0 - h, 0).F) / (2 * h);
  REQUIRE_THAT(mv.phi.deriv({0}), Catch::Matchers::WithinAbs(fr, 1e-6));
  REQUIRE_THAT(mv.phi.deriv({1}), Catch::Matchers::WithinAbs(fu, 1e-6));
  REQUIRE_THAT(mv.phi.deriv({2}), Catch::Matchers::WithinAbs(fv, 1e-6));

  // Second-order jets vs. central differences of first-order jets (the
  // quadrature error is additive there, not amplified by 1/h^2).
  auto d1 = [&](double r, double u, double v, int which) {
    return eval_at(r, u, v, 1).phi.deriv({which});
  };
  const double fvv = (d1(r0, u0, v0 + h, 2) - d1(r0, u0, v0 - h, 2)) / (2 * h);
  const double frv = (d1(r0, u0, v0 + h, 0) - d1(r0, u0, v0 - h, 0)) / (2 * h);
  const double fuu = (d1(r0, u0 + h, v0, 1) - d1(r0, u0 - h, v0, 1)) / (2 * h);
  const double frr = (d1(r0 + h, u0, v0, 0) - d1(r0 - h, u0, v0, 0)) / (2 * h);
  REQUIRE_THAT(mv.phi.deriv({2, 2}), Catch::Matchers::WithinAbs(fvv, 1e-5));
  REQUIRE_THAT(mv.phi.deriv({0, 2}), Catch::Matchers::WithinAbs(frv, 1e-5));
  REQUIRE_THAT(mv.phi.deriv({1, 1}), Catch::Matchers::WithinAbs(fuu, 1e-5));
  REQUIRE_THAT(mv.phi.deriv({0, 0}), Catch::Matchers::WithinAbs(frr, 1e-5));

  // Third-order jets vs. central differences of second-order jets.
  auto d2 = [&](double v, int a, int b) {
    return eval_at(r0, u0, v, 2).phi.deriv({a, b});
  };
  const double fvvv = (d2(v0 + h, 2, 2) - d2(v0 - h, 2, 2)) / (2 * h);
  MetricValue mv3 = eval_at(r0, u0, v0, 3);
  REQUIRE_THAT(mv3.phi.deriv({2, 2, 2}), Catch::Matchers::WithinAbs(fvvv, 1e-4));
}
