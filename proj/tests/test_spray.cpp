// The ambient-coordinate curvature oracle: spray collinearity with the
// direction (projective flatness), the Riemann operator's null direction and
// self-adjointness, flag curvature against each family's constant, the
// constant-curvature tensor identity with wrong-constant controls, and
// straight-line geodesics with a bent-metric control.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>
#include <vector>

#include "finsler/families.hpp"
#include "finsler/geometry.hpp"
#include "finsler/spray.hpp"
#include "finsler/tensor.hpp"

using namespace finsler;

namespace {

// Deliberately non-projective metric F = |y| (1 + p/10): a mild bending of
// the flat metric whose geodesics visibly curve.
struct BentMetric {
  template <typename S>
  Jet<S> operator()(const std::vector<Jet<S>>& x,
                    const std::vector<Jet<S>>& y) const {
    Jet<S> r2 = sqr(x[0]);
    Jet<S> u2 = sqr(y[0]);
    Jet<S> v = x[0] * y[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
      r2 += sqr(x[i]);
      u2 += sqr(y[i]);
      v += x[i] * y[i];
    }
    const Jet<S> u = sqrt(u2);
    const Jet<S> p = r2 - sqr(v / u);
    return u * (1.0 + 0.1 * p);
  }
};

double collinearity_defect(const SprayData& sd, const EvalPoint& pt) {
  Eigen::Map<const Eigen::VectorXd> y(pt.y.data(), pt.dim());
  const Eigen::VectorXd rej = sd.G - (sd.G.dot(y) / y.squaredNorm()) * y;
  return rej.norm() / (sd.G.norm() + kResidualEps);
}

}  // namespace

TEST_CASE("the flat metric has zero spray, operator, and curvature") {
  const auto fam = FamilyDescriptor::euclidean(3);
  const std::vector<double> x{0.3, -0.1, 0.2}, y{0.5, 1.0, -0.7};
  const SprayData sd = spray_coefficients(fam, x, y);
  CHECK(sd.G.norm() < 1e-14);
  CHECK(sd.dG_dx.norm() < 1e-14);
  CHECK(sd.dG_dy.norm() < 1e-14);
  CHECK(riemann_operator(fam, x, y).norm() < 1e-13);
  CHECK(constant_curvature_tensor_residual(fam, x, y, 0.0) < 1e-12);

  const EvalPoint pt = invariants_from(x, y);
  const std::vector<double> V{1.0, 0.0, 0.0};
  CHECK(std::fabs(flag_curvature(fam, make_flag(pt, V))) < 1e-12);
}

TEST_CASE("spray coefficients are collinear with the direction") {
  // Projective flatness in ambient coordinates: G = P(x, y) y.
  for (const auto& fam : canonical_families(3)) {
    CAPTURE(family_name(fam.id), fam.branch_sign);
    for (const EvalPoint& pt : sample_domain(fam, 40, 913, 1e-3, 0.05)) {
      const SprayData sd = spray_coefficients(fam, pt.x, pt.y);
      CHECK(collinearity_defect(sd, pt) < 1e-8);
    }
  }
}

TEST_CASE("spray scale behavior matches 2-homogeneity") {
  for (const auto& fam : canonical_families(3)) {
    CAPTURE(family_name(fam.id), fam.branch_sign);
    for (const EvalPoint& pt : sample_domain(fam, 10, 417, 1e-3, 0.05)) {
      CHECK(homogeneity_defect(fam, pt.x, pt.y, 2.0) < 1e-8);
      // Euler relation for degree 2: y^k dG/dy^k = 2 G.
      const SprayData sd = spray_coefficients(fam, pt.x, pt.y);
      Eigen::Map<const Eigen::VectorXd> y(pt.y.data(), pt.dim());
      const double defect = (sd.dG_dy * y - 2.0 * sd.G).norm() /
                            (2.0 * sd.G.norm() + kResidualEps);
      CHECK(defect < 1e-9);
    }
  }
}

TEST_CASE("reversible metrics have vanishing spray at the center") {
  const auto fam = FamilyDescriptor::klein(1.0, 3);
  const std::vector<double> x{0.0, 0.0, 0.0}, y{0.4, -0.2, 0.9};
  const SprayData sd = spray_coefficients(fam, x, y);
  CHECK(sd.G.norm() < 1e-13);
}

TEST_CASE("the Riemann operator annihilates the direction") {
  for (const auto& fam : canonical_families(3)) {
    CAPTURE(family_name(fam.id), fam.branch_sign);
    for (const EvalPoint& pt : sample_domain(fam, 15, 554, 1e-3, 0.05)) {
      const Eigen::MatrixXd R = riemann_operator(fam, pt.x, pt.y);
      Eigen::Map<const Eigen::VectorXd> y(pt.y.data(), pt.dim());
      const double f = phi_eval(fam, pt, 0).F;
      CHECK((R * y).norm() <= 1e-8 * (R.norm() + f * f) * y.norm());
    }
  }
}

TEST_CASE("the operator is g-self-adjoint on the transverse complement") {
  for (const auto& fam : canonical_families(3)) {
    CAPTURE(family_name(fam.id), fam.branch_sign);
    for (const EvalPoint& pt : sample_domain(fam, 8, 66, 1e-3, 0.05)) {
      const int n = pt.dim();
      const Eigen::MatrixXd g = hessian_metric(fam, pt);
      const Eigen::MatrixXd R = riemann_operator(fam, pt.x, pt.y);
      Eigen::Map<const Eigen::VectorXd> y(pt.y.data(), n);
      const Eigen::VectorXd gy = g * y;
      const Eigen::MatrixXd P =
          Eigen::MatrixXd::Identity(n, n) - y * gy.transpose() / y.dot(gy);
      const Eigen::MatrixXd S = g * R;
      // Denominated by the metric scale as well: for the zero-curvature
      // family S itself is rounding noise, and noise over noise is O(1).
      const double f = phi_eval(fam, pt, 0).F;
      const double defect = (P.transpose() * (S - S.transpose()) * P).norm() /
                            (S.norm() + f * f * g.norm() + kResidualEps);
      CHECK(defect < 1e-7);
    }
  }
}

TEST_CASE("flag curvature equals each family's constant") {
  Rng rng(2711);
  for (const auto& fam : canonical_families(3)) {
    CAPTURE(family_name(fam.id), fam.branch_sign);
    const double lam = fam.lambda();
    int done = 0;
    for (const EvalPoint& pt : sample_domain(fam, 40, 31 + fam.branch_sign,
                                             1e-3, 0.05)) {
      if (done >= 20) break;
      const std::vector<double> V = rng.unit_vector(3);
      try {
        const double K = flag_curvature(fam, make_flag(pt, V));
        CHECK(std::fabs(K - lam) < 1e-6);
        ++done;
      } catch (const std::invalid_argument&) {
        // V happened to be numerically parallel to y; draw elsewhere.
      }
    }
    REQUIRE(done == 20);
  }
}

TEST_CASE("the quarter-curvature metric reports K = -1/4 on random flags") {
  const auto fam = FamilyDescriptor::funk(3);
  Rng rng(808);
  int done = 0;
  for (const EvalPoint& pt : sample_domain(fam, 150, 99, 1e-3, 0.05)) {
    if (done >= 100) break;
    const std::vector<double> V = rng.unit_vector(3);
    try {
      CHECK_THAT(flag_curvature(fam, make_flag(pt, V)),
                 Catch::Matchers::WithinAbs(-0.25, 1e-6));
      ++done;
    } catch (const std::invalid_argument&) {
    }
  }
  REQUIRE(done == 100);
}

TEST_CASE("flag curvature works away from dimension three") {
  Rng rng(5);
  {
    const auto fam = FamilyDescriptor::klein(1.0, 2);
    const auto pts = sample_domain(fam, 5, 12, 1e-3, 0.05);
    const std::vector<double> V = rng.unit_vector(2);
    CHECK_THAT(flag_curvature(fam, make_flag(pts.front(), V)),
               Catch::Matchers::WithinAbs(-1.0, 1e-6));
  }
  {
    const auto fam = FamilyDescriptor::projective_spherical(5);
    const auto pts = sample_domain(fam, 5, 13, 1e-3, 0.05);
    const std::vector<double> V = rng.unit_vector(5);
    CHECK_THAT(flag_curvature(fam, make_flag(pts.front(), V)),
               Catch::Matchers::WithinAbs(1.0, 1e-6));
  }
}

TEST_CASE("the constant-curvature tensor identity holds at the right constant") {
  const std::vector<double> x{0.3, -0.2, 0.1}, y{0.4, 0.8, -0.3};

  SECTION("hyperbolic model") {
    const auto fam = FamilyDescriptor::klein(1.0, 3);
    CHECK(constant_curvature_tensor_residual(fam, x, y, -1.0) < 1e-6);
    CHECK(constant_curvature_tensor_residual(fam, x, y, 0.0) > 1e-2);
    CHECK(constant_curvature_tensor_residual(fam, x, y, 1.0) > 1e-2);
  }

  SECTION("two-parameter positive-curvature family") {
    const auto fam = FamilyDescriptor::bryant_type(1.0, 0.3, +1, 3);
    CHECK(constant_curvature_tensor_residual(fam, x, y, 1.0) < 1e-6);
    CHECK(constant_curvature_tensor_residual(fam, x, y, -1.0) > 1e-2);
  }

  SECTION("every family at its own constant, sampled") {
    for (const auto& fam : canonical_families(3)) {
      CAPTURE(family_name(fam.id), fam.branch_sign);
      for (const EvalPoint& pt : sample_domain(fam, 10, 327, 1e-3, 0.05)) {
        CHECK(constant_curvature_tensor_residual(fam, pt.x, pt.y,
                                                 fam.lambda()) < 1e-6);
      }
    }
  }
}

TEST_CASE("geodesics of projective metrics are straight lines") {
  const std::vector<double> x0{0.2, 0.0, 0.0}, y0{0.0, 1.0, 0.0};

  SECTION("quarter-curvature metric") {
    const auto tr =
        geodesic_integrate(FamilyDescriptor::funk(3), x0, y0, 1000, 1e-3);
    REQUIRE(tr.x.size() == 1001);
    CHECK_FALSE(tr.truncated);
    CHECK(straightness_deviation(tr) < 1e-8);
    CHECK(metric_drift(tr) < 1e-8);
  }

  SECTION("flat metric") {
    const auto tr = geodesic_integrate(FamilyDescriptor::euclidean(3), x0, y0,
                                       200, 1e-3);
    CHECK(straightness_deviation(tr) < 1e-14);
    CHECK(metric_drift(tr) < 1e-14);
    CHECK((tr.y.back() - tr.y.front()).norm() < 1e-14);
  }

  SECTION("hyperbolic model with a shorter leash") {
    const std::vector<double> slow{0.0, 0.5, 0.0};
    const auto tr = geodesic_integrate(FamilyDescriptor::klein(1.0, 3), x0,
                                       slow, 1000, 1e-3);
    REQUIRE(tr.x.size() == 1001);
    CHECK(straightness_deviation(tr) < 1e-8);
    CHECK(metric_drift(tr) < 1e-8);
  }
}

TEST_CASE("a bent metric produces visibly curved geodesics") {
  const std::vector<double> x0{0.2, 0.0, 0.0}, y0{0.0, 1.0, 0.0};
  const auto tr = geodesic_integrate_fn(BentMetric{}, 3, x0, y0, 1000, 1e-3,
                                        std::nullopt);
  REQUIRE(tr.x.size() == 1001);
  CHECK(straightness_deviation(tr) > 1e-4);
}

TEST_CASE("geodesics truncate at the domain margin instead of leaving") {
  // The minus-branch Randers metric is the reversed quarter-curvature
  // metric: it stays cheap toward the boundary, so this geodesic reaches
  // the rim at finite parameter and the integrator must stop at the margin.
  const std::vector<double> x0{0.2, 0.0, 0.0}, y0{0.0, 1.0, 0.0};
  const auto tr = geodesic_integrate(FamilyDescriptor::randers_k_neg1(1.0, -1, 3),
                                     x0, y0, 1000, 1e-3);
  CHECK(tr.truncated);
  CHECK(tr.x.size() < 1001);
  CHECK(tr.x.back().norm() < 0.98);
  CHECK(straightness_deviation(tr) < 1e-8);
}

TEST_CASE("spray and curvature reject bad inputs") {
  const auto fam = FamilyDescriptor::klein(1.0, 3);
  const std::vector<double> x{0.2, 0.1, 0.0}, y{0.0, 1.0, 0.0};

  SECTION("integral-form metrics have no ambient jets") {
    const auto quad = FamilyDescriptor::integral_form(
        SmoothCurve::constant(1.0), SmoothCurve::constant(0.0), 3);
    CHECK_THROWS_AS(spray_coefficients(quad, x, y), std::invalid_argument);
  }

  SECTION("outside the domain") {
    const std::vector<double> far{1.2, 0.0, 0.0};
    CHECK_THROWS_AS(spray_coefficients(fam, far, y), std::domain_error);
    CHECK_THROWS_AS(riemann_operator(fam, far, y), std::domain_error);
  }

  SECTION("degenerate flags") {
    const EvalPoint pt = invariants_from(x, y);
    std::vector<double> almost{0.0, 1.0, 1e-5};
    CHECK_THROWS_AS(flag_curvature(fam, make_flag(pt, almost)),
                    std::invalid_argument);
    const std::vector<double> parallel{0.0, 2.0, 0.0};
    CHECK_THROWS_AS(make_flag(pt, parallel), std::invalid_argument);
  }

  SECTION("integrator argument checks") {
    CHECK_THROWS_AS(geodesic_integrate(fam, x, y, 0, 1e-3),
                    std::invalid_argument);
    CHECK_THROWS_AS(geodesic_integrate(fam, x, y, 10, 0.0),
                    std::invalid_argument);
    const std::vector<double> rim{0.99, 0.0, 0.0};
    CHECK_THROWS_AS(geodesic_integrate(fam, rim, y, 10, 1e-3),
                    std::domain_error);
  }
}
