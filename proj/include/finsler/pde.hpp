#pragma once
// Residuals of the characterizing equations: the projectivity condition on
// phi(r, u, v), the constant-curvature system with its auxiliary quantity Q,
// the reduced two-variable equations in (z1, z2), and the two branch
// equations whose product the reduction forces to vanish.
//
// All residuals are normalized by the sum of absolute values of the
// equation's summands (plus a tiny epsilon), so "small" means small relative
// to the terms that could cancel.

#include <cmath>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "finsler/families.hpp"
#include "finsler/geometry.hpp"
#include "finsler/jet.hpp"

namespace finsler {

inline constexpr double kResidualEps = 1e-300;

namespace detail {

inline void require_off_center(const EvalPoint& pt) {
  if (!(pt.r > 1e-9))
    throw std::domain_error(
        "residuals are evaluated away from the origin (r > 0)");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Projectivity condition on phi(r, u, v):  phi_rv (v/r) + phi_vv u^2 = phi_r / r.
// ---------------------------------------------------------------------------

inline double rapcsak_residual(const JetD& phi, const EvalPoint& pt) {
  detail::require_off_center(pt);
  const double t_rv = phi.deriv({0, 2}) * (pt.v / pt.r);
  const double t_vv = phi.deriv({2, 2}) * pt.u * pt.u;
  const double t_r = phi.deriv({0}) / pt.r;
  const double scale =
      std::fabs(t_rv) + std::fabs(t_vv) + std::fabs(t_r) + kResidualEps;
  return (t_rv + t_vv - t_r) / scale;
}

inline double rapcsak_residual(const FamilyDescriptor& fam,
                               const EvalPoint& pt) {
  return rapcsak_residual(phi_eval(fam, pt, 2).phi, pt);
}

// ---------------------------------------------------------------------------
// Q = (v/r) phi_r + u^2 phi_v and its radial derivative.
// ---------------------------------------------------------------------------

struct QValue {
  double q = 0.0;
  double q_r = 0.0;
  bool has_q_r = false;
};

inline QValue q_value(const JetD& phi, const EvalPoint& pt, int order = 1) {
  detail::require_off_center(pt);
  if (order < 0 || order > 1)
    throw std::invalid_argument("q_value order must be 0 or 1");
  QValue out;
  const double phi_r = phi.deriv({0});
  const double phi_v = phi.deriv({2});
  out.q = (pt.v / pt.r) * phi_r + pt.u * pt.u * phi_v;
  if (order == 1) {
    const double phi_rr = phi.deriv({0, 0});
    const double phi_vr = phi.deriv({0, 2});
    out.q_r = -(pt.v / (pt.r * pt.r)) * phi_r + (pt.v / pt.r) * phi_rr +
              pt.u * pt.u * phi_vr;
    out.has_q_r = true;
  }
  return out;
}

inline QValue q_eval(const FamilyDescriptor& fam, const EvalPoint& pt,
                     int order = 1) {
  return q_value(phi_eval(fam, pt, 2).phi, pt, order);
}

// ---------------------------------------------------------------------------
// Constant-curvature system in (r, u, v):
//   (a) 4 lam r phi^4 phi_u + r phi_u Q^2 - 4 r u phi phi_v Q + 4 u phi^2 phi_r = 0
//   (b) 4 lam r phi^4 phi_v + r phi_v Q^2 + 2 phi^2 Q_r - 4 phi phi_r Q = 0
// ---------------------------------------------------------------------------

inline std::pair<double, double> curvature_system_residuals(
    const JetD& phi, const EvalPoint& pt, double lambda) {
  detail::require_off_center(pt);
  const QValue Q = q_value(phi, pt, 1);
  const double ph = phi.value();
  const double phi_r = phi.deriv({0});
  const double phi_u = phi.deriv({1});
  const double phi_v = phi.deriv({2});
  const double r = pt.r, u = pt.u;
  const double ph2 = ph * ph, ph4 = ph2 * ph2;

  const double a1 = 4.0 * lambda * r * ph4 * phi_u;
  const double a2 = r * phi_u * Q.q * Q.q;
  const double a3 = -4.0 * r * u * ph * phi_v * Q.q;
  const double a4 = 4.0 * u * ph2 * phi_r;
  const double sa = std::fabs(a1) + std::fabs(a2) + std::fabs(a3) +
                    std::fabs(a4) + kResidualEps;

  const double b1 = 4.0 * lambda * r * ph4 * phi_v;
  const double b2 = r * phi_v * Q.q * Q.q;
  const double b3 = 2.0 * ph2 * Q.q_r;
  const double b4 = -4.0 * ph * phi_r * Q.q;
  const double sb = std::fabs(b1) + std::fabs(b2) + std::fabs(b3) +
                    std::fabs(b4) + kResidualEps;

  return {(a1 + a2 + a3 + a4) / sa, (b1 + b2 + b3 + b4) / sb};
}

inline std::pair<double, double> curvature_system_residuals(
    const FamilyDescriptor& fam, const EvalPoint& pt, double lambda) {
  return curvature_system_residuals(phi_eval(fam, pt, 2).phi, pt, lambda);
}

// ---------------------------------------------------------------------------
// Reduced equations on t(z1, z2) = F/|y|.  With t2 = dt/dz2 etc., the first
// states t1 * D - z1 * N = 0 for
//   N = t2^3 z2 + 4 lam t^4 t2 z2 - 4 lam t^5 + 3 t2^2 t
//   D = 4 lam t^4 z2^2 + t2^2 z2^2 + 4 t2 t z2 + 4 t^2
// and the second does the same for the mixed derivative t12 with
//   N' = -16 lam^2 t^8 z2 + 8 lam t^4 t2^2 z2 - 32 lam t^5 t2 + 3 t2^4 z2 + 8 t2^3 t
//   D' = 2 t D.
// ---------------------------------------------------------------------------

inline std::pair<double, double> z_reduction_residuals(const JetD& phi_tilde,
                                                       double z1, double z2,
                                                       double lambda,
                                                       double z1_floor = 1e-3) {
  if (!(z1 >= z1_floor))
    throw std::domain_error(
        "reduced equations need z1 at or above the floor (their derivation "
        "divides by z1)");
  const double t = phi_tilde.value();
  const double t1 = phi_tilde.deriv({0});
  const double t2 = phi_tilde.deriv({1});
  const double t12 = phi_tilde.deriv({0, 1});
  const double t4 = t * t * t * t;
  const double t5 = t4 * t;

  const double d_terms[4] = {4.0 * lambda * t4 * z2 * z2, t2 * t2 * z2 * z2,
                             4.0 * t2 * t * z2, 4.0 * t * t};
  const double n_terms[4] = {t2 * t2 * t2 * z2, 4.0 * lambda * t4 * t2 * z2,
                             -4.0 * lambda * t5, 3.0 * t2 * t2 * t};
  double lhs4 = 0.0, scale4 = kResidualEps;
  for (double d : d_terms) {
    lhs4 += t1 * d;
    scale4 += std::fabs(t1 * d);
  }
  for (double n : n_terms) {
    lhs4 -= z1 * n;
    scale4 += std::fabs(z1 * n);
  }

  const double t8 = t4 * t4;
  const double np_terms[5] = {
      -16.0 * lambda * lambda * t8 * z2, 8.0 * lambda * t4 * t2 * t2 * z2,
      -32.0 * lambda * t5 * t2, 3.0 * t2 * t2 * t2 * t2 * z2,
      8.0 * t2 * t2 * t2 * t};
  double lhs5 = 0.0, scale5 = kResidualEps;
  for (double d : d_terms) {
    lhs5 += t12 * 2.0 * t * d;
    scale5 += std::fabs(t12 * 2.0 * t * d);
  }
  for (double n : np_terms) {
    lhs5 -= z1 * n;
    scale5 += std::fabs(z1 * n);
  }

  return {lhs4 / scale4, lhs5 / scale5};
}

inline std::pair<double, double> z_reduction_residuals(
    const FamilyDescriptor& fam, const EvalPoint& pt, double lambda,
    double z1_floor = 1e-3) {
  const MetricValue mv = phi_eval(fam, pt, 2);
  if (!mv.has_phi_tilde)
    throw std::invalid_argument(
        "reduced-form residuals need the two-variable form, which "
        "integral-form metrics do not provide");
  return z_reduction_residuals(mv.phi_tilde, pt.z1, pt.z2, lambda, z1_floor);
}

// ---------------------------------------------------------------------------
// Branch equations: the reduction forces the product of
//   (6)  3 t2^2 - 2 t t22 - 4 lam t^4
//   (7)  t2 (2t + z2 t2)(z2^2 t2^2 + 6 z2 t t2 + 12 t^2)
//        + 8 lam z2 t^4 (2 lam z2^2 t^4 + 4 t^2 + 4 z2 t t2 + z2^2 t2^2)
// to vanish; classified metrics sit on branch (6).
// ---------------------------------------------------------------------------

struct BranchResiduals {
  double eq6 = 0.0;
  double eq7 = 0.0;
  bool eq6_vanishes = false;
  bool eq7_vanishes = false;
};

inline BranchResiduals branch_residuals(const JetD& phi_tilde, double z2,
                                        double lambda, double tol = 1e-8) {
  const double t = phi_tilde.value();
  const double t2 = phi_tilde.deriv({1});
  const double t22 = phi_tilde.deriv({1, 1});
  const double t4 = t * t * t * t;

  const double s61 = 3.0 * t2 * t2;
  const double s62 = -2.0 * t * t22;
  const double s63 = -4.0 * lambda * t4;
  const double scale6 =
      std::fabs(s61) + std::fabs(s62) + std::fabs(s63) + kResidualEps;

  const double lead = t2 * (2.0 * t + z2 * t2);
  const double inner1[3] = {z2 * z2 * t2 * t2, 6.0 * z2 * t * t2,
                            12.0 * t * t};
  const double lead2 = 8.0 * lambda * z2 * t4;
  const double inner2[4] = {2.0 * lambda * z2 * z2 * t4, 4.0 * t * t,
                            4.0 * z2 * t * t2, z2 * z2 * t2 * t2};
  double lhs7 = 0.0, scale7 = kResidualEps;
  for (double w : inner1) {
    lhs7 += lead * w;
    scale7 += std::fabs(lead * w);
  }
  for (double w : inner2) {
    lhs7 += lead2 * w;
    scale7 += std::fabs(lead2 * w);
  }

  BranchResiduals out;
  out.eq6 = (s61 + s62 + s63) / scale6;
  out.eq7 = lhs7 / scale7;
  out.eq6_vanishes = std::fabs(out.eq6) < tol;
  out.eq7_vanishes = std::fabs(out.eq7) < tol;
  return out;
}

inline BranchResiduals branch_residuals(const FamilyDescriptor& fam,
                                        const EvalPoint& pt, double lambda,
                                        double tol = 1e-8) {
  const MetricValue mv = phi_eval(fam, pt, 2);
  if (!mv.has_phi_tilde)
    throw std::invalid_argument(
        "branch residuals need the two-variable form, which integral-form "
        "metrics do not provide");
  return branch_residuals(mv.phi_tilde, pt.z2, lambda, tol);
}

// ---------------------------------------------------------------------------
// One sample, every residual.
// ---------------------------------------------------------------------------

struct ResidualSample {
  EvalPoint point;
  double rapcsak = 0.0;
  double eq3a = 0.0;
  double eq3b = 0.0;
  double eq4 = 0.0;
  double eq5 = 0.0;
  double eq6 = 0.0;
  double eq7 = 0.0;
  double scale = 0.0;       // metric value F at the sample
  bool has_reduced = false; // eq4..eq7 need the two-variable form
};

inline ResidualSample residual_sample(const FamilyDescriptor& fam,
                                      const EvalPoint& pt, double lambda,
                                      double z1_floor = 1e-3) {
  const MetricValue mv = phi_eval(fam, pt, 2);
  ResidualSample out;
  out.point = pt;
  out.scale = mv.F;
  out.rapcsak = rapcsak_residual(mv.phi, pt);
  std::tie(out.eq3a, out.eq3b) = curvature_system_residuals(mv.phi, pt, lambda);
  if (mv.has_phi_tilde) {
    std::tie(out.eq4, out.eq5) =
        z_reduction_residuals(mv.phi_tilde, pt.z1, pt.z2, lambda, z1_floor);
    const BranchResiduals br = branch_residuals(mv.phi_tilde, pt.z2, lambda);
    out.eq6 = br.eq6;
    out.eq7 = br.eq7;
    out.has_reduced = true;
  }
  return out;
}

}  // namespace finsler
