#pragma once
// Independent curvature oracle in ambient coordinates: spray coefficients
// from the y-Hessian of F^2, the Riemann operator by directional
// differentiation of the spray, flag curvature, the constant-curvature
// tensor identity, and a fixed-step geodesic integrator.
//
// Everything differentiable comes from jets in the 2n ambient variables
// (x first, then y); the two contracted second derivatives the Riemann
// operator needs are threaded through the scalar type as Dual directions.
// No finite differences enter this path, so it can serve as an oracle for
// the invariant-coordinate route at tolerances near rounding.
//
// The pipeline is generic over how F is produced from ambient jets (a
// functor with a templated call operator), so deliberately broken metrics
// can be pushed through it as negative controls.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "finsler/families.hpp"
#include "finsler/geometry.hpp"
#include "finsler/jet.hpp"
#include "finsler/pde.hpp"

namespace finsler {

// Metric functor adapter for a family descriptor.
struct FamilyMetricFn {
  const FamilyDescriptor* fam;
  template <typename S>
  Jet<S> operator()(const std::vector<Jet<S>>& x,
                    const std::vector<Jet<S>>& y) const {
    return metric_ambient(*fam, x, y);
  }
};

namespace detail {

// Copy of `a` in the same variables at a lower order (coefficients are
// plain polynomial coefficients, so truncation is coefficient selection).
template <typename S>
Jet<S> truncate_to_order(const Jet<S>& a, int order) {
  const JetLayout& src = a.layout();
  const JetLayout& dst = JetLayout::get(src.nvars(), order);
  Jet<S> out(dst);
  for (int i = 0; i < dst.size(); ++i)
    out.coeff(i) = a.coeff(src.index_of(dst.exponents(i)));
  return out;
}

// Solve A G = b with order-1 jet entries by Gaussian elimination with
// partial pivoting on the scalar part.  Jet arithmetic carries the first
// derivatives of the solution through the solve.
template <typename S>
std::vector<Jet<S>> solve_linear_jets(std::vector<Jet<S>> A,
                                      std::vector<Jet<S>> b, int n) {
  double amax = 0.0;
  for (const auto& e : A) amax = std::max(amax, std::fabs(scalar_value(e)));
  for (int c = 0; c < n; ++c) {
    int piv = c;
    double best = std::fabs(scalar_value(A[static_cast<std::size_t>(c) * n + c]));
    for (int r = c + 1; r < n; ++r) {
      const double cand =
          std::fabs(scalar_value(A[static_cast<std::size_t>(r) * n + c]));
      if (cand > best) {
        best = cand;
        piv = r;
      }
    }
    if (!(best > 1e-13 * amax))
      throw std::domain_error("metric tensor is singular at this point");
    if (piv != c) {
      for (int j = c; j < n; ++j)
        std::swap(A[static_cast<std::size_t>(c) * n + j],
                  A[static_cast<std::size_t>(piv) * n + j]);
      std::swap(b[static_cast<std::size_t>(c)], b[static_cast<std::size_t>(piv)]);
    }
    for (int r = c + 1; r < n; ++r) {
      const Jet<S> f = A[static_cast<std::size_t>(r) * n + c] /
                       A[static_cast<std::size_t>(c) * n + c];
      for (int j = c; j < n; ++j)
        A[static_cast<std::size_t>(r) * n + j] -=
            f * A[static_cast<std::size_t>(c) * n + j];
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(c)];
    }
  }
  std::vector<Jet<S>> out(b);
  for (int r = n - 1; r >= 0; --r) {
    Jet<S> s = b[static_cast<std::size_t>(r)];
    for (int j = r + 1; j < n; ++j)
      s -= A[static_cast<std::size_t>(r) * n + j] * out[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(r)] = s / A[static_cast<std::size_t>(r) * n + r];
  }
  return out;
}

// Spray coefficients as order-1 jets in the 2n ambient variables:
//   G^i = (1/4) g^{il} ( [F^2]_{x^k y^l} y^k - [F^2]_{x^l} ).
// The order-3 jet of F^2 supplies the tensor and the right-hand side as
// order-1 jets, and the jet-valued solve propagates their derivatives.
template <typename S, typename MetricFn>
std::vector<Jet<S>> spray_first_order(const MetricFn& metric, int n,
                                      const std::vector<S>& xv,
                                      const std::vector<S>& yv) {
  const JetLayout& L3 = JetLayout::get(2 * n, 3);
  std::vector<Jet<S>> x, y;
  x.reserve(static_cast<std::size_t>(n));
  y.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    x.push_back(Jet<S>::variable(L3, i, xv[static_cast<std::size_t>(i)]));
  for (int i = 0; i < n; ++i)
    y.push_back(Jet<S>::variable(L3, n + i, yv[static_cast<std::size_t>(i)]));
  const Jet<S> F2 = sqr(metric(x, y));

  const JetLayout& L1 = JetLayout::get(2 * n, 1);
  std::vector<Jet<S>> A(static_cast<std::size_t>(n) * n, Jet<S>(L1));
  std::vector<Jet<S>> b;
  b.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Jet<S> dyi = F2.derive(n + i);
    for (int j = i; j < n; ++j) {
      const Jet<S> gij = 0.5 * dyi.derive(n + j);
      A[static_cast<std::size_t>(i) * n + j] = gij;
      if (j != i) A[static_cast<std::size_t>(j) * n + i] = gij;
    }
  }
  for (int l = 0; l < n; ++l) {
    Jet<S> s(L1);
    for (int k = 0; k < n; ++k)
      s += F2.derive(k).derive(n + l) *
           Jet<S>::variable(L1, n + k, yv[static_cast<std::size_t>(k)]);
    s -= truncate_to_order(F2.derive(l), 1);
    b.push_back(0.25 * s);
  }
  return solve_linear_jets(std::move(A), std::move(b), n);
}

// Value-level spray for the integrator: one order-2 jet of F^2, then a
// Cholesky solve (the tensor must be positive definite along a geodesic).
template <typename MetricFn>
Eigen::VectorXd spray_values(const MetricFn& metric, int n,
                             const Eigen::VectorXd& xv,
                             const Eigen::VectorXd& yv) {
  const JetLayout& L2 = JetLayout::get(2 * n, 2);
  std::vector<JetD> x, y;
  x.reserve(static_cast<std::size_t>(n));
  y.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x.push_back(JetD::variable(L2, i, xv[i]));
  for (int i = 0; i < n; ++i) y.push_back(JetD::variable(L2, n + i, yv[i]));
  const JetD F2 = sqr(metric(x, y));
  Eigen::MatrixXd g(n, n);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      g(i, j) = 0.5 * F2.deriv({n + i, n + j});
      g(j, i) = g(i, j);
    }
  for (int l = 0; l < n; ++l) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += F2.deriv({k, n + l}) * yv[k];
    rhs(l) = 0.25 * (s - F2.deriv({l}));
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success)
    throw std::domain_error(
        "metric tensor is not positive definite along the path");
  return llt.solve(rhs);
}

// Metric value at plain ambient coordinates via order-0 jets.
template <typename MetricFn>
double metric_value_fn(const MetricFn& metric, int n, const Eigen::VectorXd& xv,
                       const Eigen::VectorXd& yv) {
  const JetLayout& L0 = JetLayout::get(2 * n, 0);
  std::vector<JetD> x, y;
  for (int i = 0; i < n; ++i) x.push_back(JetD::constant(L0, xv[i]));
  for (int i = 0; i < n; ++i) y.push_back(JetD::constant(L0, yv[i]));
  return metric(x, y).value();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Spray coefficients.
// ---------------------------------------------------------------------------

// Spray vector with its first derivatives; G is positively 2-homogeneous
// in y, so G(x, s y) = s^2 G(x, y).
struct SprayData {
  int n = 0;
  Eigen::VectorXd G;
  Eigen::MatrixXd dG_dx;  // (i, k) = dG^i / dx^k
  Eigen::MatrixXd dG_dy;  // (i, k) = dG^i / dy^k
};

template <typename MetricFn>
SprayData spray_coefficients_fn(const MetricFn& metric, int n,
                                std::span<const double> x,
                                std::span<const double> y) {
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
    throw std::invalid_argument("coordinate dimension mismatch");
  const std::vector<double> xv(x.begin(), x.end()), yv(y.begin(), y.end());
  const auto Gj = detail::spray_first_order<double>(metric, n, xv, yv);
  SprayData sd;
  sd.n = n;
  sd.G.resize(n);
  sd.dG_dx.resize(n, n);
  sd.dG_dy.resize(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& gi = Gj[static_cast<std::size_t>(i)];
    sd.G[i] = gi.value();
    for (int k = 0; k < n; ++k) {
      sd.dG_dx(i, k) = gi.deriv({k});
      sd.dG_dy(i, k) = gi.deriv({n + k});
    }
  }
  return sd;
}

inline SprayData spray_coefficients(const FamilyDescriptor& fam,
                                    std::span<const double> x,
                                    std::span<const double> y) {
  fam.validate();
  const EvalPoint pt = invariants_from(x, y);
  if (!fam.contains(pt))
    throw std::domain_error("point outside metric domain");
  return spray_coefficients_fn(FamilyMetricFn{&fam}, fam.n, x, y);
}

// Relative defect of 2-homogeneity, |G(x, s y) - s^2 G(x, y)| / |s^2 G|.
inline double homogeneity_defect(const FamilyDescriptor& fam,
                                 std::span<const double> x,
                                 std::span<const double> y, double s = 2.0) {
  const SprayData base = spray_coefficients(fam, x, y);
  std::vector<double> ys(y.begin(), y.end());
  for (double& c : ys) c *= s;
  const SprayData scaled = spray_coefficients(fam, x, ys);
  const double defect = (scaled.G - s * s * base.G).norm();
  return defect / (s * s * base.G.norm() + kResidualEps);
}

// ---------------------------------------------------------------------------
// Riemann operator and flag curvature.
// ---------------------------------------------------------------------------

// R^i_k = 2 dG^i/dx^k - y^j d2G^i/dx^j dy^k + 2 G^j d2G^i/dy^j dy^k
//         - dG^i/dy^j dG^j/dy^k,
// assembled from two Dual-direction passes: the first contracts the mixed
// x-derivative with y, the second contracts the y-Hessian with G itself.
template <typename MetricFn>
Eigen::MatrixXd riemann_operator_fn(const MetricFn& metric, int n,
                                    std::span<const double> x,
                                    std::span<const double> y) {
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
    throw std::invalid_argument("coordinate dimension mismatch");

  std::vector<Dual> xB(static_cast<std::size_t>(n)), yB(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    xB[static_cast<std::size_t>(i)] =
        Dual(x[static_cast<std::size_t>(i)], y[static_cast<std::size_t>(i)]);
    yB[static_cast<std::size_t>(i)] = Dual(y[static_cast<std::size_t>(i)], 0.0);
  }
  const auto GB = detail::spray_first_order<Dual>(metric, n, xB, yB);

  Eigen::VectorXd G0(n);
  Eigen::MatrixXd dGdx(n, n), dGdy(n, n), mixB(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& gi = GB[static_cast<std::size_t>(i)];
    G0[i] = gi.value().val;
    for (int k = 0; k < n; ++k) {
      dGdx(i, k) = gi.deriv({k}).val;
      const Dual dk = gi.deriv({n + k});
      dGdy(i, k) = dk.val;
      mixB(i, k) = dk.dot;  // y^j d2G^i/dx^j dy^k
    }
  }

  std::vector<Dual> xC(static_cast<std::size_t>(n)), yC(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    xC[static_cast<std::size_t>(i)] = Dual(x[static_cast<std::size_t>(i)], 0.0);
    yC[static_cast<std::size_t>(i)] = Dual(y[static_cast<std::size_t>(i)], G0[i]);
  }
  const auto GC = detail::spray_first_order<Dual>(metric, n, xC, yC);
  Eigen::MatrixXd hessC(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      hessC(i, k) = GC[static_cast<std::size_t>(i)].deriv({n + k}).dot;

  return 2.0 * dGdx - mixB + 2.0 * hessC - dGdy * dGdy;
}

inline Eigen::MatrixXd riemann_operator(const FamilyDescriptor& fam,
                                        std::span<const double> x,
                                        std::span<const double> y) {
  fam.validate();
  const EvalPoint pt = invariants_from(x, y);
  if (!fam.contains(pt))
    throw std::domain_error("point outside metric domain");
  return riemann_operator_fn(FamilyMetricFn{&fam}, fam.n, x, y);
}

// Flag curvature  K = g(R(W), W) / (F^2 g(W, W) - g(y, W)^2)  with W the
// flag vector g-orthogonalized against y.  Throws for degenerate flags.
template <typename MetricFn>
double flag_curvature_fn(const MetricFn& metric, int n, const Flag& flag) {
  const EvalPoint& pt = flag.point;
  if (pt.dim() != n) throw std::invalid_argument("flag dimension mismatch");

  const JetLayout& L2 = JetLayout::get(2 * n, 2);
  std::vector<JetD> xj, yj;
  for (int i = 0; i < n; ++i)
    xj.push_back(JetD::variable(L2, i, pt.x[static_cast<std::size_t>(i)]));
  for (int i = 0; i < n; ++i)
    yj.push_back(JetD::variable(L2, n + i, pt.y[static_cast<std::size_t>(i)]));
  const JetD Fj = metric(xj, yj);
  const double F = Fj.value();
  const JetD F2 = sqr(Fj);
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      g(i, j) = 0.5 * F2.deriv({n + i, n + j});
      g(j, i) = g(i, j);
    }

  Eigen::Map<const Eigen::VectorXd> yv(pt.y.data(), n);
  Eigen::Map<const Eigen::VectorXd> Vv(flag.V.data(), n);
  const Eigen::VectorXd gy = g * yv;
  const double gyy = yv.dot(gy);
  const double gVV = Vv.dot(g * Vv);
  if (!(gyy > 0.0) || !(gVV > 0.0))
    throw std::domain_error("metric tensor is not positive on the flag");
  const Eigen::VectorXd W = Vv - (gy.dot(Vv) / gyy) * yv;
  const Eigen::VectorXd gW = g * W;
  const double gWW = W.dot(gW);
  if (gWW <= 1e-8 * gVV)
    throw std::invalid_argument(
        "flag vector is numerically parallel to the direction");

  const Eigen::MatrixXd R = riemann_operator_fn(metric, n, pt.x, pt.y);
  const double num = W.dot(g * (R * W));
  const double den = F * F * gWW - gy.dot(W) * gy.dot(W);
  if (!(den > 1e-12 * F * F * gVV))
    throw std::invalid_argument("degenerate flag denominator");
  return num / den;
}

inline double flag_curvature(const FamilyDescriptor& fam, const Flag& flag) {
  fam.validate();
  if (!fam.contains(flag.point))
    throw std::domain_error("point outside metric domain");
  return flag_curvature_fn(FamilyMetricFn{&fam}, fam.n, flag);
}

// Normalized Frobenius residual of the constant-curvature identity
//   R^i_k = lambda (F^2 delta^i_k - y^i g_{kj} y^j).
template <typename MetricFn>
double constant_curvature_tensor_residual_fn(const MetricFn& metric, int n,
                                             std::span<const double> x,
                                             std::span<const double> y,
                                             double lambda) {
  const Eigen::MatrixXd R = riemann_operator_fn(metric, n, x, y);

  const JetLayout& L2 = JetLayout::get(2 * n, 2);
  std::vector<JetD> xj, yj;
  for (int i = 0; i < n; ++i)
    xj.push_back(JetD::variable(L2, i, x[static_cast<std::size_t>(i)]));
  for (int i = 0; i < n; ++i)
    yj.push_back(JetD::variable(L2, n + i, y[static_cast<std::size_t>(i)]));
  const JetD Fj = metric(xj, yj);
  const double F = Fj.value();
  const JetD F2 = sqr(Fj);
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      g(i, j) = 0.5 * F2.deriv({n + i, n + j});
      g(j, i) = g(i, j);
    }
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  const Eigen::VectorXd gy = g * yv;
  const Eigen::MatrixXd bracket =
      F * F * Eigen::MatrixXd::Identity(n, n) - yv * gy.transpose();
  // The bracket norm anchors the scale even when lambda = 0, where the
  // ideal operator vanishes and dividing by it alone would compare rounding
  // noise against itself.
  const double scale =
      R.norm() + (1.0 + std::fabs(lambda)) * bracket.norm() + kResidualEps;
  return (R - lambda * bracket).norm() / scale;
}

inline double constant_curvature_tensor_residual(const FamilyDescriptor& fam,
                                                 std::span<const double> x,
                                                 std::span<const double> y,
                                                 double lambda) {
  fam.validate();
  const EvalPoint pt = invariants_from(x, y);
  if (!fam.contains(pt))
    throw std::domain_error("point outside metric domain");
  return constant_curvature_tensor_residual_fn(FamilyMetricFn{&fam}, fam.n, x,
                                               y, lambda);
}

// ---------------------------------------------------------------------------
// Geodesics.
// ---------------------------------------------------------------------------

struct GeodesicTrajectory {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> y;
  std::vector<double> F;  // metric value of the velocity at each node
  bool truncated = false;  // stopped at the boundary margin
};

// Classical RK4 on  x' = y,  y' = -2 G(x, y), with a fixed step for
// deterministic output.  If `stop_radius` is set, integration truncates
// once |x| crosses it (the margin below the domain boundary).
template <typename MetricFn>
GeodesicTrajectory geodesic_integrate_fn(const MetricFn& metric, int n,
                                         std::span<const double> x0,
                                         std::span<const double> y0, int steps,
                                         double step_size,
                                         std::optional<double> stop_radius) {
  if (steps < 1) throw std::invalid_argument("steps must be at least 1");
  if (!(step_size > 0.0))
    throw std::invalid_argument("step size must be positive");
  if (static_cast<int>(x0.size()) != n || static_cast<int>(y0.size()) != n)
    throw std::invalid_argument("coordinate dimension mismatch");

  Eigen::VectorXd xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = x0[static_cast<std::size_t>(i)];
    ys[i] = y0[static_cast<std::size_t>(i)];
  }
  if (stop_radius && xs.norm() >= *stop_radius)
    throw std::domain_error("starting point is outside the integrable region");

  GeodesicTrajectory tr;
  tr.t.push_back(0.0);
  tr.x.push_back(xs);
  tr.y.push_back(ys);
  tr.F.push_back(detail::metric_value_fn(metric, n, xs, ys));

  const auto accel = [&](const Eigen::VectorXd& px, const Eigen::VectorXd& py) {
    return Eigen::VectorXd(-2.0 * detail::spray_values(metric, n, px, py));
  };

  const double h = step_size;
  for (int k = 0; k < steps; ++k) {
    const Eigen::VectorXd kx1 = ys, kv1 = accel(xs, ys);
    const Eigen::VectorXd kx2 = ys + 0.5 * h * kv1;
    const Eigen::VectorXd kv2 = accel(xs + 0.5 * h * kx1, ys + 0.5 * h * kv1);
    const Eigen::VectorXd kx3 = ys + 0.5 * h * kv2;
    const Eigen::VectorXd kv3 = accel(xs + 0.5 * h * kx2, ys + 0.5 * h * kv2);
    const Eigen::VectorXd kx4 = ys + h * kv3;
    const Eigen::VectorXd kv4 = accel(xs + h * kx3, ys + h * kv3);
    const Eigen::VectorXd xn =
        xs + (h / 6.0) * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4);
    const Eigen::VectorXd yn =
        ys + (h / 6.0) * (kv1 + 2.0 * kv2 + 2.0 * kv3 + kv4);
    if (stop_radius && xn.norm() >= *stop_radius) {
      tr.truncated = true;
      break;
    }
    xs = xn;
    ys = yn;
    tr.t.push_back(h * static_cast<double>(k + 1));
    tr.x.push_back(xs);
    tr.y.push_back(ys);
    tr.F.push_back(detail::metric_value_fn(metric, n, xs, ys));
  }
  return tr;
}

inline GeodesicTrajectory geodesic_integrate(const FamilyDescriptor& fam,
                                             std::span<const double> x0,
                                             std::span<const double> y0,
                                             int steps,
                                             double step_size = 1e-3) {
  fam.validate();
  std::optional<double> stop;
  if (const auto rad = fam.domain_radius()) stop = *rad * (1.0 - 0.02);
  return geodesic_integrate_fn(FamilyMetricFn{&fam}, fam.n, x0, y0, steps,
                               step_size, stop);
}

// Max distance from the trajectory to the line through its start along its
// initial velocity, divided by the arc length covered.
inline double straightness_deviation(const GeodesicTrajectory& tr) {
  if (tr.x.size() < 2)
    throw std::invalid_argument("trajectory too short to measure");
  const Eigen::VectorXd& origin = tr.x.front();
  const Eigen::VectorXd dir = tr.y.front().normalized();
  double arc = 0.0;
  double worst = 0.0;
  for (std::size_t k = 1; k < tr.x.size(); ++k) {
    arc += (tr.x[k] - tr.x[k - 1]).norm();
    const Eigen::VectorXd w = tr.x[k] - origin;
    worst = std::max(worst, (w - w.dot(dir) * dir).norm());
  }
  return worst / (arc + kResidualEps);
}

// Max relative drift of the metric value of the velocity along the
// trajectory (geodesics preserve it exactly).
inline double metric_drift(const GeodesicTrajectory& tr) {
  if (tr.F.empty()) throw std::invalid_argument("empty trajectory");
  const double f0 = tr.F.front();
  double worst = 0.0;
  for (double f : tr.F) worst = std::max(worst, std::fabs(f - f0));
  return worst / (std::fabs(f0) + kResidualEps);
}

}  // namespace finsler
