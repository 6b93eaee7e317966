#pragma once
// Fundamental tensor of a spherically symmetric metric, its closed-form
// determinant, and strong-convexity diagnostics.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "finsler/families.hpp"
#include "finsler/geometry.hpp"
#include "finsler/jet.hpp"

namespace finsler {

struct FundamentalTensor {
  Eigen::MatrixXd g;
  double det_closed = 0.0;
  double det_numeric = 0.0;
};

namespace detail {

// det(g) = (phi/u)^(n+1) * phi_u^(n-2) * [phi_u + (r^2 u^2 - v^2) phi_vv / u]
inline double det_closed_from(const JetD& phi, const EvalPoint& pt, int n) {
  const double ph = phi.value();
  const double phi_u = phi.deriv({1});
  const double phi_vv = phi.deriv({2, 2});
  const double u = pt.u;
  const double bracket =
      phi_u + (pt.r * pt.r * u * u - pt.v * pt.v) * phi_vv / u;
  return std::pow(ph / u, n + 1) * std::pow(phi_u, n - 2) * bracket;
}

}  // namespace detail

inline double det_closed_form(const FamilyDescriptor& fam, const EvalPoint& pt,
                              int n) {
  if (n < 2) throw std::invalid_argument("dimension must be at least 2");
  const MetricValue mv = phi_eval(fam, pt, 2);
  return detail::det_closed_from(mv.phi, pt, n);
}

inline FundamentalTensor fundamental_tensor_closed(const FamilyDescriptor& fam,
                                                   const EvalPoint& pt) {
  const MetricValue mv = phi_eval(fam, pt, 2);
  const double ph = mv.phi.value();
  const double phi_u = mv.phi.deriv({1});
  const double phi_v = mv.phi.deriv({2});
  const double phi_uu = mv.phi.deriv({1, 1});
  const double phi_uv = mv.phi.deriv({1, 2});
  const double phi_vv = mv.phi.deriv({2, 2});
  const double u = pt.u;

  const double c_delta = ph * phi_u / u;
  const double c_xx = phi_v * phi_v + ph * phi_vv;
  const double c_yy =
      (phi_u * phi_u + ph * phi_uu) / (u * u) - ph * phi_u / (u * u * u);
  const double c_xy = (phi_u * phi_v + ph * phi_uv) / u;

  const int n = pt.dim();
  FundamentalTensor out;
  out.g.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double gij = c_xx * pt.x[i] * pt.x[j] + c_yy * pt.y[i] * pt.y[j] +
                   c_xy * (pt.x[i] * pt.y[j] + pt.x[j] * pt.y[i]);
      if (i == j) gij += c_delta;
      out.g(i, j) = gij;
    }
  out.det_numeric = out.g.determinant();
  out.det_closed = detail::det_closed_from(mv.phi, pt, n);
  return out;
}

// Independent tensor: half the direction-Hessian of F^2, from jets in the
// ambient y coordinates (never touches the closed g_ij coefficients).
inline Eigen::MatrixXd hessian_metric(const FamilyDescriptor& fam,
                                      const EvalPoint& pt) {
  const int n = pt.dim();
  const JetLayout& ly = JetLayout::get(n, 2);
  std::vector<JetD> xj, yj;
  xj.reserve(n);
  yj.reserve(n);
  for (int i = 0; i < n; ++i) {
    xj.push_back(JetD::constant(ly, pt.x[i]));
    yj.push_back(JetD::variable(ly, i, pt.y[i]));
  }
  const JetD E = 0.5 * sqr(metric_ambient(fam, xj, yj));
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = E.deriv({i, j});
  return g;
}

// Smallest eigenvalue after explicit symmetrization (jet round-off leaves
// asymmetry at the 1e-15 level).
inline double min_eigenvalue(const Eigen::MatrixXd& g_in) {
  const Eigen::MatrixXd g = 0.5 * (g_in + g_in.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigenvalue solve failed");
  return es.eigenvalues().minCoeff();
}

inline bool positive_definite(const Eigen::MatrixXd& g) {
  return min_eigenvalue(g) > 1e-10 * g.trace();
}

// Minimum eigenvalue of g over a sample; negative margins are reported, not
// treated as errors.
inline double convexity_margin(const FamilyDescriptor& fam,
                               std::span<const EvalPoint> sample) {
  if (sample.empty())
    throw std::invalid_argument("convexity margin needs at least one sample");
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& pt : sample)
    margin = std::min(margin,
                      min_eigenvalue(fundamental_tensor_closed(fam, pt).g));
  return margin;
}

}  // namespace finsler
