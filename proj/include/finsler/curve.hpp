#pragma once
// Scalar curves usable inside jet computations: constants, affine functions,
// and cubic splines that continue as constants beyond the knot span.  The
// spline ends are clamped to zero slope so the junction with the constant
// extension is C^1 by construction; a residual end slope, however tiny,
// would put a kink into every integral whose argument sweeps past the data
// edge, and derivatives of such integrals would silently miss the moving
// kink's boundary term.  A curve exposes its scaled Taylor coefficients so
// it can be composed with jets exactly.

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "finsler/jet.hpp"

namespace finsler {

class SmoothCurve {
 public:
  enum class Kind { invalid, constant, affine, spline };

  SmoothCurve() = default;

  static SmoothCurve constant(double c) {
    SmoothCurve s;
    s.kind_ = Kind::constant;
    s.a_ = c;
    return s;
  }

  // a + b*t
  static SmoothCurve affine(double a, double b) {
    SmoothCurve s;
    s.kind_ = Kind::affine;
    s.a_ = a;
    s.b_ = b;
    return s;
  }

  // Cubic spline through (t_i, y_i) with zero-slope ends; constant value
  // outside the span (a C^1 continuation, by the end clamping).
  static SmoothCurve cubic_spline(std::vector<double> t, std::vector<double> y) {
    if (t.size() != y.size() || t.size() < 3)
      throw std::invalid_argument("spline needs at least 3 knots");
    for (std::size_t i = 1; i < t.size(); ++i)
      if (!(t[i] > t[i - 1]))
        throw std::invalid_argument("spline knots must be strictly increasing");
    SmoothCurve s;
    s.kind_ = Kind::spline;
    s.t_ = std::move(t);
    s.y_ = std::move(y);
    s.build_second_derivatives();
    return s;
  }

  Kind kind() const { return kind_; }
  bool valid() const { return kind_ != Kind::invalid; }
  bool bounded() const {
    return kind_ == Kind::constant || kind_ == Kind::spline;
  }

  // Abscissae where the curve's piecewise definition changes (empty when the
  // curve is globally smooth).  Integrators split at pullbacks of these.
  const std::vector<double>& breakpoints() const { return t_; }

  double operator()(double t) const { return taylor(t, 0)[0]; }

  // Scaled Taylor coefficients (f, f', f''/2!, f'''/3!) at t, entries beyond
  // `order` zeroed.
  std::array<double, 4> taylor(double t, int order) const {
    return taylor_on_branch(t, order, t);
  }

  // Same coefficients, but with the piecewise branch chosen as if evaluating
  // at `where`; the expansion point stays `t`.  Quadrature over a piece whose
  // interior lies in one branch uses this so endpoint samples that land
  // exactly on a breakpoint (or a rounding error past it) still read the
  // branch the piece lives on, instead of whichever side the lookup happens
  // to pick.  Evaluating a branch polynomial a hair outside its span is the
  // smooth extension, which is exactly what a one-sided limit needs.
  std::array<double, 4> taylor_on_branch(double t, int order,
                                         double where) const {
    if (order < 0 || order > kMaxJetOrder)
      throw std::invalid_argument("curve taylor order out of range");
    std::array<double, 4> c{0.0, 0.0, 0.0, 0.0};
    switch (kind_) {
      case Kind::invalid:
        throw std::logic_error("evaluation of an unset curve");
      case Kind::constant:
        c[0] = a_;
        break;
      case Kind::affine:
        c[0] = a_ + b_ * t;
        if (order >= 1) c[1] = b_;
        break;
      case Kind::spline: {
        const std::size_t nk = t_.size();
        if (where <= t_.front()) {
          c[0] = y_.front();
          break;
        }
        if (where >= t_.back()) {
          c[0] = y_.back();
          break;
        }
        std::size_t i = 1;
        while (i < nk - 1 && where > t_[i]) ++i;
        const double h = t_[i] - t_[i - 1];
        const double A = (t_[i] - t) / h, B = (t - t_[i - 1]) / h;
        const double Ma = m2_[i - 1], Mb = m2_[i];
        c[0] = A * y_[i - 1] + B * y_[i] +
               ((A * A * A - A) * Ma + (B * B * B - B) * Mb) * h * h / 6.0;
        if (order >= 1)
          c[1] = (y_[i] - y_[i - 1]) / h -
                 (3.0 * A * A - 1.0) / 6.0 * h * Ma +
                 (3.0 * B * B - 1.0) / 6.0 * h * Mb;
        if (order >= 2) c[2] = (A * Ma + B * Mb) / 2.0;
        if (order >= 3) c[3] = (Mb - Ma) / h / 6.0;
        break;
      }
    }
    return c;
  }

  JetD apply(const JetD& arg) const {
    const int m = arg.layout().order();
    const auto c = taylor(arg.value(), m);
    return compose_series(arg, std::span<const double>(c.data(), m + 1));
  }

  JetD apply_on_branch(const JetD& arg, double where) const {
    const int m = arg.layout().order();
    const auto c = taylor_on_branch(arg.value(), m, where);
    return compose_series(arg, std::span<const double>(c.data(), m + 1));
  }

 private:
  void build_second_derivatives() {
    // Tridiagonal solve for the spline's second derivatives, with clamped
    // (zero-slope) end rows so f'(t_0) = f'(t_{n-1}) = 0 exactly.
    const std::size_t n = t_.size();
    m2_.assign(n, 0.0);
    std::vector<double> sub(n, 0.0), diag(n, 0.0), sup(n, 0.0), rhs(n, 0.0);
    const double h0 = t_[1] - t_[0], hn = t_[n - 1] - t_[n - 2];
    diag[0] = h0 / 3.0;
    sup[0] = h0 / 6.0;
    rhs[0] = (y_[1] - y_[0]) / h0;
    sub[n - 1] = hn / 6.0;
    diag[n - 1] = hn / 3.0;
    rhs[n - 1] = -(y_[n - 1] - y_[n - 2]) / hn;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double hl = t_[i] - t_[i - 1], hr = t_[i + 1] - t_[i];
      sub[i] = hl / 6.0;
      diag[i] = (hl + hr) / 3.0;
      sup[i] = hr / 6.0;
      rhs[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
    }
    for (std::size_t i = 1; i < n; ++i) {
      const double w = sub[i] / diag[i - 1];
      diag[i] -= w * sup[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m2_[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
      m2_[i] = (rhs[i] - sup[i] * m2_[i + 1]) / diag[i];
  }

  Kind kind_ = Kind::invalid;
  double a_ = 0.0, b_ = 0.0;
  std::vector<double> t_, y_, m2_;
};

}  // namespace finsler
