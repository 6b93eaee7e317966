#pragma once
// Point/vector bookkeeping for spherically symmetric metrics: the scalar
// invariants (r, u, v) and (z1, z2) of a position/direction pair, jet lifts of
// those invariants, flags (point, direction, transverse section), and the
// deterministic domain sampler used by every verification pass.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "finsler/jet.hpp"

namespace finsler {

// ---------------------------------------------------------------------------
// Invariants of a (position, direction) pair under simultaneous rotation:
//   r = |x|, u = |y|, v = <x, y>,
//   z1 = sqrt(r^2 - v^2/u^2)  (norm of x orthogonal to y),
//   z2 = v / u                (signed length of x along y).
// ---------------------------------------------------------------------------

struct EvalPoint {
  std::vector<double> x;
  std::vector<double> y;
  double r = 0.0, u = 0.0, v = 0.0;
  double z1 = 0.0, z2 = 0.0;

  int dim() const { return static_cast<int>(x.size()); }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline EvalPoint invariants_from(std::span<const double> x,
                                 std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("position and direction dimensions differ");
  if (x.size() < 2)
    throw std::invalid_argument("dimension must be at least 2");
  EvalPoint p;
  p.x.assign(x.begin(), x.end());
  p.y.assign(y.begin(), y.end());
  p.u = norm(y);
  if (p.u == 0.0) throw std::invalid_argument("direction vector must be nonzero");
  p.r = norm(x);
  p.v = dot(x, y);
  p.z2 = p.v / p.u;
  const double z1sq = p.r * p.r - p.z2 * p.z2;
  p.z1 = z1sq > 0.0 ? std::sqrt(z1sq) : 0.0;
  return p;
}

// A flag: a point with direction y and a transverse vector V spanning the
// section.  V must be linearly independent of y.
struct Flag {
  EvalPoint point;
  std::vector<double> V;
};

inline Flag make_flag(const EvalPoint& pt, std::span<const double> V) {
  if (static_cast<int>(V.size()) != pt.dim())
    throw std::invalid_argument("flag vector dimension mismatch");
  // Reject V (numerically) parallel to y.
  const double vn = norm(V);
  if (vn == 0.0) throw std::invalid_argument("flag vector must be nonzero");
  const double c = dot(V, pt.y) / (vn * pt.u);
  if (std::fabs(std::fabs(c) - 1.0) < 1e-12)
    throw std::invalid_argument("flag vector is parallel to the direction");
  Flag f;
  f.point = pt;
  f.V.assign(V.begin(), V.end());
  return f;
}

// ---------------------------------------------------------------------------
// Jet lifts of the invariants: independent-variable jets around the point's
// values.  Variable order is fixed and documented so derivative extraction is
// unambiguous at call sites.
// ---------------------------------------------------------------------------

struct RuvJets {
  JetD r, u, v;  // variables: 0 = r, 1 = u, 2 = v
};

inline RuvJets lift_ruv(const EvalPoint& p, int order) {
  const JetLayout& ly = JetLayout::get(3, order);
  return {JetD::variable(ly, 0, p.r), JetD::variable(ly, 1, p.u),
          JetD::variable(ly, 2, p.v)};
}

struct ZJets {
  JetD z1, z2;  // variables: 0 = z1, 1 = z2
};

inline ZJets lift_z(const EvalPoint& p, int order) {
  const JetLayout& ly = JetLayout::get(2, order);
  return {JetD::variable(ly, 0, p.z1), JetD::variable(ly, 1, p.z2)};
}

// ---------------------------------------------------------------------------
// Deterministic sampling.  All randomness flows through this generator: a
// fixed 64-bit engine with explicit bit-to-double mapping, so streams are
// identical across platforms and standard-library versions.
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() {  // Box-Muller, cache-free for reproducibility
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  std::vector<double> unit_vector(int n) {
    std::vector<double> w(n);
    double nn = 0.0;
    do {
      for (auto& wi : w) wi = normal();
      nn = norm(w);
    } while (nn < 1e-12);
    for (auto& wi : w) wi /= nn;
    return w;
  }

  // Uniform in the open ball of the given radius.
  std::vector<double> in_ball(int n, double radius) {
    std::vector<double> w = unit_vector(n);
    const double rr = radius * std::pow(uniform(), 1.0 / n);
    for (auto& wi : w) wi *= rr;
    return w;
  }

 private:
  std::mt19937_64 eng_;
};

// Draw (x, y) pairs with |y| = 1, x inside the given radius (shrunk by the
// boundary margin), and z1 at or above the floor.  Throws when the request is
// infeasible or rejection stalls.
inline std::vector<EvalPoint> sample_points(int dim, double radius,
                                            bool bounded, int count,
                                            std::uint64_t seed, double z1_floor,
                                            double boundary_margin) {
  if (dim < 2) throw std::invalid_argument("dimension must be at least 2");
  if (count < 0) throw std::invalid_argument("sample count must be non-negative");
  const double r_eff = bounded ? radius * (1.0 - boundary_margin) : radius;
  if (!(r_eff > 0.0) || z1_floor >= r_eff)
    throw std::invalid_argument(
        "sampling domain is empty: z1 floor meets or exceeds usable radius");
  Rng rng(seed);
  std::vector<EvalPoint> out;
  out.reserve(count);
  long attempts = 0;
  const long max_attempts = 10000L * (count + 1);
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > max_attempts)
      throw std::runtime_error("domain sampling stalled; constraints too tight");
    std::vector<double> x = rng.in_ball(dim, r_eff);
    std::vector<double> y = rng.unit_vector(dim);
    EvalPoint p = invariants_from(x, y);
    if (p.z1 < z1_floor) continue;
    if (p.r <= 1e-9) continue;  // keep the radial origin out of PDE residuals
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace finsler
