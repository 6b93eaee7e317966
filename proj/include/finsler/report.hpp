#pragma once
// Reporting layer: the full verification pass over one family (JSON object),
// the (z1, z2) diagnostic grid (CSV), geodesic traces (CSV), and the
// classification suites (JSON array).
//
// Output bytes are part of the contract: fixed key order, 17 significant
// digits, '.' decimal separator regardless of locale, ',' field separator,
// LF line endings.  Worker threads (capped by the FINSLER_THREADS
// environment variable) only ever feed max/min reductions, so the bytes do
// not depend on the thread count, and identical inputs reproduce identical
// output.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "finsler/classification.hpp"
#include "finsler/families.hpp"
#include "finsler/geometry.hpp"
#include "finsler/pde.hpp"
#include "finsler/spray.hpp"
#include "finsler/tensor.hpp"
#include "finsler/version.hpp"

namespace finsler {

// ---------------------------------------------------------------------------
// Deterministic number formatting.
// ---------------------------------------------------------------------------

// 17 significant digits via to_chars: locale-independent and round-trip
// exact.  -0 collapses to 0 so sign-of-zero noise never reaches the output.
inline std::string format_double(double value) {
  value += 0.0;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, 17);
  if (res.ec != std::errc())
    throw std::runtime_error("number formatting failed");
  return std::string(buf, res.ptr);
}

inline std::string json_quote(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  out += '"';
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  out += '"';
  return out;
}

// ---------------------------------------------------------------------------
// Worker pool.  FINSLER_THREADS caps the worker count; aggregation is
// restricted to maxima/minima so results are independent of scheduling.
// ---------------------------------------------------------------------------

inline int worker_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  int count = hw == 0 ? 1 : static_cast<int>(hw);
  if (const char* env = std::getenv("FINSLER_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0') count = std::min<long>(count, std::max(1L, v));
  }
  return std::max(1, count);
}

namespace detail {

// Runs body(i, acc) for i in [0, count) across workers, each with its own
// accumulator, then merges.  Agg must be default-constructible and provide
// merge(const Agg&).  The first exception thrown by any worker is rethrown.
template <typename Agg, typename Body>
Agg parallel_aggregate(int count, const Body& body) {
  const int workers = std::min(worker_thread_count(), std::max(1, count));
  if (workers <= 1) {
    Agg acc;
    for (int i = 0; i < count; ++i) body(i, acc);
    return acc;
  }
  std::vector<Agg> slots(static_cast<std::size_t>(workers));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += workers)
          body(i, slots[static_cast<std::size_t>(w)]);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  Agg acc = std::move(slots.front());
  for (int w = 1; w < workers; ++w)
    acc.merge(slots[static_cast<std::size_t>(w)]);
  return acc;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Full verification pass over one family.
// ---------------------------------------------------------------------------

struct VerifyTolerances {
  double pde = 1e-8;       // projectivity, curvature system, branch equation
  double flag = 1e-6;      // |K - lambda| on random flags
  double geodesic = 1e-8;  // straightness deviation and metric drift
  double det = 1e-8;       // relative closed-vs-matrix determinant gap
};

struct VerifyOptions {
  int samples = 500;
  std::uint64_t seed = 1;
  double z1_floor = 1e-3;
  int flag_count = 32;
  int geodesic_count = 8;
  int geodesic_steps = 1000;
  double geodesic_step_size = 1e-3;
  VerifyTolerances tol;
};

struct ResidualReport {
  std::string family;
  std::vector<std::pair<std::string, double>> params;
  double lambda = 0.0;
  int n = 0;
  std::uint64_t seed = 0;
  int sample_count = 0;
  double max_rapcsak = 0.0;
  double max_eq3a = 0.0;
  double max_eq3b = 0.0;
  double max_eq6 = 0.0;
  double min_eigen_g = 0.0;
  double max_flag_dev = 0.0;
  double max_geodesic_dev = 0.0;
  double det_crosscheck_max_rel = 0.0;
  bool pass = false;
  std::string tool_version = kToolVersion;

  // Compact single-object JSON with the key order fixed by the interface
  // contract (no trailing newline).
  std::string to_json() const {
    std::string s = "{";
    s += "\"family\":" + json_quote(family) + ",";
    s += "\"params\":{";
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (i) s += ",";
      s += json_quote(params[i].first) + ":" + format_double(params[i].second);
    }
    s += "},";
    s += "\"lambda\":" + format_double(lambda) + ",";
    s += "\"n\":" + std::to_string(n) + ",";
    s += "\"seed\":" + std::to_string(seed) + ",";
    s += "\"sample_count\":" + std::to_string(sample_count) + ",";
    s += "\"max_rapcsak\":" + format_double(max_rapcsak) + ",";
    s += "\"max_eq3a\":" + format_double(max_eq3a) + ",";
    s += "\"max_eq3b\":" + format_double(max_eq3b) + ",";
    s += "\"max_eq6\":" + format_double(max_eq6) + ",";
    s += "\"min_eigen_g\":" + format_double(min_eigen_g) + ",";
    s += "\"max_flag_dev\":" + format_double(max_flag_dev) + ",";
    s += "\"max_geodesic_dev\":" + format_double(max_geodesic_dev) + ",";
    s += "\"det_crosscheck_max_rel\":" + format_double(det_crosscheck_max_rel) + ",";
    s += std::string("\"pass\":") + (pass ? "true" : "false") + ",";
    s += "\"tool_version\":" + json_quote(tool_version);
    s += "}";
    return s;
  }
};

namespace detail {

struct SampleAgg {
  double rapcsak = 0.0;
  double eq3a = 0.0;
  double eq3b = 0.0;
  double eq6 = 0.0;
  double det_rel = 0.0;
  double min_eigen = std::numeric_limits<double>::infinity();
  void merge(const SampleAgg& o) {
    rapcsak = std::max(rapcsak, o.rapcsak);
    eq3a = std::max(eq3a, o.eq3a);
    eq3b = std::max(eq3b, o.eq3b);
    eq6 = std::max(eq6, o.eq6);
    det_rel = std::max(det_rel, o.det_rel);
    min_eigen = std::min(min_eigen, o.min_eigen);
  }
};

struct MaxAgg {
  double value = 0.0;
  void merge(const MaxAgg& o) { value = std::max(value, o.value); }
};

}  // namespace detail

// Runs the whole battery on one family: the projectivity equation and the
// curvature system at the family's own curvature on every sample, the branch
// equation, the closed-vs-matrix determinant cross-check and convexity
// margin, random flag curvatures against the pinned constant, and straight-
// line geodesic traces.
inline ResidualReport run_verify(const FamilyDescriptor& fam,
                                 const VerifyOptions& opts) {
  fam.validate();
  if (!fam.has_lambda())
    throw std::invalid_argument(
        "the integral-form family has no pinned curvature to verify against");
  if (opts.samples < 1)
    throw std::invalid_argument("sample count must be at least 1");
  if (opts.flag_count < 0 || opts.geodesic_count < 0)
    throw std::invalid_argument("counts must be non-negative");

  const double lam = fam.lambda();
  const std::vector<EvalPoint> pts =
      sample_domain(fam, opts.samples, opts.seed, opts.z1_floor);

  ResidualReport rep;
  rep.family = fam.name();
  rep.params = fam.params_list();
  rep.lambda = lam;
  rep.n = fam.n;
  rep.seed = opts.seed;
  rep.sample_count = opts.samples;

  // Per-sample residuals, determinant cross-check, convexity margin.
  const detail::SampleAgg agg = detail::parallel_aggregate<detail::SampleAgg>(
      static_cast<int>(pts.size()), [&](int i, detail::SampleAgg& acc) {
        const EvalPoint& pt = pts[static_cast<std::size_t>(i)];
        const ResidualSample rs = residual_sample(fam, pt, lam, opts.z1_floor);
        acc.rapcsak = std::max(acc.rapcsak, std::fabs(rs.rapcsak));
        acc.eq3a = std::max(acc.eq3a, std::fabs(rs.eq3a));
        acc.eq3b = std::max(acc.eq3b, std::fabs(rs.eq3b));
        acc.eq6 = std::max(acc.eq6, std::fabs(rs.eq6));
        const FundamentalTensor ft = fundamental_tensor_closed(fam, pt);
        acc.det_rel = std::max(
            acc.det_rel, std::fabs(ft.det_numeric - ft.det_closed) /
                             (std::fabs(ft.det_closed) + kResidualEps));
        acc.min_eigen = std::min(acc.min_eigen, min_eigenvalue(ft.g));
      });
  rep.max_rapcsak = agg.rapcsak;
  rep.max_eq3a = agg.eq3a;
  rep.max_eq3b = agg.eq3b;
  rep.max_eq6 = agg.eq6;
  rep.det_crosscheck_max_rel = agg.det_rel;
  rep.min_eigen_g = agg.min_eigen;

  // Flags are drawn serially (one stream, independent of the worker count)
  // and evaluated in parallel.  A draw nearly parallel to the base direction
  // is rejected up front so the curvature quotient stays well-conditioned.
  std::vector<Flag> flags;
  if (opts.flag_count > 0) {
    Rng frng(opts.seed ^ 0xF1A65EEDu);
    flags.reserve(static_cast<std::size_t>(opts.flag_count));
    long attempts = 0;
    while (static_cast<int>(flags.size()) < opts.flag_count) {
      if (++attempts > 100L * (opts.flag_count + 1))
        throw std::runtime_error("flag sampling stalled");
      const EvalPoint& pt = pts[flags.size() % pts.size()];
      const std::vector<double> V = frng.unit_vector(fam.n);
      if (std::fabs(dot(V, pt.y)) / pt.u > 0.9) continue;
      flags.push_back(make_flag(pt, V));
    }
  }
  rep.max_flag_dev =
      detail::parallel_aggregate<detail::MaxAgg>(
          static_cast<int>(flags.size()),
          [&](int i, detail::MaxAgg& acc) {
            const double K =
                flag_curvature(fam, flags[static_cast<std::size_t>(i)]);
            acc.value = std::max(acc.value, std::fabs(K - lam));
          })
          .value;

  // Geodesic starts are pulled toward the center and launched slowly enough
  // that a fixed-step trace stays inside every family's domain.
  struct GeoStart {
    std::vector<double> x0, y0;
  };
  std::vector<GeoStart> starts;
  const double radius = fam.sampling_radius();
  for (int j = 0; j < opts.geodesic_count; ++j) {
    const std::size_t stride =
        std::max<std::size_t>(1, pts.size() / std::max(1, opts.geodesic_count));
    const EvalPoint& pt = pts[(static_cast<std::size_t>(j) * stride) % pts.size()];
    GeoStart gs;
    // Starts sit at most 0.4 radius out with speed 0.1 radius: even on the
    // one family whose metric stays finite along outward rays, a unit of
    // parameter cannot carry the trace into the stop margin.
    const double shrink = std::min(1.0, 0.4 * radius / std::max(pt.r, 1e-12));
    gs.x0 = pt.x;
    for (double& xi : gs.x0) xi *= shrink;
    gs.y0 = pt.y;  // unit length by construction
    for (double& yi : gs.y0) yi *= 0.1 * radius;
    starts.push_back(std::move(gs));
  }
  rep.max_geodesic_dev =
      detail::parallel_aggregate<detail::MaxAgg>(
          static_cast<int>(starts.size()),
          [&](int i, detail::MaxAgg& acc) {
            const GeoStart& gs = starts[static_cast<std::size_t>(i)];
            const GeodesicTrajectory tr =
                geodesic_integrate(fam, gs.x0, gs.y0, opts.geodesic_steps,
                                   opts.geodesic_step_size);
            acc.value = std::max(acc.value, straightness_deviation(tr));
            acc.value = std::max(acc.value, metric_drift(tr));
          })
          .value;

  rep.pass = rep.max_rapcsak < opts.tol.pde && rep.max_eq3a < opts.tol.pde &&
             rep.max_eq3b < opts.tol.pde && rep.max_eq6 < opts.tol.pde &&
             rep.max_flag_dev < opts.tol.flag &&
             rep.max_geodesic_dev < opts.tol.geodesic &&
             rep.det_crosscheck_max_rel < opts.tol.det && rep.min_eigen_g > 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Diagnostic grid over (z1, z2).
// ---------------------------------------------------------------------------

struct GridOptions {
  double z1_lo = 0.0;
  double z1_hi = 0.7;
  double z2_lo = -0.7;
  double z2_hi = 0.7;
  int resolution = 20;  // points per axis, endpoints included
};

// CSV over the (z1, z2) rectangle, row-major with z1 varying slowest.  Each
// cell is realized at the representative configuration x = (z2, z1, 0, ...),
// y = (1, 0, ...); out-of-domain cells keep their coordinates and leave the
// four value fields empty.
inline std::string run_grid(const FamilyDescriptor& fam,
                            const GridOptions& opts) {
  fam.validate();
  if (opts.resolution < 2)
    throw std::invalid_argument("grid resolution must be at least 2");
  if (!(opts.z1_hi > opts.z1_lo) || !(opts.z2_hi > opts.z2_lo))
    throw std::invalid_argument("grid ranges need hi > lo");
  if (opts.z1_lo < 0.0)
    throw std::invalid_argument("z1 is non-negative by construction");

  const int res = opts.resolution;
  const auto axis = [res](double lo, double hi, int i) {
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(res - 1);
  };

  struct RowAgg {
    std::vector<std::pair<int, std::string>> rows;
    void merge(const RowAgg& o) {
      rows.insert(rows.end(), o.rows.begin(), o.rows.end());
    }
  };
  const int cells = res * res;
  RowAgg agg = detail::parallel_aggregate<RowAgg>(cells, [&](int cell,
                                                             RowAgg& acc) {
    const int i = cell / res, j = cell % res;
    const double z1v = axis(opts.z1_lo, opts.z1_hi, i);
    const double z2v = axis(opts.z2_lo, opts.z2_hi, j);
    std::string row = format_double(z1v) + "," + format_double(z2v);

    std::vector<double> x(static_cast<std::size_t>(fam.n), 0.0);
    std::vector<double> y(static_cast<std::size_t>(fam.n), 0.0);
    x[0] = z2v;
    x[1] = z1v;
    y[0] = 1.0;
    const EvalPoint pt = invariants_from(x, y);
    if (!fam.contains(pt)) {
      row += ",,,,";
    } else {
      const double phi_tilde = phi_eval(fam, pt, 0).F / pt.u;
      std::vector<double> V(static_cast<std::size_t>(fam.n), 0.0);
      V[1] = 1.0;
      const double K = flag_curvature(fam, make_flag(pt, V));
      const FundamentalTensor ft = fundamental_tensor_closed(fam, pt);
      row += "," + format_double(phi_tilde);
      row += "," + format_double(K);
      row += "," + format_double(ft.det_numeric);
      row += "," + format_double(min_eigenvalue(ft.g));
    }
    acc.rows.emplace_back(cell, std::move(row));
  });
  std::sort(agg.rows.begin(), agg.rows.end());

  std::string out = "z1,z2,phi_tilde,K_numeric,det_g,min_eigen_g\n";
  for (auto& [cell, row] : agg.rows) {
    out += row;
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Geodesic trace.
// ---------------------------------------------------------------------------

struct GeodesicRun {
  GeodesicTrajectory trajectory;
  double deviation = 0.0;  // straightness, normalized by arc length
  double drift = 0.0;      // relative metric drift of the velocity
  std::string csv;
};

// Integrates one geodesic and renders it as CSV: t, the coordinates, the
// Euclidean speed, and the metric value of the velocity, followed by comment
// lines with the straightness summary (and the stop step if the trace hit
// the domain margin).
inline GeodesicRun run_geodesic(const FamilyDescriptor& fam,
                                std::span<const double> x0,
                                std::span<const double> y0, int steps,
                                double step_size) {
  GeodesicRun run;
  run.trajectory = geodesic_integrate(fam, x0, y0, steps, step_size);
  const GeodesicTrajectory& tr = run.trajectory;
  run.deviation = straightness_deviation(tr);
  run.drift = metric_drift(tr);

  std::string out = "t";
  for (int i = 1; i <= fam.n; ++i) out += ",x_" + std::to_string(i);
  out += ",speed,F_along\n";
  for (std::size_t k = 0; k < tr.x.size(); ++k) {
    out += format_double(tr.t[k]);
    for (int i = 0; i < fam.n; ++i) out += "," + format_double(tr.x[k][i]);
    out += "," + format_double(tr.y[k].norm());
    out += "," + format_double(tr.F[k]);
    out += '\n';
  }
  out += "# straightness_deviation = " + format_double(run.deviation) + "\n";
  out += "# metric_drift = " + format_double(run.drift) + "\n";
  if (tr.truncated)
    out += "# truncated_at_step = " + std::to_string(tr.x.size()) + "\n";
  run.csv = std::move(out);
  return run;
}

// ---------------------------------------------------------------------------
// Classification suites.
// ---------------------------------------------------------------------------

struct LabCheck {
  std::string check;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline std::string lab_checks_to_json(std::span<const LabCheck> checks) {
  std::string s = "[";
  for (std::size_t i = 0; i < checks.size(); ++i) {
    if (i) s += ",";
    s += "{\"check\":" + json_quote(checks[i].check) + ",";
    s += "\"max_residual\":" + format_double(checks[i].max_residual) + ",";
    s += "\"tolerance\":" + format_double(checks[i].tolerance) + ",";
    s += std::string("\"pass\":") + (checks[i].pass ? "true" : "false") + "}";
  }
  s += "]";
  return s;
}

namespace detail {

inline LabCheck make_check(std::string name, double residual, double tol) {
  LabCheck c;
  c.check = std::move(name);
  c.max_residual = residual;
  c.tolerance = tol;
  c.pass = residual < tol;
  return c;
}

// Adds a constant shift to one coefficient: the uniform way every suite
// realizes its perturbed negative control.
inline CoefficientFn shifted(CoefficientFn fn, double shift) {
  if (shift == 0.0) return fn;
  return [fn = std::move(fn), shift](const JetD& z) { return fn(z) + shift; };
}

}  // namespace detail

// Runs one classification suite.  `perturb` shifts a single coefficient (or
// constant) by the given amount, turning every exact identity into a visible
// failure; 0 keeps the suite on the closed-form solutions.
inline std::vector<LabCheck> run_classify_lab(const std::string& suite,
                                              double perturb = 0.0) {
  std::vector<LabCheck> checks;

  if (suite == "ode-lemma") {
    const double tol = 1e-12;
    const std::vector<double> grid = uniform_grid(0.1, 0.9, 50);
    struct Inst {
      const char* name;
      QuadraticReciprocal q;
    };
    const Inst instances[] = {
        {"ode_lambda0_1", {1.0, 2.0, 1.0, 0.0}},
        {"ode_lambda0_2", {1.0, 4.0, 4.0, 0.0}},
        {"ode_lambda0_3", {2.0, 2.0, 0.5, 0.0}},
        {"ode_lambda1_1", {1.0, 0.0, 1.0, 1.0}},
        {"ode_lambda1_2", {1.0, 2.0, 2.0, 1.0}},
        {"ode_lambda1_3", {2.0, 2.0, 1.0, 1.0}},
        {"ode_lambda-1_1", {1.0, 4.0, 3.0, -1.0}},
        {"ode_lambda-1_2", {1.0, 6.0, 8.0, -1.0}},
        {"ode_lambda-1_3", {2.0, 6.0, 4.0, -1.0}},
    };
    for (const Inst& inst : instances) {
      QuadraticReciprocal q = inst.q;
      q.c3 += perturb;
      checks.push_back(
          detail::make_check(inst.name, ode_lemma_residual(q, grid), tol));
    }
    return checks;
  }

  if (suite == "k1-system") {
    const double tol = 1e-10;
    const std::vector<double> grid = uniform_grid(0.0, 3.0, 200);
    const auto add = [&](std::string name,
                         std::pair<CoefficientFn, CoefficientFn> fns) {
      const double r =
          k1_system_residual(fns.first, detail::shifted(fns.second, perturb),
                             grid)
              .max();
      checks.push_back(detail::make_check(std::move(name), r, tol));
    };
    add("k1_flat_c=1", k1_flat_coefficients(1.0));
    add("k1_flat_c=2.5", k1_flat_coefficients(2.5));
    add("k1_two_param_plus", k1_two_param_coefficients(1.0, 0.3, +1));
    add("k1_two_param_minus", k1_two_param_coefficients(1.0, 0.3, -1));
    return checks;
  }

  if (suite == "kneg1-system") {
    const double tol = 1e-10;
    const std::vector<double> grid = uniform_grid(0.0, 0.9, 200);
    const auto add = [&](std::string name,
                         std::pair<CoefficientFn, CoefficientFn> fns) {
      const double r = k_neg1_system_residual(
                           fns.first, detail::shifted(fns.second, perturb), grid)
                           .max();
      checks.push_back(detail::make_check(std::move(name), r, tol));
    };
    add("kneg1_flat_c=1", kneg1_flat_coefficients(1.0));
    add("kneg1_two_param_plus", kneg1_two_param_coefficients(0.1, 0.6, +1));
    add("kneg1_two_param_minus", kneg1_two_param_coefficients(0.1, 0.6, -1));
    return checks;
  }

  if (suite == "conserved") {
    const double tol = 1e-10;
    const JetLayout& L = JetLayout::get(1, 1);
    // The drifts are re-derived from the coefficient callables (rather than
    // calling conserved_quantities) so the shift lands on the coefficient
    // while the conserved targets keep their unperturbed values.
    const auto drift3 = [&](const CoefficientFn& c1_fn,
                            const CoefficientFn& c2_fn,
                            std::span<const double> grid, double product,
                            bool has_product, double combo_sign,
                            double combo_base, double combo_z_sign) {
      double worst = 0.0;
      for (double z1v : grid) {
        const JetD z = JetD::variable(L, 0, z1v);
        const JetD C1 = c1_fn(z), C2 = c2_fn(z);
        const double c1 = C1.value(), c2 = C2.value();
        if (has_product)
          worst = std::max(worst, std::fabs(c1 * c2 - product));
        const double combo = c1 * c1 + combo_sign * c2 * c2 -
                             (combo_base + combo_z_sign * z1v * z1v);
        worst = std::max(worst, std::fabs(combo));
        worst = std::max(worst, std::fabs((C1 * C2).deriv({0})));
      }
      return worst;
    };

    {
      const double d1 = 1.0, d2 = 0.3;
      auto [c1, c2] = k1_two_param_coefficients(d1, d2, +1);
      const double r =
          drift3(c1, detail::shifted(c2, perturb), uniform_grid(0.0, 2.0, 100),
                 +d1, true, -1.0, 2.0 * d2, +1.0);
      checks.push_back(detail::make_check("conserved_bryant_type", r, tol));
    }
    {
      const double d1 = 0.1, d2 = 0.6;
      auto [c1, c2] = kneg1_two_param_coefficients(d1, d2, +1);
      const double r =
          drift3(c1, detail::shifted(c2, perturb), uniform_grid(0.0, 0.9, 100),
                 +d1, true, +1.0, 2.0 * d2, -1.0);
      checks.push_back(detail::make_check("conserved_neg_pair", r, tol));
    }
    {
      const double c = 1.0;
      CoefficientFn c2_fn = [c](const JetD& z) { return sqrt(c - sqr(z)); };
      c2_fn = detail::shifted(std::move(c2_fn), perturb);
      double worst = 0.0;
      for (double z1v : uniform_grid(0.0, 0.9, 100)) {
        const JetD z = JetD::variable(L, 0, z1v);
        const JetD C2 = c2_fn(z);
        const double c2 = C2.value();
        worst = std::max(worst, std::fabs(c2 * c2 + z1v * z1v - c));
        worst = std::max(worst, std::fabs(c2 * C2.deriv({0}) + z1v));
      }
      checks.push_back(detail::make_check("conserved_berwald", worst, tol));
    }
    return checks;
  }

  if (suite == "remarks") {
    const RemarkChecks rc = remark_cross_checks();
    double reparam = rc.bryant_reparam;
    if (perturb != 0.0) {
      // The shift lands on the first constant of the reparametrization; the
      // other three identities have no free coefficient to move.
      const double kPi = 3.14159265358979323846;
      reparam = 0.0;
      for (double alpha : {kPi / 12.0, kPi / 6.0, kPi / 5.0})
        reparam = std::max(
            reparam,
            bryant_reparam_gap(alpha, 0.5 * std::sin(2.0 * alpha) + perturb,
                               0.5 * std::cos(2.0 * alpha)));
    }
    checks.push_back(
        detail::make_check("bryant_reparametrization", reparam, 1e-10));
    checks.push_back(
        detail::make_check("berwald_quartic_ratio", rc.berwald_example, 1e-12));
    checks.push_back(
        detail::make_check("randers_half_quarter", rc.randers_half, 1e-12));
    checks.push_back(detail::make_check("randers_negative_curvature",
                                        rc.randers_curvature, 1e-9));
    return checks;
  }

  throw std::invalid_argument("unknown suite: " + suite);
}

}  // namespace finsler
