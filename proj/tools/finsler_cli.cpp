// Command-line front end: `verify` runs the full residual battery on one
// family and emits a JSON report, `grid` samples diagnostics over a (z1, z2)
// rectangle as CSV, `geodesic` traces one geodesic as CSV, and
// `classify-lab` runs the solution-structure suites as a JSON array.
//
// Exit codes: 0 success, 1 verification failure (a residual above tolerance,
// a failing suite check, or a trajectory leaving the domain almost
// immediately), 2 usage or parameter errors.  Diagnostics go to stderr;
// machine-readable output goes to stdout or --out.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "finsler/report.hpp"

namespace {

struct FamilyCli {
  std::string family;
  double c = 1.0;
  double alpha = 0.5235987755982988;  // pi / 6
  double d1 = std::numeric_limits<double>::quiet_NaN();
  double d2 = std::numeric_limits<double>::quiet_NaN();
  std::string sign = "plus";
  int dim = 3;
};

void add_family_options(CLI::App* cmd, FamilyCli& f) {
  cmd->add_option("--family", f.family,
                  "family name (euclidean, berwald, projective_spherical, "
                  "bryant_classic, klein, funk, randers_k_neg1, bryant_type, "
                  "neg_pair; hyphens accepted)")
      ->required();
  cmd->add_option("--c", f.c,
                  "radius parameter (berwald, klein, randers_k_neg1)");
  cmd->add_option("--alpha", f.alpha, "angle parameter (bryant_classic)");
  cmd->add_option("--d1", f.d1,
                  "first coefficient constant (bryant_type, neg_pair)");
  cmd->add_option("--d2", f.d2,
                  "second coefficient constant (bryant_type, neg_pair)");
  cmd->add_option("--sign", f.sign, "branch sign")
      ->check(CLI::IsMember({"plus", "minus"}));
  cmd->add_option("--dim", f.dim, "ambient dimension")
      ->check(CLI::Range(2, 6));
}

finsler::FamilyDescriptor build_family(const FamilyCli& f) {
  std::string name = f.family;
  for (char& ch : name)
    if (ch == '-') ch = '_';
  const int sign = f.sign == "minus" ? -1 : +1;
  const bool has_d1 = !std::isnan(f.d1);
  const bool has_d2 = !std::isnan(f.d2);

  using FD = finsler::FamilyDescriptor;
  FD fam;
  if (name == "euclidean") {
    fam = FD::euclidean(f.dim);
  } else if (name == "berwald") {
    fam = FD::berwald(f.c, sign, f.dim);
  } else if (name == "projective_spherical") {
    fam = FD::projective_spherical(f.dim);
  } else if (name == "bryant_classic") {
    fam = FD::bryant_classic(f.alpha, f.dim);
  } else if (name == "klein") {
    fam = FD::klein(f.c, f.dim);
  } else if (name == "funk") {
    fam = FD::funk(f.dim);
  } else if (name == "randers_k_neg1") {
    fam = FD::randers_k_neg1(f.c, sign, f.dim);
  } else if (name == "bryant_type") {
    fam = FD::bryant_type(has_d1 ? f.d1 : 1.0, has_d2 ? f.d2 : 0.3, sign,
                          f.dim);
  } else if (name == "neg_pair") {
    fam = FD::neg_pair(has_d1 ? f.d1 : 0.1, has_d2 ? f.d2 : 0.6, sign, f.dim);
  } else if (name == "integral_form") {
    throw std::invalid_argument(
        "the integral-form family is not available from the command line");
  } else {
    throw std::invalid_argument("unknown family: " + f.family);
  }
  fam.validate();
  return fam;
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "numerical verification of spherically symmetric projective metrics "
      "with constant flag curvature"};
  app.require_subcommand(1);

  // verify ------------------------------------------------------------------
  FamilyCli verify_fam;
  auto* verify = app.add_subcommand(
      "verify", "run the full residual battery on one family (JSON report)");
  add_family_options(verify, verify_fam);
  int samples = 500;
  std::uint64_t seed = 1;
  double z1_floor = 1e-3;
  finsler::VerifyTolerances tol;
  std::string verify_out;
  verify->add_option("--samples", samples, "number of domain samples")
      ->check(CLI::PositiveNumber);
  verify->add_option("--seed", seed, "sampling seed");
  verify->add_option("--tol", tol.pde, "equation-residual tolerance");
  verify->add_option("--tol-flag", tol.flag, "flag-curvature tolerance");
  verify->add_option("--tol-geodesic", tol.geodesic,
                     "geodesic straightness/drift tolerance");
  verify->add_option("--tol-det", tol.det,
                     "relative determinant cross-check tolerance");
  verify->add_option("--z1-floor", z1_floor,
                     "smallest z1 admitted into the sample");
  verify->add_option("--out", verify_out, "write the report to this file");

  // grid --------------------------------------------------------------------
  FamilyCli grid_fam;
  auto* grid = app.add_subcommand(
      "grid", "sample diagnostics over a (z1, z2) rectangle (CSV)");
  add_family_options(grid, grid_fam);
  std::vector<double> z1_range{0.0, 0.7};
  std::vector<double> z2_range{-0.7, 0.7};
  int resolution = 20;
  std::string grid_out;
  grid->add_option("--z1-range", z1_range, "z1 min and max")->expected(2);
  grid->add_option("--z2-range", z2_range, "z2 min and max")->expected(2);
  grid->add_option("--resolution", resolution,
                   "points per axis, endpoints included")
      ->check(CLI::Range(2, 4096));
  grid->add_option("--out", grid_out, "write the CSV to this file");

  // geodesic ----------------------------------------------------------------
  FamilyCli geo_fam;
  auto* geo = app.add_subcommand(
      "geodesic", "trace one geodesic with a fixed-step integrator (CSV)");
  add_family_options(geo, geo_fam);
  std::vector<double> x0, y0;
  int steps = 1000;
  double dt = 1e-3;
  std::string geo_out;
  geo->add_option("--x0", x0, "starting point (--dim coordinates)")
      ->required()
      ->expected(-1);
  geo->add_option("--y0", y0, "starting velocity (--dim coordinates)")
      ->required()
      ->expected(-1);
  geo->add_option("--steps", steps, "integrator steps")
      ->check(CLI::PositiveNumber);
  geo->add_option("--dt", dt, "integrator step size")
      ->check(CLI::PositiveNumber);
  geo->add_option("--out", geo_out, "write the CSV to this file");

  // classify-lab ------------------------------------------------------------
  auto* lab = app.add_subcommand(
      "classify-lab", "run one solution-structure suite (JSON array)");
  std::string suite;
  double perturb = 0.0;
  std::string lab_out;
  lab->add_option("--suite", suite,
                  "one of: ode-lemma, k1-system, kneg1-system, conserved, "
                  "remarks")
      ->required()
      ->check(CLI::IsMember({"ode-lemma", "k1-system", "kneg1-system",
                             "conserved", "remarks"}));
  lab->add_option("--perturb", perturb,
                  "constant shift applied to one coefficient (negative "
                  "control)");
  lab->add_option("--out", lab_out, "write the JSON to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);                                     // message to stderr
    return 2;
  }

  try {
    if (verify->parsed()) {
      const finsler::FamilyDescriptor fam = build_family(verify_fam);
      finsler::VerifyOptions opts;
      opts.samples = samples;
      opts.seed = seed;
      opts.z1_floor = z1_floor;
      opts.tol = tol;
      const finsler::ResidualReport rep = finsler::run_verify(fam, opts);
      write_output(rep.to_json() + "\n", verify_out);
      return rep.pass ? 0 : 1;
    }

    if (grid->parsed()) {
      const finsler::FamilyDescriptor fam = build_family(grid_fam);
      finsler::GridOptions opts;
      opts.z1_lo = z1_range[0];
      opts.z1_hi = z1_range[1];
      opts.z2_lo = z2_range[0];
      opts.z2_hi = z2_range[1];
      opts.resolution = resolution;
      write_output(finsler::run_grid(fam, opts), grid_out);
      return 0;
    }

    if (geo->parsed()) {
      const finsler::FamilyDescriptor fam = build_family(geo_fam);
      if (static_cast<int>(x0.size()) != fam.n ||
          static_cast<int>(y0.size()) != fam.n)
        throw std::invalid_argument(
            "--x0 and --y0 need exactly --dim coordinates");
      const finsler::EvalPoint start = finsler::invariants_from(x0, y0);
      if (!fam.contains(start))
        throw std::invalid_argument(
            "starting point is outside the metric domain");
      const finsler::GeodesicRun run =
          finsler::run_geodesic(fam, x0, y0, steps, dt);
      write_output(run.csv, geo_out);
      const long completed = static_cast<long>(run.trajectory.x.size()) - 1;
      if (run.trajectory.truncated && completed < 10) {
        std::cerr << "error: trajectory left the domain after " << completed
                  << " steps\n";
        return 1;
      }
      return 0;
    }

    if (lab->parsed()) {
      const std::vector<finsler::LabCheck> checks =
          finsler::run_classify_lab(suite, perturb);
      write_output(finsler::lab_checks_to_json(checks) + "\n", lab_out);
      for (const auto& c : checks)
        if (!c.pass) return 1;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
