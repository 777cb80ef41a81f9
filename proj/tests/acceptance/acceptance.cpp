// Acceptance suite: one PASS/FAIL line per criterion. With arguments, runs
// only the listed criterion numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "curlvar/brezis_nirenberg.hpp"
#include "curlvar/cli_io.hpp"
#include "curlvar/convex_inner.hpp"
#include "curlvar/energy.hpp"
#include "curlvar/groundstate.hpp"
#include "curlvar/helmholtz.hpp"
#include "curlvar/nehari.hpp"
#include "curlvar/operators.hpp"
#include "curlvar/spectral.hpp"
#include "curlvar/spectrum.hpp"
#include "oracles/cavity_ladder.hpp"
#include "oracles/multiplicity_bruteforce.hpp"
#include "oracles/radial_quadrature.hpp"

using namespace curlvar;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int number;
  std::string title;
  double budget_seconds;
  std::function<Outcome()> body;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

GridSpec pi_cube(int n) { return GridSpec::cube(kPi, n); }

double l6(const VectorField& u) { return lp_norm(u, 6.0); }

VectorField random_face_field(const GridSpec& grid, std::uint64_t seed) {
  VectorField b(grid, Location::face);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int c = 0; c < 3; ++c)
    for (double& x : b[c].span()) x = normal(rng);
  return b;
}

// Smooth random field with |u|_6 = 1 (not divergence free).
VectorField smooth_field(const GridSpec& grid, std::uint64_t seed) {
  VectorField u = solve_hodge(random_edge_field(grid, seed));
  u *= 1.0 / l6(u);
  return u;
}

VectorField sphere_point(const GridSpec& grid, std::uint64_t seed) {
  VectorField v = project_V(solve_hodge(random_edge_field(grid, seed)));
  v *= 1.0 / std::sqrt(norm_sq(curl(v)));
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// ---- 1 ---------------------------------------------------------------------
Outcome mimetic() {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> cells(4, 48);
  std::uniform_real_distribution<double> length(0.5, 4.0);
  double worst_dc = 0.0, worst_cg = 0.0, worst_adj = 0.0;
  int largest = 0;
  for (int trial = 0; trial < 5; ++trial) {
    GridSpec g;
    g.cells = trial == 0 ? std::array<int, 3>{48, 48, 48} : std::array<int, 3>{cells(rng), cells(rng), cells(rng)};
    g.lengths = {length(rng), length(rng), length(rng)};
    largest = std::max(largest, g.cells[0] * g.cells[1] * g.cells[2]);
    const std::uint64_t s = 100 + 10 * static_cast<std::uint64_t>(trial);
    const VectorField u = random_edge_field(g, s);
    const ScalarField xi = random_potential(g, s + 1);
    const VectorField b = random_face_field(g, s + 2);
    const VectorField cu = curl(u), gx = grad(xi);
    worst_dc = std::max(worst_dc, div(cu).max_abs() / cu.max_abs());
    worst_cg = std::max(worst_cg, curl(gx).max_abs() / gx.max_abs());
    const double a1 = std::abs(inner(cu, b) - inner(u, curl_adjoint(b))) / std::sqrt(norm_sq(cu) * norm_sq(b));
    const double a2 = std::abs(inner(gx, u) + inner(xi, div(u))) / std::sqrt(norm_sq(gx) * norm_sq(u));
    worst_adj = std::max({worst_adj, a1, a2});
  }
  const bool ok = worst_dc <= 1e-13 && worst_cg <= 1e-13 && worst_adj <= 1e-13 && largest == 48 * 48 * 48;
  return {ok, fmt("|div curl|/|curl| %.2e, |curl grad|/|grad| %.2e, adjointness %.2e", worst_dc, worst_cg, worst_adj)};
}

// ---- 2 ---------------------------------------------------------------------
Outcome helmholtz_suite() {
  const GridSpec g = pi_cube(32);
  const double h = g.spacing(0);
  double recon = 0.0, orth = 0.0, pyth = 0.0, divergence = 0.0;
  for (int k = 0; k < 20; ++k) {
    const VectorField u = random_edge_field(g, 200 + static_cast<std::uint64_t>(k));
    const DecomposedField d = decompose(u);
    const double uu = norm_sq(u);
    recon = std::max(recon, std::sqrt(norm_sq(u - d.v - grad(d.xi)) / uu));
    orth = std::max(orth, std::abs(inner(d.v, d.w)) / std::sqrt(norm_sq(d.v) * norm_sq(d.w)));
    pyth = std::max(pyth, std::abs(uu - norm_sq(d.v) - norm_sq(d.w)) / uu);
    divergence = std::max(divergence, h * std::sqrt(inner(div(d.v), div(d.v)) / uu));
  }
  const bool ok = recon <= 1e-9 && orth <= 1e-9 && pyth <= 1e-9 && divergence <= 1e-9;
  return {ok, fmt("reconstruction %.2e, orthogonality %.2e, Pythagoras %.2e, h|div v|/|u| %.2e", recon, orth, pyth,
                  divergence)};
}

// ---- 3 ---------------------------------------------------------------------
Outcome inner_minimizer() {
  const GridSpec g = pi_cube(32);
  double reported = 0.0, independent = 0.0, homog = 0.0, unique = 0.0;
  for (int k = 0; k < 10; ++k) {
    const std::uint64_t s = 300 + 10 * static_cast<std::uint64_t>(k);
    const VectorField u = smooth_field(g, s);
    // The minimizer is weakly determined where |u + w| is small (the Hessian
    // weight is |u + w|^4), so uniqueness is checked at a tight solve.
    InnerOptions tight;
    tight.tol = 1e-11;
    const InnerSolution a = minimize_w(u, {}, tight);
    const InnerSolution scaled = minimize_w(2.5 * u, {}, tight);
    InnerOptions other = tight;
    other.initial_xi = random_potential(g, s + 1);
    const InnerSolution b = minimize_w(u, {}, other);
    reported = std::max({reported, a.optimality_residual, scaled.optimality_residual, b.optimality_residual});
    // Hoelder-normalized first variation along random gradients.
    const VectorField full = u + a.w_tilde;
    const VectorField N = nonlinear_gradient(full);
    for (int j = 0; j < 3; ++j) {
      const VectorField dz = grad(random_potential(g, s + 2 + static_cast<std::uint64_t>(j)));
      independent = std::max(independent, std::abs(inner(N, dz)) / (std::pow(l6(full), 5) * l6(dz)));
    }
    homog = std::max(homog, l6(scaled.w_tilde - 2.5 * a.w_tilde) / l6(a.w_tilde));
    unique = std::max(unique, l6(b.w_tilde - a.w_tilde) / l6(a.w_tilde));
  }
  const bool ok = reported <= 1e-8 && independent <= 1e-8 && homog <= 1e-7 && unique <= 1e-7;
  return {ok, fmt("optimality %.2e (independent %.2e), homogeneity %.2e, two-start %.2e at inner tol 1e-11", reported,
                  independent, homog, unique)};
}

// ---- 4 ---------------------------------------------------------------------
Outcome nehari_identities() {
  double ray = 0.0, energy_gap = 0.0, round_trip = 0.0;
  const GridSpec g = pi_cube(32);
  for (int k = 0; k < 5; ++k) {
    const NehariPoint p = project_nehari(project_V(random_edge_field(g, 400 + static_cast<std::uint64_t>(k))));
    const EnergyReport e = energy(p.u);
    ray = std::max(ray, std::abs(e.curl_energy - e.l6_6) / e.l6_6);
    energy_gap = std::max(energy_gap, std::abs(e.J - e.l6_6 / 3.0) / e.J);
    const double S = std::pow(3.0 * e.J, 2.0 / 3.0);
    round_trip = std::max(round_trip, std::abs(std::pow(S, 1.5) / 3.0 - e.J) / e.J);
  }
  // Generalized Nehari points for lambda = -1 below the first eigenvalue.
  const GridSpec small = pi_cube(16);
  const double lambda = -1.0;
  const SpectralSubspace empty = build_Vtilde(curl_curl_eigs(small, 4).pairs, lambda);
  for (int k = 0; k < 3; ++k) {
    const VectorField v = project_V(random_edge_field(small, 450 + static_cast<std::uint64_t>(k)));
    const NehariPoint p = project_nehari_lambda(v, lambda, empty);
    const EnergyReport e = energy(p.u, lambda);
    ray = std::max(ray, std::abs(e.curl_energy + lambda * e.l2_sq - e.l6_6) / e.l6_6);
    energy_gap = std::max(energy_gap, std::abs(*e.J_lambda - e.l6_6 / 3.0) / *e.J_lambda);
  }
  const bool ok = ray <= 1e-8 && energy_gap <= 1e-8 && round_trip <= 1e-14;
  return {ok, fmt("| |curl u|^2 - |u|_6^6 | rel %.2e, |J - |u|_6^6/3| rel %.2e, S round trip %.2e", ray, energy_gap,
                  round_trip)};
}

// ---- 5 ---------------------------------------------------------------------
Outcome gap_sampling() {
  const GridSpec g = pi_cube(24);
  const NehariPoint p = project_nehari(project_V(random_edge_field(g, 500)));
  std::mt19937_64 rng(501);
  std::uniform_real_distribution<double> t_dist(0.0, 3.0), w_dist(0.0, 6.0);
  const double u_norm = std::sqrt(norm_sq(p.u));
  double min_gap = INFINITY, min_phi = INFINITY, direct = 0.0;
  for (int k = 0; k < 100; ++k) {
    VectorField w = grad(random_potential(g, 600 + static_cast<std::uint64_t>(k)));
    w *= w_dist(rng) * u_norm / std::sqrt(norm_sq(w));
    const GapReport r = nehari_gap(p.u, t_dist(rng), w);
    min_gap = std::min(min_gap, r.gap);
    min_phi = std::min(min_phi, r.min_phi);
    direct = std::max(direct, std::abs(r.gap - r.gap_direct) / std::max(1.0, std::abs(r.gap)));
  }
  const GapReport id = nehari_gap(p.u, 1.0, VectorField(g));
  double id_phi = 0.0;
  for (double x : id.phi) id_phi = std::max(id_phi, std::abs(x));
  const bool ok = min_gap >= -1e-10 && min_phi >= -1e-12 && std::abs(id.gap) <= 1e-12 && id_phi <= 1e-12;
  return {ok, fmt("min gap %.3e, min phi %.3e, gap at (1,0) %.1e, direct-energy agreement %.1e", min_gap, min_phi,
                  std::abs(id.gap), direct)};
}

// ---- 6 ---------------------------------------------------------------------
Outcome envelope_gradient() {
  const GridSpec g = pi_cube(16);
  NehariOptions tight;
  tight.tol = 1e-11;
  tight.inner.tol = 1e-11;
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const std::uint64_t s = 700 + 2 * static_cast<std::uint64_t>(k);
    const VectorField v = sphere_point(g, s);
    const SphereEvaluation e = evaluate_sphere(v, tight);
    VectorField h = sphere_point(g, s + 1);
    h.axpy(-inner(curl(h), curl(v)), v);
    const double predicted = inner(curl(e.gradient), curl(h));
    for (double step : {1e-3, 1e-4, 1e-5}) {
      const double fd =
          (sphere_objective(v + step * h, tight) - sphere_objective(v - step * h, tight)) / (2.0 * step);
      worst = std::max(worst, std::abs(fd / predicted - 1.0));
    }
  }
  return {worst <= 1e-4, fmt("max |fd / predicted - 1| = %.2e over 5 points x 3 steps", worst)};
}

// ---- 7 ---------------------------------------------------------------------
Outcome cavity_spectrum() {
  const GridSpec g = pi_cube(48);
  const std::vector<oracles::Level> continuum = oracles::continuum_ladder(g.lengths, 3);
  const std::vector<oracles::Level> discrete = oracles::discrete_ladder(g.lengths, g.cells, 3);
  const int count = continuum[0].multiplicity + continuum[1].multiplicity + 1;
  const std::vector<Cluster> ladder = clusters(curl_curl_eigs(g, count));
  if (ladder.size() < 2) return {false, "fewer than two clusters resolved"};
  bool ok = continuum[0].value == 2.0 && continuum[0].multiplicity == 3 && continuum[1].value == 3.0;
  std::string detail;
  for (int k = 0; k < 2; ++k) {
    const double rel = std::abs(ladder[k].lambda / continuum[k].value - 1.0);
    const double rel_discrete = std::abs(ladder[k].lambda / discrete[k].value - 1.0);
    ok = ok && rel <= 0.02 && ladder[k].multiplicity == continuum[k].multiplicity && !ladder[k].truncated &&
         rel_discrete <= 1e-6;
    detail += fmt("%.6f (x%.0f) vs %.0f (x%.0f); ", ladder[k].lambda, ladder[k].multiplicity, continuum[k].value,
                  continuum[k].multiplicity);
  }
  return {ok, detail + "discrete-mode oracle agrees to 1e-6"};
}

// ---- 8 ---------------------------------------------------------------------
Outcome constant_ordering() {
  const GridSpec wide = GridSpec::centered_cube(8.0, 48);
  const double oracle = sobolev_oracle(wide, 1.0);
  const double reference = oracles::cutoff_instanton_quotient(1.0, 0.9 * 8.0);
  const bool oracle_ok = std::abs(oracle / reference - 1.0) <= 0.02;
  std::string detail = fmt("oracle %.5f vs quadrature %.5f; ", oracle, reference);
  bool ok = oracle_ok;
  double finest_margin = -INFINITY;
  bool finest_converged = false;
  for (int n : {16, 32, 48}) {
    const GridSpec g = pi_cube(n);
    const GroundStateResult r = minimize_sphere(g);
    const double S_oracle = sobolev_oracle(g, kPi / 16.0);
    const double margin = r.S_estimate - S_oracle;
    if (r.converged && margin < 0.0) ok = false;
    detail += std::to_string(n) + "^3: S_bar " + fmt("%.4f", r.S_estimate) + (r.converged ? "" : " (not converged)") +
              " margin " + fmt("%.4f", margin) + (n == 48 ? "" : "; ");
    if (n == 48) {
      finest_margin = margin;
      finest_converged = r.converged;
    }
  }
  ok = ok && finest_converged && finest_margin > 0.0;
  return {ok, detail};
}

// ---- 9 and 10 --------------------------------------------------------------
struct BNSetup {
  std::vector<EigenPair> pairs;
  C0Reference ref;
};

const BNSetup& bn_setup() {
  static const BNSetup setup = [] {
    const GridSpec g = pi_cube(32);
    BNSetup s;
    s.pairs = curl_curl_eigs(g, 6).pairs;
    s.ref = reference_from(minimize_sphere(g));
    return s;
  }();
  return setup;
}

Outcome bn_bounds() {
  const BNSetup& s = bn_setup();
  const SweepReport sweep = sweep_c_lambda({-1.9, -1.5, -1.0}, s.pairs, s.ref);
  bool ok = sweep.failures.empty() && sweep.monotonicity_violations.empty() && s.ref.converged;
  std::string detail = fmt("c0 %.5f; ", s.ref.c0);
  for (const BNResult& r : sweep.results) {
    ok = ok && r.converged && r.c_lambda <= r.eigen_gap_bound + 1e-6 && r.c_lambda <= s.ref.c0 + 1e-6;
    detail += fmt("c(%.2f) = %.5f <= bound %.5f; ", r.lambda, r.c_lambda, r.eigen_gap_bound);
  }
  return {ok, detail + "monotonicity violations " + std::to_string(sweep.monotonicity_violations.size())};
}

Outcome bn_trend() {
  const BNSetup& s = bn_setup();
  const SweepReport sweep = sweep_c_lambda({-1.99, -1.9, -1.5}, s.pairs, s.ref);
  if (!sweep.failures.empty()) return {false, "member failed: " + sweep.failures.front().second};
  const auto& r = sweep.results;
  const bool increasing = r[0].c_lambda < r[1].c_lambda && r[1].c_lambda < r[2].c_lambda;
  const bool converged = r[0].converged && r[1].converged && r[2].converged;
  const bool small = r[0].c_lambda <= 0.2 * r[2].c_lambda;
  return {increasing && converged && small,
          fmt("c(-1.99) %.4e, c(-1.9) %.5f, c(-1.5) %.5f, ratio %.2e", r[0].c_lambda, r[1].c_lambda, r[2].c_lambda,
              r[0].c_lambda / r[2].c_lambda)};
}

// ---- 11 --------------------------------------------------------------------
Outcome multiplicity() {
  std::mt19937_64 rng(1100);
  std::uniform_real_distribution<double> value(0.1, 10.0), thr(0.01, 3.0);
  std::uniform_int_distribution<int> levels(0, 8), mult(1, 4);
  int mismatches = 0, probes = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> ladder;
    const int n = levels(rng);
    for (int l = 0; l < n; ++l) ladder.insert(ladder.end(), mult(rng), value(rng));
    std::sort(ladder.begin(), ladder.end());
    const double threshold = thr(rng);
    std::vector<double> lambdas{-value(rng), -value(rng)};
    for (double lk : ladder) lambdas.insert(lambdas.end(), {-lk, -lk + threshold, -lk + 0.5 * threshold});
    for (double lambda : lambdas) {
      ++probes;
      if (multiplicity_count(lambda, ladder, threshold) != oracles::count_indices(ladder, lambda, threshold))
        ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in " + std::to_string(probes) + " probes"};
}

// ---- 12 --------------------------------------------------------------------
Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / "curlvar_acceptance_determinism";
  fs::remove_all(base);
  bool ok = true;
  std::string detail;
  for (Command command : {Command::verify, Command::groundstate}) {
    std::string first;
    for (int repeat = 0; repeat < 2; ++repeat) {
      RunConfig c;
      c.command = command;
      c.grid = {12, 12, 12};
      c.seeds = {5, 6};
      c.threads = repeat + 1;
      c.out = (base / (to_string(command) + std::to_string(repeat))).string();
      std::ostringstream log;
      const int code = run(c, log);
      const std::string bytes = slurp(fs::path(c.out) / "result.json");
      ok = ok && code == 0 && !bytes.empty();
      if (repeat == 0)
        first = bytes;
      else
        ok = ok && bytes == first;
      if (repeat == 1)
        detail += to_string(command) + (bytes == first ? " identical" : " DIFFERENT") + " (" +
                  std::to_string(bytes.size()) + " bytes, exit " + std::to_string(code) + "); ";
    }
  }
  return {ok, detail + "threads 1 vs 2"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "mimetic identities", 60, mimetic},
      {2, "Helmholtz suite", 120, helmholtz_suite},
      {3, "inner minimizer", 600, inner_minimizer},
      {4, "Nehari identities", 600, nehari_identities},
      {5, "gap sampling", 600, gap_sampling},
      {6, "envelope gradient", 600, envelope_gradient},
      {7, "cavity spectrum", 900, cavity_spectrum},
      {8, "constant ordering", 3600, constant_ordering},
      {9, "Brezis-Nirenberg bounds", 3600, bn_bounds},
      {10, "c_lambda trend", 3600, bn_trend},
      {11, "multiplicity counter", 1, multiplicity},
      {12, "determinism", 600, determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  int failures = 0;
  for (const Criterion& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.number) == selected.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > c.budget_seconds) {
      o.pass = false;
      o.detail += fmt(" [over the %.0f s budget]", c.budget_seconds);
    }
    std::printf("CRITERION %2d %s  %s: %s (%.1f s)\n", c.number, o.pass ? "PASS" : "FAIL", c.title.c_str(),
                o.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
