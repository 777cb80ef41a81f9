#include "curlvar/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "curlvar/convex_inner.hpp"
#include "curlvar/energy.hpp"
#include "curlvar/errors.hpp"
#include "curlvar/groundstate.hpp"
#include "curlvar/helmholtz.hpp"
#include "curlvar/nehari.hpp"
#include "curlvar/operators.hpp"
#include "curlvar/spectral.hpp"

namespace curlvar {

namespace {

// Running maximum of an error measure.
struct Worst {
  std::string name;
  double threshold;
  double value = 0.0;
  void see(double x) { value = std::isfinite(x) ? std::max(value, x) : INFINITY; }
  Check check() const { return {name, value, threshold, value <= threshold}; }
};

VectorField random_face_field(const GridSpec& grid, std::uint64_t seed) {
  VectorField b(grid, Location::face);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int c = 0; c < 3; ++c)
    for (double& x : b[c].span()) x = normal(rng);
  return b;
}

VectorField unit_sphere_point(const GridSpec& grid, std::uint64_t seed) {
  VectorField v = project_V(solve_hodge(random_edge_field(grid, seed)));
  v *= 1.0 / std::sqrt(norm_sq(curl(v)));
  return v;
}

double l6(const VectorField& u) { return lp_norm(u, 6.0); }

}  // namespace

std::vector<Check> invariant_suite(const GridSpec& grid, const VerifyOptions& options) {
  grid.validate();
  if (options.fields < 1 || options.gap_samples < 1 || options.fd_points < 1)
    throw DomainError("verify needs at least one sample per check");
  std::vector<Check> out;
  const std::uint64_t s0 = options.seed * 1000;

  Worst div_curl{"mimetic.div_curl", 1e-13}, curl_grad{"mimetic.curl_grad", 1e-13};
  Worst grad_div{"mimetic.grad_div_adjoint", 1e-13}, curl_adj{"mimetic.curl_adjoint", 1e-13};
  Worst recon{"helmholtz.reconstruction", 1e-9}, orth{"helmholtz.orthogonality", 1e-9};
  Worst pyth{"helmholtz.pythagoras", 1e-9};
  Worst optimal{"inner.optimality", 1e-8}, homog{"inner.homogeneity", 1e-7}, unique{"inner.two_start", 1e-7};
  for (int f = 0; f < options.fields; ++f) {
    const std::uint64_t s = s0 + 10 * static_cast<std::uint64_t>(f);
    const VectorField u = random_edge_field(grid, s);
    const ScalarField xi = random_potential(grid, s + 1);
    const VectorField b = random_face_field(grid, s + 2);
    const VectorField cu = curl(u), gx = grad(xi);
    div_curl.see(div(cu).max_abs() / cu.max_abs());
    curl_grad.see(curl(gx).max_abs() / gx.max_abs());
    grad_div.see(std::abs(inner(gx, u) + inner(xi, div(u))) / std::sqrt(norm_sq(gx) * norm_sq(u)));
    curl_adj.see(std::abs(inner(cu, b) - inner(u, curl_adjoint(b))) / std::sqrt(norm_sq(cu) * norm_sq(b)));

    const DecomposedField d = decompose(u);
    const double uu = norm_sq(u);
    recon.see(std::sqrt(norm_sq(u - d.v - d.w) / uu));
    orth.see(std::abs(inner(d.v, d.w)) / std::sqrt(norm_sq(d.v) * norm_sq(d.w)));
    pyth.see(std::abs(uu - norm_sq(d.v) - norm_sq(d.w)) / uu);

    const VectorField v = d.v;
    const InnerSolution a = minimize_w(v);
    const InnerSolution scaled = minimize_w(2.5 * v);
    InnerOptions other;
    other.initial_xi = random_potential(grid, s + 3);
    const InnerSolution c = minimize_w(v, {}, other);
    optimal.see(std::max({a.optimality_residual, scaled.optimality_residual, c.optimality_residual}));
    homog.see(l6(scaled.w_tilde - 2.5 * a.w_tilde) / l6(a.w_tilde));
    unique.see(l6(c.w_tilde - a.w_tilde) / l6(a.w_tilde));
  }
  for (const Worst* w : {&div_curl, &curl_grad, &grad_div, &curl_adj, &recon, &orth, &pyth, &optimal, &homog, &unique})
    out.push_back(w->check());

  // Nehari identities and the gap at one projected point.
  const NehariPoint p = project_nehari(project_V(random_edge_field(grid, s0 + 500)));
  const EnergyReport e = energy(p.u);
  out.push_back(Worst{"nehari.ray", 1e-8, std::abs(e.curl_energy - e.l6_6) / e.l6_6}.check());
  out.push_back(Worst{"nehari.energy", 1e-8, std::abs(e.J - e.l6_6 / 3.0) / e.J}.check());
  const double S_from_J = std::pow(3.0 * e.J, 2.0 / 3.0);
  const double S_from_quotient = e.curl_energy / std::pow(e.l6_6, 1.0 / 3.0);
  // Rounding scale of the two evaluations, allowing for the ray residual.
  const double chain_tol = 1e-12 + std::abs(e.curl_energy - e.l6_6) / e.l6_6;
  out.push_back(Worst{"nehari.S_round_trip", chain_tol, std::abs(S_from_J - S_from_quotient) / S_from_J}.check());

  Worst gap{"gap.min", 1e-10}, phi{"gap.min_phi", 1e-12};
  std::mt19937_64 rng(s0 + 600);
  std::uniform_real_distribution<double> t_dist(0.0, 3.0), w_dist(0.0, 6.0);
  const double u_norm = std::sqrt(norm_sq(p.u));
  for (int k = 0; k < options.gap_samples; ++k) {
    VectorField w = grad(random_potential(grid, s0 + 700 + static_cast<std::uint64_t>(k)));
    w *= w_dist(rng) * u_norm / std::sqrt(norm_sq(w));
    const GapReport r = nehari_gap(p.u, t_dist(rng), w);
    gap.see(-r.gap);
    phi.see(-r.min_phi / e.l6_6);
  }
  out.push_back(gap.check());
  out.push_back(phi.check());
  out.push_back(Worst{"gap.identity", 1e-12, std::abs(nehari_gap(p.u, 1.0, VectorField(grid)).gap)}.check());

  // Envelope gradient of J o m against central differences.
  NehariOptions tight;
  tight.tol = 1e-11;
  tight.inner.tol = 1e-11;
  Worst envelope{"envelope.fd_gradient", 1e-4};
  for (int k = 0; k < options.fd_points; ++k) {
    const std::uint64_t s = s0 + 900 + 2 * static_cast<std::uint64_t>(k);
    const VectorField v = unit_sphere_point(grid, s);
    const SphereEvaluation ev = evaluate_sphere(v, tight);
    VectorField h = unit_sphere_point(grid, s + 1);
    h.axpy(-inner(curl(h), curl(v)), v);
    const double predicted = inner(curl(ev.gradient), curl(h));
    for (double step : {1e-3, 1e-4, 1e-5}) {
      const double fd =
          (sphere_objective(v + step * h, tight) - sphere_objective(v - step * h, tight)) / (2.0 * step);
      envelope.see(std::abs(fd / predicted - 1.0));
    }
  }
  out.push_back(envelope.check());
  return out;
}

std::string format_checks(const std::vector<Check>& checks) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-28s %12s %12s  %s\n", "check", "value", "threshold", "result");
  os << line;
  for (const Check& c : checks) {
    std::snprintf(line, sizeof line, "%-28s %12.3e %12.3e  %s\n", c.name.c_str(), c.value, c.threshold,
                  c.pass ? "PASS" : "FAIL");
    os << line;
  }
  return os.str();
}

}  // namespace curlvar
