#include "curlvar/nehari.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "curlvar/energy.hpp"
#include "curlvar/errors.hpp"
#include "curlvar/reduce.hpp"

namespace curlvar {

double scalar_t(double curl_sq, double l6_6) {
  if (!(curl_sq > 0.0) || !(l6_6 > 0.0)) throw DomainError("scalar_t needs positive curl and L6 terms");
  return std::pow(curl_sq / l6_6, 0.25);
}

namespace {

void fill_energies(NehariPoint& p, std::optional<double> lambda) {
  const EnergyReport e = energy(p.u, lambda);
  p.curl_sq = e.curl_energy;
  p.l2_sq = e.l2_sq;
  p.l6_6 = e.l6_6;
  p.J_value = lambda ? *e.J_lambda : e.J;
  const double along = e.curl_energy + (lambda ? *lambda : 0.0) * e.l2_sq - e.l6_6;
  p.residual_ray = std::abs(along) / e.curl_energy;
}

}  // namespace

NehariPoint project_nehari(const VectorField& v, const NehariOptions& options) {
  const double curl_sq = norm_sq(curl(v));
  const GridSpec& g = v.grid();
  const double h_min = std::min({g.spacing(0), g.spacing(1), g.spacing(2)});
  // Rounding level of curl on a gradient.
  if (!(curl_sq > 1e-24 * norm_sq(v) / (h_min * h_min))) throw DegenerateInput("project_nehari needs a field with nonzero curl");
  InnerOptions inner = options.inner;
  inner.tol = std::min(inner.tol, options.tol);
  const InnerSolution s = minimize_w(v, {}, inner);
  const VectorField base = v + s.w_tilde;
  NehariPoint p;
  p.t = scalar_t(curl_sq, l6_pow6(base));
  p.u = p.t * base;
  p.residual_W = s.optimality_residual;
  p.witness_v = v;
  p.xi = s.xi;
  p.inner_iterations = s.iterations;
  p.ray_evaluations = 1;
  fill_energies(p, std::nullopt);
  return p;
}

NehariPoint project_nehari_lambda(const VectorField& v_plus, double lambda, const SpectralSubspace& Vtilde,
                                  const NehariOptions& options) {
  if (lambda > 0.0) throw DomainError("project_nehari_lambda needs lambda <= 0");
  const double q = norm_sq(curl(v_plus)) + lambda * norm_sq(v_plus);
  if (!(q > 0.0)) throw DegenerateInput("Q(v_plus) <= 0: the ray lies in the nonpositive cone");

  InnerOptions inner = options.inner;
  inner.tol = std::min(inner.tol, options.tol);
  const NonlinearitySpec spec{lambda};

  struct Sample {
    double t;
    double slope;  // J_lambda'(u_t)[v_plus]
    InnerSolution inner;
  };
  std::vector<Sample> samples;
  int evaluations = 0;
  int inner_iterations = 0;

  // Inner solve at t, warm started from the sample with the closest t.
  auto evaluate = [&](double t) {
    if (++evaluations > options.max_outer) {
      throw SolverFailure("Nehari ray search hit its evaluation cap", t, evaluations);
    }
    InnerOptions o = inner;
    if (!samples.empty()) {
      const Sample* near = &samples.front();
      for (const Sample& s : samples)
        if (std::abs(std::log(s.t / t)) < std::abs(std::log(near->t / t))) near = &s;
      const double ratio = t / near->t;
      ScalarField xi = near->inner.xi;
      xi *= ratio;
      o.initial_xi = std::move(xi);
      o.initial_z = near->inner.z;
      for (double& z : o.initial_z) z *= ratio;
    } else if (options.inner.initial_xi) {
      o.initial_xi = options.inner.initial_xi;
      o.initial_z = options.inner.initial_z;
    }
    const VectorField tv = t * v_plus;
    InnerSolution s = minimize_w_tilde(tv, spec, Vtilde, o);
    inner_iterations += s.iterations;
    const double slope = action_derivative(tv + s.w_tilde, v_plus, lambda);
    samples.push_back({t, slope, std::move(s)});
    return samples.back().slope;
  };

  // Bracket the root of t -> J_lambda'(u_t)[v_plus] geometrically.
  double t0 = options.t_guess.value_or(0.0);
  if (!(t0 > 0.0)) t0 = std::pow(q / std::max(l6_pow6(v_plus), 1e-300), 0.25);
  double t_lo = 0.0, t_hi = 0.0, f_lo = 0.0, f_hi = 0.0;
  double f0 = evaluate(t0);
  if (f0 > 0.0) {
    t_lo = t0;
    f_lo = f0;
    double t = t0;
    for (int k = 0; k < 60; ++k) {
      t *= 2.0;
      const double f = evaluate(t);
      if (f <= 0.0) {
        t_hi = t;
        f_hi = f;
        break;
      }
      t_lo = t;
      f_lo = f;
    }
  } else {
    t_hi = t0;
    f_hi = f0;
    double t = t0;
    for (int k = 0; k < 60; ++k) {
      t *= 0.5;
      const double f = evaluate(t);
      if (f > 0.0) {
        t_lo = t;
        f_lo = f;
        break;
      }
      t_hi = t;
      f_hi = f;
    }
  }
  if (!(t_hi > 0.0) || !(t_lo > 0.0)) {
    throw DegenerateInput("could not bracket the maximum of J_lambda along the ray");
  }

  // Illinois iteration on the bracket.
  double t = t_hi;
  double f = f_hi;
  int side = 0;
  while (f != 0.0 && (t_hi - t_lo) > 1e-10 * t_hi) {
    double next = (t_lo * f_hi - t_hi * f_lo) / (f_hi - f_lo);
    if (!(next > t_lo && next < t_hi)) next = 0.5 * (t_lo + t_hi);
    t = next;
    f = evaluate(t);
    const double scale = std::abs(t) * q;
    if (std::abs(f) <= 1e-3 * options.tol * scale) break;
    if (f > 0.0) {
      t_lo = t;
      f_lo = f;
      if (side == 1) f_hi *= 0.5;
      side = 1;
    } else {
      t_hi = t;
      f_hi = f;
      if (side == -1) f_lo *= 0.5;
      side = -1;
    }
  }

  // The sample closest to the root (not necessarily the last one: a bracket
  // end can already be exact).
  const Sample* best_sample = &samples.front();
  for (const Sample& s : samples)
    if (std::abs(s.slope) < std::abs(best_sample->slope)) best_sample = &s;
  const Sample& best = *best_sample;
  NehariPoint p;
  p.t = best.t;
  p.u = best.t * v_plus + best.inner.w_tilde;
  p.residual_W = best.inner.optimality_residual;
  p.witness_v = v_plus;
  p.xi = best.inner.xi;
  p.xi *= 1.0 / best.t;
  p.z = best.inner.z;
  for (double& z : p.z) z /= best.t;
  p.inner_iterations = inner_iterations;
  p.ray_evaluations = evaluations;
  fill_energies(p, lambda);
  return p;
}

GapReport nehari_gap(const VectorField& u, double t, const VectorField& w, double curl_tol) {
  u.require_compatible(w);
  if (u.location() != Location::edge) throw InvalidField("nehari_gap expects edge fields");
  if (!(t >= 0.0)) throw DomainError("nehari_gap needs t >= 0");
  const double w_norm = std::sqrt(norm_sq(w));
  const double cw = std::sqrt(norm_sq(curl(w)));
  double h_min = std::min({u.grid().spacing(0), u.grid().spacing(1), u.grid().spacing(2)});
  if (cw > curl_tol * (w_norm / h_min + std::numeric_limits<double>::min())) {
    throw ContractViolation("nehari_gap needs a curl-free w");
  }

  const CornerSamples a = to_corners(u);
  const CornerSamples b = to_corners(w);
  GapReport out;
  out.phi.resize(a.comp[0].size());
  const double c = 0.5 * (t * t - 1.0);
  for (std::size_t n = 0; n < out.phi.size(); ++n) {
    const double ax = a.comp[0][n], ay = a.comp[1][n], az = a.comp[2][n];
    const double bx = b.comp[0][n], by = b.comp[1][n], bz = b.comp[2][n];
    const double a2 = ax * ax + ay * ay + az * az;
    const double sx = t * ax + bx, sy = t * ay + by, sz = t * az + bz;
    const double s2 = sx * sx + sy * sy + sz * sz;
    const double ab = ax * bx + ay * by + az * bz;
    out.phi[n] = (s2 * s2 * s2 - a2 * a2 * a2) / 6.0 - a2 * a2 * (c * a2 + t * ab);
  }
  out.min_phi = out.phi.empty() ? 0.0 : *std::min_element(out.phi.begin(), out.phi.end());
  // The curl terms reduce to -|curl w|^2 / 2.
  out.gap = u.grid().cell_volume() / 8.0 * pairwise_sum(out.phi) - 0.5 * cw * cw;

  const VectorField moved = t * u + w;
  VectorField direction = c * u;
  direction.axpy(t, w);
  out.gap_direct = energy(u).J - energy(moved).J + action_derivative(u, direction);
  return out;
}

}  // namespace curlvar
