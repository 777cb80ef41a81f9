#pragma once

#include <optional>
#include <vector>

#include "curlvar/convex_inner.hpp"
#include "curlvar/field.hpp"
#include "curlvar/operators.hpp"
#include "curlvar/spectrum.hpp"

namespace curlvar {

// A point u = t v + w_tilde on the (generalized) Nehari set.
struct NehariPoint {
  VectorField u;
  double t = 0.0;
  // J(u), or J_lambda(u) for the lambda projection.
  double J_value = 0.0;
  // |J_lambda'(u) u| / |curl u|_2^2
  double residual_ray = 0.0;
  // Optimality residual of the inner problem (see InnerSolution).
  double residual_W = 0.0;
  VectorField witness_v;
  double curl_sq = 0.0;
  double l2_sq = 0.0;
  double l6_6 = 0.0;
  // Inner solution for the unscaled witness, reusable as a warm start.
  ScalarField xi;
  std::vector<double> z;
  int inner_iterations = 0;
  // Number of t values visited (1 for the closed form).
  int ray_evaluations = 0;
};

struct NehariOptions {
  double tol = 1e-8;
  InnerOptions inner;
  // Cap on t evaluations in the lambda projection.
  int max_outer = 200;
  // Warm start for the ray search and the inner solve (potential for the
  // witness scaled by t_guess).
  std::optional<double> t_guess;
};

// t with t^2 curl_sq = t^6 l6_6, i.e. (curl_sq / l6_6)^{1/4}. DomainError for
// nonpositive input.
double scalar_t(double curl_sq, double l6_6);

// m(v) = t(v) (v + w(v)) for v divergence free. DegenerateInput when curl v
// vanishes.
NehariPoint project_nehari(const VectorField& v, const NehariOptions& options = {});

// m_lambda(v_plus) = t (v_plus + w_tilde(t v_plus) / t): the maximizer of
// J_lambda over the half space { t v_plus + w_tilde : t > 0 } with w_tilde in
// span(Vtilde) + gradients. DegenerateInput when Q(v_plus) <= 0 or the
// maximum over t cannot be bracketed.
NehariPoint project_nehari_lambda(const VectorField& v_plus, double lambda, const SpectralSubspace& Vtilde,
                                  const NehariOptions& options = {});

struct GapReport {
  // J(u) - J(t u + w) + J'(u)[(t^2 - 1)/2 u + t w]
  double gap = 0.0;
  // The same value from separately evaluated energies (for cross-checks).
  double gap_direct = 0.0;
  // Integrand at every quadrature point, in to_corners order.
  std::vector<double> phi;
  double min_phi = 0.0;
};

// Requires curl w = 0 (relative tolerance curl_tol); ContractViolation
// otherwise.
GapReport nehari_gap(const VectorField& u, double t, const VectorField& w, double curl_tol = 1e-10);

}  // namespace curlvar
