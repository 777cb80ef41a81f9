#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "curlvar/convex_inner.hpp"
#include "curlvar/energy.hpp"
#include "curlvar/errors.hpp"
#include "curlvar/helmholtz.hpp"
#include "curlvar/nehari.hpp"
#include "curlvar/operators.hpp"
#include "curlvar/spectrum.hpp"

using namespace curlvar;

namespace {

GridSpec cube(int n) { return GridSpec::cube(std::numbers::pi, n); }

double J(const VectorField& u, double lambda = 0.0) { return *energy(u, lambda).J_lambda; }

const std::vector<EigenPair>& cube12_pairs() {
  static const EigenResult r = curl_curl_eigs(cube(12), 6);
  return r.pairs;
}

}  // namespace

TEST(Nehari, ScalarT) {
  EXPECT_DOUBLE_EQ(scalar_t(16.0, 1.0), 2.0);
  EXPECT_NEAR(scalar_t(1.0, 81.0), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(scalar_t(0.0, 1.0), DomainError);
  EXPECT_THROW(scalar_t(1.0, -1.0), DomainError);
}

TEST(Nehari, ProjectionLandsOnNehariSet) {
  const VectorField v = project_V(random_edge_field(cube(16), 1));
  const NehariPoint p = project_nehari(v);
  EXPECT_LE(std::abs(p.curl_sq - p.l6_6), 1e-8 * p.l6_6);
  EXPECT_LE(p.residual_ray, 1e-8);
  EXPECT_LE(p.residual_W, 1e-8);
  EXPECT_NEAR(p.J_value, p.curl_sq / 3.0, 1e-10 * p.curl_sq);
  EXPECT_GT(p.t, 0.0);
}

TEST(Nehari, PointMaximizesOverHalfSpace) {
  const GridSpec g = cube(12);
  const VectorField v = project_V(random_edge_field(g, 2));
  const NehariPoint p = project_nehari(v);
  for (double s : {0.5, 0.9, 0.99, 1.01, 1.1, 2.0}) EXPECT_LT(J(s * p.u), p.J_value);
  for (int trial = 0; trial < 8; ++trial) {
    const VectorField w = grad(random_potential(g, 50 + trial));
    const double a = 1e-3 * std::sqrt(norm_sq(p.u) / norm_sq(w));
    EXPECT_LE(J(p.u + a * w), p.J_value + 1e-12 * p.J_value);
    EXPECT_LE(J(1.05 * p.u + a * w), p.J_value);
  }
}

TEST(Nehari, ScaleInvariant) {
  const VectorField v = project_V(random_edge_field(cube(12), 3));
  const NehariPoint a = project_nehari(v);
  const NehariPoint b = project_nehari(7.5 * v);
  EXPECT_NEAR(b.t * 7.5, a.t, 1e-8 * a.t);
  EXPECT_LE(std::sqrt(norm_sq(a.u - b.u)), 1e-7 * std::sqrt(norm_sq(a.u)));
}

TEST(Nehari, DegenerateInputs) {
  const GridSpec g = cube(8);
  EXPECT_THROW(project_nehari(VectorField(g)), DegenerateInput);
  EXPECT_THROW(project_nehari(grad(random_potential(g, 4))), DegenerateInput);
}

TEST(Nehari, GapVanishesAtIdentity) {
  const GridSpec g = cube(12);
  const VectorField u = random_edge_field(g, 5);
  const GapReport r = nehari_gap(u, 1.0, VectorField(g));
  EXPECT_LE(std::abs(r.gap), 1e-12);
  EXPECT_EQ(r.min_phi, 0.0);
}

TEST(Nehari, GapAlongRayMatchesClosedForm) {
  const GridSpec g = cube(12);
  const VectorField u = random_edge_field(g, 6);
  const double L = l6_pow6(u);
  for (double t : {0.0, 0.3, 1.7, 3.0}) {
    const GapReport r = nehari_gap(u, t, VectorField(g));
    const double expected = L * (std::pow(t, 6) / 6.0 - 1.0 / 6.0 - 0.5 * (t * t - 1.0));
    EXPECT_NEAR(r.gap, expected, 1e-12 * L);
  }
}

TEST(Nehari, GapIsNonnegative) {
  const GridSpec g = cube(12);
  for (int trial = 0; trial < 20; ++trial) {
    const VectorField u = random_edge_field(g, 100 + trial);
    const double t = 0.15 * trial;
    VectorField w = grad(random_potential(g, 200 + trial));
    w *= 0.3 * trial * std::sqrt(norm_sq(u) / norm_sq(w));
    const GapReport r = nehari_gap(u, t, w);
    EXPECT_GE(r.gap, -1e-10);
    EXPECT_GE(r.min_phi, -1e-12 * l6_pow6(u));
    EXPECT_NEAR(r.gap, r.gap_direct, 1e-9 * std::max(1.0, std::abs(r.gap)));
  }
}

TEST(Nehari, GapRejectsCurlfulW) {
  const GridSpec g = cube(8);
  const VectorField u = random_edge_field(g, 7);
  EXPECT_THROW(nehari_gap(u, 1.0, project_V(random_edge_field(g, 8))), ContractViolation);
}

TEST(Nehari, LambdaZeroAgreesWithClosedForm) {
  const VectorField v = project_V(random_edge_field(cube(12), 9));
  const NehariPoint a = project_nehari(v);
  const NehariPoint b = project_nehari_lambda(v, 0.0, SpectralSubspace{});
  EXPECT_NEAR(b.t, a.t, 1e-7 * a.t);
  EXPECT_LE(std::sqrt(norm_sq(a.u - b.u)), 1e-6 * std::sqrt(norm_sq(a.u)));
  EXPECT_LE(b.residual_ray, 1e-8);
}

TEST(Nehari, LambdaProjectionIsRayMaximum) {
  const GridSpec g = cube(12);
  const double lambda = -2.5;
  const SpectralSubspace sub = build_Vtilde(cube12_pairs(), lambda);
  const VectorField vp = remove_subspace(project_V(random_edge_field(g, 10)), sub);
  const NehariPoint p = project_nehari_lambda(vp, lambda, sub);
  EXPECT_LE(p.residual_ray, 1e-8);
  EXPECT_LE(p.residual_W, 1e-8);
  EXPECT_NEAR(p.J_value, J(p.u, lambda), 1e-12 * std::abs(p.J_value));
  const double scale = std::pow(lp_norm(p.u, 6.0), 5);
  for (const EigenPair& e : sub.pairs)
    EXPECT_LE(std::abs(action_derivative(p.u, e.e_k, lambda)) / lp_norm(e.e_k, 6.0), 1e-7 * scale);
  for (double s : {0.8, 1.25}) {
    const VectorField tv = (s * p.t) * vp;
    const InnerSolution other = minimize_w_tilde(tv, {lambda}, sub);
    EXPECT_LT(J(tv + other.w_tilde, lambda), p.J_value);
  }
}

TEST(Nehari, LambdaWarmStartAtTheRootStaysThere) {
  const GridSpec g = cube(12);
  const double lambda = -1.0;
  const SpectralSubspace sub = build_Vtilde(cube12_pairs(), lambda);
  const VectorField vp = remove_subspace(project_V(random_edge_field(g, 12)), sub);
  const NehariPoint p = project_nehari_lambda(vp, lambda, sub);
  NehariOptions o;
  o.t_guess = p.t;
  ScalarField xi = p.xi;
  xi *= p.t;
  o.inner.initial_xi = std::move(xi);
  for (int repeat = 0; repeat < 3; ++repeat) {
    const NehariPoint q = project_nehari_lambda(vp, lambda, sub, o);
    EXPECT_NEAR(q.t, p.t, 1e-8 * p.t);
    EXPECT_NEAR(q.J_value, p.J_value, 1e-10 * p.J_value);
    EXPECT_NEAR(q.J_value, q.l6_6 / 3.0, 1e-8 * q.J_value);
  }
}

TEST(Nehari, LambdaRejectsNonpositiveCone) {
  const double lambda = -2.5;
  const SpectralSubspace sub = build_Vtilde(cube12_pairs(), lambda);
  EXPECT_THROW(project_nehari_lambda(cube12_pairs().front().e_k, lambda, sub), DegenerateInput);
  EXPECT_THROW(project_nehari_lambda(cube12_pairs().front().e_k, 0.5, sub), DomainError);
}
