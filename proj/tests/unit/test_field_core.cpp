#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "curlvar/energy.hpp"
#include "curlvar/errors.hpp"
#include "curlvar/operators.hpp"
#include "curlvar/rescale.hpp"
#include "curlvar/spectral.hpp"
#include "oracles/radial_quadrature.hpp"

using namespace curlvar;

namespace {

GridSpec box(double lx, double ly, double lz, int nx, int ny, int nz) {
  GridSpec g;
  g.lengths = {lx, ly, lz};
  g.cells = {nx, ny, nz};
  return g;
}

double max_abs(const ScalarField& s) { return s.max_abs(); }

double relative_difference(const VectorField& a, const VectorField& b) {
  return std::sqrt(norm_sq(a - b) / norm_sq(b));
}

VectorField smooth_bump(const GridSpec& g, std::array<double, 3> at, double width) {
  return VectorField::sample(g, Location::edge, [=](double x, double y, double z) {
    const double r2 = (x - at[0]) * (x - at[0]) + (y - at[1]) * (y - at[1]) + (z - at[2]) * (z - at[2]);
    const double q = r2 / (width * width);
    const double b = q < 1.0 ? std::pow(1.0 - q, 4) : 0.0;
    // Rotational profile plus an axial part so every component is exercised.
    return std::array<double, 3>{-(y - at[1]) * b, (x - at[0]) * b, 0.5 * width * b};
  });
}

}  // namespace

TEST(Operators, CurlOfGradientVanishes) {
  const GridSpec g = box(1.0, 2.0, 1.5, 9, 7, 11);
  const ScalarField xi = random_potential(g, 3);
  const VectorField u = grad(xi);
  EXPECT_LE(curl(u).max_abs(), 1e-13 * u.max_abs());
}

TEST(Operators, DivergenceOfCurlVanishes) {
  const GridSpec g = box(1.0, 2.0, 1.5, 9, 7, 11);
  const VectorField u = random_edge_field(g, 5);
  const VectorField b = curl(u);
  const ScalarField d = div(b);
  EXPECT_EQ(d.location(), Location::cell);
  EXPECT_LE(max_abs(d), 1e-13 * b.max_abs());
  EXPECT_LE(max_abs(div(curl_adjoint(b))), 1e-12 * b.max_abs() / g.spacing(0));
}

TEST(Operators, GradientIsNegativeAdjointOfDivergence) {
  const GridSpec g = box(std::numbers::pi, 1.0, 2.0, 8, 10, 6);
  const ScalarField xi = random_potential(g, 7);
  const VectorField u = random_edge_field(g, 8);
  const double lhs = inner(grad(xi), u);
  const double rhs = -inner(xi, div(u));
  EXPECT_LE(std::abs(lhs - rhs), 1e-13 * std::sqrt(norm_sq(grad(xi)) * norm_sq(u)));
}

TEST(Operators, CurlAdjointIsTranspose) {
  const GridSpec g = box(1.0, 1.0, 1.0, 6, 7, 8);
  const VectorField u = random_edge_field(g, 1);
  VectorField b(g, Location::face);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  for (int c = 0; c < 3; ++c)
    for (double& x : b[c].span()) x = normal(rng);
  const double lhs = inner(curl(u), b);
  const double rhs = inner(u, curl_adjoint(b));
  EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(lhs) + 1e-12);
}

TEST(Operators, CurlOfRotationIsConstant) {
  const GridSpec g = GridSpec::cube(2.0, 8);
  const VectorField u = VectorField::sample(g, Location::edge, [](double x, double y, double) {
    return std::array<double, 3>{-y, x, 0.0};
  });
  const VectorField b = curl(u);
  // Interior faces only: the boundary rows of u were zeroed.
  for (int i = 1; i < 7; ++i)
    for (int j = 1; j < 7; ++j)
      for (int k = 1; k < 7; ++k) {
        EXPECT_NEAR(b[2](i, j, k), 2.0, 1e-12);
        EXPECT_NEAR(b[0](i, j, k), 0.0, 1e-12);
        EXPECT_NEAR(b[1](i, j, k), 0.0, 1e-12);
      }
}

TEST(Operators, DivergenceOfPositionIsThree) {
  const GridSpec g = GridSpec::cube(1.0, 8);
  const VectorField u = VectorField::sample(g, Location::edge, [](double x, double y, double z) {
    return std::array<double, 3>{x, y, z};
  });
  const ScalarField d = div(u);
  for (int i = 2; i < 7; ++i)
    for (int j = 2; j < 7; ++j)
      for (int k = 2; k < 7; ++k) EXPECT_NEAR(d(i, j, k), 3.0, 1e-12);
}

TEST(Operators, DivergenceOfConstantIsZero) {
  const GridSpec g = GridSpec::cube(1.0, 6);
  VectorField u(g, Location::edge);
  u.fill(1.5);
  EXPECT_LE(max_abs(div(u)), 1e-12);
  VectorField f(g, Location::face);
  f.fill(-2.0);
  EXPECT_LE(max_abs(div(f)), 1e-12);
}

TEST(Operators, GradientRejectsBoundaryValues) {
  const GridSpec g = GridSpec::cube(1.0, 5);
  ScalarField xi(g, Location::node);
  EXPECT_LE(grad(xi).max_abs(), 0.0);
  xi(0, 2, 2) = 1.0;
  EXPECT_THROW(grad(xi), ContractViolation);
}

TEST(Operators, MismatchedStaggeringIsRejected) {
  const GridSpec g = GridSpec::cube(1.0, 5);
  VectorField f(g, Location::face);
  EXPECT_THROW(curl(f), InvalidField);
  VectorField u(g, Location::edge);
  EXPECT_THROW(u += f, InvalidField);
  VectorField other(GridSpec::cube(2.0, 5), Location::edge);
  EXPECT_THROW(inner(u, other), InvalidField);
}

TEST(Operators, CornerSamplingAdjoint) {
  const GridSpec g = box(1.0, 1.0, 1.0, 5, 6, 7);
  const VectorField u = random_edge_field(g, 14);
  CornerSamples s = to_corners(random_edge_field(g, 15));
  const CornerSamples su = to_corners(u);
  double lhs = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t n = 0; n < s.comp[c].size(); ++n) lhs += su.comp[c][n] * s.comp[c][n];
  const double rhs = inner(u, to_corners_adjoint(s)) / g.cell_volume();
  EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(lhs));
}

TEST(Operators, EveryOutputHasZeroTangentialTrace) {
  const GridSpec g = box(1.0, 1.3, 0.7, 6, 5, 7);
  const VectorField u = random_edge_field(g, 4);
  EXPECT_EQ(u.boundary_violation(), 0.0);
  EXPECT_EQ(curl_adjoint(curl(u)).boundary_violation(), 0.0);
  EXPECT_EQ(grad(random_potential(g, 9)).boundary_violation(), 0.0);
  EXPECT_EQ(hodge_laplacian(u).boundary_violation(), 0.0);
  EXPECT_EQ(solve_hodge(u).boundary_violation(), 0.0);
  EXPECT_EQ(nonlinear_gradient(u).boundary_violation(), 0.0);
  EXPECT_EQ(rescale(u, 1.3, {0.1, 0.0, -0.05}).boundary_violation(), 0.0);
}

TEST(Spectral, HodgeSolveInvertsHodgeLaplacian) {
  const GridSpec g = box(1.0, 2.0, 1.5, 9, 7, 11);
  const VectorField u = random_edge_field(g, 12);
  EXPECT_LE(relative_difference(solve_hodge(hodge_laplacian(u)), u), 1e-11);
  EXPECT_LE(relative_difference(hodge_laplacian(solve_hodge(u)), u), 1e-11);
}

TEST(Spectral, PoissonSolveInvertsNegativeLaplacian) {
  const GridSpec g = box(1.0, 2.0, 1.5, 9, 7, 11);
  const ScalarField f = random_potential(g, 13);
  ScalarField xi = solve_dirichlet_poisson(f);
  ScalarField back = div(grad(xi));
  back *= -1.0;
  back.axpy(-1.0, f);
  EXPECT_LE(back.max_abs(), 1e-10 * f.max_abs());
}

TEST(Norms, ConstantFieldHasNormVolumeToOneOverP) {
  const GridSpec g = box(1.0, 2.0, 3.0, 6, 6, 6);
  VectorField f(g, Location::face);
  for (double& x : f[1].span()) x = 1.0;
  for (double p : {1.0, 2.0, 3.5, 6.0}) EXPECT_NEAR(lp_norm(f, p), std::pow(6.0, 1.0 / p), 1e-12);
}

TEST(Norms, HomogeneityAndTriangleInequality) {
  const GridSpec g = GridSpec::cube(1.0, 10);
  const VectorField u = random_edge_field(g, 21);
  const VectorField v = random_edge_field(g, 22);
  for (double p : {1.0, 2.0, 6.0, 9.0}) {
    EXPECT_NEAR(lp_norm(2.5 * u, p), 2.5 * lp_norm(u, p), 1e-12 * lp_norm(u, p));
    EXPECT_NEAR(lp_norm(-1.0 * u, p), lp_norm(u, p), 1e-12 * lp_norm(u, p));
    EXPECT_LE(lp_norm(u + v, p), lp_norm(u, p) + lp_norm(v, p) + 1e-12);
  }
  EXPECT_THROW(lp_norm(u, 0.5), DomainError);
}

TEST(Norms, InstantonSixNormMatchesRadialQuadrature) {
  const GridSpec g = GridSpec::centered_cube(8.0, 64);
  const VectorField u = VectorField::sample(g, Location::edge, [](double x, double y, double z) {
    const double v = oracles::instanton(std::sqrt(x * x + y * y + z * z), 1.0) / std::sqrt(3.0);
    return std::array<double, 3>{v, v, v};
  });
  const double reference = std::pow(oracles::instanton_l6_pow6_full_space(), 1.0 / 6.0);
  EXPECT_NEAR(lp_norm(u, 6.0) / reference, 1.0, 0.01);
}

TEST(Energy, ZeroField) {
  const EnergyReport r = energy(VectorField(GridSpec::cube(1.0, 6)), -1.0);
  EXPECT_EQ(r.curl_energy, 0.0);
  EXPECT_EQ(r.l2_sq, 0.0);
  EXPECT_EQ(r.l6_6, 0.0);
  EXPECT_EQ(r.J, 0.0);
  EXPECT_EQ(*r.J_lambda, 0.0);
}

TEST(Energy, EqualCurlAndSixthPowerNineGivesThree) {
  const GridSpec g = GridSpec::cube(std::numbers::pi, 12);
  const VectorField base = curl_adjoint(curl(random_edge_field(g, 31)));
  const VectorField gradient = grad(random_potential(g, 32));
  const VectorField curl_part = (3.0 / std::sqrt(norm_sq(curl(base)))) * base;
  // Adding a gradient leaves the curl energy at 9; pick its weight so that
  // the sixth power is 9 as well.
  double lo = 0.0, hi = 1.0;
  ASSERT_LT(l6_pow6(curl_part), 9.0);
  while (l6_pow6(curl_part + hi * gradient) < 9.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (l6_pow6(curl_part + mid * gradient) < 9.0 ? lo : hi) = mid;
  }
  const EnergyReport r = energy(curl_part + lo * gradient);
  EXPECT_NEAR(r.curl_energy, 9.0, 1e-10);
  EXPECT_NEAR(r.l6_6, 9.0, 1e-10);
  EXPECT_NEAR(r.J, 3.0, 1e-10);
}

TEST(Energy, LambdaShiftAndRayScaling) {
  const GridSpec g = GridSpec::cube(1.0, 8);
  const VectorField u = random_edge_field(g, 41);
  const EnergyReport r = energy(u, -1.0);
  EXPECT_NEAR(*r.J_lambda, r.J - 0.5 * r.l2_sq, 1e-13 * std::abs(r.J));
  for (double t : {0.3, 1.0, 1.7}) {
    const EnergyReport rt = energy(t * u);
    const double expected = 0.5 * t * t * r.curl_energy - std::pow(t, 6) / 6.0 * r.l6_6;
    EXPECT_NEAR(rt.J, expected, 1e-12 * (std::abs(expected) + r.curl_energy));
  }
}

TEST(Energy, NonlinearGradientMatchesFiniteDifferences) {
  const GridSpec g = GridSpec::cube(1.0, 7);
  const VectorField u = random_edge_field(g, 51);
  const VectorField h = random_edge_field(g, 52);
  const double eps = 1e-5;
  const double fd = (l6_pow6(u + eps * h) - l6_pow6(u - eps * h)) / (12.0 * eps);
  const double exact = inner(nonlinear_gradient(u), h);
  EXPECT_NEAR(fd, exact, 1e-6 * std::abs(exact));
  const CornerSamples cells = to_corners(u);
  const VectorField fd_hess = (1.0 / (2.0 * eps)) * (nonlinear_gradient(u + eps * h) -
                                                     nonlinear_gradient(u - eps * h));
  EXPECT_LE(relative_difference(fd_hess, nonlinear_hessian_apply(cells, h)), 1e-6);
}

TEST(Energy, RejectsNonFiniteField) {
  VectorField u(GridSpec::cube(1.0, 5));
  u[0](1, 1, 1) = std::nan("");
  EXPECT_THROW(energy(u), InvalidField);
}

TEST(Rescale, UnitScaleAtOriginIsIdentity) {
  const GridSpec g = GridSpec::cube(2.0, 12);
  const VectorField u = random_edge_field(g, 61);
  EXPECT_LE(relative_difference(rescale(u, 1.0, {0.0, 0.0, 0.0}), u), 1e-14);
  EXPECT_THROW(rescale(u, 0.0, {0.0, 0.0, 0.0}), DomainError);
  EXPECT_THROW(rescale(u, -1.0, {0.0, 0.0, 0.0}), DomainError);
}

TEST(Rescale, ShrinkingPreservesSixNormAndCurlEnergy) {
  const GridSpec g = GridSpec::centered_cube(1.0, 64);
  const VectorField u = smooth_bump(g, {0.0, 0.0, 0.0}, 0.6);
  const VectorField t = rescale(u, 2.0, {0.0, 0.0, 0.0});
  EXPECT_NEAR(lp_norm(t, 6.0) / lp_norm(u, 6.0), 1.0, 0.02);
  EXPECT_NEAR(std::sqrt(norm_sq(curl(t)) / norm_sq(curl(u))), 1.0, 0.05);
}

TEST(Rescale, TranslationMovesTheSupport) {
  const GridSpec g = GridSpec::centered_cube(1.0, 32);
  const VectorField u = smooth_bump(g, {0.25, 0.0, 0.0}, 0.4);
  const VectorField t = rescale(u, 1.0, {0.25, 0.0, 0.0});
  const VectorField centered = smooth_bump(g, {0.0, 0.0, 0.0}, 0.4);
  EXPECT_LE(relative_difference(t, centered), 1e-12);
}
