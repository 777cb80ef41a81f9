#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "curlvar/errors.hpp"
#include "curlvar/helmholtz.hpp"
#include "curlvar/operators.hpp"
#include "curlvar/spectrum.hpp"
#include "oracles/cavity_ladder.hpp"

using namespace curlvar;

namespace {

const EigenResult& cube16() {
  static const EigenResult r = curl_curl_eigs(GridSpec::cube(std::numbers::pi, 16), 11);
  return r;
}

}  // namespace

TEST(CavityOracle, ContinuumCubeLadder) {
  const auto ladder = oracles::continuum_ladder({std::numbers::pi, std::numbers::pi, std::numbers::pi}, 4);
  ASSERT_EQ(ladder.size(), 4u);
  EXPECT_NEAR(ladder[0].value, 2.0, 1e-12);
  EXPECT_EQ(ladder[0].multiplicity, 3);
  EXPECT_NEAR(ladder[1].value, 3.0, 1e-12);
  EXPECT_EQ(ladder[1].multiplicity, 2);
  EXPECT_NEAR(ladder[2].value, 5.0, 1e-12);
  EXPECT_EQ(ladder[2].multiplicity, 6);
  EXPECT_NEAR(ladder[3].value, 6.0, 1e-12);
  EXPECT_EQ(ladder[3].multiplicity, 6);
}

TEST(Spectrum, CubeMatchesDiscreteCavityModes) {
  const auto& r = cube16();
  const auto ladder = oracles::discrete_ladder({std::numbers::pi, std::numbers::pi, std::numbers::pi},
                                               {16, 16, 16}, 3);
  const auto found = clusters(r);
  ASSERT_GE(found.size(), 3u);
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(found[c].lambda, ladder[c].value, 1e-8 * ladder[c].value);
    EXPECT_EQ(found[c].multiplicity, ladder[c].multiplicity);
    EXPECT_FALSE(found[c].truncated);
  }
}

TEST(Spectrum, EigenfieldsAreOrthonormalDivergenceFreeAndConsistent) {
  const auto& r = cube16();
  for (std::size_t i = 0; i < r.pairs.size(); ++i) {
    const EigenPair& p = r.pairs[i];
    EXPECT_LE(p.rayleigh_residual, 1e-7);
    const ScalarField d = div(p.e_k);
    EXPECT_LE(std::sqrt(inner(d, d)), 1e-9);
    EXPECT_NEAR(norm_sq(curl(p.e_k)) / norm_sq(p.e_k), p.lambda_k, 1e-9 * p.lambda_k);
    for (std::size_t j = 0; j < r.pairs.size(); ++j)
      EXPECT_NEAR(inner(p.e_k, r.pairs[j].e_k), i == j ? 1.0 : 0.0, 1e-9);
  }
}

TEST(Spectrum, DoublingTheBoxDividesEigenvaluesByFour) {
  const EigenResult small = curl_curl_eigs(GridSpec::cube(1.0, 12), 4);
  const EigenResult large = curl_curl_eigs(GridSpec::cube(2.0, 12), 4);
  for (int k = 0; k < 4; ++k)
    EXPECT_NEAR(large.pairs[k].lambda_k, small.pairs[k].lambda_k / 4.0, 1e-8 * small.pairs[k].lambda_k);
}

TEST(Spectrum, TruncatedClusterIsFlagged) {
  const EigenResult r = curl_curl_eigs(GridSpec::cube(std::numbers::pi, 12), 2);
  const auto c = clusters(r);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].multiplicity, 2);
  EXPECT_TRUE(c[0].truncated);
}

TEST(Spectrum, VtildeBelowFirstEigenvalueIsEmpty) {
  const SpectralSubspace s = build_Vtilde(cube16().pairs, -1.0);
  EXPECT_EQ(s.dim(), 0);
  EXPECT_EQ(s.nu, 1);
  EXPECT_NEAR(s.lambda_nu, 2.0, 0.02);
  EXPECT_EQ(s.lambda_nu_minus_1, 0.0);
}

TEST(Spectrum, VtildeInSecondGapHoldsFirstCluster) {
  const SpectralSubspace s = build_Vtilde(cube16().pairs, -2.5);
  EXPECT_EQ(s.dim(), 3);
  EXPECT_EQ(s.nu, 4);
  EXPECT_NEAR(s.lambda_nu, 3.0, 0.03);
  EXPECT_LE(s.gram_residual, 1e-9);
  for (const EigenPair& p : s.pairs) EXPECT_LT(quadratic_form(p.e_k, -2.5), 0.0);
}

TEST(Spectrum, VtildeIncludesClusterAtExactBoundary) {
  const auto& pairs = cube16().pairs;
  const double lambda = -pairs[0].lambda_k;
  const SpectralSubspace s = build_Vtilde(pairs, lambda);
  EXPECT_EQ(s.dim(), 3);
  for (const EigenPair& p : s.pairs) EXPECT_LE(std::abs(quadratic_form(p.e_k, lambda)), 1e-8);
}

TEST(Spectrum, QuadraticFormSplitsSigns) {
  const GridSpec g = GridSpec::cube(std::numbers::pi, 16);
  const double lambda = -2.5;
  const SpectralSubspace s = build_Vtilde(cube16().pairs, lambda);
  for (int trial = 0; trial < 20; ++trial) {
    const VectorField v = remove_subspace(project_V(random_edge_field(g, 100 + trial)), s);
    EXPECT_GT(quadratic_form(v, lambda), 0.0);
    VectorField neg(g);
    for (int k = 0; k < s.dim(); ++k) neg.axpy(std::cos(trial + 1.7 * k), s.pairs[k].e_k);
    EXPECT_LT(quadratic_form(neg, lambda), 0.0);
  }
}

TEST(Spectrum, UnderResolvedSpectrumIsAnError) {
  EXPECT_THROW(build_Vtilde(cube16().pairs, -100.0), UnderResolvedSpectrum);
  EXPECT_THROW(build_Vtilde(cube16().pairs, 0.5), DomainError);
}

TEST(Spectrum, JsonExport) {
  const std::string s = spectrum_json({{2.0, 3, 1e-9, false}});
  EXPECT_NE(s.find("\"lambda\": 2.0"), std::string::npos);
  EXPECT_NE(s.find("\"multiplicity\": 3"), std::string::npos);
}
