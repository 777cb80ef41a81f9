#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curlvar/field.hpp"

namespace curlvar {

// curl_curl e = lambda_k e with e divergence free and L2-normalized.
struct EigenPair {
  double lambda_k = 0.0;
  VectorField e_k;
  // |curl_curl e - lambda_k e|_2 / (lambda_k |e|_2)
  double rayleigh_residual = 0.0;
};

// One eigenvalue cluster of the ladder.
struct Cluster {
  double lambda = 0.0;
  int multiplicity = 0;
  double residual = 0.0;
  // The next computed eigenvalue also belongs to this cluster, so its
  // multiplicity may be undercounted.
  bool truncated = false;
};

// Span of the eigenfields with lambda_k <= lambda_cut (on which the form
// |curl v|^2 + lambda |v|^2 is negative semidefinite).
struct SpectralSubspace {
  std::vector<EigenPair> pairs;
  double lambda_cut = 0.0;
  // max |<e_i, e_j> - delta_ij|
  double gram_residual = 0.0;
  // 1-based index of the first eigenvalue above the cut, counted with
  // multiplicity, and the eigenvalues around it (lambda_{nu-1} = 0 when nu = 1).
  int nu = 1;
  double lambda_nu = 0.0;
  double lambda_nu_minus_1 = 0.0;

  int dim() const { return static_cast<int>(pairs.size()); }
};

struct EigenOptions {
  double tol = 1e-8;
  int max_iter = 500;
  std::uint64_t seed = 2024;
  // Extra block vectors beyond `count`; negative selects max(3, count / 2).
  int guard = -1;
  // Relative gap below which eigenvalues form one cluster.
  double cluster_tol = 1e-6;
};

struct EigenResult {
  std::vector<EigenPair> pairs;
  // Lowest Ritz value beyond the returned pairs (for cluster truncation).
  double next_lambda = 0.0;
  int iterations = 0;
};

// The `count` smallest positive eigenvalues of curl_curl on divergence-free
// edge fields, ascending, by block preconditioned iteration with the Hodge
// inverse as preconditioner. Throws SolverFailure on stagnation.
EigenResult curl_curl_eigs(const GridSpec& grid, int count, const EigenOptions& options = {});

// Groups eigenvalues closer than cluster_tol (relative) into clusters.
std::vector<Cluster> clusters(const EigenResult& result, double cluster_tol = 1e-6);

// Spectral subspace for lambda <= 0. Eigenvalues up to -lambda (plus a
// relative 1e-6 slack, so the boundary case is included) enter the span.
// Throws UnderResolvedSpectrum when no computed eigenvalue exceeds -lambda.
SpectralSubspace build_Vtilde(const std::vector<EigenPair>& pairs, double lambda);

// u minus its L2-orthogonal projection onto the subspace.
VectorField remove_subspace(const VectorField& u, const SpectralSubspace& sub);

// Q(v) = |curl v|^2 + lambda |v|^2.
double quadratic_form(const VectorField& v, double lambda);

// [{"lambda":..,"multiplicity":..,"residual":..}, ...]
std::string spectrum_json(const std::vector<Cluster>& ladder);

}  // namespace curlvar
