#pragma once

#include <optional>
#include <string>
#include <vector>

#include "curlvar/field.hpp"
#include "curlvar/groundstate.hpp"
#include "curlvar/nehari.hpp"
#include "curlvar/spectrum.hpp"

namespace curlvar {

// The lambda = 0 reference: c0 = S_bar^{3/2} / 3 on the same grid, with the
// unit-curl minimizer used as a start for lambda < 0 (Psi_lambda <= Psi_0
// pointwise on V when the spectral subspace is empty, so that start alone
// gives c_lambda <= c0).
struct C0Reference {
  double c0 = 0.0;
  double S_bar = 0.0;
  bool converged = false;
  std::optional<VectorField> v0;
};

C0Reference reference_from(const GroundStateResult& ground_state);

struct BNConfig {
  // Descent settings for each candidate start (seed, tolerances, caps).
  GroundStateConfig descent;
  // Slack for comparisons against c0 and the upper bound.
  double tol = 1e-6;
  // Also start from the dipole ansatz (projected to V+).
  bool ansatz_start = true;
};

struct BNCandidate {
  std::string start;
  double c_lambda = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
};

struct BNResult {
  double lambda = 0.0;
  // lambda lies in (-lambda_nu, -lambda_{nu-1}].
  int nu = 1;
  double lambda_nu = 0.0;
  double lambda_nu_minus_1 = 0.0;
  double c_lambda = 0.0;
  // (lambda + lambda_nu)^{3/2} |Omega| / 3
  double eigen_gap_bound = 0.0;
  double c0 = 0.0;
  bool existence_predicted = false;
  int multiplicity_lower = 0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  // |c_lambda - |u|_6^6 / 3| / c_lambda at the minimizer.
  double energy_identity_residual = 0.0;
  std::string best_start;
  std::vector<BNCandidate> candidates;
  std::optional<NehariPoint> ground_state;
  std::optional<VectorField> v;
};

// c_lambda = inf over the unit curl sphere of V+ of J_lambda o m_lambda,
// minimized from several starts: the lowest eigenfield above the cut, the
// c0 minimizer and the dipole ansatz, each projected to V+. `pairs` must
// resolve the spectrum past -lambda (UnderResolvedSpectrum otherwise).
// ground_state is set only when the best run converged.
BNResult compute_c_lambda(double lambda, const std::vector<EigenPair>& pairs, const C0Reference& reference,
                          const BNConfig& config = {});

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const { return !(hi > lo); }
};

// (-lambda_nu, -lambda_nu + S_bar volume^{-2/3}) clipped to
// (-lambda_nu, -lambda_nu_minus_1]. An empty interval has hi == lo.
Interval existence_window(int nu, double lambda_nu, double S_bar, double volume, double lambda_nu_minus_1 = 0.0);

// Number of indices k, with multiplicity, such that
// -lambda_k < lambda < -lambda_k + threshold. `ladder` is ascending and lists
// every eigenvalue once per multiplicity (ContractViolation otherwise).
int multiplicity_count(double lambda, const std::vector<double>& ladder, double threshold);

// The same with threshold S_bar volume^{-2/3} / 3.
int multiplicity_count(double lambda, const std::vector<double>& ladder, double S_bar, double volume);

struct SweepReport {
  std::vector<BNResult> results;
  // Adjacent pairs (i, i+1) with c_i > c_{i+1} + tol.
  std::vector<int> monotonicity_violations;
  // Members above min(eigen_gap_bound, c0) + tol.
  std::vector<int> bound_violations;
  // Members with c_lambda >= (1 - plateau_tol) c0.
  std::vector<int> plateau;
  // lambda_nu + (smallest lambda on the plateau); a lower estimate of the
  // gap at which c_lambda reaches c0. Exploratory only.
  std::optional<double> epsilon_nu;
  // Members whose computation threw; their entries hold the error text.
  std::vector<std::pair<int, std::string>> failures;
};

// Members run as independent tasks (see thread_count()). lambdas ascending
// and inside one spectral gap.
SweepReport sweep_c_lambda(const std::vector<double>& lambdas, const std::vector<EigenPair>& pairs,
                           const C0Reference& reference, const BNConfig& config = {}, double plateau_tol = 1e-3);

// N(un) - N(un - u) - N(u) with N(x) = |x|_6^6 / 6: the Brezis-Lieb defect,
// which tends to 0 along sequences un = u + (part escaping to a point).
double brezis_lieb_defect(const VectorField& u, const VectorField& un);

}  // namespace curlvar
