#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "curlvar/field.hpp"
#include "curlvar/nehari.hpp"
#include "curlvar/spectrum.hpp"

namespace curlvar {

struct GroundStateConfig {
  std::uint64_t seed = 1;
  // Stop when |g_T|_Q <= tol * Psi(v) with g_T the sphere-tangent gradient
  // and |h|_Q^2 = |curl h|_2^2 + lambda |h|_2^2 (the curl norm for lambda = 0).
  double tol = 1e-5;
  int max_iter = 300;
  double inner_tol = 1e-8;
  // Recenter every this many iterations (0 disables) or when the concentration
  // detector flags.
  int recenter_every = 25;
  // Target interquartile radius of the curl energy as a fraction of the
  // shortest box edge.
  double recenter_target = 0.1;
  // A recentering is accepted when Psi grows by at most this fraction.
  double recenter_tolerance = 0.02;
  // Descend on the slice where the curl-energy centroid sits at the box
  // center and the curl-energy second moment keeps its initial value. Every
  // orbit of dilations and translations meets the slice once in the
  // continuum. On the grid the quotient is invariant under index-space
  // scaling, so the discrete minimizer is a grid-scale spike and the slice
  // only selects a local minimum whose value depends on the initial moment.
  // Off by default: the free descent reaches the grid-scale minimizer, which
  // the concentration report flags.
  bool quotient_symmetries = false;
  // Gaussian width of the dipole ansatz as a fraction of the shortest edge.
  double ansatz_width = 0.1;
  // Curl-norm weight of the seeded smooth random part relative to the ansatz.
  double noise = 0.3;
  // Concentration detector radii (empty: 2, 4 and 8 cells).
  std::vector<double> concentration_radii;
  double concentration_fraction = 0.5;
  // Starting field (projected to V and normalized) instead of the ansatz.
  std::optional<VectorField> initial;
};

struct HistoryEntry {
  double J = 0.0;
  double gradient_norm = 0.0;
  // True when the entry follows a recentering rather than a descent step.
  bool recentered = false;
};

struct Recenter {
  double s = 1.0;
  std::array<double, 3> y{0.0, 0.0, 0.0};
  int iteration = 0;
  double J_before = 0.0;
  double J_after = 0.0;
  bool accepted = false;
};

struct GroundStateResult {
  NehariPoint point;
  // (3 J)^{2/3}: the discrete S_bar estimate for this box.
  double S_estimate = 0.0;
  // |(3 J)^{2/3} - |curl u|^2 / |u|_6^2| / S_estimate at the final point.
  double chain_residual = 0.0;
  GridSpec grid;
  int iterations = 0;
  bool converged = false;
  // Final |g_T|_Q / Psi.
  double gradient_norm = 0.0;
  std::vector<HistoryEntry> history;
  std::vector<Recenter> recenters;
  // Unit-curl witness on the sphere.
  VectorField v;
  std::uint64_t seed = 0;
};

// Value and sphere-tangent gradient of Psi = J o m at v (|curl v|_2 = 1,
// v in V). The gradient is the Riesz representative in V for the curl inner
// product, so d/de Psi(v + e h) = <curl g_T, curl h> for tangent h.
struct SphereEvaluation {
  NehariPoint point;
  double psi = 0.0;
  VectorField gradient;
  double gradient_norm = 0.0;
};

SphereEvaluation evaluate_sphere(const VectorField& v, const NehariOptions& options = {});

// The same for Psi_lambda = J_lambda o m_lambda on the unit curl sphere of
// V+ = V minus span(Vtilde); v must lie in V+. The gradient lies in V+ and is
// the Riesz representative for Q(a, b) = <curl a, curl b> + lambda <a, b>,
// which is positive definite on V+; gradient_norm is its Q norm.
SphereEvaluation evaluate_sphere(const VectorField& v, double lambda, const SpectralSubspace& Vtilde,
                                 const NehariOptions& options = {});

// Psi = J(m(v)) without the gradient, for any nonzero v in V (Psi is
// invariant under scaling v).
double sphere_objective(const VectorField& v, const NehariOptions& options = {});

// Initial unit-curl field in V: dipole ansatz plus seeded smooth noise.
VectorField initial_field(const GridSpec& grid, const GroundStateConfig& config);

// Riemannian conjugate-gradient descent of Psi on the unit curl sphere of V.
GroundStateResult minimize_sphere(const GridSpec& grid, const GroundStateConfig& config = {});

// Descent of Psi_lambda from v0 (projected to V+ and normalized). lambda = 0
// with an empty subspace is minimize_sphere without the initial recentering;
// for lambda < 0 recentering and the symmetry slice are not used.
GroundStateResult descend_sphere(const VectorField& v0, double lambda, const SpectralSubspace& Vtilde,
                                 const GroundStateConfig& config);

// Curl-energy moments about the box center: the centroid offset (first three
// entries) and the mean squared distance (last entry), both weighted by
// |curl v|^2 and normalized by |curl v|_2^2.
std::array<double, 4> curl_moments(const VectorField& v);

// Riesz representatives in V (curl inner product) of the derivatives of the
// four curl_moments at v.
std::array<VectorField, 4> curl_moment_gradients(const VectorField& v);

// Independent runs for several seeds, concurrently (see thread_count()).
std::vector<GroundStateResult> minimize_sphere_seeds(const GridSpec& grid, const GroundStateConfig& config,
                                                     const std::vector<std::uint64_t>& seeds);

// |grad U|_2^2 / |U|_6^2 for the instanton 3^{1/4} (eps^2 + r^2)^{-1/2}
// centered in the box, multiplied by a quintic smoothstep cutoff that falls
// from 1 at R/2 to 0 at R = 0.9 * (shortest half edge). U is sampled on nodes,
// the gradient lives on edges and |U|_6 uses the node rule.
double sobolev_oracle(const GridSpec& grid, double eps);

// Curl energy per cell: each face's share |b|^2 dV is split between its two
// cells, so the entries sum to |curl u|_2^2.
std::vector<double> cell_curl_energy(const VectorField& u);

struct ConcentrationReport {
  std::vector<double> ball_radii;
  // local_curl_mass[iterate][radius]: curl energy within the ball about the
  // iterate's peak cell.
  std::vector<std::vector<double>> local_curl_mass;
  std::vector<double> total_curl_mass;
  bool flagged = false;
  std::optional<std::array<double, 3>> location;
};

// Flags when some iterate holds at least `fraction` of its curl energy within
// the smallest radius of its peak cell. Needs >= 2 iterates.
ConcentrationReport concentration_report(const std::vector<VectorField>& iterates, const std::vector<double>& radii,
                                         double fraction = 0.5);

struct RecenterResult {
  VectorField u;
  double s = 1.0;
  std::array<double, 3> y{0.0, 0.0, 0.0};
};

// y: curl-energy centroid relative to the box center. s: the curl-energy
// interquartile radius (r75 - r25 about y) divided by target_fraction times
// the shortest edge. Returns rescale(u, s, y).
RecenterResult recenter(const VectorField& u, double target_fraction = 0.1);

// Share of |u|_6^6 captured by the best fit f(|x - c|) (x - c)/|x - c| about
// the curl-energy centroid c (radial fit by shell averages).
double radial_fraction(const VectorField& u);

}  // namespace curlvar
