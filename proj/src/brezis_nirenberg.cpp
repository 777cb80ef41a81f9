#include "curlvar/brezis_nirenberg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "curlvar/errors.hpp"
#include "curlvar/helmholtz.hpp"
#include "curlvar/operators.hpp"
#include "curlvar/parallel.hpp"

namespace curlvar {

C0Reference reference_from(const GroundStateResult& ground_state) {
  C0Reference r;
  r.c0 = ground_state.point.J_value;
  r.S_bar = std::pow(3.0 * r.c0, 2.0 / 3.0);
  r.converged = ground_state.converged;
  r.v0 = ground_state.v;
  return r;
}

BNResult compute_c_lambda(double lambda, const std::vector<EigenPair>& pairs, const C0Reference& reference,
                          const BNConfig& config) {
  if (!(lambda <= 0.0)) throw DomainError("compute_c_lambda needs lambda <= 0");
  if (!(config.tol > 0.0)) throw DomainError("tol must be positive");
  if (pairs.empty()) throw UnderResolvedSpectrum("no eigenpairs given");
  const SpectralSubspace Vtilde = build_Vtilde(pairs, lambda);
  const GridSpec& grid = pairs.front().e_k.grid();

  BNResult out;
  out.lambda = lambda;
  out.nu = Vtilde.nu;
  out.lambda_nu = Vtilde.lambda_nu;
  out.lambda_nu_minus_1 = Vtilde.lambda_nu_minus_1;
  out.c0 = reference.c0;
  out.eigen_gap_bound = std::pow(lambda + out.lambda_nu, 1.5) * grid.volume() / 3.0;

  std::vector<std::pair<std::string, VectorField>> starts;
  starts.emplace_back("eigenfield", pairs[static_cast<std::size_t>(Vtilde.dim())].e_k);
  if (reference.v0) {
    if (!(reference.v0->grid() == grid)) throw InvalidField("c0 minimizer lives on another grid");
    starts.emplace_back("c0", *reference.v0);
  }
  if (config.ansatz_start) {
    GroundStateConfig c = config.descent;
    c.initial.reset();
    starts.emplace_back("ansatz", initial_field(grid, c));
  }

  double best = std::numeric_limits<double>::infinity();
  std::optional<GroundStateResult> best_run;
  for (auto& [name, v] : starts) {
    VectorField plus = remove_subspace(project_V(v), Vtilde);
    if (!(norm_sq(curl(plus)) > 0.0)) continue;
    GroundStateResult run = descend_sphere(plus, lambda, Vtilde, config.descent);
    const double c = run.point.J_value;
    out.candidates.push_back({name, c, run.converged, run.iterations, run.gradient_norm});
    if (c < best) {
      best = c;
      out.best_start = name;
      best_run = std::move(run);
    }
  }
  if (!best_run) throw DegenerateInput("no start has a component in V+");

  out.c_lambda = best;
  out.converged = best_run->converged;
  out.iterations = best_run->iterations;
  out.gradient_norm = best_run->gradient_norm;
  out.energy_identity_residual = std::abs(best - best_run->point.l6_6 / 3.0) / best;
  out.existence_predicted = best < reference.c0 - config.tol;

  std::vector<double> ladder;
  for (const EigenPair& p : pairs) ladder.push_back(p.lambda_k);
  out.multiplicity_lower = multiplicity_count(lambda, ladder, reference.S_bar, grid.volume());

  out.v = best_run->v;
  if (out.converged) out.ground_state = std::move(best_run->point);
  return out;
}

Interval existence_window(int nu, double lambda_nu, double S_bar, double volume, double lambda_nu_minus_1) {
  if (nu < 1 || !(lambda_nu > 0.0) || !(S_bar > 0.0) || !(volume > 0.0))
    throw DomainError("existence_window needs positive inputs");
  if (lambda_nu_minus_1 < 0.0 || lambda_nu_minus_1 > lambda_nu)
    throw DomainError("lambda_nu_minus_1 must lie in [0, lambda_nu]");
  Interval w;
  w.lo = -lambda_nu;
  w.hi = std::min(-lambda_nu + S_bar * std::pow(volume, -2.0 / 3.0), -lambda_nu_minus_1);
  if (!(w.hi > w.lo)) w.hi = w.lo;
  return w;
}

int multiplicity_count(double lambda, const std::vector<double>& ladder, double threshold) {
  if (!std::is_sorted(ladder.begin(), ladder.end())) throw ContractViolation("ladder must be ascending");
  // -lambda_k < lambda < -lambda_k + threshold  <=>  -lambda < lambda_k < threshold - lambda
  const auto lo = std::upper_bound(ladder.begin(), ladder.end(), -lambda);
  const auto hi = std::lower_bound(lo, ladder.end(), threshold - lambda);
  int count = 0;
  for (auto it = lo; it != hi; ++it)
    if (-*it < lambda && lambda < -*it + threshold) ++count;
  return count;
}

int multiplicity_count(double lambda, const std::vector<double>& ladder, double S_bar, double volume) {
  return multiplicity_count(lambda, ladder, S_bar * std::pow(volume, -2.0 / 3.0) / 3.0);
}

SweepReport sweep_c_lambda(const std::vector<double>& lambdas, const std::vector<EigenPair>& pairs,
                           const C0Reference& reference, const BNConfig& config, double plateau_tol) {
  if (!std::is_sorted(lambdas.begin(), lambdas.end())) throw ContractViolation("sweep lambdas must be ascending");
  if (!(plateau_tol > 0.0)) throw DomainError("plateau tolerance must be positive");
  SweepReport report;
  report.results.resize(lambdas.size());
  std::vector<std::string> errors(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) {
    try {
      report.results[i] = compute_c_lambda(lambdas[i], pairs, reference, config);
    } catch (const std::exception& e) {
      report.results[i].lambda = lambdas[i];
      report.results[i].c_lambda = std::numeric_limits<double>::quiet_NaN();
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    if (!errors[i].empty()) report.failures.emplace_back(static_cast<int>(i), errors[i]);

  const auto ok = [&](std::size_t i) { return errors[i].empty(); };
  for (std::size_t i = 0; i + 1 < lambdas.size(); ++i)
    if (ok(i) && ok(i + 1) && report.results[i].c_lambda > report.results[i + 1].c_lambda + config.tol)
      report.monotonicity_violations.push_back(static_cast<int>(i));
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!ok(i)) continue;
    const BNResult& r = report.results[i];
    if (r.c_lambda > std::min(r.eigen_gap_bound, r.c0) + config.tol) report.bound_violations.push_back(static_cast<int>(i));
    if (r.c_lambda >= r.c0 - plateau_tol * r.c0) {
      report.plateau.push_back(static_cast<int>(i));
      if (!report.epsilon_nu && r.nu == report.results[0].nu) report.epsilon_nu = r.lambda_nu + r.lambda;
    }
  }
  return report;
}

double brezis_lieb_defect(const VectorField& u, const VectorField& un) {
  if (!(u.grid() == un.grid()) || u.location() != un.location()) throw InvalidField("fields live on different grids");
  return (l6_pow6(un) - l6_pow6(un - u) - l6_pow6(u)) / 6.0;
}

}  // namespace curlvar
