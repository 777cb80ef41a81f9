#include "curlvar/spectrum.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "curlvar/errors.hpp"
#include "curlvar/helmholtz.hpp"
#include "curlvar/operators.hpp"
#include "curlvar/spectral.hpp"

namespace curlvar {
namespace {

// A block vector together with its curl, updated by the same linear maps.
struct Column {
  VectorField x;
  VectorField cx;
};

void scale(Column& c, double s) {
  c.x *= s;
  c.cx *= s;
}

void axpy(Column& y, double a, const Column& x) {
  y.x.axpy(a, x.x);
  y.cx.axpy(a, x.cx);
}

// Modified Gram-Schmidt, two passes. Columns that lose almost all their norm
// are dropped, except the leading `keep` ones which must stay independent.
std::vector<Column> orthonormalize(std::vector<Column> cols, std::size_t keep) {
  std::vector<Column> out;
  for (std::size_t n = 0; n < cols.size(); ++n) {
    Column c = std::move(cols[n]);
    const double before = std::sqrt(norm_sq(c.x));
    if (before == 0.0) {
      if (n < keep) throw NumericalFailure("eigensolver block collapsed");
      continue;
    }
    for (int pass = 0; pass < 2; ++pass)
      for (const Column& q : out) axpy(c, -inner(q.x, c.x), q);
    const double after = std::sqrt(norm_sq(c.x));
    if (after <= 1e-8 * before) {
      if (n < keep) throw NumericalFailure("eigensolver block lost rank");
      continue;
    }
    scale(c, 1.0 / after);
    out.push_back(std::move(c));
  }
  return out;
}

Column make_column(VectorField x) {
  VectorField cx = curl(x);
  return {std::move(x), std::move(cx)};
}

}  // namespace

EigenResult curl_curl_eigs(const GridSpec& grid, int count, const EigenOptions& options) {
  grid.validate();
  if (count < 1) throw DomainError("eigenvalue count must be at least 1");
  if (!(options.tol > 0.0)) throw DomainError("eigensolver tolerance must be positive");
  const int guard = options.guard >= 0 ? options.guard : std::max(3, count / 2);
  const int m = count + guard;
  // Converge one vector past `count` when possible so cluster truncation can
  // be detected reliably.
  const int wanted = std::min(m, count + 1);

  std::vector<Column> block;
  for (int i = 0; i < m; ++i)
    block.push_back(make_column(project_V(random_edge_field(grid, options.seed + 7919 * i))));
  std::vector<Column> x = orthonormalize(std::move(block), m);
  std::vector<Column> prev;

  EigenResult result;
  std::vector<double> theta(m, 0.0);
  double worst = 0.0;
  for (int it = 0; it <= options.max_iter; ++it) {
    // Rayleigh-Ritz on the current orthonormal basis x (plus w and p).
    const int nb = static_cast<int>(x.size());
    Eigen::MatrixXd h(nb, nb);
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j <= i; ++j) h(i, j) = h(j, i) = inner(x[i].cx, x[j].cx);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    if (eig.info() != Eigen::Success) throw NumericalFailure("Rayleigh-Ritz eigensolve failed");

    std::vector<Column> ritz;
    for (int k = 0; k < m; ++k) {
      Column c{VectorField(grid), VectorField(grid, Location::face)};
      for (int j = 0; j < nb; ++j) axpy(c, eig.eigenvectors()(j, k), x[j]);
      theta[k] = eig.eigenvalues()(k);
      ritz.push_back(std::move(c));
    }

    std::vector<VectorField> residual(m);
    std::vector<double> rel(m);
    worst = 0.0;
    int converged = 0;
    for (int k = 0; k < m; ++k) {
      residual[k] = curl_adjoint(ritz[k].cx);
      residual[k].axpy(-theta[k], ritz[k].x);
      rel[k] = std::sqrt(norm_sq(residual[k])) / std::max(std::abs(theta[k]), 1e-300);
      if (k < wanted) worst = std::max(worst, rel[k]);
      if (k < wanted && rel[k] <= options.tol) ++converged;
    }
    result.iterations = it;
    if (converged == wanted) {
      x = std::move(ritz);
      break;
    }
    if (it == options.max_iter) {
      throw SolverFailure("curl-curl eigensolver stagnated", worst, it);
    }

    // Previous-direction block: the new Ritz vectors minus their component
    // on the previous Ritz block, re-projected so rounding cannot leak
    // gradient content into the search space.
    std::vector<Column> next_p;
    for (std::size_t k = 0; k < prev.size(); ++k) {
      VectorField d = ritz[k].x;
      for (const Column& q : prev) d.axpy(-inner(q.x, d), q.x);
      if (std::sqrt(norm_sq(d)) > 1e-10) next_p.push_back(make_column(project_V(d)));
    }
    prev = ritz;
    std::vector<Column> basis = std::move(ritz);
    const std::size_t keep = basis.size();
    for (int k = 0; k < m; ++k) {
      if (rel[k] <= 0.1 * options.tol) continue;
      basis.push_back(make_column(project_V(solve_hodge(residual[k]))));
    }
    for (Column& c : next_p) basis.push_back(std::move(c));
    x = orthonormalize(std::move(basis), keep);
  }

  for (int k = 0; k < count; ++k) {
    EigenPair pair;
    pair.lambda_k = theta[k];
    pair.e_k = std::move(x[k].x);
    VectorField r = curl_curl(pair.e_k);
    r.axpy(-theta[k], pair.e_k);
    pair.rayleigh_residual = std::sqrt(norm_sq(r)) / theta[k];
    result.pairs.push_back(std::move(pair));
  }
  result.next_lambda = theta[count];
  return result;
}

std::vector<Cluster> clusters(const EigenResult& result, double cluster_tol) {
  std::vector<Cluster> out;
  for (const EigenPair& p : result.pairs) {
    if (!out.empty() && std::abs(p.lambda_k - out.back().lambda) <= cluster_tol * out.back().lambda) {
      out.back().multiplicity += 1;
      out.back().residual = std::max(out.back().residual, p.rayleigh_residual);
    } else {
      out.push_back({p.lambda_k, 1, p.rayleigh_residual, false});
    }
  }
  if (!out.empty() &&
      std::abs(result.next_lambda - out.back().lambda) <= cluster_tol * out.back().lambda) {
    out.back().truncated = true;
  }
  return out;
}

SpectralSubspace build_Vtilde(const std::vector<EigenPair>& pairs, double lambda) {
  if (lambda > 0.0) throw DomainError("build_Vtilde needs lambda <= 0");
  for (std::size_t k = 1; k < pairs.size(); ++k)
    if (pairs[k].lambda_k < pairs[k - 1].lambda_k) throw ContractViolation("eigenpairs must be ascending");
  const double cut = -lambda + 1e-6 * std::max(1.0, std::abs(lambda));
  SpectralSubspace sub;
  sub.lambda_cut = -lambda;
  std::size_t k = 0;
  while (k < pairs.size() && pairs[k].lambda_k <= cut) sub.pairs.push_back(pairs[k++]);
  if (k == pairs.size()) {
    throw UnderResolvedSpectrum("no computed eigenvalue exceeds -lambda = " + std::to_string(-lambda) +
                                "; compute more eigenpairs");
  }
  sub.nu = static_cast<int>(k) + 1;
  sub.lambda_nu = pairs[k].lambda_k;
  sub.lambda_nu_minus_1 = k > 0 ? pairs[k - 1].lambda_k : 0.0;
  for (std::size_t i = 0; i < sub.pairs.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double g = inner(sub.pairs[i].e_k, sub.pairs[j].e_k) - (i == j ? 1.0 : 0.0);
      sub.gram_residual = std::max(sub.gram_residual, std::abs(g));
    }
  return sub;
}

VectorField remove_subspace(const VectorField& u, const SpectralSubspace& sub) {
  VectorField out = u;
  for (const EigenPair& p : sub.pairs) out.axpy(-inner(p.e_k, out), p.e_k);
  return out;
}

double quadratic_form(const VectorField& v, double lambda) {
  return norm_sq(curl(v)) + lambda * norm_sq(v);
}

std::string spectrum_json(const std::vector<Cluster>& ladder) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const Cluster& c : ladder) {
    nlohmann::ordered_json item;
    item["lambda"] = c.lambda;
    item["multiplicity"] = c.multiplicity;
    item["residual"] = c.residual;
    if (c.truncated) item["truncated"] = true;
    out.push_back(item);
  }
  return out.dump(2);
}

}  // namespace curlvar
