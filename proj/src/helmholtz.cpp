#include "curlvar/helmholtz.hpp"

#include <algorithm>
#include <cmath>

#include "curlvar/errors.hpp"
#include "curlvar/operators.hpp"
#include "curlvar/spectral.hpp"

namespace curlvar {
namespace {

ScalarField apply_laplacian(const ScalarField& xi) {
  ScalarField out = div(grad(xi));
  out *= -1.0;
  return out;
}

}  // namespace

DecomposedField decompose(const VectorField& u, const HelmholtzOptions& options) {
  if (u.location() != Location::edge) throw InvalidField("decompose expects an edge field");
  if (!(options.tol > 0.0)) throw DomainError("decompose needs tol > 0");
  if (!u.all_finite()) throw InvalidField("field has non-finite entries");
  const GridSpec& g = u.grid();
  const int n_max = std::max({g.cells[0], g.cells[1], g.cells[2]});
  const int max_iter = options.max_iter > 0 ? options.max_iter : 10 * n_max * n_max;

  ScalarField b = div(u);
  b *= -1.0;
  const double b_norm = std::sqrt(inner(b, b));

  DecomposedField out;
  out.xi = ScalarField(g, Location::node);
  if (b_norm == 0.0) {
    out.v = u;
    out.w = VectorField(g, Location::edge);
    return out;
  }

  auto precondition = [&](const ScalarField& r) {
    return options.fast_preconditioner ? solve_dirichlet_poisson(r) : r;
  };
  ScalarField& x = out.xi;
  ScalarField r = b;
  ScalarField z = precondition(r);
  ScalarField p = z;
  double rz = inner(r, z);
  double rel = 1.0;
  int it = 0;
  while (it < max_iter) {
    const ScalarField Ap = apply_laplacian(p);
    const double alpha = rz / inner(p, Ap);
    x.axpy(alpha, p);
    r.axpy(-alpha, Ap);
    ++it;
    rel = std::sqrt(inner(r, r)) / b_norm;
    if (rel <= options.tol) break;
    z = precondition(r);
    const double rz_new = inner(r, z);
    p *= rz_new / rz;
    p += z;
    rz = rz_new;
  }
  // The recursively updated residual drifts from the true one; report the
  // true residual and polish once with the direct solve if needed.
  ScalarField true_r = b;
  true_r.axpy(-1.0, apply_laplacian(x));
  rel = std::sqrt(inner(true_r, true_r)) / b_norm;
  if (rel > options.tol && options.fast_preconditioner) {
    x += solve_dirichlet_poisson(true_r);
    true_r = b;
    true_r.axpy(-1.0, apply_laplacian(x));
    rel = std::sqrt(inner(true_r, true_r)) / b_norm;
  }
  out.residual = rel;
  out.iterations = it;
  if (rel > options.tol) throw SolverFailure("Helmholtz potential solve did not converge", rel, it);

  x.enforce_boundary();
  out.w = grad(x);
  out.v = u - out.w;
  return out;
}

DecomposedField decompose(const VectorField& u, double tol) {
  HelmholtzOptions options;
  options.tol = tol;
  return decompose(u, options);
}

VectorField project_V(const VectorField& u, double tol) { return decompose(u, tol).v; }

}  // namespace curlvar
