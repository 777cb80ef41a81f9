#pragma once

#include "curlvar/field.hpp"

namespace curlvar {

// u = v + w with v divergence free and w = grad(xi) a gradient, L2-orthogonal.
struct DecomposedField {
  VectorField v;
  VectorField w;
  ScalarField xi;
  // Relative residual of the potential equation at exit.
  double residual = 0.0;
  int iterations = 0;
};

struct HelmholtzOptions {
  double tol = 1e-10;
  // 0 selects 10 * (max cells per axis)^2.
  int max_iter = 0;
  // Precondition CG with the fast sine-transform Poisson solve. Without it the
  // iteration is plain CG on the 7-point Laplacian.
  bool fast_preconditioner = true;
};

// Solves (-div grad) xi = -div u by conjugate gradients and sets w = grad xi,
// v = u - w. Throws SolverFailure when the budget runs out.
DecomposedField decompose(const VectorField& u, const HelmholtzOptions& options = {});
DecomposedField decompose(const VectorField& u, double tol);

// The divergence-free part of u.
VectorField project_V(const VectorField& u, double tol = 1e-10);

}  // namespace curlvar
