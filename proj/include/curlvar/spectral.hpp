#pragma once

#include "curlvar/field.hpp"

namespace curlvar {

// Fast direct solvers built on real-to-real FFTs. Both operators are
// diagonalized exactly by sine/cosine transforms on the box, so the solves are
// exact up to rounding.

// Solves (-div grad) xi = f for a node potential xi vanishing on the boundary.
// Only interior values of f are read.
ScalarField solve_dirichlet_poisson(const ScalarField& f);

// Solves hodge_laplacian(u) = f for an edge field u. Tangential boundary
// samples of f are ignored. hodge_laplacian is positive definite on edge
// fields, maps V to V and W to W, and equals curl_curl on V.
VectorField solve_hodge(const VectorField& f);

// Solves (hodge_laplacian + shift) u = f mode by mode. Modes with
// mu + shift = 0 (to rounding) get a zero coefficient.
VectorField solve_hodge(const VectorField& f, double shift);

// Eigenvalue of the 1-D second difference with mode m on n cells of width h:
// 4 sin^2(pi m / (2 n)) / h^2.
double difference_eigenvalue(int m, int n, double h);

}  // namespace curlvar
