#pragma once

#include <array>
#include <vector>

#include "curlvar/field.hpp"

namespace curlvar {

// Discrete curl of an edge field; the result lives on faces. Linear, and
// curl(grad(xi)) == 0 for every potential up to rounding.
VectorField curl(const VectorField& u);

// Transpose of `curl` with respect to the lumped inner products: maps a face
// field to an edge field. Its range is divergence free (div(curl_adjoint(b))
// vanishes identically), which makes it the natural way to build fields in V.
VectorField curl_adjoint(const VectorField& b);

// curl_adjoint(curl(u)): the discrete curl-curl operator on edge fields.
VectorField curl_curl(const VectorField& u);

// Divergence. For edge fields the result lives on nodes and is the negative
// adjoint of `grad` (boundary nodes carry zero); for face fields it lives on
// cells and div(curl(u)) == 0.
ScalarField div(const VectorField& u);

// Gradient of a scalar potential onto edges. Throws ContractViolation when the
// potential is not zero on the boundary (tolerance: 1e-12 of its max).
VectorField grad(const ScalarField& xi);

// Edge-space Hodge Laplacian curl_curl(u) - grad(div(u)). It maps V to V and
// W to W and coincides with curl_curl on divergence-free fields.
VectorField hodge_laplacian(const VectorField& u);

// Average of each staggered component to cell centers (edge or face input).
VectorField to_cells(const VectorField& u);

// Transpose of `to_cells` for edge fields: cell field -> edge field.
VectorField to_cells_adjoint(const VectorField& a, const GridSpec& grid);

// Quadrature samples of an edge field: at each of the 8 corners of every cell,
// the vector made of the three cell edges that meet at that corner. Index
// (cell * 8 + corner), corner bits (a, b, c) = (corner >> 2, corner >> 1, corner) & 1.
struct CornerSamples {
  GridSpec grid;
  std::array<std::vector<double>, 3> comp;
};

CornerSamples to_corners(const VectorField& u);

// Transpose of `to_corners` (unweighted): sums corner samples back onto edges.
VectorField to_corners_adjoint(const CornerSamples& s);

// L^p norm. Edge fields use the trapezoid rule on every cell with the corner
// vectors of `to_corners`: (h1 h2 h3 / 8 * sum |corner|^p)^(1/p). Face fields
// use the midpoint rule with `to_cells`. Throws DomainError for p < 1.
double lp_norm(const VectorField& u, double p);

// lp_norm(u, 6)^6 without the root.
double l6_pow6(const VectorField& u);

}  // namespace curlvar
