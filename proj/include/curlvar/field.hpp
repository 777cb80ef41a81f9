#pragma once

#include <array>
#include <cstdint>
#include <functional>

#include "curlvar/grid.hpp"

namespace curlvar {

// Three-component discrete vector field. Edge fields are the primal unknowns
// (u, v, w); face fields hold curls; cell fields hold values interpolated to
// the quadrature points. Edge fields always have zero tangential components on
// the boundary of the box.
class VectorField {
public:
  VectorField() = default;
  explicit VectorField(const GridSpec& grid, Location loc = Location::edge);

  const GridSpec& grid() const { return grid_; }
  Location location() const { return loc_; }

  Array3& operator[](int c) { return comp_[c]; }
  const Array3& operator[](int c) const { return comp_[c]; }

  std::size_t size() const;

  // Sample (i,j,k) of a component from a function of the physical position.
  static VectorField sample(const GridSpec& grid, Location loc,
                            const std::function<std::array<double, 3>(double, double, double)>& f);

  void fill(double value);
  void set_zero() { fill(0.0); }

  VectorField& operator+=(const VectorField& other);
  VectorField& operator-=(const VectorField& other);
  VectorField& operator*=(double s);
  // this += a * x
  void axpy(double a, const VectorField& x);

  bool all_finite() const;
  double max_abs() const;

  // Zeroes tangential boundary components (edge fields only; no-op otherwise).
  void enforce_boundary();
  // Largest |value| among the tangential boundary samples of an edge field.
  double boundary_violation() const;

  // Throws InvalidField unless `other` lives on the same grid and location.
  void require_compatible(const VectorField& other) const;

private:
  GridSpec grid_;
  Location loc_ = Location::edge;
  std::array<Array3, 3> comp_;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);

// Discrete L2 inner product: cell volume times the sum over all samples. For
// edge fields this is the lumped mass matrix used throughout (Helmholtz
// orthogonality, curl-curl spectrum, the lambda term of the energy).
double inner(const VectorField& a, const VectorField& b);
double norm_sq(const VectorField& a);

// Scalar samples at nodes (potentials, edge-field divergences) or cells
// (face-field divergences). A scalar potential is a node field vanishing on
// the boundary.
class ScalarField {
public:
  ScalarField() = default;
  ScalarField(const GridSpec& grid, Location loc);

  const GridSpec& grid() const { return grid_; }
  Location location() const { return loc_; }
  Array3& values() { return values_; }
  const Array3& values() const { return values_; }
  double& operator()(int i, int j, int k) { return values_(i, j, k); }
  double operator()(int i, int j, int k) const { return values_(i, j, k); }

  static ScalarField sample(const GridSpec& grid, Location loc,
                            const std::function<double(double, double, double)>& f);

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator*=(double s);
  void axpy(double a, const ScalarField& x);

  double max_abs() const;
  // Largest |value| on boundary nodes (node fields).
  double boundary_violation() const;
  void enforce_boundary();

private:
  GridSpec grid_;
  Location loc_ = Location::node;
  Array3 values_;
};

double inner(const ScalarField& a, const ScalarField& b);

// Random edge field with i.i.d. standard normal samples (tangential boundary
// samples zero). Deterministic for a given seed.
VectorField random_edge_field(const GridSpec& grid, std::uint64_t seed);
// Random scalar potential (interior nodes i.i.d. standard normal).
ScalarField random_potential(const GridSpec& grid, std::uint64_t seed);

}  // namespace curlvar
