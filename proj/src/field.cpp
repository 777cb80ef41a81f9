#include "curlvar/field.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "curlvar/errors.hpp"
#include "curlvar/reduce.hpp"

namespace curlvar {
namespace {

// True when edge sample (i,j,k) of `component` lies in a boundary plane
// perpendicular to one of the other two axes, i.e. is tangential there.
bool tangential_boundary_edge(const GridSpec& g, int component, int i, int j, int k) {
  const std::array<int, 3> idx{i, j, k};
  for (int d = 0; d < 3; ++d) {
    if (d == component) continue;
    if (idx[d] == 0 || idx[d] == g.cells[d]) return true;
  }
  return false;
}

template <typename Visit>
void for_each_index(const std::array<int, 3>& dims, Visit&& visit) {
  for (int i = 0; i < dims[0]; ++i)
    for (int j = 0; j < dims[1]; ++j)
      for (int k = 0; k < dims[2]; ++k) visit(i, j, k);
}

}  // namespace

VectorField::VectorField(const GridSpec& grid, Location loc) : grid_(grid), loc_(loc) {
  if (loc == Location::node) throw InvalidField("vector fields cannot live on nodes");
  for (int c = 0; c < 3; ++c) comp_[c] = Array3(component_dims(grid, loc, c));
}

std::size_t VectorField::size() const {
  return comp_[0].size() + comp_[1].size() + comp_[2].size();
}

VectorField VectorField::sample(
    const GridSpec& grid, Location loc,
    const std::function<std::array<double, 3>(double, double, double)>& f) {
  VectorField u(grid, loc);
  for (int c = 0; c < 3; ++c) {
    const auto off = component_offset(loc, c);
    for_each_index(u[c].dims(), [&](int i, int j, int k) {
      const double x = grid.origin[0] + (i + off[0]) * grid.spacing(0);
      const double y = grid.origin[1] + (j + off[1]) * grid.spacing(1);
      const double z = grid.origin[2] + (k + off[2]) * grid.spacing(2);
      u[c](i, j, k) = f(x, y, z)[c];
    });
  }
  u.enforce_boundary();
  return u;
}

void VectorField::fill(double value) {
  for (auto& a : comp_) a.fill(value);
  enforce_boundary();
}

void VectorField::require_compatible(const VectorField& other) const {
  if (!(grid_ == other.grid_)) throw InvalidField("vector fields live on different grids");
  if (loc_ != other.loc_) {
    throw InvalidField("vector fields have different staggering (" + to_string(loc_) +
                       " vs " + to_string(other.loc_) + ")");
  }
}

VectorField& VectorField::operator+=(const VectorField& other) {
  axpy(1.0, other);
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& other) {
  axpy(-1.0, other);
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  for (auto& a : comp_)
    for (double& x : a.span()) x *= s;
  return *this;
}

void VectorField::axpy(double a, const VectorField& x) {
  require_compatible(x);
  for (int c = 0; c < 3; ++c) {
    auto dst = comp_[c].span();
    auto src = x.comp_[c].span();
    for (std::size_t n = 0; n < dst.size(); ++n) dst[n] += a * src[n];
  }
}

bool VectorField::all_finite() const {
  for (const auto& a : comp_)
    for (double x : a.span())
      if (!std::isfinite(x)) return false;
  return true;
}

double VectorField::max_abs() const {
  double m = 0.0;
  for (const auto& a : comp_)
    for (double x : a.span()) m = std::max(m, std::abs(x));
  return m;
}

void VectorField::enforce_boundary() {
  if (loc_ != Location::edge) return;
  for (int c = 0; c < 3; ++c) {
    for_each_index(comp_[c].dims(), [&](int i, int j, int k) {
      if (tangential_boundary_edge(grid_, c, i, j, k)) comp_[c](i, j, k) = 0.0;
    });
  }
}

double VectorField::boundary_violation() const {
  if (loc_ != Location::edge) return 0.0;
  double m = 0.0;
  for (int c = 0; c < 3; ++c) {
    for_each_index(comp_[c].dims(), [&](int i, int j, int k) {
      if (tangential_boundary_edge(grid_, c, i, j, k))
        m = std::max(m, std::abs(comp_[c](i, j, k)));
    });
  }
  return m;
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

double inner(const VectorField& a, const VectorField& b) {
  a.require_compatible(b);
  double s = 0.0;
  for (int c = 0; c < 3; ++c) s += pairwise_dot(a[c].span(), b[c].span());
  return a.grid().cell_volume() * s;
}

double norm_sq(const VectorField& a) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c) s += pairwise_sum_squares(a[c].span());
  return a.grid().cell_volume() * s;
}

ScalarField::ScalarField(const GridSpec& grid, Location loc)
    : grid_(grid), loc_(loc), values_(component_dims(grid, loc, 0)) {
  if (loc != Location::node && loc != Location::cell)
    throw InvalidField("scalar fields live on nodes or cells");
}

ScalarField ScalarField::sample(const GridSpec& grid, Location loc,
                                const std::function<double(double, double, double)>& f) {
  ScalarField s(grid, loc);
  const auto off = component_offset(loc, 0);
  for_each_index(s.values_.dims(), [&](int i, int j, int k) {
    s(i, j, k) = f(grid.origin[0] + (i + off[0]) * grid.spacing(0),
                   grid.origin[1] + (j + off[1]) * grid.spacing(1),
                   grid.origin[2] + (k + off[2]) * grid.spacing(2));
  });
  return s;
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  axpy(1.0, other);
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& x : values_.span()) x *= s;
  return *this;
}

void ScalarField::axpy(double a, const ScalarField& x) {
  if (!(grid_ == x.grid_) || loc_ != x.loc_) throw InvalidField("scalar field mismatch");
  auto dst = values_.span();
  auto src = x.values_.span();
  for (std::size_t n = 0; n < dst.size(); ++n) dst[n] += a * src[n];
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double x : values_.span()) m = std::max(m, std::abs(x));
  return m;
}

double ScalarField::boundary_violation() const {
  if (loc_ != Location::node) return 0.0;
  double m = 0.0;
  const auto& n = grid_.cells;
  for_each_index(values_.dims(), [&](int i, int j, int k) {
    if (i == 0 || j == 0 || k == 0 || i == n[0] || j == n[1] || k == n[2])
      m = std::max(m, std::abs(values_(i, j, k)));
  });
  return m;
}

void ScalarField::enforce_boundary() {
  if (loc_ != Location::node) return;
  const auto& n = grid_.cells;
  for_each_index(values_.dims(), [&](int i, int j, int k) {
    if (i == 0 || j == 0 || k == 0 || i == n[0] || j == n[1] || k == n[2])
      values_(i, j, k) = 0.0;
  });
}

double inner(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid()) || a.location() != b.location())
    throw InvalidField("scalar field mismatch");
  return a.grid().cell_volume() * pairwise_dot(a.values().span(), b.values().span());
}

VectorField random_edge_field(const GridSpec& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorField u(grid, Location::edge);
  for (int c = 0; c < 3; ++c)
    for (double& x : u[c].span()) x = normal(rng);
  u.enforce_boundary();
  return u;
}

ScalarField random_potential(const GridSpec& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ScalarField xi(grid, Location::node);
  for (double& x : xi.values().span()) x = normal(rng);
  xi.enforce_boundary();
  return xi;
}

}  // namespace curlvar
