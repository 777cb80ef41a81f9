#include "curlvar/grid.hpp"

#include <algorithm>
#include <cmath>

#include "curlvar/errors.hpp"

namespace curlvar {

std::string to_string(Location loc) {
  switch (loc) {
    case Location::node: return "node";
    case Location::edge: return "edge";
    case Location::face: return "face";
    case Location::cell: return "cell";
  }
  return "unknown";
}

GridSpec GridSpec::cube(double length, int n) {
  GridSpec g;
  g.lengths = {length, length, length};
  g.cells = {n, n, n};
  return g;
}

GridSpec GridSpec::centered_cube(double half_width, int n) {
  GridSpec g = cube(2.0 * half_width, n);
  g.origin = {-half_width, -half_width, -half_width};
  return g;
}

double GridSpec::cell_volume() const { return spacing(0) * spacing(1) * spacing(2); }

std::array<double, 3> GridSpec::center() const {
  return {origin[0] + 0.5 * lengths[0], origin[1] + 0.5 * lengths[1],
          origin[2] + 0.5 * lengths[2]};
}

void GridSpec::validate() const {
  for (int d = 0; d < 3; ++d) {
    if (cells[d] < 4) {
      throw DomainError("grid needs at least 4 cells per axis, axis " + std::to_string(d) +
                        " has " + std::to_string(cells[d]));
    }
    if (!(lengths[d] > 0.0) || !std::isfinite(lengths[d])) {
      throw DomainError("box length on axis " + std::to_string(d) + " must be positive");
    }
    if (!std::isfinite(origin[d])) throw DomainError("box origin must be finite");
  }
  if (!(cell_volume() > 0.0)) throw DomainError("cell volume must be positive");
}

std::array<int, 3> component_dims(const GridSpec& grid, Location loc, int component) {
  const auto& n = grid.cells;
  switch (loc) {
    case Location::node: return {n[0] + 1, n[1] + 1, n[2] + 1};
    case Location::cell: return {n[0], n[1], n[2]};
    case Location::edge: {
      std::array<int, 3> d{n[0] + 1, n[1] + 1, n[2] + 1};
      d[component] -= 1;
      return d;
    }
    case Location::face: {
      std::array<int, 3> d{n[0], n[1], n[2]};
      d[component] += 1;
      return d;
    }
  }
  return {0, 0, 0};
}

std::array<double, 3> component_offset(Location loc, int component) {
  switch (loc) {
    case Location::node: return {0.0, 0.0, 0.0};
    case Location::cell: return {0.5, 0.5, 0.5};
    case Location::edge: {
      std::array<double, 3> o{0.0, 0.0, 0.0};
      o[component] = 0.5;
      return o;
    }
    case Location::face: {
      std::array<double, 3> o{0.5, 0.5, 0.5};
      o[component] = 0.0;
      return o;
    }
  }
  return {0.0, 0.0, 0.0};
}

Array3::Array3(std::array<int, 3> dims, double fill)
    : dims_(dims),
      data_(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2], fill) {}

void Array3::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

}  // namespace curlvar
