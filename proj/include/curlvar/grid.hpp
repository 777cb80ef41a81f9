#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace curlvar {

enum class Scheme { yee_staggered };

// Where the samples of a discrete quantity live on the staggered grid.
//   node: scalar potentials            edge: primal fields u, v, w
//   face: curl of an edge field        cell: divergence of a face field,
//                                            quadrature points
enum class Location { node, edge, face, cell };

std::string to_string(Location loc);

// Axis-aligned box [origin, origin + lengths] split into cells[0] x cells[1] x
// cells[2] cells, with metallic (tangential-zero) boundary conditions.
struct GridSpec {
  std::array<double, 3> lengths{std::numbers::pi, std::numbers::pi, std::numbers::pi};
  std::array<int, 3> cells{32, 32, 32};
  std::array<double, 3> origin{0.0, 0.0, 0.0};
  Scheme scheme = Scheme::yee_staggered;

  static GridSpec cube(double length, int n);
  // Cube [-half_width, half_width]^3.
  static GridSpec centered_cube(double half_width, int n);

  double spacing(int axis) const { return lengths[axis] / cells[axis]; }
  double cell_volume() const;
  double volume() const { return lengths[0] * lengths[1] * lengths[2]; }
  std::array<double, 3> center() const;

  // Throws DomainError when cells < 4 on an axis or a length is not positive.
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

// Sample counts of one scalar component stored at `loc`. For edge and face
// locations `component` selects the axis the component points along.
std::array<int, 3> component_dims(const GridSpec& grid, Location loc, int component);

// Physical offset, in units of the spacing, of sample (0,0,0) of a component.
std::array<double, 3> component_offset(Location loc, int component);

// Dense 3-D array, last index fastest.
class Array3 {
public:
  Array3() = default;
  explicit Array3(std::array<int, 3> dims, double fill = 0.0);

  const std::array<int, 3>& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k;
  }
  double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }

  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void fill(double value);

private:
  std::array<int, 3> dims_{0, 0, 0};
  std::vector<double> data_;
};

}  // namespace curlvar
