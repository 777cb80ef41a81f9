#include "curlvar/operators.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "curlvar/errors.hpp"
#include "curlvar/reduce.hpp"

namespace curlvar {
namespace {

void require_location(const VectorField& u, Location loc, const char* op) {
  if (u.location() != loc) {
    throw InvalidField(std::string(op) + " expects a " + to_string(loc) + " field, got " +
                       to_string(u.location()));
  }
}

}  // namespace

VectorField curl(const VectorField& u) {
  require_location(u, Location::edge, "curl");
  const GridSpec& g = u.grid();
  const double i1 = 1.0 / g.spacing(0), i2 = 1.0 / g.spacing(1), i3 = 1.0 / g.spacing(2);
  const auto& [ux, uy, uz] = std::tie(u[0], u[1], u[2]);
  VectorField b(g, Location::face);
  {
    Array3& bx = b[0];
    const auto d = bx.dims();
    for (int i = 0; i < d[0]; ++i)
      for (int j = 0; j < d[1]; ++j)
        for (int k = 0; k < d[2]; ++k)
          bx(i, j, k) = (uz(i, j + 1, k) - uz(i, j, k)) * i2 - (uy(i, j, k + 1) - uy(i, j, k)) * i3;
  }
  {
    Array3& by = b[1];
    const auto d = by.dims();
    for (int i = 0; i < d[0]; ++i)
      for (int j = 0; j < d[1]; ++j)
        for (int k = 0; k < d[2]; ++k)
          by(i, j, k) = (ux(i, j, k + 1) - ux(i, j, k)) * i3 - (uz(i + 1, j, k) - uz(i, j, k)) * i1;
  }
  {
    Array3& bz = b[2];
    const auto d = bz.dims();
    for (int i = 0; i < d[0]; ++i)
      for (int j = 0; j < d[1]; ++j)
        for (int k = 0; k < d[2]; ++k)
          bz(i, j, k) = (uy(i + 1, j, k) - uy(i, j, k)) * i1 - (ux(i, j + 1, k) - ux(i, j, k)) * i2;
  }
  return b;
}

VectorField curl_adjoint(const VectorField& b) {
  require_location(b, Location::face, "curl_adjoint");
  const GridSpec& g = b.grid();
  const double i1 = 1.0 / g.spacing(0), i2 = 1.0 / g.spacing(1), i3 = 1.0 / g.spacing(2);
  const auto& [bx, by, bz] = std::tie(b[0], b[1], b[2]);
  VectorField u(g, Location::edge);
  {
    Array3& ux = u[0];
    const auto d = ux.dims();
    for (int i = 0; i < d[0]; ++i)
      for (int j = 1; j < d[1] - 1; ++j)
        for (int k = 1; k < d[2] - 1; ++k)
          ux(i, j, k) = (by(i, j, k - 1) - by(i, j, k)) * i3 + (bz(i, j, k) - bz(i, j - 1, k)) * i2;
  }
  {
    Array3& uy = u[1];
    const auto d = uy.dims();
    for (int i = 1; i < d[0] - 1; ++i)
      for (int j = 0; j < d[1]; ++j)
        for (int k = 1; k < d[2] - 1; ++k)
          uy(i, j, k) = (bz(i - 1, j, k) - bz(i, j, k)) * i1 + (bx(i, j, k) - bx(i, j, k - 1)) * i3;
  }
  {
    Array3& uz = u[2];
    const auto d = uz.dims();
    for (int i = 1; i < d[0] - 1; ++i)
      for (int j = 1; j < d[1] - 1; ++j)
        for (int k = 0; k < d[2]; ++k)
          uz(i, j, k) = (bx(i, j - 1, k) - bx(i, j, k)) * i2 + (by(i, j, k) - by(i - 1, j, k)) * i1;
  }
  return u;
}

VectorField curl_curl(const VectorField& u) { return curl_adjoint(curl(u)); }

ScalarField div(const VectorField& u) {
  const GridSpec& g = u.grid();
  const double i1 = 1.0 / g.spacing(0), i2 = 1.0 / g.spacing(1), i3 = 1.0 / g.spacing(2);
  const auto& [ux, uy, uz] = std::tie(u[0], u[1], u[2]);
  if (u.location() == Location::edge) {
    ScalarField s(g, Location::node);
    const auto& n = g.cells;
    for (int i = 1; i < n[0]; ++i)
      for (int j = 1; j < n[1]; ++j)
        for (int k = 1; k < n[2]; ++k)
          s(i, j, k) = (ux(i, j, k) - ux(i - 1, j, k)) * i1 + (uy(i, j, k) - uy(i, j - 1, k)) * i2 +
                       (uz(i, j, k) - uz(i, j, k - 1)) * i3;
    return s;
  }
  if (u.location() == Location::face) {
    ScalarField s(g, Location::cell);
    const auto& n = g.cells;
    for (int i = 0; i < n[0]; ++i)
      for (int j = 0; j < n[1]; ++j)
        for (int k = 0; k < n[2]; ++k)
          s(i, j, k) = (ux(i + 1, j, k) - ux(i, j, k)) * i1 + (uy(i, j + 1, k) - uy(i, j, k)) * i2 +
                       (uz(i, j, k + 1) - uz(i, j, k)) * i3;
    return s;
  }
  throw InvalidField("div expects an edge or face field");
}

VectorField grad(const ScalarField& xi) {
  if (xi.location() != Location::node) throw InvalidField("grad expects a node potential");
  const double scale = xi.max_abs();
  if (xi.boundary_violation() > 1e-12 * scale) {
    throw ContractViolation("scalar potential must vanish on the boundary");
  }
  const GridSpec& g = xi.grid();
  const double i1 = 1.0 / g.spacing(0), i2 = 1.0 / g.spacing(1), i3 = 1.0 / g.spacing(2);
  const Array3& p = xi.values();
  VectorField u(g, Location::edge);
  for (int c = 0; c < 3; ++c) {
    Array3& a = u[c];
    const auto d = a.dims();
    const double inv = c == 0 ? i1 : (c == 1 ? i2 : i3);
    const int di = c == 0, dj = c == 1, dk = c == 2;
    for (int i = 0; i < d[0]; ++i)
      for (int j = 0; j < d[1]; ++j)
        for (int k = 0; k < d[2]; ++k) a(i, j, k) = (p(i + di, j + dj, k + dk) - p(i, j, k)) * inv;
  }
  u.enforce_boundary();
  return u;
}

VectorField hodge_laplacian(const VectorField& u) {
  VectorField out = curl_curl(u);
  out -= grad(div(u));
  return out;
}

VectorField to_cells(const VectorField& u) {
  const GridSpec& g = u.grid();
  const auto& n = g.cells;
  VectorField a(g, Location::cell);
  if (u.location() == Location::edge) {
    for (int i = 0; i < n[0]; ++i)
      for (int j = 0; j < n[1]; ++j)
        for (int k = 0; k < n[2]; ++k) {
          a[0](i, j, k) = 0.25 * (u[0](i, j, k) + u[0](i, j + 1, k) + u[0](i, j, k + 1) +
                                  u[0](i, j + 1, k + 1));
          a[1](i, j, k) = 0.25 * (u[1](i, j, k) + u[1](i + 1, j, k) + u[1](i, j, k + 1) +
                                  u[1](i + 1, j, k + 1));
          a[2](i, j, k) = 0.25 * (u[2](i, j, k) + u[2](i + 1, j, k) + u[2](i, j + 1, k) +
                                  u[2](i + 1, j + 1, k));
        }
    return a;
  }
  if (u.location() == Location::face) {
    for (int i = 0; i < n[0]; ++i)
      for (int j = 0; j < n[1]; ++j)
        for (int k = 0; k < n[2]; ++k) {
          a[0](i, j, k) = 0.5 * (u[0](i, j, k) + u[0](i + 1, j, k));
          a[1](i, j, k) = 0.5 * (u[1](i, j, k) + u[1](i, j + 1, k));
          a[2](i, j, k) = 0.5 * (u[2](i, j, k) + u[2](i, j, k + 1));
        }
    return a;
  }
  if (u.location() == Location::cell) return u;
  throw InvalidField("to_cells expects an edge, face or cell field");
}

VectorField to_cells_adjoint(const VectorField& a, const GridSpec& grid) {
  if (a.location() != Location::cell) throw InvalidField("to_cells_adjoint expects a cell field");
  VectorField u(grid, Location::edge);
  {
    Array3& ux = u[0];
    const auto d = ux.dims();
    for (int i = 0; i < d[0]; ++i)
      for (int j = 1; j < d[1] - 1; ++j)
        for (int k = 1; k < d[2] - 1; ++k)
          ux(i, j, k) = 0.25 * (a[0](i, j - 1, k - 1) + a[0](i, j, k - 1) + a[0](i, j - 1, k) +
                                a[0](i, j, k));
  }
  {
    Array3& uy = u[1];
    const auto d = uy.dims();
    for (int i = 1; i < d[0] - 1; ++i)
      for (int j = 0; j < d[1]; ++j)
        for (int k = 1; k < d[2] - 1; ++k)
          uy(i, j, k) = 0.25 * (a[1](i - 1, j, k - 1) + a[1](i, j, k - 1) + a[1](i - 1, j, k) +
                                a[1](i, j, k));
  }
  {
    Array3& uz = u[2];
    const auto d = uz.dims();
    for (int i = 1; i < d[0] - 1; ++i)
      for (int j = 1; j < d[1] - 1; ++j)
        for (int k = 0; k < d[2]; ++k)
          uz(i, j, k) = 0.25 * (a[2](i - 1, j - 1, k) + a[2](i, j - 1, k) + a[2](i - 1, j, k) +
                                a[2](i, j, k));
  }
  return u;
}

CornerSamples to_corners(const VectorField& u) {
  require_location(u, Location::edge, "to_corners");
  const GridSpec& g = u.grid();
  const auto& n = g.cells;
  const std::size_t cells = static_cast<std::size_t>(n[0]) * n[1] * n[2];
  CornerSamples s{g, {}};
  for (auto& c : s.comp) c.resize(8 * cells);
  const auto& [ux, uy, uz] = std::tie(u[0], u[1], u[2]);
  std::size_t base = 0;
  for (int i = 0; i < n[0]; ++i)
    for (int j = 0; j < n[1]; ++j)
      for (int k = 0; k < n[2]; ++k, base += 8)
        for (int corner = 0; corner < 8; ++corner) {
          const int a = (corner >> 2) & 1, b = (corner >> 1) & 1, c = corner & 1;
          s.comp[0][base + corner] = ux(i, j + b, k + c);
          s.comp[1][base + corner] = uy(i + a, j, k + c);
          s.comp[2][base + corner] = uz(i + a, j + b, k);
        }
  return s;
}

VectorField to_corners_adjoint(const CornerSamples& s) {
  const GridSpec& g = s.grid;
  const auto& n = g.cells;
  VectorField u(g, Location::edge);
  auto [ux, uy, uz] = std::tie(u[0], u[1], u[2]);
  std::size_t base = 0;
  for (int i = 0; i < n[0]; ++i)
    for (int j = 0; j < n[1]; ++j)
      for (int k = 0; k < n[2]; ++k, base += 8)
        for (int corner = 0; corner < 8; ++corner) {
          const int a = (corner >> 2) & 1, b = (corner >> 1) & 1, c = corner & 1;
          ux(i, j + b, k + c) += s.comp[0][base + corner];
          uy(i + a, j, k + c) += s.comp[1][base + corner];
          uz(i + a, j + b, k) += s.comp[2][base + corner];
        }
  u.enforce_boundary();
  return u;
}

namespace {

// Magnitudes at the quadrature points and the matching weight.
std::vector<double> quadrature_magnitudes(const VectorField& u, double& weight) {
  std::vector<double> mag;
  if (u.location() == Location::edge) {
    const CornerSamples s = to_corners(u);
    mag.resize(s.comp[0].size());
    for (std::size_t n = 0; n < mag.size(); ++n)
      mag[n] = std::sqrt(s.comp[0][n] * s.comp[0][n] + s.comp[1][n] * s.comp[1][n] +
                         s.comp[2][n] * s.comp[2][n]);
    weight = u.grid().cell_volume() / 8.0;
    return mag;
  }
  const VectorField a = to_cells(u);
  const auto x = a[0].span(), y = a[1].span(), z = a[2].span();
  mag.resize(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) mag[n] = std::sqrt(x[n] * x[n] + y[n] * y[n] + z[n] * z[n]);
  weight = u.grid().cell_volume();
  return mag;
}

}  // namespace

double l6_pow6(const VectorField& u) {
  double weight = 0.0;
  std::vector<double> density = quadrature_magnitudes(u, weight);
  for (double& d : density) d = d * d * d * d * d * d;
  return weight * pairwise_sum(density);
}

double lp_norm(const VectorField& u, double p) {
  if (!(p >= 1.0)) throw DomainError("lp_norm needs p >= 1");
  if (p == 6.0) return std::pow(l6_pow6(u), 1.0 / 6.0);
  double weight = 0.0;
  std::vector<double> density = quadrature_magnitudes(u, weight);
  const double peak = density.empty() ? 0.0 : *std::max_element(density.begin(), density.end());
  if (peak == 0.0) return 0.0;
  // Scale by the peak so large p cannot overflow.
  for (double& d : density) d = std::pow(d / peak, p);
  return peak * std::pow(weight * pairwise_sum(density), 1.0 / p);
}

}  // namespace curlvar
