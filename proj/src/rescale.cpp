#include "curlvar/rescale.hpp"

#include <algorithm>
#include <cmath>

#include "curlvar/errors.hpp"

namespace curlvar {
namespace {

// Trilinear interpolation of `a` at fractional sample coordinates p. Inside
// the box but beyond the outermost sample the nearest sample plane is used.
double interpolate(const Array3& a, const std::array<double, 3>& p) {
  const auto& d = a.dims();
  std::array<int, 3> lo{};
  std::array<double, 3> frac{};
  for (int ax = 0; ax < 3; ++ax) {
    const double q = std::clamp(p[ax], 0.0, static_cast<double>(d[ax] - 1));
    lo[ax] = std::min(static_cast<int>(std::floor(q)), d[ax] - 2);
    frac[ax] = q - lo[ax];
  }
  double out = 0.0;
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj)
      for (int dk = 0; dk < 2; ++dk) {
        const double w = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]) *
                         (dk ? frac[2] : 1.0 - frac[2]);
        if (w != 0.0) out += w * a(lo[0] + di, lo[1] + dj, lo[2] + dk);
      }
  return out;
}

}  // namespace

VectorField rescale(const VectorField& u, double s, const std::array<double, 3>& y) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("rescale needs s > 0");
  const GridSpec& g = u.grid();
  const auto center = g.center();
  const double amplitude = std::sqrt(s);
  VectorField out(g, u.location());
  for (int c = 0; c < 3; ++c) {
    const auto off = component_offset(u.location(), c);
    const Array3& src = u[c];
    Array3& dst = out[c];
    const auto d = dst.dims();
    for (int i = 0; i < d[0]; ++i)
      for (int j = 0; j < d[1]; ++j)
        for (int k = 0; k < d[2]; ++k) {
          const std::array<int, 3> idx{i, j, k};
          std::array<double, 3> p{};
          bool inside = true;
          for (int ax = 0; ax < 3; ++ax) {
            const double h = g.spacing(ax);
            const double x = (idx[ax] + off[ax]) * h + g.origin[ax] - center[ax];
            const double source = s * x + y[ax] + center[ax] - g.origin[ax];
            if (source < -1e-12 * h || source > g.lengths[ax] + 1e-12 * h) inside = false;
            p[ax] = source / h - off[ax];
          }
          dst(i, j, k) = inside ? amplitude * interpolate(src, p) : 0.0;
        }
  }
  out.enforce_boundary();
  return out;
}

namespace {

double sample_at(const Array3& src, const GridSpec& from, const std::array<double, 3>& off,
                 const std::array<double, 3>& x) {
  std::array<double, 3> p{};
  for (int ax = 0; ax < 3; ++ax) {
    const double h = from.spacing(ax);
    const double local = x[ax] - from.origin[ax];
    if (local < -1e-12 * h || local > from.lengths[ax] + 1e-12 * h) return 0.0;
    p[ax] = local / h - off[ax];
  }
  return interpolate(src, p);
}

}  // namespace

VectorField resample(const VectorField& u, const GridSpec& target) {
  target.validate();
  const GridSpec& from = u.grid();
  VectorField out(target, u.location());
  for (int c = 0; c < 3; ++c) {
    const auto off = component_offset(u.location(), c);
    Array3& dst = out[c];
    const auto d = dst.dims();
    for (int i = 0; i < d[0]; ++i)
      for (int j = 0; j < d[1]; ++j)
        for (int k = 0; k < d[2]; ++k) {
          const std::array<double, 3> x{target.origin[0] + (i + off[0]) * target.spacing(0),
                                        target.origin[1] + (j + off[1]) * target.spacing(1),
                                        target.origin[2] + (k + off[2]) * target.spacing(2)};
          dst(i, j, k) = sample_at(u[c], from, off, x);
        }
  }
  out.enforce_boundary();
  return out;
}

ScalarField resample(const ScalarField& xi, const GridSpec& target) {
  target.validate();
  const GridSpec& from = xi.grid();
  const auto off = component_offset(xi.location(), 0);
  ScalarField out(target, xi.location());
  const auto d = out.values().dims();
  for (int i = 0; i < d[0]; ++i)
    for (int j = 0; j < d[1]; ++j)
      for (int k = 0; k < d[2]; ++k) {
        const std::array<double, 3> x{target.origin[0] + (i + off[0]) * target.spacing(0),
                                      target.origin[1] + (j + off[1]) * target.spacing(1),
                                      target.origin[2] + (k + off[2]) * target.spacing(2)};
        out(i, j, k) = sample_at(xi.values(), from, off, x);
      }
  out.enforce_boundary();
  return out;
}

}  // namespace curlvar
