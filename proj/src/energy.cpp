#include "curlvar/energy.hpp"

#include "curlvar/errors.hpp"
#include "curlvar/operators.hpp"

namespace curlvar {

EnergyReport energy(const VectorField& u, std::optional<double> lambda) {
  if (u.location() != Location::edge) throw InvalidField("energy expects an edge field");
  if (!u.all_finite()) throw InvalidField("field has non-finite entries");
  EnergyReport r;
  r.curl_energy = norm_sq(curl(u));
  r.l2_sq = norm_sq(u);
  r.l6_6 = l6_pow6(u);
  r.J = 0.5 * r.curl_energy - r.l6_6 / 6.0;
  if (lambda) r.J_lambda = r.J + 0.5 * *lambda * r.l2_sq;
  return r;
}

VectorField nonlinear_gradient(const VectorField& u) {
  if (u.location() != Location::edge) throw InvalidField("nonlinear_gradient expects an edge field");
  CornerSamples s = to_corners(u);
  auto& [x, y, z] = s.comp;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double m2 = x[n] * x[n] + y[n] * y[n] + z[n] * z[n];
    const double m4 = 0.125 * m2 * m2;
    x[n] *= m4;
    y[n] *= m4;
    z[n] *= m4;
  }
  return to_corners_adjoint(s);
}

VectorField nonlinear_hessian_apply(const CornerSamples& corners, const VectorField& h) {
  CornerSamples b = to_corners(h);
  const auto& [ax, ay, az] = corners.comp;
  auto& [bx, by, bz] = b.comp;
  for (std::size_t n = 0; n < ax.size(); ++n) {
    const double m2 = ax[n] * ax[n] + ay[n] * ay[n] + az[n] * az[n];
    const double m4 = 0.125 * m2 * m2;
    const double proj = 0.5 * m2 * (ax[n] * bx[n] + ay[n] * by[n] + az[n] * bz[n]);
    bx[n] = m4 * bx[n] + proj * ax[n];
    by[n] = m4 * by[n] + proj * ay[n];
    bz[n] = m4 * bz[n] + proj * az[n];
  }
  return to_corners_adjoint(b);
}

double action_derivative(const VectorField& u, const VectorField& h, double lambda) {
  return inner(curl(u), curl(h)) + lambda * inner(u, h) - inner(nonlinear_gradient(u), h);
}

VectorField action_gradient(const VectorField& u, double lambda) {
  VectorField g = curl_curl(u);
  g.axpy(lambda, u);
  g -= nonlinear_gradient(u);
  return g;
}

}  // namespace curlvar
