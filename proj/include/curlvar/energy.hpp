#pragma once

#include <optional>

#include "curlvar/field.hpp"
#include "curlvar/operators.hpp"

namespace curlvar {

struct EnergyReport {
  double curl_energy = 0.0;  // |curl u|_2^2
  double l2_sq = 0.0;        // |u|_2^2 (lumped edge inner product)
  double l6_6 = 0.0;         // |u|_6^6 (cellwise trapezoid rule)
  double J = 0.0;            // 1/2 curl_energy - 1/6 l6_6
  std::optional<double> J_lambda;  // J + lambda/2 l2_sq
};

// All energy terms of an edge field from one evaluation.
EnergyReport energy(const VectorField& u, std::optional<double> lambda = std::nullopt);

// Edge representative of the derivative of u -> 1/6 |u|_6^6 with respect to
// the lumped inner product: inner(nonlinear_gradient(u), h) equals the
// directional derivative in direction h. This is the discrete |u|^4 u.
VectorField nonlinear_gradient(const VectorField& u);

// Second derivative of 1/6 |u|_6^6 at u applied to h, with `corners` holding
// to_corners(u) so repeated products reuse it.
VectorField nonlinear_hessian_apply(const CornerSamples& corners, const VectorField& h);

// J_lambda'(u)[h] = <curl u, curl h> + lambda <u, h> - <|u|^4 u, h>.
double action_derivative(const VectorField& u, const VectorField& h, double lambda = 0.0);

// Edge representative of J_lambda'(u): curl_curl(u) + lambda u - |u|^4 u.
VectorField action_gradient(const VectorField& u, double lambda = 0.0);

}  // namespace curlvar
