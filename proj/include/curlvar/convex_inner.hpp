#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "curlvar/field.hpp"
#include "curlvar/spectrum.hpp"

namespace curlvar {

// F(x, u) = |u|^6 / 6 - (lambda / 2) |u|^2 with lambda <= 0.
struct NonlinearitySpec {
  double lambda = 0.0;
};

struct InnerOptions {
  double tol = 1e-8;
  int max_iter = 100;
  // Cap on conjugate-gradient steps per Newton step.
  int max_cg = 400;
  // Starting point; zero when absent.
  std::optional<ScalarField> initial_xi;
  std::vector<double> initial_z;
  // Extra Newton steps once the residual is below tol.
  int polish_steps = 1;
  // Seed of the random gradient directions used in the residual.
  std::uint64_t test_seed = 99;
  int random_tests = 2;
};

struct InnerSolution {
  // w_tilde = sum_k z_k e_k + grad(xi)
  VectorField w_tilde;
  ScalarField xi;
  std::vector<double> z;
  // sup over test directions zeta of |d/dt objective(w_tilde + t zeta)| /
  // |zeta|_6, divided by |u|_6^5 + |lambda| |box|^{2/3} |u|_6 with
  // u = input + w_tilde (scale free; floored at 1e-3 of the same quantity for
  // the input). Test directions: the steepest potential
  // direction, every basis field of the subspace and a few random gradients.
  double optimality_residual = 0.0;
  // int F(x, u)
  double F_value = 0.0;
  // int F(x, u) - 1/2 |curl u|^2 + 1/2 |curl input|^2: the minimized function.
  double objective = 0.0;
  int iterations = 0;
  int cg_iterations = 0;
  // Objective after each accepted step, starting with the initial point.
  std::vector<double> history;
};

// Minimizes int |u + grad xi|^6 / 6 (more generally int F(x, u + grad xi))
// over potentials vanishing on the boundary; returns w = grad xi. The first
// order condition is div(|u + w|^4 (u + w)) = 0.
InnerSolution minimize_w(const VectorField& u, const NonlinearitySpec& spec = {},
                         const InnerOptions& options = {});

// Minimizes -J_lambda(v_plus + w_tilde) over w_tilde in span(Vtilde) + grad
// potentials. This is int F(x, v_plus + w_tilde) minus the curl energy of the
// span(Vtilde) part, strictly convex because the curl-curl form is at most
// -lambda on span(Vtilde). The optimum satisfies J_lambda'(u) = 0 on every
// direction of the enlarged space; with Vtilde empty it reduces to minimize_w.
InnerSolution minimize_w_tilde(const VectorField& v_plus, const NonlinearitySpec& spec,
                               const SpectralSubspace& Vtilde, const InnerOptions& options = {});

}  // namespace curlvar
