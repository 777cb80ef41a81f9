#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curlvar/grid.hpp"

namespace curlvar {

// One invariant: `value` is a nonnegative error measure that passes when it
// does not exceed `threshold`.
struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  // Random fields per operator and projection check.
  int fields = 2;
  // Random (t, w) perturbations for the gap check.
  int gap_samples = 100;
  // Sphere points for the finite-difference gradient check.
  int fd_points = 5;
};

// Mimetic identities, Helmholtz splitting, inner minimizer optimality,
// homogeneity and uniqueness, Nehari identities, gap sampling and the
// envelope gradient against central differences, all on `grid`.
std::vector<Check> invariant_suite(const GridSpec& grid, const VerifyOptions& options = {});

// Fixed-width pass/fail table.
std::string format_checks(const std::vector<Check>& checks);

}  // namespace curlvar
