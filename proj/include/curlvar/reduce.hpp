#pragma once

#include <span>

namespace curlvar {

// Sums with a fixed pairwise tree over fixed-size leaf blocks. The tree shape
// depends only on the input length, so results are bit-reproducible run to run
// and the rounding error grows like log(n) instead of n.
double pairwise_sum(std::span<const double> values);

// Pairwise-tree sum of a[i] * b[i].
double pairwise_dot(std::span<const double> a, std::span<const double> b);

// Pairwise-tree sum of a[i]^2.
double pairwise_sum_squares(std::span<const double> a);

}  // namespace curlvar
