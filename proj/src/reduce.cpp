#include "curlvar/reduce.hpp"

#include <cstddef>

namespace curlvar {
namespace {

constexpr std::size_t kLeaf = 128;

template <typename Term>
double tree_sum(std::size_t begin, std::size_t end, const Term& term) {
  const std::size_t n = end - begin;
  if (n <= kLeaf) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += term(i);
    return s;
  }
  const std::size_t mid = begin + n / 2;
  return tree_sum(begin, mid, term) + tree_sum(mid, end, term);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  return tree_sum(0, values.size(), [&](std::size_t i) { return values[i]; });
}

double pairwise_dot(std::span<const double> a, std::span<const double> b) {
  return tree_sum(0, a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

double pairwise_sum_squares(std::span<const double> a) {
  return tree_sum(0, a.size(), [&](std::size_t i) { return a[i] * a[i]; });
}

}  // namespace curlvar
