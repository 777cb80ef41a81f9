#include "oracles/multiplicity_bruteforce.hpp"

namespace oracles {

int count_indices(const std::vector<double>& expanded, double lambda, double threshold) {
  int count = 0;
  for (double lk : expanded)
    if (-lk < lambda && lambda < -lk + threshold) ++count;
  return count;
}

}  // namespace oracles
