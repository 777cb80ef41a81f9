#include "curlvar/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>
#include <vector>

#include "curlvar/errors.hpp"

namespace curlvar {
namespace {

using Kinds = std::array<fftw_r2r_kind, 3>;
using PlanKey = std::tuple<int, int, int, int, int, int>;

// FFTW planning is not thread safe; execution of an existing plan is.
class PlanCache {
public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const std::array<int, 3>& dims, const Kinds& kinds) {
    const PlanKey key{dims[0], dims[1], dims[2], kinds[0], kinds[1], kinds[2]};
    std::lock_guard lock(mutex_);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<double> scratch(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
    // ESTIMATE keeps the chosen algorithm, and therefore the rounding,
    // independent of timing measurements.
    fftw_plan plan = fftw_plan_r2r(3, dims.data(), scratch.data(), scratch.data(), kinds.data(),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan) throw NumericalFailure("FFTW could not create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void transform(std::vector<double>& data, const std::array<int, 3>& dims, const Kinds& kinds) {
  fftw_execute_r2r(plan_cache().get(dims, kinds), data.data(), data.data());
}

}  // namespace

double difference_eigenvalue(int m, int n, double h) {
  const double s = std::sin(std::numbers::pi * m / (2.0 * n));
  return 4.0 * s * s / (h * h);
}

ScalarField solve_dirichlet_poisson(const ScalarField& f) {
  if (f.location() != Location::node) throw InvalidField("Poisson right-hand side must live on nodes");
  const GridSpec& g = f.grid();
  const std::array<int, 3> dims{g.cells[0] - 1, g.cells[1] - 1, g.cells[2] - 1};
  std::vector<double> buf(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
  std::size_t n = 0;
  for (int i = 0; i < dims[0]; ++i)
    for (int j = 0; j < dims[1]; ++j)
      for (int k = 0; k < dims[2]; ++k) buf[n++] = f(i + 1, j + 1, k + 1);

  const Kinds sine{FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00};
  transform(buf, dims, sine);
  std::array<std::vector<double>, 3> mu;
  for (int d = 0; d < 3; ++d) {
    mu[d].resize(dims[d]);
    for (int m = 0; m < dims[d]; ++m) mu[d][m] = difference_eigenvalue(m + 1, g.cells[d], g.spacing(d));
  }
  const double norm = 8.0 * g.cells[0] * g.cells[1] * g.cells[2];
  n = 0;
  for (int i = 0; i < dims[0]; ++i)
    for (int j = 0; j < dims[1]; ++j)
      for (int k = 0; k < dims[2]; ++k) buf[n++] /= (mu[0][i] + mu[1][j] + mu[2][k]) * norm;
  transform(buf, dims, sine);

  ScalarField xi(g, Location::node);
  n = 0;
  for (int i = 0; i < dims[0]; ++i)
    for (int j = 0; j < dims[1]; ++j)
      for (int k = 0; k < dims[2]; ++k) xi(i + 1, j + 1, k + 1) = buf[n++];
  return xi;
}

VectorField solve_hodge(const VectorField& f) { return solve_hodge(f, 0.0); }

VectorField solve_hodge(const VectorField& f, double shift) {
  if (f.location() != Location::edge) throw InvalidField("solve_hodge expects an edge field");
  const GridSpec& g = f.grid();
  VectorField u(g, Location::edge);
  for (int c = 0; c < 3; ++c) {
    // Along its own axis a component is a cell-centered (Neumann) sequence of
    // n samples; across the other axes its interior samples are Dirichlet.
    std::array<int, 3> dims{};
    std::array<int, 3> first{};
    Kinds forward{}, backward{};
    std::array<std::vector<double>, 3> mu;
    for (int d = 0; d < 3; ++d) {
      const int n = g.cells[d];
      if (d == c) {
        dims[d] = n;
        first[d] = 0;
        forward[d] = FFTW_REDFT10;
        backward[d] = FFTW_REDFT01;
        for (int m = 0; m < n; ++m) mu[d].push_back(difference_eigenvalue(m, n, g.spacing(d)));
      } else {
        dims[d] = n - 1;
        first[d] = 1;
        forward[d] = FFTW_RODFT00;
        backward[d] = FFTW_RODFT00;
        for (int m = 1; m < n; ++m) mu[d].push_back(difference_eigenvalue(m, n, g.spacing(d)));
      }
    }
    std::vector<double> buf(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
    const Array3& src = f[c];
    std::size_t n = 0;
    for (int i = 0; i < dims[0]; ++i)
      for (int j = 0; j < dims[1]; ++j)
        for (int k = 0; k < dims[2]; ++k) buf[n++] = src(i + first[0], j + first[1], k + first[2]);
    transform(buf, dims, forward);
    const double norm = 8.0 * g.cells[0] * g.cells[1] * g.cells[2];
    n = 0;
    for (int i = 0; i < dims[0]; ++i)
      for (int j = 0; j < dims[1]; ++j)
        for (int k = 0; k < dims[2]; ++k, ++n) {
          const double mu_sum = mu[0][i] + mu[1][j] + mu[2][k];
          const double denom = mu_sum + shift;
          if (std::abs(denom) <= 1e-12 * (mu_sum + std::abs(shift)))
            buf[n] = 0.0;
          else
            buf[n] /= denom * norm;
        }
    transform(buf, dims, backward);
    Array3& dst = u[c];
    n = 0;
    for (int i = 0; i < dims[0]; ++i)
      for (int j = 0; j < dims[1]; ++j)
        for (int k = 0; k < dims[2]; ++k) dst(i + first[0], j + first[1], k + first[2]) = buf[n++];
  }
  return u;
}

}  // namespace curlvar
