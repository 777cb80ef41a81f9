#include "node_multigrid.hpp"

#include <array>

#include "curlvar/errors.hpp"

namespace curlvar::detail {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

struct Dims {
  std::array<int, 3> cells;
  int interior(int a) const { return cells[a] - 1; }
  int count() const { return interior(0) * interior(1) * interior(2); }
  // Interior node (i, j, k) with 1 <= i < cells; -1 for boundary nodes.
  int index(int i, int j, int k) const {
    if (i <= 0 || j <= 0 || k <= 0 || i >= cells[0] || j >= cells[1] || k >= cells[2]) return -1;
    return ((i - 1) * interior(1) + (j - 1)) * interior(2) + (k - 1);
  }
};

bool coarsenable(const Dims& d) {
  for (int a = 0; a < 3; ++a)
    if (d.cells[a] % 2 != 0 || d.cells[a] < 4) return false;
  return d.count() > 512;
}

// Trilinear prolongation from the grid with half the cells.
Eigen::SparseMatrix<double, Eigen::RowMajor> prolongation(const Dims& fine, const Dims& coarse) {
  Triplets t;
  for (int i = 1; i < fine.cells[0]; ++i)
    for (int j = 1; j < fine.cells[1]; ++j)
      for (int k = 1; k < fine.cells[2]; ++k) {
        const int row = fine.index(i, j, k);
        std::array<std::array<std::pair<int, double>, 2>, 3> parents;
        std::array<int, 3> counts{};
        const std::array<int, 3> f{i, j, k};
        for (int a = 0; a < 3; ++a) {
          if (f[a] % 2 == 0) {
            parents[a][0] = {f[a] / 2, 1.0};
            counts[a] = 1;
          } else {
            parents[a][0] = {(f[a] - 1) / 2, 0.5};
            parents[a][1] = {(f[a] + 1) / 2, 0.5};
            counts[a] = 2;
          }
        }
        for (int a = 0; a < counts[0]; ++a)
          for (int b = 0; b < counts[1]; ++b)
            for (int c = 0; c < counts[2]; ++c) {
              const int col = coarse.index(parents[0][a].first, parents[1][b].first, parents[2][c].first);
              if (col < 0) continue;
              t.emplace_back(row, col, parents[0][a].second * parents[1][b].second * parents[2][c].second);
            }
      }
  Eigen::SparseMatrix<double, Eigen::RowMajor> P(fine.count(), coarse.count());
  P.setFromTriplets(t.begin(), t.end());
  return P;
}

void gauss_seidel(const Eigen::SparseMatrix<double, Eigen::RowMajor>& A, const Eigen::VectorXd& b,
                  Eigen::VectorXd& x, bool forward) {
  const int n = static_cast<int>(A.rows());
  for (int s = 0; s < n; ++s) {
    const int row = forward ? s : n - 1 - s;
    double sum = b(row), diag = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(A, row); it; ++it) {
      if (it.col() == row)
        diag = it.value();
      else
        sum -= it.value() * x(it.col());
    }
    x(row) = sum / diag;
  }
}

}  // namespace

NodeMultigrid::NodeMultigrid(const VectorField& K) : grid_(K.grid()) {
  if (K.location() != Location::edge) throw InvalidField("multigrid weights live on edges");
  Dims d{grid_.cells};
  if (d.count() <= 0) throw InvalidField("grid has no interior nodes");

  Triplets t;
  for (int c = 0; c < 3; ++c) {
    const double ih2 = 1.0 / (grid_.spacing(c) * grid_.spacing(c));
    const Array3& w = K[c];
    const auto dims = w.dims();
    for (int i = 0; i < dims[0]; ++i)
      for (int j = 0; j < dims[1]; ++j)
        for (int k = 0; k < dims[2]; ++k) {
          std::array<int, 3> hi{i, j, k};
          ++hi[c];
          const int a = d.index(i, j, k), b = d.index(hi[0], hi[1], hi[2]);
          const double kw = w(i, j, k) * ih2;
          if (a >= 0) t.emplace_back(a, a, kw);
          if (b >= 0) t.emplace_back(b, b, kw);
          if (a >= 0 && b >= 0) {
            t.emplace_back(a, b, -kw);
            t.emplace_back(b, a, -kw);
          }
        }
  }
  Level fine;
  fine.A = RowMatrix(d.count(), d.count());
  fine.A.setFromTriplets(t.begin(), t.end());
  levels_.push_back(std::move(fine));

  while (coarsenable(d)) {
    Dims c{{d.cells[0] / 2, d.cells[1] / 2, d.cells[2] / 2}};
    Level& f = levels_.back();
    f.P = prolongation(d, c);
    f.R = f.P.transpose();
    Level next;
    next.A = RowMatrix(f.R * (f.A * f.P));
    next.A.prune(0.0);
    levels_.push_back(std::move(next));
    d = c;
  }
  coarse_.compute(Eigen::SparseMatrix<double>(levels_.back().A));
  if (coarse_.info() != Eigen::Success) throw NumericalFailure("multigrid coarse factorization failed");
}

void NodeMultigrid::cycle(std::size_t level, const Eigen::VectorXd& b, Eigen::VectorXd& x) const {
  const Level& L = levels_[level];
  if (level + 1 == levels_.size()) {
    x = coarse_.solve(b);
    return;
  }
  x = Eigen::VectorXd::Zero(b.size());
  gauss_seidel(L.A, b, x, true);
  const Eigen::VectorXd r = b - L.A * x;
  Eigen::VectorXd e;
  cycle(level + 1, L.R * r, e);
  x += L.P * e;
  gauss_seidel(L.A, b, x, false);
}

ScalarField NodeMultigrid::apply(const ScalarField& r) const {
  Dims d{grid_.cells};
  Eigen::VectorXd b(d.count());
  for (int i = 1; i < d.cells[0]; ++i)
    for (int j = 1; j < d.cells[1]; ++j)
      for (int k = 1; k < d.cells[2]; ++k) b(d.index(i, j, k)) = r(i, j, k);
  Eigen::VectorXd x;
  cycle(0, b, x);
  ScalarField out(grid_, Location::node);
  for (int i = 1; i < d.cells[0]; ++i)
    for (int j = 1; j < d.cells[1]; ++j)
      for (int k = 1; k < d.cells[2]; ++k) out(i, j, k) = x(d.index(i, j, k));
  return out;
}

}  // namespace curlvar::detail
