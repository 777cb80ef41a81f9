#pragma once

#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "curlvar/field.hpp"

namespace curlvar::detail {

// Geometric multigrid V-cycle for the weighted node Laplacian
// A xi = -div(K grad xi) on interior nodes, with K > 0 given per edge.
// Coarse operators are Galerkin products with trilinear prolongation;
// smoothing is Gauss-Seidel, forward before and backward after the
// correction, so the cycle is a symmetric positive definite operator.
class NodeMultigrid {
public:
  explicit NodeMultigrid(const VectorField& edge_weights);

  // One V-cycle from a zero initial guess: an approximation of A^{-1} r.
  ScalarField apply(const ScalarField& r) const;

private:
  using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
  struct Level {
    RowMatrix A;
    RowMatrix P;  // prolongation from the next coarser level
    RowMatrix R;  // P^T
  };

  void cycle(std::size_t level, const Eigen::VectorXd& b, Eigen::VectorXd& x) const;

  GridSpec grid_;
  std::vector<Level> levels_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> coarse_;
};

}  // namespace curlvar::detail
