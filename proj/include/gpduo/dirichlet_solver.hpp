#pragma once

#include <span>
#include <vector>

#include "gpduo/grid_field.hpp"

namespace gpduo {

/// Fast solver for (1 + dt (-Delta_h + c)) x = r on the interior nodes of a
/// grid, diagonalised by the type-I discrete sine transform. Exact for the
/// 5-point stencil; for the wide stencils it differs only in the rows next
/// to the boundary and serves as a preconditioner.
class DirichletSolver {
 public:
  explicit DirichletSolver(const Grid2D& grid);
  ~DirichletSolver();
  DirichletSolver(const DirichletSolver&) = delete;
  DirichletSolver& operator=(const DirichletSolver&) = delete;

  /// rhs and out are full-grid arrays; boundary entries of out are zeroed.
  void solve(std::span<const double> rhs, double dt, double c,
             std::span<double> out);

  const Grid2D& grid() const { return grid_; }

 private:
  Grid2D grid_;
  int m_;  // interior points per axis
  std::vector<double> eig_;  // 1D eigenvalues of -Delta_h
  double* buf_in_ = nullptr;
  double* buf_out_ = nullptr;
  void* plan_ = nullptr;
};

struct PcgStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Preconditioned conjugate gradients for
///   (1 + dt (-Delta_h + potential - shift)) x = rhs
/// on interior nodes, preconditioned by DirichletSolver with the constant
/// potential `mean_potential`. `x` carries the initial guess.
PcgStats solve_shifted_operator(DirichletSolver& pre, std::span<const double> potential,
                                double mean_potential, double dt, double shift,
                                std::span<const double> rhs, std::span<double> x,
                                double rel_tol, int max_iter);

}  // namespace gpduo
