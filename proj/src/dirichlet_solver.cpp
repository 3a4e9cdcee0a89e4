#include "gpduo/dirichlet_solver.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace gpduo {

namespace {

// FFTW planning is not thread-safe; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

DirichletSolver::DirichletSolver(const Grid2D& grid) : grid_(grid), m_(grid.points() - 2) {
  const std::vector<double> c = stencil_weights(grid.stencil());
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  eig_.resize(static_cast<std::size_t>(m_));
  for (int k = 1; k <= m_; ++k) {
    const double theta = std::numbers::pi * k / (m_ + 1);
    double symbol = c[0];
    for (std::size_t q = 1; q < c.size(); ++q)
      symbol += 2.0 * c[q] * std::cos(static_cast<double>(q) * theta);
    eig_[static_cast<std::size_t>(k - 1)] = -symbol * inv_h2;
  }

  const auto count = static_cast<std::size_t>(m_) * static_cast<std::size_t>(m_);
  buf_in_ = static_cast<double*>(fftw_malloc(sizeof(double) * count));
  buf_out_ = static_cast<double*>(fftw_malloc(sizeof(double) * count));
  if (!buf_in_ || !buf_out_) throw std::bad_alloc();
  std::lock_guard lock(planner_mutex());
  plan_ = fftw_plan_r2r_2d(m_, m_, buf_in_, buf_out_, FFTW_RODFT00, FFTW_RODFT00,
                           FFTW_ESTIMATE);
  if (!plan_) throw std::runtime_error("FFTW could not build a DST-I plan");
}

DirichletSolver::~DirichletSolver() {
  {
    std::lock_guard lock(planner_mutex());
    if (plan_) fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  }
  fftw_free(buf_in_);
  fftw_free(buf_out_);
}

void DirichletSolver::solve(std::span<const double> rhs, double dt, double c,
                            std::span<double> out) {
  const int n = grid_.points();
  const auto m = static_cast<std::size_t>(m_);
  for (int j = 1; j < n - 1; ++j)
    for (int i = 1; i < n - 1; ++i)
      buf_in_[static_cast<std::size_t>(j - 1) * m + static_cast<std::size_t>(i - 1)] =
          rhs[grid_.index(i, j)];

  auto plan = static_cast<fftw_plan>(plan_);
  fftw_execute_r2r(plan, buf_in_, buf_out_);
  const double norm = 4.0 * static_cast<double>(m_ + 1) * static_cast<double>(m_ + 1);
  for (std::size_t ky = 0; ky < m; ++ky)
    for (std::size_t kx = 0; kx < m; ++kx)
      buf_out_[ky * m + kx] /= norm * (1.0 + dt * (eig_[kx] + eig_[ky] + c));
  fftw_execute_r2r(plan, buf_out_, buf_in_);

  for (int i = 0; i < n; ++i) {
    out[grid_.index(i, 0)] = 0.0;
    out[grid_.index(i, n - 1)] = 0.0;
    out[grid_.index(0, i)] = 0.0;
    out[grid_.index(n - 1, i)] = 0.0;
  }
  for (int j = 1; j < n - 1; ++j)
    for (int i = 1; i < n - 1; ++i)
      out[grid_.index(i, j)] =
          buf_in_[static_cast<std::size_t>(j - 1) * m + static_cast<std::size_t>(i - 1)];
}

// ---------------------------------------------------------------------------

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

PcgStats solve_shifted_operator(DirichletSolver& pre, std::span<const double> potential,
                                double mean_potential, double dt, double shift,
                                std::span<const double> rhs, std::span<double> x,
                                double rel_tol, int max_iter) {
  const Grid2D& g = pre.grid();
  const std::size_t size = g.size();
  std::vector<double> r(size), z(size), p(size), q(size), lap(size);

  auto apply = [&](std::span<const double> v, std::span<double> out) {
    apply_laplacian(g, v, lap);
    for (std::size_t k = 0; k < size; ++k)
      out[k] = v[k] + dt * (-lap[k] + (potential[k] - shift) * v[k]);
    const int n = g.points();
    for (int i = 0; i < n; ++i) {
      out[g.index(i, 0)] = 0.0;
      out[g.index(i, n - 1)] = 0.0;
      out[g.index(0, i)] = 0.0;
      out[g.index(n - 1, i)] = 0.0;
    }
  };

  std::vector<double> b(rhs.begin(), rhs.end());
  {
    const int n = g.points();
    for (int i = 0; i < n; ++i) {
      b[g.index(i, 0)] = b[g.index(i, n - 1)] = 0.0;
      b[g.index(0, i)] = b[g.index(n - 1, i)] = 0.0;
      x[g.index(i, 0)] = x[g.index(i, n - 1)] = 0.0;
      x[g.index(0, i)] = x[g.index(n - 1, i)] = 0.0;
    }
  }
  const double b_norm = std::sqrt(dot(b, b));
  PcgStats stats;
  if (b_norm == 0.0) {
    for (double& v : x) v = 0.0;
    return stats;
  }

  apply(x, q);
  for (std::size_t k = 0; k < size; ++k) r[k] = b[k] - q[k];
  double r_norm = std::sqrt(dot(r, r));
  const double pre_shift = mean_potential - shift;
  pre.solve(r, dt, pre_shift, z);
  p = z;
  double rz = dot(r, z);
  while (r_norm > rel_tol * b_norm && stats.iterations < max_iter) {
    apply(p, q);
    const double alpha = rz / dot(p, q);
    for (std::size_t k = 0; k < size; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * q[k];
    }
    r_norm = std::sqrt(dot(r, r));
    ++stats.iterations;
    if (r_norm <= rel_tol * b_norm) break;
    pre.solve(r, dt, pre_shift, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t k = 0; k < size; ++k) p[k] = z[k] + beta * p[k];
  }
  stats.relative_residual = r_norm / b_norm;
  return stats;
}

}  // namespace gpduo
