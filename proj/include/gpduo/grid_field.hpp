#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "gpduo/potential.hpp"

namespace gpduo {

/// Accuracy order of the central-difference Laplacian. `second` is the
/// classic 5-point stencil; `fourth` and `sixth` are the wide 9- and
/// 13-point crosses.
enum class Stencil { second = 2, fourth = 4, sixth = 6 };

Stencil stencil_from_order(int order);

/// Per-axis weights c[0..r] of the Laplacian stencil (times 1/h^2): centre
/// weight c[0], offset +-q weight c[q].
std::vector<double> stencil_weights(Stencil s);

/// Uniform square grid on [-L, L]^2 with n nodes per axis. Node (i, j) sits
/// at (-L + i h, -L + j h); storage is row-major with i fastest.
class Grid2D {
 public:
  /// Smallest admissible grid, [-1, 1]^2 with 16 nodes; placeholder value.
  Grid2D() : Grid2D(1.0, 16) {}
  Grid2D(double half_extent, int points_per_axis,
         Stencil stencil = Stencil::sixth);

  double half_extent() const { return half_extent_; }
  int points() const { return n_; }
  double spacing() const { return h_; }
  Stencil stencil() const { return stencil_; }
  std::size_t size() const {
    return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
  }

  double coord(int i) const { return -half_extent_ + i * h_; }
  Point node(int i, int j) const { return {coord(i), coord(j)}; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(i);
  }
  bool on_boundary(int i, int j) const {
    return i == 0 || j == 0 || i == n_ - 1 || j == n_ - 1;
  }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;

 private:
  double half_extent_;
  int n_;
  double h_;
  Stencil stencil_;
};

Grid2D make_grid(double half_extent, int points_per_axis,
                 Stencil stencil = Stencil::sixth);

/// Real function sampled on a Grid2D.
class ScalarField2D {
 public:
  ScalarField2D() : ScalarField2D(Grid2D{}) {}
  explicit ScalarField2D(const Grid2D& grid, double fill = 0.0);
  ScalarField2D(const Grid2D& grid, std::vector<double> values);

  template <class F>
  static ScalarField2D from_function(const Grid2D& grid, F&& f) {
    ScalarField2D out(grid);
    const int n = grid.points();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) out.values_[grid.index(i, j)] = f(grid.node(i, j));
    return out;
  }

  const Grid2D& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }

  /// Zero the boundary ring (homogeneous Dirichlet condition).
  void apply_dirichlet();
  bool all_finite() const;
  double max_abs() const;
  double max_value() const;
  /// Node index of the largest value, with ties broken by lowest index.
  std::pair<int, int> argmax() const;

  ScalarField2D& operator*=(double s);
  ScalarField2D& operator+=(const ScalarField2D& other);
  ScalarField2D& operator-=(const ScalarField2D& other);

 private:
  Grid2D grid_;
  std::vector<double> values_;
};

ScalarField2D operator*(double s, ScalarField2D f);
ScalarField2D operator+(ScalarField2D f, const ScalarField2D& g);
ScalarField2D operator-(ScalarField2D f, const ScalarField2D& g);

/// Two-component state (u1, u2) on a common grid.
struct CondensatePair {
  ScalarField2D u1;
  ScalarField2D u2;

  const Grid2D& grid() const { return u1.grid(); }
};

/// Coefficients and trapping potentials of the two-component GP functional.
struct PhysParams {
  double a = 0.0;
  double b = 0.0;
  double beta = 0.0;
  HomogeneousPotential V1 = HomogeneousPotential::isotropic(2.0);
  HomogeneousPotential V2 = HomogeneousPotential::isotropic(2.0);
};

/// Composite trapezoid rule over [-L, L]^2.
double integrate(const ScalarField2D& f);
/// integrate(f * g) without a temporary.
double integrate_product(const ScalarField2D& f, const ScalarField2D& g);
/// integrate(w * f * g)
double integrate_triple(const ScalarField2D& w, const ScalarField2D& f,
                        const ScalarField2D& g);
/// integrate(f^4)
double integrate_fourth(const ScalarField2D& f);
double l2_norm(const ScalarField2D& f);
/// Joint mass integrate(u1^2 + u2^2).
double joint_mass(const CondensatePair& s);

/// Discrete Laplacian with the grid's stencil. Values outside the domain are
/// taken as zero; the boundary ring of the result is zero.
ScalarField2D laplacian(const ScalarField2D& f);
/// Raw-array form used by the solvers: out = Delta f on interior nodes.
void apply_laplacian(const Grid2D& grid, std::span<const double> f,
                     std::span<double> out);

/// Gradient energy integrate(|grad f|^2), evaluated as the quadratic form
/// -integrate(f * Delta f) of the same discrete Laplacian.
double gradient_energy(const ScalarField2D& f);

ScalarField2D sample_potential(const HomogeneousPotential& v, const Grid2D& grid);

struct EnergyParts {
  double kinetic = 0.0;      ///< integrate(|grad u1|^2 + |grad u2|^2)
  double potential = 0.0;    ///< integrate(V1 u1^2 + V2 u2^2)
  double quartic1 = 0.0;     ///< integrate(u1^4)
  double quartic2 = 0.0;     ///< integrate(u2^4)
  double cross = 0.0;        ///< integrate(u1^2 u2^2)
  double total = 0.0;
};

/// GP functional with potentials already sampled on the state's grid.
EnergyParts energy_parts(const PhysParams& p, const ScalarField2D& v1,
                         const ScalarField2D& v2, const CondensatePair& s);
double gp_energy(const PhysParams& p, const CondensatePair& s);

/// Euler-Lagrange defect of the coupled system at multiplier mu.
std::pair<ScalarField2D, ScalarField2D> gp_residual(const PhysParams& p,
                                                    const CondensatePair& s,
                                                    double mu);
std::pair<ScalarField2D, ScalarField2D> gp_residual(const PhysParams& p,
                                                    const ScalarField2D& v1,
                                                    const ScalarField2D& v2,
                                                    const CondensatePair& s,
                                                    double mu);

/// Two-component Gagliardo-Nirenberg quotient
///   integrate(|grad u1|^2 + |grad u2|^2) * integrate(u1^2 + u2^2)
///   / integrate((u1^2 + u2^2)^2),
/// bounded below by a*/2.
double gn_quotient(const CondensatePair& s);

/// Bilinear interpolation; zero outside the domain.
double interpolate(const ScalarField2D& f, Point x);

/// Node of maximum value refined to sub-grid accuracy by a separable
/// quadratic fit through the neighbouring nodes.
Point peak_location(const ScalarField2D& f);

}  // namespace gpduo
