#include "gpduo/grid_field.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace gpduo {

namespace {

struct StencilCoefficients {
  int radius;
  std::array<double, 4> c;  // c[0] centre, c[k] offset +-k, per axis
};

StencilCoefficients coefficients(Stencil s) {
  switch (s) {
    case Stencil::second:
      return {1, {-2.0, 1.0, 0.0, 0.0}};
    case Stencil::fourth:
      return {2, {-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0, 0.0}};
    case Stencil::sixth:
      return {3, {-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0}};
  }
  throw std::invalid_argument("unknown stencil");
}

void require_same_grid(const Grid2D& g1, const Grid2D& g2) {
  if (!(g1 == g2)) throw std::invalid_argument("fields live on different grids");
}

double trapezoid_weight(int i, int n) {
  return (i == 0 || i == n - 1) ? 0.5 : 1.0;
}

}  // namespace

std::vector<double> stencil_weights(Stencil s) {
  const auto [r, c] = coefficients(s);
  return {c.begin(), c.begin() + r + 1};
}

Stencil stencil_from_order(int order) {
  switch (order) {
    case 2:
      return Stencil::second;
    case 4:
      return Stencil::fourth;
    case 6:
      return Stencil::sixth;
    default:
      throw std::invalid_argument("stencil order must be 2, 4 or 6");
  }
}

Grid2D::Grid2D(double half_extent, int points_per_axis, Stencil stencil)
    : half_extent_(half_extent), n_(points_per_axis), h_(0.0), stencil_(stencil) {
  if (!std::isfinite(half_extent) || !(half_extent > 0.0))
    throw std::invalid_argument("grid half extent must be finite and positive");
  if (points_per_axis < 16)
    throw std::invalid_argument("grid needs at least 16 points per axis");
  h_ = 2.0 * half_extent / (points_per_axis - 1);
}

Grid2D make_grid(double half_extent, int points_per_axis, Stencil stencil) {
  return Grid2D(half_extent, points_per_axis, stencil);
}

// ---------------------------------------------------------------------------

ScalarField2D::ScalarField2D(const Grid2D& grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {}

ScalarField2D::ScalarField2D(const Grid2D& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw std::invalid_argument("field size does not match grid");
}

void ScalarField2D::apply_dirichlet() {
  const int n = grid_.points();
  for (int k = 0; k < n; ++k) {
    (*this)(k, 0) = 0.0;
    (*this)(k, n - 1) = 0.0;
    (*this)(0, k) = 0.0;
    (*this)(n - 1, k) = 0.0;
  }
}

bool ScalarField2D::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

double ScalarField2D::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField2D::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

std::pair<int, int> ScalarField2D::argmax() const {
  const auto it = std::max_element(values_.begin(), values_.end());
  const auto k = static_cast<int>(it - values_.begin());
  const int n = grid_.points();
  return {k % n, k / n};
}

ScalarField2D& ScalarField2D::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField2D& ScalarField2D::operator+=(const ScalarField2D& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

ScalarField2D& ScalarField2D::operator-=(const ScalarField2D& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

ScalarField2D operator*(double s, ScalarField2D f) { return f *= s; }
ScalarField2D operator+(ScalarField2D f, const ScalarField2D& g) { return f += g; }
ScalarField2D operator-(ScalarField2D f, const ScalarField2D& g) { return f -= g; }

// ---------------------------------------------------------------------------

double integrate(const ScalarField2D& f) {
  const Grid2D& g = f.grid();
  const int n = g.points();
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    double row = 0.0;
    for (int i = 0; i < n; ++i) row += trapezoid_weight(i, n) * f(i, j);
    total += trapezoid_weight(j, n) * row;
  }
  return total * g.spacing() * g.spacing();
}

namespace {

template <class Integrand>
double integrate_pointwise(const Grid2D& g, Integrand&& at) {
  const int n = g.points();
  long double total = 0.0L;
  for (int j = 0; j < n; ++j) {
    long double row = 0.0L;
    const std::size_t base = g.index(0, j);
    for (int i = 0; i < n; ++i) row += trapezoid_weight(i, n) * at(base + i);
    total += trapezoid_weight(j, n) * row;
  }
  return static_cast<double>(total) * g.spacing() * g.spacing();
}

}  // namespace

double integrate_product(const ScalarField2D& f, const ScalarField2D& g) {
  require_same_grid(f.grid(), g.grid());
  return integrate_pointwise(f.grid(), [&](std::size_t k) { return f[k] * g[k]; });
}

double integrate_triple(const ScalarField2D& w, const ScalarField2D& f,
                        const ScalarField2D& g) {
  require_same_grid(w.grid(), f.grid());
  require_same_grid(w.grid(), g.grid());
  return integrate_pointwise(w.grid(), [&](std::size_t k) { return w[k] * f[k] * g[k]; });
}

double integrate_fourth(const ScalarField2D& f) {
  return integrate_pointwise(f.grid(), [&](std::size_t k) {
    const double v2 = f[k] * f[k];
    return v2 * v2;
  });
}

double l2_norm(const ScalarField2D& f) { return std::sqrt(integrate_product(f, f)); }

double joint_mass(const CondensatePair& s) {
  require_same_grid(s.u1.grid(), s.u2.grid());
  return integrate_pointwise(s.u1.grid(), [&](std::size_t k) {
    return s.u1[k] * s.u1[k] + s.u2[k] * s.u2[k];
  });
}

// ---------------------------------------------------------------------------

void apply_laplacian(const Grid2D& grid, std::span<const double> f,
                     std::span<double> out) {
  const int n = grid.points();
  const auto [r, c] = coefficients(grid.stencil());
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  const auto stride = static_cast<std::ptrdiff_t>(n);

  auto at = [&](int i, int j) -> double {
    if (i < 0 || j < 0 || i >= n || j >= n) return 0.0;
    return f[grid.index(i, j)];
  };

  for (int i = 0; i < n; ++i) {
    out[grid.index(i, 0)] = 0.0;
    out[grid.index(i, n - 1)] = 0.0;
  }
  for (int j = 1; j < n - 1; ++j) {
    out[grid.index(0, j)] = 0.0;
    out[grid.index(n - 1, j)] = 0.0;
    const bool row_inner = j >= r && j < n - r;
    for (int i = 1; i < n - 1; ++i) {
      const std::size_t k = grid.index(i, j);
      double acc = 2.0 * c[0] * f[k];
      if (row_inner && i >= r && i < n - r) {
        const double* p = f.data() + k;
        for (int q = 1; q <= r; ++q) {
          const std::ptrdiff_t dq = q * stride;
          acc += c[q] * (p[q] + p[-q] + p[dq] + p[-dq]);
        }
      } else {
        for (int q = 1; q <= r; ++q)
          acc += c[q] * (at(i + q, j) + at(i - q, j) + at(i, j + q) + at(i, j - q));
      }
      out[k] = acc * inv_h2;
    }
  }
}

ScalarField2D laplacian(const ScalarField2D& f) {
  ScalarField2D out(f.grid());
  apply_laplacian(f.grid(), f.values(), out.values());
  return out;
}

double gradient_energy(const ScalarField2D& f) {
  // Summation-by-parts form of -<f, Delta f>:
  //   sum over axes and offsets q of c_q * sum (f(k + q) - f(k))^2,
  // with f extended by zero. Identical to the quadratic form when the
  // boundary ring vanishes, and free of the O(eps^2 / h^2) cancellation of
  // summing f * Delta f node by node.
  const Grid2D& g = f.grid();
  const int n = g.points();
  const auto [r, c] = coefficients(g.stencil());
  auto at = [&](int i, int j) -> double {
    if (i < 0 || i >= n) return 0.0;
    return f(i, j);
  };
  long double total = 0.0L;
  for (int q = 1; q <= r; ++q) {
    long double sq = 0.0L;
    for (int j = 0; j < n; ++j) {
      for (int i = -q; i < n; ++i) {
        const double d = at(i + q, j) - at(i, j);
        sq += static_cast<long double>(d) * d;
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = -q; j < n; ++j) {
        const double a = j + q < n ? f(i, j + q) : 0.0;
        const double b = j >= 0 ? f(i, j) : 0.0;
        const double d = a - b;
        sq += static_cast<long double>(d) * d;
      }
    }
    total += static_cast<long double>(c[q]) * sq;
  }
  return static_cast<double>(total);
}

ScalarField2D sample_potential(const HomogeneousPotential& v, const Grid2D& grid) {
  return ScalarField2D::from_function(grid, [&](Point x) { return v(x); });
}

// ---------------------------------------------------------------------------

EnergyParts energy_parts(const PhysParams& p, const ScalarField2D& v1,
                         const ScalarField2D& v2, const CondensatePair& s) {
  const Grid2D& g = s.u1.grid();
  require_same_grid(g, s.u2.grid());
  require_same_grid(g, v1.grid());
  require_same_grid(g, v2.grid());

  EnergyParts e;
  e.kinetic = gradient_energy(s.u1) + gradient_energy(s.u2);
  e.potential = integrate_pointwise(g, [&](std::size_t k) {
    return v1[k] * s.u1[k] * s.u1[k] + v2[k] * s.u2[k] * s.u2[k];
  });
  e.quartic1 = integrate_fourth(s.u1);
  e.quartic2 = integrate_fourth(s.u2);
  e.cross = integrate_pointwise(g, [&](std::size_t k) {
    return s.u1[k] * s.u1[k] * s.u2[k] * s.u2[k];
  });
  e.total = e.kinetic + e.potential -
            (0.5 * p.a * e.quartic1 + 0.5 * p.b * e.quartic2 + p.beta * e.cross);
  return e;
}

double gp_energy(const PhysParams& p, const CondensatePair& s) {
  const Grid2D& g = s.u1.grid();
  return energy_parts(p, sample_potential(p.V1, g), sample_potential(p.V2, g), s)
      .total;
}

std::pair<ScalarField2D, ScalarField2D> gp_residual(const PhysParams& p,
                                                    const ScalarField2D& v1,
                                                    const ScalarField2D& v2,
                                                    const CondensatePair& s,
                                                    double mu) {
  const Grid2D& g = s.u1.grid();
  require_same_grid(g, s.u2.grid());
  require_same_grid(g, v1.grid());
  require_same_grid(g, v2.grid());

  ScalarField2D r1 = laplacian(s.u1);
  ScalarField2D r2 = laplacian(s.u2);
  const int n = g.points();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t k = g.index(i, j);
      if (g.on_boundary(i, j)) {
        r1[k] = 0.0;
        r2[k] = 0.0;
        continue;
      }
      const double x = s.u1[k];
      const double y = s.u2[k];
      r1[k] = -r1[k] + (v1[k] - mu - p.a * x * x - p.beta * y * y) * x;
      r2[k] = -r2[k] + (v2[k] - mu - p.b * y * y - p.beta * x * x) * y;
    }
  }
  return {std::move(r1), std::move(r2)};
}

std::pair<ScalarField2D, ScalarField2D> gp_residual(const PhysParams& p,
                                                    const CondensatePair& s,
                                                    double mu) {
  const Grid2D& g = s.u1.grid();
  return gp_residual(p, sample_potential(p.V1, g), sample_potential(p.V2, g), s, mu);
}

double gn_quotient(const CondensatePair& s) {
  const Grid2D& g = s.u1.grid();
  require_same_grid(g, s.u2.grid());
  const double mass = joint_mass(s);
  if (!(mass > 0.0)) throw std::invalid_argument("GN quotient of the zero state");
  const double kinetic = gradient_energy(s.u1) + gradient_energy(s.u2);
  const double density_sq = integrate_pointwise(g, [&](std::size_t k) {
    const double rho = s.u1[k] * s.u1[k] + s.u2[k] * s.u2[k];
    return rho * rho;
  });
  return kinetic * mass / density_sq;
}

// ---------------------------------------------------------------------------

double interpolate(const ScalarField2D& f, Point x) {
  const Grid2D& g = f.grid();
  const int n = g.points();
  const double sx = (x.x + g.half_extent()) / g.spacing();
  const double sy = (x.y + g.half_extent()) / g.spacing();
  if (!(sx >= 0.0) || !(sy >= 0.0) || sx > n - 1 || sy > n - 1) return 0.0;
  const int i0 = std::min(static_cast<int>(sx), n - 2);
  const int j0 = std::min(static_cast<int>(sy), n - 2);
  const double tx = sx - i0;
  const double ty = sy - j0;
  return (1.0 - tx) * (1.0 - ty) * f(i0, j0) + tx * (1.0 - ty) * f(i0 + 1, j0) +
         (1.0 - tx) * ty * f(i0, j0 + 1) + tx * ty * f(i0 + 1, j0 + 1);
}

namespace {

// Vertex offset of the parabola through (-1, fm), (0, f0), (1, fp).
double parabolic_offset(double fm, double f0, double fp) {
  const double curvature = fm - 2.0 * f0 + fp;
  if (!(curvature < 0.0)) return 0.0;
  return std::clamp(0.5 * (fm - fp) / curvature, -0.5, 0.5);
}

}  // namespace

Point peak_location(const ScalarField2D& f) {
  const Grid2D& g = f.grid();
  const auto [i, j] = f.argmax();
  Point p = g.node(i, j);
  const int n = g.points();
  if (i > 0 && i < n - 1)
    p.x += g.spacing() * parabolic_offset(f(i - 1, j), f(i, j), f(i + 1, j));
  if (j > 0 && j < n - 1)
    p.y += g.spacing() * parabolic_offset(f(i, j - 1), f(i, j), f(i, j + 1));
  return p;
}

}  // namespace gpduo
