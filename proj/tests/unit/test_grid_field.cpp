#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "gpduo/grid_field.hpp"
#include "gpduo/theory.hpp"
#include "gpduo/townes.hpp"

using namespace gpduo;

namespace {

constexpr double pi = std::numbers::pi;

// Radial Simpson of f(i) r_i dr times 2 pi; independent of the library's.
template <class F>
double radial(const RadialProfile& p, F&& f) {
  const std::size_t n = (p.size() - 1) / 2 * 2;
  double s = f(0) * p.radius(0) + f(n) * p.radius(n);
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i) * p.radius(i);
  return 2.0 * pi * s * p.step / 3.0;
}

ScalarField2D gaussian(const Grid2D& g, double alpha) {
  return ScalarField2D::from_function(g, [&](Point x) { return std::exp(-alpha * (x.x * x.x + x.y * x.y)); });
}

double interior_max_error(const ScalarField2D& f, const ScalarField2D& ref, int margin) {
  const int n = f.grid().points();
  double e = 0.0;
  for (int j = margin; j < n - margin; ++j)
    for (int i = margin; i < n - margin; ++i) e = std::max(e, std::abs(f(i, j) - ref(i, j)));
  return e;
}

}  // namespace

TEST_CASE("grid spacing") {
  CHECK(Grid2D(8.0, 257).spacing() == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(Grid2D(12.0, 385).spacing() == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK_THROWS_AS(Grid2D(8.0, 15), std::invalid_argument);
  CHECK_THROWS_AS(Grid2D(0.0, 33), std::invalid_argument);
}

TEST_CASE("stencil orders") {
  CHECK(stencil_from_order(2) == Stencil::second);
  CHECK(stencil_from_order(6) == Stencil::sixth);
  CHECK_THROWS_AS(stencil_from_order(3), std::invalid_argument);
  // The weights annihilate constants.
  for (Stencil s : {Stencil::second, Stencil::fourth, Stencil::sixth}) {
    const auto c = stencil_weights(s);
    double sum = c[0];
    for (std::size_t q = 1; q < c.size(); ++q) sum += 2.0 * c[q];
    CHECK(std::abs(sum) < 1e-14);
  }
}

TEST_CASE("integrate") {
  const Grid2D g(8.0, 257);
  CHECK(integrate(ScalarField2D(g, 1.0)) == doctest::Approx(256.0).epsilon(1e-14));
  CHECK(std::abs(integrate(gaussian(g, 1.0)) / pi - 1.0) < 1e-8);
  const ScalarField2D w = sample_to_grid(townes_profile(), g, {}, 1.0);
  CHECK(std::abs(integrate_product(w, w) / 11.7010 - 1.0) < 1e-3);
}

TEST_CASE("integrate helpers agree") {
  const Grid2D g(6.0, 97);
  const ScalarField2D f = gaussian(g, 0.7);
  const ScalarField2D h = gaussian(g, 0.3);
  ScalarField2D ff = f;
  for (std::size_t k = 0; k < ff.grid().size(); ++k) ff[k] = f[k] * f[k];
  CHECK(integrate_product(f, h) == doctest::Approx(integrate_triple(ScalarField2D(g, 1.0), f, h)).epsilon(1e-13));
  CHECK(integrate_fourth(f) == doctest::Approx(integrate_product(ff, ff)).epsilon(1e-13));
  CHECK(l2_norm(f) == doctest::Approx(std::sqrt(integrate_product(f, f))).epsilon(1e-14));
}

TEST_CASE("laplacian of zero") {
  const ScalarField2D z = laplacian(ScalarField2D(Grid2D(4.0, 65)));
  CHECK(z.max_abs() == 0.0);
}

TEST_CASE("laplacian of a Gaussian converges at the stencil order") {
  // Delta e^{-|x|^2/2} = (|x|^2 - 2) e^{-|x|^2/2}
  auto error = [](int n, Stencil s) {
    const Grid2D g(8.0, n, s);
    const ScalarField2D f = gaussian(g, 0.5);
    const ScalarField2D exact = ScalarField2D::from_function(g, [](Point x) {
      const double r2 = x.x * x.x + x.y * x.y;
      return (r2 - 2.0) * std::exp(-0.5 * r2);
    });
    return interior_max_error(laplacian(f), exact, 3);
  };
  const double e2a = error(129, Stencil::second);
  const double e2b = error(257, Stencil::second);
  CHECK(e2a / e2b == doctest::Approx(4.0).epsilon(0.05));
  const double h = 16.0 / 256.0;
  CHECK(e2b < h * h);
  const double e6a = error(129, Stencil::sixth);
  const double e6b = error(257, Stencil::sixth);
  CHECK(e6a / e6b > 40.0);
  CHECK(e6b < 1e-6);
}

TEST_CASE("sampled ground state satisfies its equation to O(h^2)") {
  auto defect = [](int n) {
    const Grid2D g(8.0, n, Stencil::second);
    const ScalarField2D w = sample_to_grid(townes_profile(), g, {}, 1.0);
    ScalarField2D r = laplacian(w);
    for (std::size_t k = 0; k < g.size(); ++k) r[k] += -w[k] + w[k] * w[k] * w[k];
    return interior_max_error(r, ScalarField2D(g), 1);
  };
  const double ea = defect(129);
  const double eb = defect(257);
  CHECK(ea / eb == doctest::Approx(4.0).epsilon(0.1));
  // Leading truncation term (h^2/12)(w_xxxx + w_yyyy); the bracket is about 87
  // at the origin (series coefficients of w) and smaller elsewhere.
  const double h = 16.0 / 256.0;
  CHECK(eb < 100.0 / 12.0 * h * h);
}

TEST_CASE("gradient energy is the Laplacian quadratic form") {
  const Grid2D g(6.0, 97);
  const ScalarField2D f = gaussian(g, 0.8);
  CHECK(gradient_energy(f) ==
        doctest::Approx(-integrate_product(f, laplacian(f))).epsilon(1e-12));
  // integrate |grad e^{-|x|^2/2}|^2 = pi
  CHECK(std::abs(gradient_energy(gaussian(Grid2D(8.0, 257), 0.5)) / pi - 1.0) < 1e-8);
}

TEST_CASE("energy of the harmonic ground state") {
  const Grid2D g(8.0, 257);
  PhysParams p;
  ScalarField2D u = gaussian(g, 0.5);
  u *= 1.0 / std::sqrt(pi);
  const CondensatePair s{u, ScalarField2D(g)};
  CHECK(std::abs(gp_energy(p, s) - 2.0) < 1e-6);
  CHECK(gp_energy(p, CondensatePair{ScalarField2D(g), ScalarField2D(g)}) == 0.0);
}

TEST_CASE("energy parts add up") {
  const Grid2D g(6.0, 97);
  PhysParams p{3.0, 2.0, 1.5, HomogeneousPotential::isotropic(2.0),
               HomogeneousPotential::anisotropic(1.0, 2.0)};
  const CondensatePair s{0.4 * gaussian(g, 0.7), 0.3 * gaussian(g, 1.1)};
  const EnergyParts e = energy_parts(p, sample_potential(p.V1, g), sample_potential(p.V2, g), s);
  CHECK(e.total == doctest::Approx(e.kinetic + e.potential - 0.5 * p.a * e.quartic1 -
                                   0.5 * p.b * e.quartic2 - p.beta * e.cross)
                       .epsilon(1e-13));
  CHECK(e.total == doctest::Approx(gp_energy(p, s)).epsilon(1e-13));
}

TEST_CASE("trial pair energy matches the closed form") {
  // Oracle: radial quadrature of the profile constants and the explicit
  // amplitude split, E(tau) = K tau^2 + M2 / (a* tau^2) for V1 = V2 = |x|^2.
  const RadialProfile& w = townes_profile();
  const double as = radial(w, [&](std::size_t i) { return w.w[i] * w.w[i]; });
  const double grad = radial(w, [&](std::size_t i) { return w.dw[i] * w.dw[i]; });
  const double quart = radial(w, [&](std::size_t i) { return std::pow(w.w[i], 4); });
  const double m2 = radial(w, [&](std::size_t i) { return std::pow(w.radius(i), 2) * w.w[i] * w.w[i]; });

  const double a = as - 0.32;
  const double b = 0.5 * as;
  const double beta = as + 0.5 * std::sqrt((as - a) * (as - b));
  const double amp = (as - b) / (beta - b);
  const double c1 = amp;
  const double c2 = amp * (beta - as) / (as - b);
  const double K = (c1 + c2) * grad / as -
                   (a * c1 * c1 + b * c2 * c2 + 2.0 * beta * c1 * c2) * quart / (2.0 * as * as);

  const PhysParams p{a, b, beta, HomogeneousPotential::isotropic(2.0),
                     HomogeneousPotential::isotropic(2.0)};
  const TheoryConstants tc = theory_constants(a, b, beta, p.V1, p.V2);
  for (double tau : {1.5, 2.5}) {
    const Grid2D g(14.0 / tau, 385);
    const double grid_e = gp_energy(p, trial_pair(tc, a, b, beta, tau, g));
    const double oracle = K * tau * tau + (c1 + c2) * m2 / (as * tau * tau);
    CHECK(std::abs(grid_e / oracle - 1.0) < 1e-4);
  }
}

TEST_CASE("residual of the scaling solution") {
  // u1 = c w(x / eps) with a c^2 eps^2 = 1 solves -Delta u - a u^3 = mu u,
  // mu = -1/eps^2, when V = 0 and beta = 0.
  const double a = 4.0;
  const double eps = 0.8;
  const double c = 1.0 / (std::sqrt(a) * eps);
  auto defect = [&](int n) {
    const Grid2D g(7.0, n, Stencil::second);
    PhysParams p;
    p.a = a;
    const CondensatePair s{c * sample_to_grid(townes_profile(), g, {}, 1.0 / eps), ScalarField2D(g)};
    const ScalarField2D zero(g);
    const auto [r1, r2] = gp_residual(p, zero, zero, s, -1.0 / (eps * eps));
    CHECK(r2.max_abs() == 0.0);
    return interior_max_error(r1, zero, 1);
  };
  const double ea = defect(113);
  const double eb = defect(225);
  CHECK(ea / eb == doctest::Approx(4.0).epsilon(0.1));
  const double h = 14.0 / 224.0;
  // Same truncation term as above, scaled by c / eps^4.
  CHECK(eb < 100.0 / 12.0 * c * h * h / std::pow(eps, 4));
}

TEST_CASE("residual of the empty state") {
  const Grid2D g(4.0, 33);
  PhysParams p{1.0, 1.0, 1.0, HomogeneousPotential::isotropic(2.0),
               HomogeneousPotential::isotropic(2.0)};
  const auto [r1, r2] = gp_residual(p, CondensatePair{ScalarField2D(g), ScalarField2D(g)}, 3.7);
  CHECK(r1.max_abs() == 0.0);
  CHECK(r2.max_abs() == 0.0);
}

TEST_CASE("two-component Gagliardo-Nirenberg quotient") {
  const double as = townes().a_star;
  const Grid2D g(8.0, 257);
  const ScalarField2D w = sample_to_grid(townes_profile(), g, {}, 1.0);
  for (double theta : {0.0, pi / 6.0, pi / 4.0}) {
    const CondensatePair s{std::sin(theta) * w, std::cos(theta) * w};
    CHECK(std::abs(gn_quotient(s) / (0.5 * as) - 1.0) < 1e-3);
  }
  // Gaussian: integrate g^2 = pi, |grad g|^2 = pi, g^4 = pi/2.
  const CondensatePair gs{gaussian(g, 0.5), ScalarField2D(g)};
  CHECK(std::abs(gn_quotient(gs) - 2.0 * pi) < 1e-6);
}

TEST_CASE("quotient is invariant under joint rescaling") {
  // t u(tau x) on [-L/tau, L/tau] has the same node values as u on [-L, L].
  const Grid2D g(6.0, 129);
  const Grid2D gs(6.0 / 1.7, 129);
  auto pair_on = [](const Grid2D& grid, double tau, double t) {
    auto f = [&](Point x) {
      const Point y = tau * x;
      return t * std::exp(-0.5 * (y.x * y.x + 2.0 * y.y * y.y)) * (1.0 + 0.3 * y.x);
    };
    auto h = [&](Point x) {
      const Point y = tau * x;
      return t * std::exp(-0.7 * ((y.x - 0.5) * (y.x - 0.5) + y.y * y.y));
    };
    return CondensatePair{ScalarField2D::from_function(grid, f), ScalarField2D::from_function(grid, h)};
  };
  const double q = gn_quotient(pair_on(g, 1.0, 1.0));
  const double qs = gn_quotient(pair_on(gs, 1.7, 2.3));
  CHECK(std::abs(qs / q - 1.0) < 1e-10);
}

TEST_CASE("quotient is bounded below on random smooth pairs") {
  const double as = townes().a_star;
  const Grid2D g(8.0, 129);
  const double h = g.spacing();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.3, 2.0);
  std::uniform_real_distribution<double> c(-1.5, 1.5);
  for (int k = 0; k < 20; ++k) {
    const double s1 = u(rng), s2 = u(rng), x1 = c(rng), x2 = c(rng), amp = u(rng);
    const CondensatePair s{
        ScalarField2D::from_function(g, [&](Point x) { return std::exp(-s1 * norm(x - Point{x1, 0.0}) * norm(x - Point{x1, 0.0})); }),
        ScalarField2D::from_function(g, [&](Point x) { return amp * std::exp(-s2 * norm(x - Point{0.0, x2}) * norm(x - Point{0.0, x2})); })};
    CHECK(gn_quotient(s) >= 0.5 * as - 10.0 * h * h);
  }
}

TEST_CASE("interpolation and peak location") {
  const Grid2D g(4.0, 81);
  const ScalarField2D lin = ScalarField2D::from_function(g, [](Point x) { return 2.0 * x.x - x.y + 1.0; });
  CHECK(interpolate(lin, {0.123, -0.456}) == doctest::Approx(2.0 * 0.123 + 0.456 + 1.0).epsilon(1e-12));
  CHECK(interpolate(lin, {5.0, 0.0}) == 0.0);
  const Point c{0.31, -0.17};
  const ScalarField2D bump = ScalarField2D::from_function(g, [&](Point x) {
    const Point d = x - c;
    return std::exp(-(d.x * d.x + d.y * d.y));
  });
  const Point pk = peak_location(bump);
  CHECK(norm(pk - c) < 0.2 * g.spacing());
}

TEST_CASE("dirichlet ring and field arithmetic") {
  const Grid2D g(2.0, 17);
  ScalarField2D f(g, 1.0);
  f.apply_dirichlet();
  CHECK(f(0, 5) == 0.0);
  CHECK(f(16, 16) == 0.0);
  CHECK(f(8, 8) == 1.0);
  const ScalarField2D d = 2.0 * f - f;
  CHECK(d(8, 8) == 1.0);
  CHECK(joint_mass(CondensatePair{f, f}) == doctest::Approx(2.0 * integrate(f)));
}
