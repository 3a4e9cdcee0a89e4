#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "gpduo/minimizer.hpp"

using namespace gpduo;

namespace {

const HomogeneousPotential quad = HomogeneousPotential::isotropic(2.0);

ScalarField2D gaussian(const Grid2D& g, double alpha, Point c = {}) {
  return ScalarField2D::from_function(g, [&](Point x) {
    const Point d = x - c;
    return std::exp(-alpha * (d.x * d.x + d.y * d.y));
  });
}

double eps_for(double a, double b, double beta) {
  const TheoryConstants tc = theory_constants(a, b, beta, quad, quad);
  return predict(tc, a, b, beta).eps_for(tc.region);
}

}  // namespace

TEST_CASE("joint mass projection") {
  const Grid2D g(6.0, 97);
  const CondensatePair unit = project_joint_mass({gaussian(g, 1.0), gaussian(g, 0.5, {1.0, 0.0})});
  CHECK(joint_mass(unit) == doctest::Approx(1.0).epsilon(1e-14));

  const CondensatePair four{2.0 * unit.u1, 2.0 * unit.u2};
  const CondensatePair back = project_joint_mass(four);
  CHECK((back.u1 - unit.u1).max_abs() < 1e-15);
  CHECK((back.u2 - unit.u2).max_abs() < 1e-15);

  const CondensatePair again = project_joint_mass(unit);
  CHECK((again.u1 - unit.u1).max_abs() <= 1e-15);

  ScalarField2D f = gaussian(g, 1.0);
  f *= 3.0 / l2_norm(f);
  const CondensatePair third = project_joint_mass({f, ScalarField2D(g)});
  CHECK(((1.0 / 3.0) * f - third.u1).max_abs() < 1e-15);
  CHECK(third.u2.max_abs() == 0.0);

  CHECK_THROWS(project_joint_mass({ScalarField2D(g), ScalarField2D(g)}));
}

TEST_CASE("linear problem converges to the harmonic ground energy") {
  PhysParams p;
  MinimizerConfig cfg;
  cfg.grid = make_grid(8.0, 129);
  cfg.init = GaussianInit{0.6, {0.4, -0.2}, {-0.3, 0.1}, 0.3};
  const MinimizerResult r = minimize(p, cfg);
  CHECK(r.converged());
  CHECK(std::abs(r.energy - 2.0) < 1e-4);
  CHECK(r.mu == doctest::Approx(r.energy).epsilon(1e-12));
  CHECK(std::abs(joint_mass(r.state) - 1.0) < 1e-10);
}

TEST_CASE("discrete stationary state is a fixed point of the step") {
  // The flow's fixed points are the discrete KKT points; a step from a state
  // with residual r moves it by about dt |r|.
  PhysParams p;
  MinimizerConfig cfg;
  cfg.grid = make_grid(8.0, 97);
  cfg.tol_grad = 1e-9;
  const MinimizerResult r = minimize(p, cfg);
  REQUIRE(r.kkt < 1e-8);
  GradientFlow flow(p, cfg.grid);
  const double dt = 0.1;
  const auto st = flow.step(r.state, dt);
  const double moved = l2_norm(st.state.u1 - r.state.u1) + l2_norm(st.state.u2 - r.state.u2);
  CHECK(moved <= 2.0 * dt * r.kkt + 1e-13);
}

TEST_CASE("energy is non-increasing over 1000 steps") {
  const double as = townes().a_star;
  const PhysParams p{0.5 * as, 0.5 * as, 0.3 * as, quad, quad};
  const Grid2D g(6.0, 65);
  CondensatePair s = project_joint_mass({gaussian(g, 0.8, {0.5, 0.0}), gaussian(g, 1.5, {-0.7, 0.4})});
  double e = gp_energy(p, s);
  double dt = 0.05;
  int increases = 0;
  for (int k = 0; k < 1000; ++k) {
    const FlowStepResult st = flow_step(p, s, dt);
    if (st.energy > e) ++increases;
    CHECK(std::abs(joint_mass(st.state) - 1.0) < 1e-10);
    e = st.energy;
    s = st.state;
    dt = std::min(2.0 * st.dt, 1.0);
  }
  CHECK(increases == 0);
  for (double v : s.u1.values()) CHECK(v >= 0.0);
}

TEST_CASE("interaction lowers the energy below the linear value") {
  const double as = townes().a_star;
  const PhysParams p{0.5 * as, 0.5 * as, 0.3 * as, quad, quad};
  MinimizerConfig cfg;
  cfg.grid = make_grid(8.0, 129);
  const MinimizerResult r = minimize(p, cfg);
  CHECK(r.converged());
  CHECK(r.kkt < 1e-6);
  CHECK(r.energy < 2.0);
  CHECK_FALSE(r.advisory);

  // Both residual components at the shared multiplier are below tolerance.
  const auto [r1, r2] = gp_residual(p, r.state, r.mu);
  CHECK(l2_norm(r1) < cfg.tol_grad);
  CHECK(l2_norm(r2) < cfg.tol_grad);
  const EnergyParts parts = GradientFlow(p, cfg.grid).parts(r.state);
  CHECK(multiplier(p, parts) == doctest::Approx(r.mu).epsilon(1e-12));
}

TEST_CASE("Region III point is semi-trivial") {
  const double as = townes().a_star;
  const double a = as - 1e-2;
  const PhysParams p{a, 0.5 * as, 0.5 * as, quad, quad};
  const double eps = eps_for(p.a, p.b, p.beta);
  MinimizerConfig cfg;
  cfg.grid = make_grid(10.0 * eps, 129);
  cfg.init = GaussianInit{eps, {}, {}, 0.5};
  const MinimizerResult r = minimize(p, cfg);
  CHECK(r.converged());
  CHECK(r.semi_trivial);
  CHECK(integrate_product(r.state.u2, r.state.u2) < semi_trivial_threshold);
  CHECK(std::isnan(r.peak2.x));
}

TEST_CASE("Region I point keeps both components with coincident peaks") {
  const double as = townes().a_star;
  const double a = as - 1e-2;
  const double b = 0.5 * as;
  const double beta = as + 0.5 * std::sqrt((as - a) * (as - b));
  const PhysParams p{a, b, beta, quad, quad};
  const double eps = eps_for(a, b, beta);
  MinimizerConfig cfg;
  cfg.grid = make_grid(10.0 * eps, 129);
  cfg.init = GaussianInit{eps, {}, {}, 0.5};
  const MinimizerResult r = minimize(p, cfg);
  CHECK(r.converged());
  CHECK_FALSE(r.semi_trivial);
  CHECK(norm(r.peak2 - r.peak1) < cfg.grid.spacing());
  // single interior peak: u2 decreases away from its maximum along both axes
  const auto [i, j] = r.state.u2.argmax();
  const int n = cfg.grid.points();
  CHECK(i > 0);
  CHECK(i < n - 1);
  for (int k = i + 1; k < n; ++k) CHECK(r.state.u2(k, j) <= r.state.u2(k - 1, j));
  for (int k = j - 1; k >= 0; --k) CHECK(r.state.u2(i, k) <= r.state.u2(i, k + 1));
}

TEST_CASE("outside the existence region the result is advisory") {
  const double as = townes().a_star;
  const PhysParams p{as + 0.5, 0.2 * as, 0.0, quad, quad};
  MinimizerConfig cfg;
  cfg.grid = make_grid(4.0, 65);
  cfg.max_iters = 50;
  const MinimizerResult r = minimize(p, cfg);
  CHECK(r.advisory);
}

TEST_CASE("multistart probe is reproducible") {
  PhysParams p;
  MinimizerConfig cfg;
  cfg.grid = make_grid(6.0, 65);
  const ProbeResult x = multistart_probe(p, cfg, 2, 99);
  const ProbeResult y = multistart_probe(p, cfg, 2, 99, 2);
  REQUIRE(x.runs.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) CHECK(pair_distance(x.runs[k].state, y.runs[k].state) == 0.0);
  CHECK(x.max_pairwise_distance == y.max_pairwise_distance);
  CHECK_THROWS_AS(multistart_probe(p, cfg, 1, 99), std::invalid_argument);
}

TEST_CASE("degenerate linear problem is not unique in the component split") {
  PhysParams p;
  MinimizerConfig cfg;
  cfg.grid = make_grid(6.0, 65);
  const ProbeResult x = multistart_probe(p, cfg, 4, 12345);
  CHECK(x.max_pairwise_distance > 0.05);
  for (const MinimizerResult& r : x.runs) CHECK(std::abs(r.energy - 2.0) < 1e-3);
}

TEST_CASE("counter-based uniforms") {
  CHECK(counter_uniform(1, 2, 3) == counter_uniform(1, 2, 3));
  CHECK(counter_uniform(1, 2, 3) != counter_uniform(1, 2, 4));
  CHECK(counter_uniform(1, 2, 3) != counter_uniform(2, 2, 3));
  double mean = 0.0;
  for (std::uint64_t k = 0; k < 10000; ++k) {
    const double u = counter_uniform(5, 0, k);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    mean += u;
  }
  CHECK(std::abs(mean / 10000.0 - 0.5) < 0.02);
}

TEST_CASE("checkpoint round trip") {
  const Grid2D g(3.0, 33, Stencil::fourth);
  Checkpoint c{{gaussian(g, 1.0), gaussian(g, 2.0, {0.1, 0.2})}, 1.5, 2.5, 3.5, -0.25, 0.125, "abc123"};
  std::stringstream ss;
  write_checkpoint(ss, c);
  const Checkpoint d = read_checkpoint(ss);
  CHECK(d.state.grid() == g);
  CHECK((d.state.u1 - c.state.u1).max_abs() == 0.0);
  CHECK((d.state.u2 - c.state.u2).max_abs() == 0.0);
  CHECK(d.beta == 3.5);
  CHECK(d.mu == -0.25);
  CHECK(d.config_hash == "abc123");

  std::stringstream bad("GPDUO-STATE v0\n");
  CHECK_THROWS_AS(read_checkpoint(bad), std::runtime_error);
  std::string text = ss.str();
  std::stringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(read_checkpoint(truncated), std::runtime_error);
}
