#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gpduo/minimizer.hpp"
#include "gpduo/theory.hpp"

using namespace gpduo;

namespace {

constexpr double pi = std::numbers::pi;

// 2 pi integrate r^k w(r)^2 r dr by Simpson on the profile samples.
double radial_moment(int k) {
  const RadialProfile& w = townes_profile();
  const std::size_t n = (w.size() - 1) / 2 * 2;
  auto f = [&](std::size_t i) { return std::pow(w.radius(i), k + 1) * w.w[i] * w.w[i]; };
  double s = f(0) + f(n);
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i);
  return 2.0 * pi * s * w.step / 3.0;
}

const HomogeneousPotential quad = HomogeneousPotential::isotropic(2.0);
const HomogeneousPotential quartic = HomogeneousPotential::isotropic(4.0);

}  // namespace

TEST_CASE("H for |x|^2 and |x|^4") {
  const RadialProfile& w = townes_profile();
  const double as = townes().a_star;
  const double m2 = radial_moment(2);
  CHECK(std::abs(h_function(quad, w, {}) / m2 - 1.0) < 1e-4);
  CHECK(std::abs(h_function(quad, w, {1.0, 0.0}) / (m2 + as) - 1.0) < 1e-4);
  CHECK(std::abs(h_function(quartic, w, {}) / radial_moment(4) - 1.0) < 1e-4);
  CHECK(m2 == doctest::Approx(13.89486).epsilon(1e-5));
}

TEST_CASE("critical points of H") {
  const RadialProfile& w = townes_profile();
  const double as = townes().a_star;
  const CriticalPoint c = critical_point_h(quad, w);
  CHECK(norm(c.y0) < 1e-8);
  CHECK(std::abs(c.hessian[0] / (2.0 * as) - 1.0) < 1e-3);
  CHECK(std::abs(c.hessian[3] / (2.0 * as) - 1.0) < 1e-3);
  CHECK(std::abs(c.hessian[1]) < 1e-3 * as);
  CHECK(c.nondegenerate);

  const CriticalPoint ca = critical_point_h(HomogeneousPotential::anisotropic(1.0, 2.0), w);
  CHECK(norm(ca.y0) < 1e-8);
  CHECK(std::abs(ca.hessian[0] / (2.0 * as) - 1.0) < 1e-3);
  CHECK(std::abs(ca.hessian[3] / (4.0 * as) - 1.0) < 1e-3);

  const CriticalPoint c4 = critical_point_h(quartic, w);
  CHECK(norm(c4.y0) < 1e-8);
  CHECK(c4.nondegenerate);
  CHECK(c4.hessian[0] > 0.0);
  CHECK(c4.hessian[0] == doctest::Approx(c4.hessian[3]).epsilon(1e-6));
}

TEST_CASE("existence threshold") {
  const double as = townes().a_star;
  CHECK(beta_star(as, 0.0, 0.0) == doctest::Approx(2.0 * as).epsilon(1e-15));
  CHECK(beta_star(as, as, 0.3 * as) == as);
  CHECK(beta_star(as, as - 1e-12, 0.3 * as) - as < 1e-5);
  CHECK_THROWS_AS(beta_star(as, as + 1.0, 0.0), std::domain_error);

  CHECK(minimizer_exists(as, 0.0, 0.0, 0.0));
  CHECK(minimizer_exists(as, 0.5 * as, 0.5 * as, 1.4 * as));
  CHECK_FALSE(minimizer_exists(as, 0.5 * as, 0.5 * as, 1.6 * as));
  CHECK_FALSE(minimizer_exists(as, as, 0.5 * as, 0.0));
  CHECK_FALSE(minimizer_exists(as, -0.1, 0.5 * as, 0.0));
}

TEST_CASE("region labels") {
  const double as = townes().a_star;
  const double b = 0.5 * as;
  const double a = as - 1e-2;
  CHECK(classify_region(as, a, b, 0.5 * as) == Region::III);
  CHECK(classify_region(as, a, b, as + 0.5 * std::sqrt((as - a) * (as - b))) == Region::I);
  CHECK(classify_region(as, a, b, as) == Region::boundary);
  CHECK(classify_region(as, 0.5 * as, b, 0.9 * as) == Region::II);
  CHECK(classify_region(as, a, b, 2.0 * as) == Region::outside);
}

TEST_CASE("theory constants for b = a*/2, |x|^2") {
  const double as = townes().a_star;
  const double b = 0.5 * as;
  const TheoryConstants tc = theory_constants(as - 0.1, b, 0.5 * as, quad, quad);
  const double m2 = radial_moment(2);
  CHECK(tc.lambda == doctest::Approx(std::pow(0.5 * as * m2, 0.25)).epsilon(1e-6));
  CHECK(tc.lambda == doctest::Approx(3.00269).epsilon(1e-5));
  CHECK(tc.lambda1 == doctest::Approx(std::pow(m2, 0.25)).epsilon(1e-6));
  CHECK(tc.c_inf == doctest::Approx(1.0 / townes().w0).epsilon(1e-15));
  CHECK_THROWS_AS(theory_constants(as + 0.1, b, b, quad, quad), std::domain_error);
}

TEST_CASE("predictions") {
  const double as = townes().a_star;
  const double b = 0.5 * as;
  const TheoryConstants tc = theory_constants(as - 0.1, b, b, quad, quad);

  SUBCASE("eps_I vanishes at beta*") {
    const double a = as - 0.2;
    const double beta = as + std::sqrt((as - a) * (as - b));
    CHECK(predict(tc, a, b, beta).eps_I == doctest::Approx(0.0));
  }
  SUBCASE("sigma^2 at beta = a*") {
    const double a = as - 0.05;
    const Prediction pr = predict(tc, a, b, as);
    const double eps = pr.eps_I;
    CHECK(pr.sigma_sq == doctest::Approx((as - a) / (as * (as - b) * tc.c_inf * tc.c_inf * eps * eps))
                             .epsilon(1e-12));
  }
  SUBCASE("e_III scales like (a* - a)^{1/2}") {
    const double k = 2.0 * tc.lambda1 * tc.lambda1 / as;
    for (double d : {0.3, 0.03, 0.003})
      CHECK(predict(tc, as - d, b, b).e_III / std::sqrt(d) == doctest::Approx(k).epsilon(1e-12));
    CHECK(k == doctest::Approx(0.6371).epsilon(1e-3));
  }
}

TEST_CASE("trial pair") {
  const double as = townes().a_star;
  const double b = 0.5 * as;
  const double a = as - 0.05;
  const TheoryConstants tc = theory_constants(a, b, as, quad, quad);
  const Grid2D g(4.0, 129);
  const double beta = as + 0.5 * std::sqrt((as - a) * (as - b));
  const CondensatePair s = trial_pair(tc, a, b, beta, 3.0, g);
  CHECK(std::abs(joint_mass(s) - 1.0) < 1e-3);
  CHECK(integrate_product(s.u2, s.u2) > 0.01);
  const CondensatePair s0 = trial_pair(tc, a, b, as, 3.0, g);
  CHECK(s0.u2.max_abs() == 0.0);
  CHECK_THROWS_AS(trial_pair(tc, a, b, beta, 0.0, g), std::invalid_argument);
  CHECK_THROWS_AS(optimal_trial_tau(tc, as + 1.0, b, b), std::domain_error);
}

TEST_CASE("optimal tau is stationary for the closed form") {
  const double as = townes().a_star;
  const double b = 0.5 * as;
  const double a = as - 0.02;
  const double beta = as + 0.5 * std::sqrt((as - a) * (as - b));
  const TheoryConstants tc = theory_constants(a, b, beta, quad, quartic);
  const double tau = optimal_trial_tau(tc, a, b, beta);
  const double e = trial_energy(tc, a, b, beta, tau);
  CHECK(trial_energy(tc, a, b, beta, tau * 1.01) > e);
  CHECK(trial_energy(tc, a, b, beta, tau / 1.01) > e);
}

TEST_CASE("trial energy brackets the minimum near the limit") {
  const double as = townes().a_star;
  const double b = 0.5 * as;
  const double a = as - 0.32 / 128.0;
  const double beta = as + 0.5 * std::sqrt((as - a) * (as - b));
  const PhysParams p{a, b, beta, quad, quad};
  const TheoryConstants tc = theory_constants(a, b, beta, quad, quad);
  const Prediction pr = predict(tc, a, b, beta);
  MinimizerConfig cfg;
  cfg.grid = make_grid(10.0 * pr.eps_I, 193);
  cfg.init = TrialInit{tc, optimal_trial_tau(tc, a, b, beta), 0.5};
  const MinimizerResult r = minimize(p, cfg);
  REQUIRE(r.converged());
  const double e_trial = gp_energy(p, trial_pair(tc, a, b, beta, optimal_trial_tau(tc, a, b, beta), cfg.grid));
  CHECK(r.energy <= e_trial);
  CHECK(e_trial <= 1.1 * pr.e_I);
}
