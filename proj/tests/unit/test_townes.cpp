#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "gpduo/townes.hpp"

using namespace gpduo;

namespace {

// Independent oracle: Petviashvili iteration for -w'' - w'/r + w = w^3 with
// second-order finite differences on [0, R), w(R) = 0. Returns w(0).
double petviashvili_w0(double R, int n) {
  const double h = R / n;
  std::vector<double> lo(n, 0.0), di(n), up(n, 0.0), w(n), q(n);
  di[0] = 4.0 / (h * h) + 1.0;
  up[0] = -4.0 / (h * h);
  for (int i = 1; i < n; ++i) {
    const double r = i * h;
    lo[i] = -(1.0 / (h * h) - 1.0 / (2.0 * h * r));
    di[i] = 2.0 / (h * h) + 1.0;
    up[i] = i + 1 < n ? -(1.0 / (h * h) + 1.0 / (2.0 * h * r)) : 0.0;
  }
  auto apply = [&](const std::vector<double>& v, int i) {
    return di[i] * v[i] + (i > 0 ? lo[i] * v[i - 1] : 0.0) + (i + 1 < n ? up[i] * v[i + 1] : 0.0);
  };
  auto weight = [&](int i) { return i == 0 ? h * h / 8.0 : i * h * h; };
  for (int i = 0; i < n; ++i) w[i] = std::exp(-(i * h) * (i * h));
  for (int it = 0; it < 500; ++it) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      num += weight(i) * w[i] * apply(w, i);
      den += weight(i) * std::pow(w[i], 4);
    }
    const double stab = std::pow(num / den, 1.5);
    // Thomas solve of A q = w^3.
    std::vector<double> c(n), d(n);
    c[0] = up[0] / di[0];
    d[0] = std::pow(w[0], 3) / di[0];
    for (int i = 1; i < n; ++i) {
      const double m = di[i] - lo[i] * c[i - 1];
      c[i] = up[i] / m;
      d[i] = (std::pow(w[i], 3) - lo[i] * d[i - 1]) / m;
    }
    q[n - 1] = d[n - 1];
    for (int i = n - 2; i >= 0; --i) q[i] = d[i] - c[i] * q[i + 1];
    double change = 0.0;
    for (int i = 0; i < n; ++i) {
      const double next = stab * q[i];
      change = std::max(change, std::abs(next - w[i]));
      w[i] = next;
    }
    if (change < 1e-12) break;
  }
  return w[0];
}

}  // namespace

TEST_CASE("shooting classifies the tail") {
  CHECK(shoot(1.0, 30.0, 1e-3).tail == TailSign::turned_up);
  CHECK(shoot(3.0, 30.0, 1e-3).tail == TailSign::crossed_zero);
  const double w0 = solve_townes(1e-10).w.front();
  CHECK(shoot(w0, 12.0, 1e-3).tail == TailSign::decaying);
}

TEST_CASE("solved profile decays like r^{-1/2} e^{-r}") {
  const RadialProfile& w = townes_profile();
  const double ratio = w(10.0) / w(5.0);
  const double law = std::exp(-5.0) * std::sqrt(0.5);
  CHECK(std::abs(ratio / law - 1.0) < 0.2);
}

TEST_CASE("w(0) and a* against an independent finite-difference solve") {
  const RadialProfile w = solve_townes(1e-10);
  const double oracle = petviashvili_w0(20.0, 4000);
  CHECK(std::abs(w.w.front() - oracle) < 1e-3);
  CHECK(std::abs(w.w.front() - 2.2062) < 1e-3);
  const TownesConstants c = townes_constants(w);
  CHECK(std::abs(c.a_star / 11.7010 - 1.0) < 1e-3);
}

TEST_CASE("profile is monotone decreasing") {
  const RadialProfile& w = townes_profile();
  for (std::size_t i = 1; i < w.size(); ++i) CHECK_MESSAGE(w.w[i] < w.w[i - 1], "i = " << i);
}

TEST_CASE("Pohozaev identities and height constant") {
  const TownesConstants c = townes_constants(solve_townes(1e-10));
  CHECK(c.gradient_identity_defect() <= 1e-6);
  CHECK(c.quartic_identity_defect() <= 1e-6);
  CHECK(c.c_inf == 1.0 / c.w_max);
  CHECK(c.w_max == c.w0);
}

TEST_CASE("a* is stable under step halving") {
  TownesOptions o;
  const double a1 = townes_constants(solve_townes(o)).a_star;
  o.step *= 0.5;
  const double a2 = townes_constants(solve_townes(o)).a_star;
  CHECK(std::abs(a2 - a1) / a1 < 1e-8);
}

TEST_CASE("tolerance below the floor is rejected") {
  CHECK_THROWS_AS(solve_townes(1e-13), std::invalid_argument);
  CHECK_THROWS_AS(shoot(-1.0, 10.0, 1e-3), std::invalid_argument);
}

TEST_CASE("sampling on a grid") {
  const Grid2D g(8.0, 257);
  const RadialProfile& w = townes_profile();
  const ScalarField2D f = sample_to_grid(w, g, {}, 1.0);
  const auto [i, j] = f.argmax();
  CHECK(i == 128);
  CHECK(j == 128);
  CHECK(f(i, j) == doctest::Approx(w.w.front()).epsilon(1e-12));
  CHECK(std::abs(integrate_product(f, f) / townes().a_star - 1.0) < 1e-3);
  for (double tau : {0.7, 2.0}) {
    ScalarField2D s = sample_to_grid(w, g, {}, tau);
    s *= tau / std::sqrt(townes().a_star);
    CHECK(std::abs(integrate_product(s, s) - 1.0) < 1e-3);
  }
}

TEST_CASE("decay check") {
  const RadialProfile& w = townes_profile();
  const double dev = decay_check(w);
  CHECK(dev <= 0.05);

  RadialProfile doubled = w;
  for (double& v : doubled.w) v *= 2.0;
  CHECK(decay_check(doubled) == doctest::Approx(dev).epsilon(1e-12));

  RadialProfile gauss;
  gauss.step = 1e-2;
  for (int i = 0; i <= 1200; ++i) {
    const double r = i * gauss.step;
    gauss.w.push_back(std::exp(-r * r));
    gauss.dw.push_back(-2.0 * r * std::exp(-r * r));
  }
  gauss.r_max = 12.0;
  CHECK(decay_check(gauss) > 0.5);
}

TEST_CASE("profile output") {
  std::ostringstream os;
  write_profile(os, townes_profile());
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "# r w");
  double r = -1.0, v = 0.0;
  is >> r >> v;
  CHECK(r == 0.0);
  CHECK(v == townes_profile().w.front());
}
