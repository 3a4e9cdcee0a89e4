#include "gpduo/theory.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gpduo {

namespace {

// w^2 sampled once on the H-quadrature grid.
class HQuadrature {
 public:
  explicit HQuadrature(const RadialProfile& w)
      : grid_(12.0, 385), w2_(sample_to_grid(w, grid_, {0.0, 0.0}, 1.0)) {
    for (double& v : w2_.values()) v *= v;
  }

  double operator()(const HomogeneousPotential& V, Point y) const {
    const ScalarField2D shifted =
        ScalarField2D::from_function(grid_, [&](Point x) { return V(x + y); });
    return integrate_product(shifted, w2_);
  }

 private:
  Grid2D grid_;
  ScalarField2D w2_;
};

constexpr double fd_step = 1e-2;

Point fd_gradient(const HQuadrature& H, const HomogeneousPotential& V, Point y) {
  const double d = fd_step;
  return {(H(V, y + Point{d, 0.0}) - H(V, y - Point{d, 0.0})) / (2.0 * d),
          (H(V, y + Point{0.0, d}) - H(V, y - Point{0.0, d})) / (2.0 * d)};
}

std::array<double, 4> fd_hessian(const HQuadrature& H, const HomogeneousPotential& V,
                                 Point y) {
  const double d = fd_step;
  const Point ex{d, 0.0};
  const Point ey{0.0, d};
  const double h0 = H(V, y);
  const double hxx = (H(V, y + ex) - 2.0 * h0 + H(V, y - ex)) / (d * d);
  const double hyy = (H(V, y + ey) - 2.0 * h0 + H(V, y - ey)) / (d * d);
  const double hxy = (H(V, y + ex + ey) - H(V, y + ex - ey) - H(V, y - ex + ey) +
                      H(V, y - ex - ey)) /
                     (4.0 * d * d);
  return {hxx, hxy, hxy, hyy};
}

}  // namespace

double h_function(const HomogeneousPotential& V, const RadialProfile& w, Point y) {
  return HQuadrature(w)(V, y);
}

CriticalPoint critical_point_h(const HomogeneousPotential& V, const RadialProfile& w) {
  const HQuadrature H(w);
  const double a_star = townes_constants(w).a_star;
  constexpr int max_iters = 50;
  const double grad_tol = 1e-9 * a_star;

  CriticalPoint cp;
  Point y{0.0, 0.0};
  Point g = fd_gradient(H, V, y);
  for (int it = 0; it < max_iters; ++it) {
    cp.iterations = it;
    if (norm(g) < grad_tol) break;
    const auto hs = fd_hessian(H, V, y);
    const double det = hs[0] * hs[3] - hs[1] * hs[2];
    if (det == 0.0) throw std::runtime_error("critical_point_h: singular Hessian");
    Point step{(hs[3] * g.x - hs[1] * g.y) / det, (-hs[2] * g.x + hs[0] * g.y) / det};
    double t = 1.0;
    Point next = y - step;
    Point g_next = fd_gradient(H, V, next);
    while (norm(g_next) >= norm(g) && t > 1e-6) {
      t *= 0.5;
      next = y - t * step;
      g_next = fd_gradient(H, V, next);
    }
    y = next;
    g = g_next;
    if (it + 1 == max_iters && norm(g) >= grad_tol)
      throw std::runtime_error("critical_point_h: Newton did not converge");
  }
  cp.y0 = y;
  cp.hessian = fd_hessian(H, V, y);
  cp.nondegenerate = std::abs(cp.det()) > 1e-6 * a_star * a_star;
  return cp;
}

// ---------------------------------------------------------------------------

double beta_star(double a_star, double a, double b) {
  if (a > a_star || b > a_star)
    throw std::domain_error("beta_star: a and b must not exceed a*");
  return a_star + std::sqrt((a_star - a) * (a_star - b));
}

bool minimizer_exists(double a_star, double a, double b, double beta) {
  if (!(a >= 0.0 && a < a_star && b >= 0.0 && b < a_star && beta >= 0.0)) return false;
  return beta < beta_star(a_star, a, b);
}

const char* to_string(Region r) {
  switch (r) {
    case Region::I:
      return "I";
    case Region::II:
      return "II";
    case Region::III:
      return "III";
    case Region::boundary:
      return "boundary";
    case Region::outside:
      return "outside";
  }
  return "?";
}

Region classify_region(double a_star, double a, double b, double beta) {
  if (!(a > 0.0 && a < a_star && b > 0.0 && b < a_star && beta > 0.0))
    return Region::outside;
  if (beta >= beta_star(a_star, a, b)) return Region::outside;
  if (beta == a_star) return Region::boundary;
  const double da = a_star - a;
  if (beta > a_star) return da < region_kappa * (beta - a_star) ? Region::I : Region::II;
  return da < region_kappa * (a_star - beta) ? Region::III : Region::II;
}

TheoryConstants theory_constants(double a, double b, double beta,
                                 const HomogeneousPotential& V1,
                                 const HomogeneousPotential& V2,
                                 const RadialProfile& w) {
  const TownesConstants tw = townes_constants(w);
  TheoryConstants tc;
  tc.a_star = tw.a_star;
  tc.c_inf = tw.c_inf;
  if (a < 0.0 || b < 0.0 || a > tc.a_star || b > tc.a_star)
    throw std::domain_error("theory_constants: need 0 <= a, b <= a*");
  tc.beta_star = beta_star(tc.a_star, a, b);
  tc.region = classify_region(tc.a_star, a, b, beta);
  tc.p1 = V1.degree();
  tc.p2 = V2.degree();

  const CriticalPoint cp = critical_point_h(V1, w);
  tc.y0 = cp.y0;
  tc.nondegenerate = cp.nondegenerate;
  const HQuadrature H(w);
  tc.H1_at_y0 = H(V1, cp.y0);
  tc.H2_at_y0 = H(V2, cp.y0);
  const double e = 1.0 / (2.0 + tc.p1);
  tc.lambda = std::pow(tc.p1 * (tc.a_star - b) * tc.H1_at_y0 / 2.0, e);
  tc.lambda1 = std::pow(tc.p1 * tc.H1_at_y0 / 2.0, e);
  return tc;
}

TheoryConstants theory_constants(double a, double b, double beta,
                                 const HomogeneousPotential& V1,
                                 const HomogeneousPotential& V2) {
  return theory_constants(a, b, beta, V1, V2, townes_profile());
}

// ---------------------------------------------------------------------------

double region_I_gap(double a_star, double a, double b, double beta) {
  return (a_star - a) * (a_star - b) - (beta - a_star) * (beta - a_star);
}

double Prediction::eps_for(Region r) const {
  if (r == Region::III && region_III_valid) return eps_III;
  if ((r == Region::I || r == Region::boundary) && region_I_valid) return eps_I;
  if (region_I_valid) return eps_I;
  return eps_III;
}

Prediction predict(const TheoryConstants& tc, double a, double b, double beta) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  const double as = tc.a_star;
  const double p = tc.p1;
  Prediction out;

  double gap = region_I_gap(as, a, b, beta);
  // beta = beta* computed in floating point leaves a rounding-level gap.
  if (std::abs(gap) <= 1e-13 * as * as) gap = 0.0;
  out.region_I_valid = gap > 0.0 && b < as;
  if (gap == 0.0) {
    out.eps_I = 0.0;
    out.e_I = 0.0;
  } else if (out.region_I_valid) {
    out.eps_I = std::pow(gap, 1.0 / (2.0 + p)) / tc.lambda;
    out.e_I = tc.lambda * tc.lambda / (as * (as - b)) * ((p + 2.0) / p) *
              std::pow(gap, p / (p + 2.0));
  } else {
    out.eps_I = nan;
    out.e_I = nan;
  }

  out.region_III_valid = a < as;
  if (out.region_III_valid) {
    out.eps_III = std::pow(as - a, 1.0 / (p + 2.0)) / tc.lambda1;
    out.e_III = tc.lambda1 * tc.lambda1 / as * ((p + 2.0) / p) * std::pow(as - a, p / (p + 2.0));
  } else {
    out.eps_III = nan;
    out.e_III = nan;
  }

  if (out.region_I_valid) {
    const double eps = out.eps_I;
    const double num = 2.0 * (beta - as) + 2.0 * (as - a) +
                       tc.H1_at_y0 * std::pow(eps, 2.0 + tc.p1) -
                       tc.H2_at_y0 * std::pow(eps, 2.0 + tc.p2);
    out.sigma_sq = num / (2.0 * as * (as - b) * tc.c_inf * tc.c_inf * eps * eps);
  } else {
    out.sigma_sq = nan;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct TrialWeights {
  double c1_sq;
  double c2_sq;
};

TrialWeights trial_weights(const TheoryConstants& tc, double b, double beta) {
  if (beta < tc.a_star) return {1.0, 0.0};
  if (beta <= b) throw std::invalid_argument("trial_pair: need beta > b");
  const double amp_sq = (tc.a_star - b) / (beta - b);
  return {amp_sq, amp_sq * (beta - tc.a_star) / (tc.a_star - b)};
}

struct TrialCoefficients {
  double quad;  // multiplies tau^2
  double pot1;  // multiplies tau^-p1
  double pot2;  // multiplies tau^-p2
};

TrialCoefficients trial_coefficients(const TheoryConstants& tc, double a, double b,
                                     double beta) {
  const TrialWeights wt = trial_weights(tc, b, beta);
  const TownesConstants& tw = townes();
  const double as = tc.a_star;
  const double quartic =
      a * wt.c1_sq * wt.c1_sq + b * wt.c2_sq * wt.c2_sq + 2.0 * beta * wt.c1_sq * wt.c2_sq;
  return {(wt.c1_sq + wt.c2_sq) * tw.grad_sq / as - quartic * tw.l4_4 / (2.0 * as * as),
          wt.c1_sq * tc.H1_at_y0 / as, wt.c2_sq * tc.H2_at_y0 / as};
}

}  // namespace

CondensatePair trial_pair(const TheoryConstants& tc, double a, double b, double beta,
                          double tau, const Grid2D& g) {
  (void)a;
  if (!(tau > 0.0)) throw std::invalid_argument("trial_pair: tau must be positive");
  const TrialWeights wt = trial_weights(tc, b, beta);
  const ScalarField2D base = sample_to_grid(townes_profile(), g, tc.y0, tau);
  const double scale = tau / std::sqrt(tc.a_star);
  CondensatePair s{std::sqrt(wt.c1_sq) * scale * base, std::sqrt(wt.c2_sq) * scale * base};
  s.u1.apply_dirichlet();
  s.u2.apply_dirichlet();
  const double m = joint_mass(s);
  const double f = 1.0 / std::sqrt(m);
  s.u1 *= f;
  s.u2 *= f;
  return s;
}

double trial_energy(const TheoryConstants& tc, double a, double b, double beta,
                    double tau) {
  const TrialCoefficients c = trial_coefficients(tc, a, b, beta);
  return c.quad * tau * tau + c.pot1 * std::pow(tau, -tc.p1) + c.pot2 * std::pow(tau, -tc.p2);
}

double optimal_trial_tau(const TheoryConstants& tc, double a, double b, double beta) {
  const TrialCoefficients c = trial_coefficients(tc, a, b, beta);
  if (!(c.quad > 0.0))
    throw std::domain_error("optimal_trial_tau: trial energy unbounded below in tau");
  // Stationarity in s = log tau: 2 K e^{2s} = p1 P1 e^{-p1 s} + p2 P2 e^{-p2 s}.
  // The left side increases and the right side decreases, so bisect.
  auto f = [&](double s) {
    return 2.0 * c.quad * std::exp(2.0 * s) - tc.p1 * c.pot1 * std::exp(-tc.p1 * s) -
           tc.p2 * c.pot2 * std::exp(-tc.p2 * s);
  };
  double lo = -20.0;
  double hi = 20.0;
  if (f(lo) > 0.0 || f(hi) < 0.0)
    throw std::domain_error("optimal_trial_tau: no stationary point in range");
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

}  // namespace gpduo
