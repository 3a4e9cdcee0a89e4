#include "gpduo/townes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace gpduo {

double RadialProfile::operator()(double r) const {
  r = std::abs(r);
  if (w.empty() || r > r_max) return 0.0;
  const std::size_t last = w.size() - 1;
  auto i = static_cast<std::size_t>(r / step);
  if (i >= last) return w[last];
  const double t = r / step - static_cast<double>(i);
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * w[i] + (t3 - 2.0 * t2 + t) * step * dw[i] +
         (-2.0 * t3 + 3.0 * t2) * w[i + 1] + (t3 - t2) * step * dw[i + 1];
}

double TownesConstants::gradient_identity_defect() const {
  return std::abs(a_star - grad_sq) / a_star;
}

double TownesConstants::quartic_identity_defect() const {
  return std::abs(a_star - 0.5 * l4_4) / a_star;
}

// ---------------------------------------------------------------------------

ShootResult shoot(double w0, double r_max, double step) {
  if (!(w0 > 0.0) || !std::isfinite(w0))
    throw std::invalid_argument("shoot: w0 must be positive");
  if (!(step > 0.0) || !(r_max > 0.0) || step > 1e-3 * r_max)
    throw std::invalid_argument("shoot: need 0 < step <= 1e-3 * r_max");

  const auto steps = static_cast<std::size_t>(std::llround(r_max / step));
  ShootResult out;
  RadialProfile& p = out.profile;
  p.step = step;
  p.w.reserve(steps + 1);
  p.dw.reserve(steps + 1);

  // Regular series about the origin: w = w0 + c2 r^2 + c4 r^4 + ...
  const double c2 = 0.25 * (w0 - w0 * w0 * w0);
  const double c4 = c2 * (1.0 - 3.0 * w0 * w0) / 16.0;
  p.w.push_back(w0);
  p.dw.push_back(0.0);
  {
    const double r = step;
    p.w.push_back(w0 + c2 * r * r + c4 * r * r * r * r);
    p.dw.push_back(2.0 * c2 * r + 4.0 * c4 * r * r * r);
  }

  auto accel = [](double r, double w, double v) { return -v / r + w - w * w * w; };

  out.tail = TailSign::decaying;
  double w = p.w.back();
  double v = p.dw.back();
  for (std::size_t i = 1; i < steps; ++i) {
    const double r = static_cast<double>(i) * step;
    const double k1w = v;
    const double k1v = accel(r, w, v);
    const double k2w = v + 0.5 * step * k1v;
    const double k2v = accel(r + 0.5 * step, w + 0.5 * step * k1w, k2w);
    const double k3w = v + 0.5 * step * k2v;
    const double k3v = accel(r + 0.5 * step, w + 0.5 * step * k2w, k3w);
    const double k4w = v + step * k3v;
    const double k4v = accel(r + step, w + step * k3w, k4w);
    w += step / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    v += step / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (!std::isfinite(w) || !std::isfinite(v)) {
      out.tail = TailSign::turned_up;
      break;
    }
    p.w.push_back(w);
    p.dw.push_back(v);
    if (w <= 0.0) {
      out.tail = TailSign::crossed_zero;
      break;
    }
    if (v > 0.0) {
      out.tail = TailSign::turned_up;
      break;
    }
  }
  // A monotone trajectory that has not left the neighbourhood of the
  // constant state w = 1 is not decaying either.
  if (out.tail == TailSign::decaying && p.w.back() > 0.5) out.tail = TailSign::turned_up;
  p.r_max = p.radius(p.w.size() - 1);
  return out;
}

RadialProfile solve_townes(double tol) {
  TownesOptions opts;
  opts.tol = tol;
  return solve_townes(opts);
}

RadialProfile solve_townes(const TownesOptions& opts) {
  if (!(opts.tol >= 1e-12)) throw std::invalid_argument("solve_townes: tol must be >= 1e-12");
  double lo = 1.0;
  double hi = 3.0;
  if (shoot(lo, opts.shoot_r_max, opts.step).tail != TailSign::turned_up ||
      shoot(hi, opts.shoot_r_max, opts.step).tail != TailSign::crossed_zero)
    throw std::runtime_error("solve_townes: [1, 3] does not bracket the ground state");

  while (hi - lo > opts.tol) {
    const double mid = 0.5 * (lo + hi);
    if (shoot(mid, opts.shoot_r_max, opts.step).tail == TailSign::crossed_zero)
      hi = mid;
    else
      lo = mid;
  }

  const RadialProfile below = shoot(lo, opts.shoot_r_max, opts.step).profile;
  const RadialProfile above = shoot(hi, opts.shoot_r_max, opts.step).profile;
  const RadialProfile mid = shoot(0.5 * (lo + hi), opts.shoot_r_max, opts.step).profile;

  // Last sample where the bracketing trajectories still agree.
  constexpr double agreement = 1e-5;
  const std::size_t common = std::min({below.size(), above.size(), mid.size()});
  std::size_t match = 1;
  while (match + 1 < common &&
         std::abs(below.w[match + 1] - above.w[match + 1]) <=
             agreement * mid.w[match + 1])
    ++match;

  const auto total = static_cast<std::size_t>(std::llround(opts.r_max / opts.step));
  if (match >= total) match = total;
  RadialProfile p;
  p.step = opts.step;
  p.r_max = static_cast<double>(total) * opts.step;
  p.w.assign(mid.w.begin(), mid.w.begin() + static_cast<std::ptrdiff_t>(match) + 1);
  p.dw.assign(mid.dw.begin(), mid.dw.begin() + static_cast<std::ptrdiff_t>(match) + 1);

  // Beyond the match point w^3 is negligible and w solves the modified
  // Bessel equation of order zero.
  const double r_match = p.radius(match);
  const double scale = p.w.back() / std::cyl_bessel_k(0.0, r_match);
  for (std::size_t i = match + 1; i <= total; ++i) {
    const double r = p.radius(i);
    p.w.push_back(scale * std::cyl_bessel_k(0.0, r));
    p.dw.push_back(-scale * std::cyl_bessel_k(1.0, r));
  }
  return p;
}

// ---------------------------------------------------------------------------

namespace {

// Composite Simpson over the samples, with a 3/8 panel when the number of
// intervals is odd.
template <class F>
double simpson(const RadialProfile& p, F&& f) {
  const std::size_t intervals = p.size() - 1;
  if (intervals < 3) throw std::invalid_argument("profile too short");
  std::size_t even = intervals % 2 == 0 ? intervals : intervals - 3;
  double sum = f(0) + f(even);
  for (std::size_t i = 1; i < even; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(i);
  double total = sum * p.step / 3.0;
  if (even != intervals) {
    total += 3.0 * p.step / 8.0 *
             (f(even) + 3.0 * f(even + 1) + 3.0 * f(even + 2) + f(even + 3));
  }
  return total;
}

}  // namespace

TownesConstants townes_constants(const RadialProfile& p) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  TownesConstants c;
  c.a_star = two_pi * simpson(p, [&](std::size_t i) {
               return p.w[i] * p.w[i] * p.radius(i);
             });
  c.grad_sq = two_pi * simpson(p, [&](std::size_t i) {
                return p.dw[i] * p.dw[i] * p.radius(i);
              });
  c.l4_4 = two_pi * simpson(p, [&](std::size_t i) {
             const double w2 = p.w[i] * p.w[i];
             return w2 * w2 * p.radius(i);
           });
  c.w0 = p.w.front();
  c.w_max = c.w0;
  for (double v : p.w) c.w_max = std::max(c.w_max, v);
  c.c_inf = 1.0 / c.w_max;
  return c;
}

ScalarField2D sample_to_grid(const RadialProfile& p, const Grid2D& g, Point center,
                             double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("sample_to_grid: tau must be positive");
  return ScalarField2D::from_function(
      g, [&](Point x) { return p(norm(tau * x - center)); });
}

double decay_check(const RadialProfile& p) {
  // Least-squares amplitude of C r^{-1/2} e^{-r} over the window, then the
  // worst relative misfit.
  constexpr double lo = 6.0;
  constexpr double hi = 10.0;
  double num = 0.0;
  double den = 0.0;
  std::vector<std::pair<double, double>> samples;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = p.radius(i);
    if (r < lo || r > hi) continue;
    const double model = std::exp(-r) / std::sqrt(r);
    samples.emplace_back(p.w[i], model);
    num += p.w[i] * model;
    den += model * model;
  }
  if (samples.empty() || !(den > 0.0))
    throw std::invalid_argument("decay_check: profile does not cover [6, 10]");
  const double amplitude = num / den;
  double worst = 0.0;
  for (const auto& [w, model] : samples)
    worst = std::max(worst, std::abs(w / (amplitude * model) - 1.0));
  return worst;
}

void write_profile(std::ostream& os, const RadialProfile& p) {
  os << "# r w\n";
  char line[64];
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::snprintf(line, sizeof line, "%.6f %.17g\n", p.radius(i), p.w[i]);
    os << line;
  }
}

const RadialProfile& townes_profile() {
  static const RadialProfile profile = solve_townes(TownesOptions{});
  return profile;
}

const TownesConstants& townes() {
  static const TownesConstants constants = townes_constants(townes_profile());
  return constants;
}

}  // namespace gpduo
