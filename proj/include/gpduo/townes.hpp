#pragma once

#include <iosfwd>
#include <vector>

#include "gpduo/grid_field.hpp"

namespace gpduo {

/// Radial profile w(r) sampled at r_i = i * step, i = 0 .. N, with r_N = r_max.
struct RadialProfile {
  double r_max = 0.0;
  double step = 0.0;
  std::vector<double> w;
  std::vector<double> dw;

  std::size_t size() const { return w.size(); }
  double radius(std::size_t i) const { return static_cast<double>(i) * step; }
  /// Cubic Hermite interpolation in r; zero beyond r_max.
  double operator()(double r) const;
};

/// Constants of the ground state w of  Delta w - w + w^3 = 0  in R^2.
struct TownesConstants {
  double a_star = 0.0;   ///< ||w||_2^2 (critical mass)
  double grad_sq = 0.0;  ///< ||grad w||_2^2
  double l4_4 = 0.0;     ///< ||w||_4^4
  double w0 = 0.0;       ///< w(0)
  double w_max = 0.0;    ///< ||w||_inf
  double c_inf = 0.0;    ///< 1 / ||w||_inf

  /// |a* - ||grad w||^2| / a*
  double gradient_identity_defect() const;
  /// |a* - ||w||_4^4 / 2| / a*
  double quartic_identity_defect() const;
};

enum class TailSign { crossed_zero = -1, decaying = 0, turned_up = 1 };

struct ShootResult {
  RadialProfile profile;  ///< trajectory up to where integration stopped
  TailSign tail = TailSign::decaying;
};

/// Integrate w'' + w'/r - w + w^3 = 0, w(0) = w0, w'(0) = 0, with classical
/// RK4 from a series start at r = step. Stops early when the trajectory
/// crosses zero or turns upward.
ShootResult shoot(double w0, double r_max, double step);

struct TownesOptions {
  double tol = 1e-10;        ///< bisection bracket width for w(0)
  double step = 1e-3;        ///< ODE step
  double shoot_r_max = 30.0; ///< shooting horizon used to classify trajectories
  double r_max = 24.0;       ///< extent of the returned profile
};

/// Ground state by bisection on w(0) over [1, 3]. The shooting trajectory is
/// kept while the two bracketing trajectories agree; beyond that point the
/// profile continues as the matched linear tail C K_0(r).
RadialProfile solve_townes(const TownesOptions& opts = {});
RadialProfile solve_townes(double tol);

/// Radial quadrature (composite Simpson) of the constants.
TownesConstants townes_constants(const RadialProfile& p);

/// Field x -> w(|tau x - center|) on the grid.
ScalarField2D sample_to_grid(const RadialProfile& p, const Grid2D& g,
                             Point center, double tau);

/// Max relative deviation of w from the best fit C r^{-1/2} e^{-r} on [6, 10].
double decay_check(const RadialProfile& p);

/// "# r w" header then one "r w" row per sample.
void write_profile(std::ostream& os, const RadialProfile& p);

/// Solved once per process (default options) and cached.
const RadialProfile& townes_profile();
const TownesConstants& townes();

}  // namespace gpduo
