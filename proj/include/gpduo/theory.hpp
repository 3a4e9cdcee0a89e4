#pragma once

#include <array>

#include "gpduo/grid_field.hpp"
#include "gpduo/townes.hpp"

namespace gpduo {

/// H(y) = integrate V(x + y) w(x)^2 dx, by the trapezoid rule on the
/// [-12, 12]^2 grid with 385 nodes per axis.
double h_function(const HomogeneousPotential& V, const RadialProfile& w, Point y);

struct CriticalPoint {
  Point y0;
  std::array<double, 4> hessian{};  ///< row-major 2x2
  bool nondegenerate = false;
  int iterations = 0;

  double det() const { return hessian[0] * hessian[3] - hessian[1] * hessian[2]; }
};

/// Critical point of H by damped Newton from the origin, with gradient and
/// Hessian by central differences. Throws std::runtime_error when Newton
/// does not converge.
CriticalPoint critical_point_h(const HomogeneousPotential& V, const RadialProfile& w);

/// a* + sqrt((a* - a)(a* - b)); requires a, b <= a*.
double beta_star(double a_star, double a, double b);

/// Minimizers exist: 0 <= a, b < a* and 0 <= beta < beta*. The zero faces
/// are included (there the functional is coercive without attraction).
bool minimizer_exists(double a_star, double a, double b, double beta);

enum class Region { I, II, III, boundary, outside };

const char* to_string(Region r);

/// Ratio kappa used to decide that a* - a is small against |beta - a*|.
inline constexpr double region_kappa = 0.5;

/// outside: (a, b, beta) not in the existence cuboid. boundary: beta == a*.
/// I: a* < beta and a* - a < kappa (beta - a*). III: beta < a* and
/// a* - a < kappa (a* - beta). Everything else in the cuboid is II.
Region classify_region(double a_star, double a, double b, double beta);

struct TheoryConstants {
  double a_star = 0.0;
  double beta_star = 0.0;
  double H1_at_y0 = 0.0;
  double H2_at_y0 = 0.0;
  Point y0;
  double lambda = 0.0;   ///< [p1 (a* - b) H1(y0) / 2]^{1/(2+p1)}
  double lambda1 = 0.0;  ///< [p1 H1(y0) / 2]^{1/(2+p1)}
  double p1 = 0.0;
  double p2 = 0.0;
  double c_inf = 0.0;
  Region region = Region::outside;
  bool nondegenerate = false;
};

/// All closed-form constants for (a, b, beta). Parameters outside the
/// existence cuboid are flagged through `region`, not rejected, except
/// a, b outside [0, a*] which make beta* undefined.
TheoryConstants theory_constants(double a, double b, double beta,
                                 const HomogeneousPotential& V1,
                                 const HomogeneousPotential& V2,
                                 const RadialProfile& w);
TheoryConstants theory_constants(double a, double b, double beta,
                                 const HomogeneousPotential& V1,
                                 const HomogeneousPotential& V2);

struct Prediction {
  double eps_I = 0.0;
  double eps_III = 0.0;
  double e_I = 0.0;
  double e_III = 0.0;
  double sigma_sq = 0.0;  ///< evaluated at eps_I
  bool region_I_valid = false;    ///< gap (a*-a)(a*-b) - (beta-a*)^2 > 0
  bool region_III_valid = false;  ///< a < a*

  /// eps of the region the parameters are classified in (I or III), else eps_I
  /// when defined, else eps_III.
  double eps_for(Region r) const;
};

/// (a* - a)(a* - b) - (beta - a*)^2
double region_I_gap(double a_star, double a, double b, double beta);

Prediction predict(const TheoryConstants& tc, double a, double b, double beta);

/// Trial pair built on w(tau x - y0) with unit joint mass. For beta >= a* both
/// components carry the amplitude A = sqrt((a* - b)/(beta - b)); for
/// beta < a* the second component is zero. Throws std::invalid_argument when
/// beta >= a* and beta <= b, or tau <= 0.
CondensatePair trial_pair(const TheoryConstants& tc, double a, double b, double beta,
                          double tau, const Grid2D& g);

/// Closed-form energy of the trial pair on R^2 as a function of tau.
double trial_energy(const TheoryConstants& tc, double a, double b, double beta,
                    double tau);

/// Minimizer in tau of trial_energy. Throws std::domain_error when the
/// quadratic coefficient is not positive (no minimizer exists).
double optimal_trial_tau(const TheoryConstants& tc, double a, double b, double beta);

}  // namespace gpduo
