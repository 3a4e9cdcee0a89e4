#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gpduo/minimizer.hpp"
#include "gpduo/theory.hpp"

namespace gpduo {

enum class Schedule { region_I, region_III_fixed, region_III_approach };

const char* to_string(Schedule s);
Schedule schedule_from_string(const std::string& s);

/// Grid per sweep point: [-L, L]^2 with L = extent_factor * eps_pred and a
/// fixed node count, so that consecutive rungs are exact rescalings.
struct GridPolicy {
  double extent_factor = 10.0;
  int points = 193;
  Stencil stencil = Stencil::sixth;
};

struct SweepSpec {
  Schedule schedule = Schedule::region_I;
  double b = 0.0;
  double varsigma0 = 0.5;  ///< region_I: beta = a* + varsigma0 sqrt((a*-a)(a*-b))
  double beta_bar = 0.0;   ///< region_III_fixed
  double gamma = 0.5;      ///< region_III_approach: a* - beta = (a* - a)^gamma
  double delta0 = 0.32;    ///< a_m = a* - delta0 2^-m
  int m_first = 0;
  int m_last = 7;
  HomogeneousPotential V1 = HomogeneousPotential::isotropic(2.0);
  HomogeneousPotential V2 = HomogeneousPotential::isotropic(2.0);
  GridPolicy grid;
  MinimizerConfig solver;  ///< grid and init are set per point
  bool warm_start = true;
  /// Mass fraction put into u2 at a cold start, and re-seeded into a
  /// vanished u2 at a warm start, so each rung decides semi-triviality itself.
  double seed_fraction2 = 0.5;
  double reseed_fraction2 = 0.1;
};

struct SweepPoint {
  int m = 0;
  double a = 0.0;
  double beta = 0.0;
  double eps_pred = 0.0;
};

/// Ladder points; throws std::invalid_argument for schedules that leave the
/// existence region or the schedule's own constraints.
std::vector<SweepPoint> sweep_points(const SweepSpec& spec);

/// Sentinel for observables that do not apply (profile_err2 of semi-trivial rows).
double not_applicable();
bool is_not_applicable(double v);

struct ObservableRow {
  int m = 0;
  double a = 0.0;
  double b = 0.0;
  double beta = 0.0;
  std::string region;
  double eps_pred = 0.0;
  double e = 0.0;
  double e_pred = 0.0;   ///< e_I or e_III of the schedule's region
  double e_trial = 0.0;  ///< gp_energy of the trial pair at the optimal tau, same grid
  double mass2 = 0.0;
  double l4_1 = 0.0;
  double l4_2 = 0.0;
  double grad1 = 0.0;    ///< integrate |grad u1|^2
  double eps_l4 = 0.0;
  double eps_kin = 0.0;
  double sigma = 0.0;
  double mu = 0.0;
  double delta = 0.0;
  Point peak1;
  Point peak2;
  double profile_err1 = 0.0;
  double profile_err2 = 0.0;
  bool semi_trivial = false;
  double kkt = 0.0;
  int iters = 0;
  std::string status;
  double half_extent = 0.0;
  int points = 0;
};

/// Observables of one result. eps_pred is the predicted concentration scale
/// used for delta and the rescaled-profile comparisons.
ObservableRow measure(const MinimizerResult& res, const PhysParams& p,
                      const TheoryConstants& tc, double eps_pred);

/// max over |x| <= 6 of |c eps u(eps x + peak) - w(x)|, sampled on a 0.05
/// lattice with bilinear interpolation of u.
double profile_error(const ScalarField2D& u, double normalization, double eps,
                     Point peak);

struct SweepOutput {
  std::vector<ObservableRow> rows;
  std::vector<MinimizerResult> results;  ///< filled when keep_states
  TheoryConstants tc;                    ///< at the last point
};

/// Runs the ladder. With warm starts the rungs run in order; otherwise they
/// run on up to `threads` workers and are gathered in ladder order.
SweepOutput run_sweep(const SweepSpec& spec, int threads = 1, bool keep_states = false);

// Fits and checks -------------------------------------------------------------

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
};

/// Least squares of log y on log x. Throws std::invalid_argument with fewer
/// than 4 points or nonpositive data.
FitResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

using RowExpr = std::function<double(const ObservableRow&)>;
FitResult fit_scaling(const std::vector<ObservableRow>& rows, const RowExpr& x_expr,
                      const RowExpr& y_expr);

/// Last value below the first and at least ceil((K-1)/2) of the consecutive
/// differences negative.
bool decreasing_trend(const std::vector<double>& v);

struct RatioDiagnostics {
  std::vector<double> R1;
  std::vector<double> R2;
  std::vector<double> R3;
  std::vector<double> R4;
  bool trend_R1 = false;  ///< |R - 1| follows decreasing_trend
  bool trend_R2 = false;
  bool trend_R3 = false;
  bool trend_R4 = false;
};

/// Ratio laws for Region-I rows:
///   R1 = (l4_2 / l4_1) ((a* - b)/(beta - a*))^2
///   R2 = mass2 (a* - b)/(beta - a*)
///   R3 = a* (a* - b) C_inf^2 sigma^2 eps^2 / (beta - a*)
///   R4 = (grad1 / l4_1) / (a*/2)
RatioDiagnostics limit_ratio_checks(const std::vector<ObservableRow>& rows,
                                    const TheoryConstants& tc);

// Verdicts ----------------------------------------------------------------

/// One pass/fail line of a sweep assessment. `status` is "pass", "fail" or
/// "insufficient points for fits".
struct Verdict {
  std::string check;
  std::string status;
  std::string detail;
  bool passed() const { return status == "pass"; }
};

inline constexpr const char* insufficient_points = "insufficient points for fits";

/// Ladder checks for a finished sweep, evaluated against the fixed
/// tolerances of the asymptotic laws. Needs tc.a_star, tc.lambda1, tc.c_inf.
std::vector<Verdict> sweep_verdicts(const std::vector<ObservableRow>& rows, Schedule schedule,
                                    const TheoryConstants& tc);

// Phase scan --------------------------------------------------------------

enum class PhaseClass { semi_trivial, two_peak, unresolved };

const char* to_string(PhaseClass c);

struct PhaseEntry {
  double a = 0.0;
  double beta = 0.0;
  Region region = Region::outside;
  PhaseClass observed = PhaseClass::unresolved;
  /// Theory makes a prediction for this region and it differs from `observed`.
  bool disagrees = false;
  double mass2 = 0.0;
  double sigma = 0.0;
  double energy = 0.0;
  std::string status;
};

/// Classifies each (a, beta) point. Semi-trivial when integrate(u2^2) is below
/// the threshold; two-peak when u2 keeps mass and its maximum is interior;
/// unresolved otherwise or when the solve did not converge.
std::vector<PhaseEntry> phase_scan(double b, const std::vector<std::pair<double, double>>& points,
                                   const HomogeneousPotential& V1,
                                   const HomogeneousPotential& V2, const GridPolicy& grid,
                                   const MinimizerConfig& solver, int threads = 1);

// Output --------------------------------------------------------------------

/// Ordered "key value" lines written as '#' comments ahead of the CSV header.
using Provenance = std::vector<std::pair<std::string, std::string>>;

std::vector<std::string> csv_columns();
void write_rows_csv(std::ostream& os, const std::vector<ObservableRow>& rows,
                    const Provenance& provenance);

struct CsvTable {
  Provenance provenance;
  std::vector<ObservableRow> rows;
};

/// Parses the output of write_rows_csv. Throws std::runtime_error on a
/// malformed file (missing header, wrong column count, bad numbers).
CsvTable read_rows_csv(std::istream& is);

/// Fixed-format decimal used in all text outputs ("%.12e", "NA" for the
/// not-applicable sentinel).
std::string format_number(double v);

}  // namespace gpduo
