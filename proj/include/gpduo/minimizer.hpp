#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "gpduo/dirichlet_solver.hpp"
#include "gpduo/grid_field.hpp"
#include "gpduo/theory.hpp"

namespace gpduo {

/// States with integrate(u2^2) below this are classified semi-trivial.
inline constexpr double semi_trivial_threshold = 1e-4;

/// Gaussians exp(-|x - c|^2 / (2 width^2)) in both components, mass split
/// (1 - mass_fraction2, mass_fraction2).
struct GaussianInit {
  double width = 1.0;
  Point center1;
  Point center2;
  double mass_fraction2 = 0.5;
};

/// trial_pair at scale tau. When the trial's second component vanishes,
/// `seed_fraction2` of the mass is moved into a copy of the first component
/// so that the flow, not the initial data, decides whether u2 survives.
struct TrialInit {
  TheoryConstants tc;
  double tau = 1.0;
  double seed_fraction2 = 0.0;
};

/// Previous state x -> dilation * u(dilation * x), resampled on the new grid.
/// If the resampled u2 carries less than semi_trivial_threshold of the mass,
/// `reseed_fraction2` of the mass is moved into a copy of u1.
struct WarmStart {
  CondensatePair state;
  double dilation = 1.0;
  double reseed_fraction2 = 0.0;
};

using InitSpec = std::variant<GaussianInit, TrialInit, WarmStart>;

struct MinimizerConfig {
  Grid2D grid{8.0, 257};
  double dt0 = 1e-2;        ///< initial step
  double dt_max = 1e4;      ///< step growth cap
  double grow = 2.0;        ///< step growth after an accepted step
  double backtrack = 0.5;   ///< step reduction after a rejected step
  double dt_min = 1e-14;    ///< below this a rejected step means "stalled"
  double tol_grad = 1e-6;   ///< KKT residual tolerance (absolute, L2)
  double tol_e = 1e-15;     ///< relative energy stall tolerance over stall_window steps
  int stall_window = 200;
  int max_iters = 20000;
  int anderson_depth = 8;   ///< 0 disables acceleration
  double linear_tol = 1e-11;
  int linear_max_iter = 500;
  bool record_history = false;
  InitSpec init = GaussianInit{};
};

enum class Termination { converged, stalled, max_iters };

const char* to_string(Termination t);

struct MinimizerResult {
  CondensatePair state;
  double energy = 0.0;
  double mu = 0.0;
  double kkt = 0.0;
  int iters = 0;
  int rejected_steps = 0;
  bool semi_trivial = false;
  Point peak1;
  Point peak2;
  Termination status = Termination::max_iters;
  /// Parameters lie outside the existence cuboid; the result is not a minimizer.
  bool advisory = false;
  std::vector<double> energy_history;

  bool converged() const { return status == Termination::converged; }
};

/// Common factor so that integrate(u1^2 + u2^2) = 1.
CondensatePair project_joint_mass(const CondensatePair& s);

/// Multiplier mu = e - (a/2) |u1|_4^4 - (b/2) |u2|_4^4 - beta |u1 u2|_2^2 of a
/// unit-mass state.
double multiplier(const PhysParams& p, const EnergyParts& parts);

/// L2 norm of the KKT residual pair at the state's own multiplier.
double kkt_residual(const PhysParams& p, const CondensatePair& s);

/// Semi-implicit step with the multiplier shift:
///   (1 + dt(-Delta + V_i - mu)) u_i+ = u_i + dt (a_i u_i^2 + beta u_j^2) u_i,
/// then clamping, Dirichlet ring, joint-mass projection. Reuses the FFT plan
/// and sampled potentials across steps.
class GradientFlow {
 public:
  GradientFlow(const PhysParams& p, const Grid2D& grid, double linear_tol = 1e-11,
               int linear_max_iter = 500);

  struct Step {
    CondensatePair state;
    double dt = 0.0;  ///< step actually used (capped when mu > 0)
    int linear_iterations = 0;
  };

  /// One raw step; throws std::runtime_error if a linear solve fails.
  Step step(const CondensatePair& s, double dt);

  double energy(const CondensatePair& s) const;
  EnergyParts parts(const CondensatePair& s) const;
  /// L2 norm of the residual pair at the state's own multiplier.
  double kkt(const CondensatePair& s) const;

  const PhysParams& params() const { return p_; }
  const Grid2D& grid() const { return grid_; }

 private:
  PhysParams p_;
  Grid2D grid_;
  ScalarField2D v1_;
  ScalarField2D v2_;
  double linear_tol_;
  int linear_max_iter_;
  std::unique_ptr<DirichletSolver> solver_;
};

struct FlowStepResult {
  CondensatePair state;
  double energy = 0.0;
  double dt = 0.0;     ///< accepted step
  int backtracks = 0;
};

/// One accepted step: halve dt by `backtrack` until the energy does not
/// increase. Throws std::runtime_error on dt underflow.
FlowStepResult flow_step(const PhysParams& p, const CondensatePair& s, double dt,
                         double backtrack = 0.5, double dt_min = 1e-14);

/// Initial state on cfg.grid, mass-projected.
CondensatePair initial_state(const PhysParams& p, const MinimizerConfig& cfg);

MinimizerResult minimize(const PhysParams& p, const MinimizerConfig& cfg);

struct ProbeResult {
  double max_pairwise_distance = 0.0;
  std::vector<MinimizerResult> runs;
};

/// minimize from n_starts Gaussian starts whose widths and centres are
/// jittered by a counter-based generator keyed by (seed, start index).
/// Runs execute on up to `threads` workers; results are in start order.
ProbeResult multistart_probe(const PhysParams& p, const MinimizerConfig& cfg,
                             int n_starts, std::uint64_t seed, int threads = 1);

/// max |u1a - u1b|_inf + |u2a - u2b|_2
double pair_distance(const CondensatePair& x, const CondensatePair& y);

/// Deterministic uniform double in [0, 1) for (seed, stream, counter).
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

// Checkpoints --------------------------------------------------------------

inline constexpr const char* checkpoint_header = "GPDUO-STATE v1";

struct Checkpoint {
  CondensatePair state;
  double a = 0.0;
  double b = 0.0;
  double beta = 0.0;
  double mu = 0.0;
  double energy = 0.0;
  std::string config_hash = "-";  ///< single token
};

void write_checkpoint(std::ostream& os, const Checkpoint& c);
/// Throws std::runtime_error on a bad header or malformed data.
Checkpoint read_checkpoint(std::istream& is);

}  // namespace gpduo
