#include "gpduo/minimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace gpduo {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged:
      return "converged";
    case Termination::stalled:
      return "stalled";
    case Termination::max_iters:
      return "max_iters";
  }
  return "?";
}

CondensatePair project_joint_mass(const CondensatePair& s) {
  const double m = joint_mass(s);
  if (!(m > 0.0) || !std::isfinite(m))
    throw std::invalid_argument("project_joint_mass: zero or non-finite state");
  const double f = 1.0 / std::sqrt(m);
  CondensatePair out = s;
  out.u1 *= f;
  out.u2 *= f;
  return out;
}

double multiplier(const PhysParams& p, const EnergyParts& e) {
  return e.total - 0.5 * p.a * e.quartic1 - 0.5 * p.b * e.quartic2 - p.beta * e.cross;
}

double kkt_residual(const PhysParams& p, const CondensatePair& s) {
  const double mu = multiplier(p, energy_parts(p, sample_potential(p.V1, s.grid()),
                                               sample_potential(p.V2, s.grid()), s));
  const auto [r1, r2] = gp_residual(p, s, mu);
  return std::hypot(l2_norm(r1), l2_norm(r2));
}

// ---------------------------------------------------------------------------

GradientFlow::GradientFlow(const PhysParams& p, const Grid2D& grid, double linear_tol,
                           int linear_max_iter)
    : p_(p),
      grid_(grid),
      v1_(sample_potential(p.V1, grid)),
      v2_(sample_potential(p.V2, grid)),
      linear_tol_(linear_tol),
      linear_max_iter_(linear_max_iter),
      solver_(std::make_unique<DirichletSolver>(grid)) {}

EnergyParts GradientFlow::parts(const CondensatePair& s) const {
  return energy_parts(p_, v1_, v2_, s);
}

double GradientFlow::energy(const CondensatePair& s) const { return parts(s).total; }

GradientFlow::Step GradientFlow::step(const CondensatePair& s, double dt) {
  const double mu = multiplier(p_, parts(s));
  Step out{s, dt, 0};
  if (mu > 0.0) out.dt = std::min(dt, 0.5 / mu);

  const std::size_t size = grid_.size();
  std::vector<double> rhs(size);
  auto advance = [&](const ScalarField2D& u, const ScalarField2D& other, double self,
                     const ScalarField2D& v, ScalarField2D& dst) {
    const double mass = integrate_product(u, u);
    if (mass == 0.0) {
      dst = ScalarField2D(grid_);
      return;
    }
    for (std::size_t k = 0; k < size; ++k)
      rhs[k] = u[k] + out.dt * (self * u[k] * u[k] + p_.beta * other[k] * other[k]) * u[k];
    const double vbar = integrate_triple(v, u, u) / mass;
    dst = u;
    const PcgStats st = solve_shifted_operator(*solver_, v.values(), vbar, out.dt, mu, rhs,
                                               dst.values(), linear_tol_, linear_max_iter_);
    out.linear_iterations += st.iterations;
    if (!(st.relative_residual <= 10.0 * linear_tol_))
      throw std::runtime_error("flow step: linear solve did not converge");
  };
  advance(s.u1, s.u2, p_.a, v1_, out.state.u1);
  advance(s.u2, s.u1, p_.b, v2_, out.state.u2);

  for (ScalarField2D* u : {&out.state.u1, &out.state.u2}) {
    for (double& x : u->values()) x = std::max(x, 0.0);
    u->apply_dirichlet();
  }
  out.state = project_joint_mass(out.state);
  return out;
}

FlowStepResult flow_step(const PhysParams& p, const CondensatePair& s, double dt,
                         double backtrack, double dt_min) {
  if (!(dt > 0.0) || !(backtrack > 0.0 && backtrack < 1.0))
    throw std::invalid_argument("flow_step: need dt > 0 and backtrack in (0, 1)");
  GradientFlow flow(p, s.grid());
  const double e0 = flow.energy(s);
  FlowStepResult out;
  while (dt >= dt_min) {
    GradientFlow::Step st = flow.step(s, dt);
    const double e1 = flow.energy(st.state);
    if (e1 <= e0) {
      out.state = std::move(st.state);
      out.energy = e1;
      out.dt = st.dt;
      return out;
    }
    dt *= backtrack;
    ++out.backtracks;
  }
  throw std::runtime_error("flow_step: step size underflow");
}

double GradientFlow::kkt(const CondensatePair& s) const {
  const auto [r1, r2] = gp_residual(p_, v1_, v2_, s, multiplier(p_, parts(s)));
  return std::hypot(l2_norm(r1), l2_norm(r2));
}

// ---------------------------------------------------------------------------

namespace {

void clamp_and_fix(CondensatePair& s) {
  for (ScalarField2D* u : {&s.u1, &s.u2}) {
    for (double& x : u->values()) x = std::max(x, 0.0);
    u->apply_dirichlet();
  }
}

ScalarField2D gaussian(const Grid2D& g, double width, Point c) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian init: width must be positive");
  return ScalarField2D::from_function(g, [&](Point x) {
    const double r = norm(x - c) / width;
    return std::exp(-0.5 * r * r);
  });
}

void scale_to_mass(ScalarField2D& u, double mass) {
  const double m = integrate_product(u, u);
  if (m > 0.0) u *= std::sqrt(mass / m);
}

ScalarField2D resample(const ScalarField2D& src, const Grid2D& dst, double dilation) {
  const Grid2D& g = src.grid();
  // Same node count and matching rescaled extent: the nodes map onto each
  // other exactly, so copy instead of interpolating.
  if (g.points() == dst.points() && g.stencil() == dst.stencil() &&
      std::abs(dst.half_extent() * dilation - g.half_extent()) <= 1e-12 * g.half_extent()) {
    ScalarField2D out(dst, std::vector<double>(src.values().begin(), src.values().end()));
    out *= dilation;
    return out;
  }
  return ScalarField2D::from_function(
      dst, [&](Point x) { return dilation * interpolate(src, dilation * x); });
}

}  // namespace

CondensatePair initial_state(const PhysParams& p, const MinimizerConfig& cfg) {
  (void)p;
  const Grid2D& g = cfg.grid;
  CondensatePair s{ScalarField2D(g), ScalarField2D(g)};
  if (const auto* gi = std::get_if<GaussianInit>(&cfg.init)) {
    if (!(gi->mass_fraction2 >= 0.0 && gi->mass_fraction2 <= 1.0))
      throw std::invalid_argument("gaussian init: mass_fraction2 must be in [0, 1]");
    s.u1 = gaussian(g, gi->width, gi->center1);
    s.u2 = gaussian(g, gi->width, gi->center2);
    s.u1.apply_dirichlet();
    s.u2.apply_dirichlet();
    scale_to_mass(s.u1, 1.0 - gi->mass_fraction2);
    scale_to_mass(s.u2, gi->mass_fraction2);
    if (gi->mass_fraction2 == 1.0) s.u1 *= 0.0;
    if (gi->mass_fraction2 == 0.0) s.u2 *= 0.0;
  } else if (const auto* ti = std::get_if<TrialInit>(&cfg.init)) {
    s = trial_pair(ti->tc, p.a, p.b, p.beta, ti->tau, g);
    if (integrate_product(s.u2, s.u2) == 0.0 && ti->seed_fraction2 > 0.0) {
      s.u2 = s.u1;
      scale_to_mass(s.u1, 1.0 - ti->seed_fraction2);
      scale_to_mass(s.u2, ti->seed_fraction2);
    }
  } else {
    const auto& ws = std::get<WarmStart>(cfg.init);
    if (!(ws.dilation > 0.0)) throw std::invalid_argument("warm start: dilation must be positive");
    s.u1 = resample(ws.state.u1, g, ws.dilation);
    s.u2 = resample(ws.state.u2, g, ws.dilation);
    const double m2 = integrate_product(s.u2, s.u2) / joint_mass(s);
    if (m2 < semi_trivial_threshold && ws.reseed_fraction2 > 0.0) {
      s.u2 = s.u1;
      scale_to_mass(s.u1, 1.0 - ws.reseed_fraction2);
      scale_to_mass(s.u2, ws.reseed_fraction2);
    }
  }
  clamp_and_fix(s);
  return project_joint_mass(s);
}

// ---------------------------------------------------------------------------

namespace {

// Anderson mixing on the fixed-point map of the flow step. Columns are
// differences of successive residuals f = G(x) - x and map values G(x).
class Anderson {
 public:
  explicit Anderson(int depth) : depth_(depth) {}

  void clear() {
    df_.clear();
    dg_.clear();
    have_prev_ = false;
  }

  /// Record (f, g) and return the mixed iterate, or an empty vector when no
  /// history is available.
  std::vector<double> mix(const std::vector<double>& f, const std::vector<double>& g) {
    if (depth_ <= 0) return {};
    if (have_prev_) {
      std::vector<double> dfk(f.size()), dgk(g.size());
      for (std::size_t k = 0; k < f.size(); ++k) {
        dfk[k] = f[k] - prev_f_[k];
        dgk[k] = g[k] - prev_g_[k];
      }
      df_.push_back(std::move(dfk));
      dg_.push_back(std::move(dgk));
      if (static_cast<int>(df_.size()) > depth_) {
        df_.erase(df_.begin());
        dg_.erase(dg_.begin());
      }
    }
    prev_f_ = f;
    prev_g_ = g;
    have_prev_ = true;
    if (df_.empty()) return {};

    // Least squares min |f - DF gamma| by modified Gram-Schmidt.
    const std::size_t m = df_.size();
    std::vector<std::vector<double>> q = df_;
    std::vector<double> r(m * m, 0.0);
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < m; ++j) {
      const double col_norm = std::sqrt(dot(q[j], q[j]));
      for (std::size_t i : kept) {
        const double rij = dot(q[i], q[j]);
        r[i * m + j] = rij;
        axpy(-rij, q[i], q[j]);
      }
      const double rjj = std::sqrt(dot(q[j], q[j]));
      if (!(rjj > 1e-10 * col_norm)) continue;
      r[j * m + j] = rjj;
      for (double& v : q[j]) v /= rjj;
      kept.push_back(j);
    }
    if (kept.empty()) return {};
    std::vector<double> gamma(m, 0.0);
    for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
      const std::size_t j = *it;
      double s = dot(q[j], f);
      for (std::size_t i : kept)
        if (i > j) s -= r[j * m + i] * gamma[i];
      gamma[j] = s / r[j * m + j];
    }
    std::vector<double> x = g;
    for (std::size_t j : kept) axpy(-gamma[j], dg_[j], x);
    return x;
  }

 private:
  static double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
  }
  static void axpy(double t, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t k = 0; k < x.size(); ++k) y[k] += t * x[k];
  }

  int depth_;
  std::vector<std::vector<double>> df_;
  std::vector<std::vector<double>> dg_;
  std::vector<double> prev_f_;
  std::vector<double> prev_g_;
  bool have_prev_ = false;
};

std::vector<double> flatten(const CondensatePair& s) {
  std::vector<double> v(s.u1.values().begin(), s.u1.values().end());
  v.insert(v.end(), s.u2.values().begin(), s.u2.values().end());
  return v;
}

CondensatePair unflatten(const std::vector<double>& v, const Grid2D& g) {
  const auto n = static_cast<std::ptrdiff_t>(g.size());
  return {ScalarField2D(g, std::vector<double>(v.begin(), v.begin() + n)),
          ScalarField2D(g, std::vector<double>(v.begin() + n, v.end()))};
}

void validate(const MinimizerConfig& cfg) {
  if (!(cfg.dt0 > 0.0) || !(cfg.dt_max >= cfg.dt0) || !(cfg.grow >= 1.0))
    throw std::invalid_argument("minimizer: need 0 < dt0 <= dt_max and grow >= 1");
  if (!(cfg.backtrack > 0.0 && cfg.backtrack < 1.0))
    throw std::invalid_argument("minimizer: backtrack must be in (0, 1)");
  if (!(cfg.tol_grad > 0.0) || !(cfg.tol_e > 0.0) || !(cfg.linear_tol > 0.0))
    throw std::invalid_argument("minimizer: tolerances must be positive");
  if (cfg.max_iters < 0 || cfg.stall_window < 1 || cfg.anderson_depth < 0)
    throw std::invalid_argument("minimizer: bad iteration limits");
}

}  // namespace

MinimizerResult minimize(const PhysParams& p, const MinimizerConfig& cfg) {
  validate(cfg);
  GradientFlow flow(p, cfg.grid, cfg.linear_tol, cfg.linear_max_iter);
  Anderson anderson(cfg.anderson_depth);

  MinimizerResult res;
  res.advisory = !minimizer_exists(townes().a_star, p.a, p.b, p.beta);
  CondensatePair x = initial_state(p, cfg);
  double e = flow.energy(x);
  std::vector<double> trace{e};
  double dt = cfg.dt0;
  double dt_ceiling = cfg.dt_max;
  res.status = Termination::max_iters;

  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    if (flow.kkt(x) < cfg.tol_grad) {
      res.status = Termination::converged;
      break;
    }
    GradientFlow::Step st = flow.step(x, dt);
    const double eg = flow.energy(st.state);
    if (!(eg <= e)) {
      ++res.rejected_steps;
      dt *= cfg.backtrack;
      dt_ceiling = dt;
      anderson.clear();
      if (dt < cfg.dt_min) {
        res.status = Termination::stalled;
        break;
      }
      continue;
    }

    const std::vector<double> xv = flatten(x);
    std::vector<double> gv = flatten(st.state);
    std::vector<double> fv(gv.size());
    for (std::size_t k = 0; k < gv.size(); ++k) fv[k] = gv[k] - xv[k];

    CondensatePair next = std::move(st.state);
    double e_next = eg;
    std::vector<double> mixed = anderson.mix(fv, gv);
    if (!mixed.empty()) {
      CondensatePair cand = unflatten(mixed, cfg.grid);
      clamp_and_fix(cand);
      const double m = joint_mass(cand);
      if (m > 0.0 && std::isfinite(m)) {
        cand = project_joint_mass(cand);
        const double ec = flow.energy(cand);
        if (ec <= e_next) {
          next = std::move(cand);
          e_next = ec;
        }
      }
    }
    x = std::move(next);
    e = e_next;
    trace.push_back(e);

    const double dt_new = std::min(dt * cfg.grow, dt_ceiling);
    if (dt_new != dt) anderson.clear();
    dt = dt_new;

    const std::size_t w = static_cast<std::size_t>(cfg.stall_window);
    if (trace.size() > w &&
        trace[trace.size() - 1 - w] - e <= cfg.tol_e * std::max(1.0, std::abs(e))) {
      res.status = Termination::stalled;
      ++it;
      break;
    }
  }

  const EnergyParts parts = flow.parts(x);
  res.energy = parts.total;
  res.mu = multiplier(p, parts);
  res.kkt = flow.kkt(x);
  if (res.status == Termination::max_iters && res.kkt < cfg.tol_grad)
    res.status = Termination::converged;
  res.iters = it;
  res.semi_trivial = integrate_product(x.u2, x.u2) < semi_trivial_threshold;
  res.peak1 = peak_location(x.u1);
  res.peak2 = x.u2.max_value() > 0.0 ? peak_location(x.u2)
                                     : Point{std::nan(""), std::nan("")};
  if (cfg.record_history) res.energy_history = std::move(trace);
  res.state = std::move(x);
  return res;
}

// ---------------------------------------------------------------------------

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  // splitmix64 finaliser over a combined key.
  std::uint64_t z = seed ^ (stream * 0x9E3779B97F4A7C15ULL) ^ (counter * 0xD1B54A32D192ED03ULL);
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double pair_distance(const CondensatePair& x, const CondensatePair& y) {
  return (x.u1 - y.u1).max_abs() + l2_norm(x.u2 - y.u2);
}

ProbeResult multistart_probe(const PhysParams& p, const MinimizerConfig& cfg,
                             int n_starts, std::uint64_t seed, int threads) {
  if (n_starts < 2) throw std::invalid_argument("multistart_probe: need n_starts >= 2");
  double base = 1.0;
  if (const auto* gi = std::get_if<GaussianInit>(&cfg.init)) base = gi->width;

  ProbeResult out;
  out.runs.resize(static_cast<std::size_t>(n_starts));
  auto run = [&](int i) {
    const auto idx = static_cast<std::uint64_t>(i);
    auto u = [&](std::uint64_t c) { return counter_uniform(seed, idx, c); };
    GaussianInit gi;
    gi.width = base * (0.6 + 0.8 * u(0));
    gi.center1 = {0.5 * base * (u(1) - 0.5), 0.5 * base * (u(2) - 0.5)};
    gi.center2 = {0.5 * base * (u(3) - 0.5), 0.5 * base * (u(4) - 0.5)};
    gi.mass_fraction2 = 0.2 + 0.6 * u(5);
    MinimizerConfig c = cfg;
    c.init = gi;
    out.runs[static_cast<std::size_t>(i)] = minimize(p, c);
  };

  const int workers = std::max(1, std::min(threads, n_starts));
  if (workers == 1) {
    for (int i = 0; i < n_starts; ++i) run(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int i = next++; i < n_starts; i = next++) run(i);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  for (std::size_t i = 0; i < out.runs.size(); ++i)
    for (std::size_t j = i + 1; j < out.runs.size(); ++j)
      out.max_pairwise_distance =
          std::max(out.max_pairwise_distance,
                   pair_distance(out.runs[i].state, out.runs[j].state));
  return out;
}

// ---------------------------------------------------------------------------

void write_checkpoint(std::ostream& os, const Checkpoint& c) {
  const Grid2D& g = c.state.grid();
  char line[128];
  os << checkpoint_header << '\n';
  os << "hash " << (c.config_hash.empty() ? "-" : c.config_hash) << '\n';
  std::snprintf(line, sizeof line, "grid %.17g %d %d\n", g.half_extent(), g.points(),
                static_cast<int>(g.stencil()));
  os << line;
  std::snprintf(line, sizeof line, "params %.17g %.17g %.17g %.17g %.17g\n", c.a, c.b,
                c.beta, c.mu, c.energy);
  os << line;
  for (const ScalarField2D* u : {&c.state.u1, &c.state.u2}) {
    os << (u == &c.state.u1 ? "u1\n" : "u2\n");
    for (double v : u->values()) {
      std::snprintf(line, sizeof line, "%.17g\n", v);
      os << line;
    }
  }
}

Checkpoint read_checkpoint(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header != checkpoint_header)
    throw std::runtime_error("checkpoint: missing '" + std::string(checkpoint_header) +
                             "' header");
  std::string tag;
  std::string hash;
  if (!(is >> tag >> hash) || tag != "hash")
    throw std::runtime_error("checkpoint: malformed hash line");
  double L = 0.0;
  int n = 0;
  int order = 0;
  if (!(is >> tag >> L >> n >> order) || tag != "grid")
    throw std::runtime_error("checkpoint: malformed grid line");
  Checkpoint c{CondensatePair{ScalarField2D(Grid2D(L, n, stencil_from_order(order))),
                              ScalarField2D(Grid2D(L, n, stencil_from_order(order)))}};
  if (!(is >> tag >> c.a >> c.b >> c.beta >> c.mu >> c.energy) || tag != "params")
    throw std::runtime_error("checkpoint: malformed params line");
  c.config_hash = hash;
  for (const char* name : {"u1", "u2"}) {
    ScalarField2D& u = std::string(name) == "u1" ? c.state.u1 : c.state.u2;
    if (!(is >> tag) || tag != name)
      throw std::runtime_error(std::string("checkpoint: expected ") + name);
    for (double& v : u.values())
      if (!(is >> v)) throw std::runtime_error("checkpoint: truncated field data");
  }
  return c;
}

}  // namespace gpduo
