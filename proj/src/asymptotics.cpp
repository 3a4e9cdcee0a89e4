#include "gpduo/asymptotics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace gpduo {

const char* to_string(Schedule s) {
  switch (s) {
    case Schedule::region_I:
      return "regionI";
    case Schedule::region_III_fixed:
      return "regionIII-fixed";
    case Schedule::region_III_approach:
      return "regionIII-approach";
  }
  return "?";
}

Schedule schedule_from_string(const std::string& s) {
  if (s == "regionI") return Schedule::region_I;
  if (s == "regionIII-fixed") return Schedule::region_III_fixed;
  if (s == "regionIII-approach") return Schedule::region_III_approach;
  throw std::invalid_argument("unknown schedule '" + s +
                              "' (expected regionI, regionIII-fixed or regionIII-approach)");
}

double not_applicable() { return std::numeric_limits<double>::quiet_NaN(); }
bool is_not_applicable(double v) { return std::isnan(v); }

namespace {

template <class Fn>
void run_indexed(int count, int threads, Fn&& fn) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next++; i < count; i = next++) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double predicted_energy(const Prediction& pr, Region r) {
  if (r == Region::III && pr.region_III_valid) return pr.e_III;
  if (pr.region_I_valid) return pr.e_I;
  return pr.e_III;
}

}  // namespace

std::vector<SweepPoint> sweep_points(const SweepSpec& spec) {
  const double as = townes().a_star;
  if (!(spec.b > 0.0 && spec.b < as)) throw std::invalid_argument("sweep: need 0 < b < a*");
  if (!(spec.delta0 > 0.0 && spec.delta0 < as))
    throw std::invalid_argument("sweep: need 0 < delta0 < a*");
  if (spec.m_first < 0 || spec.m_last < spec.m_first)
    throw std::invalid_argument("sweep: need 0 <= m_first <= m_last");

  std::vector<SweepPoint> pts;
  for (int m = spec.m_first; m <= spec.m_last; ++m) {
    SweepPoint pt;
    pt.m = m;
    pt.a = as - spec.delta0 * std::ldexp(1.0, -m);
    switch (spec.schedule) {
      case Schedule::region_I:
        if (!(spec.varsigma0 > 0.0 && spec.varsigma0 < 1.0))
          throw std::invalid_argument("sweep: regionI needs varsigma0 in (0, 1)");
        pt.beta = as + spec.varsigma0 * std::sqrt((as - pt.a) * (as - spec.b));
        break;
      case Schedule::region_III_fixed:
        if (!(spec.beta_bar > 0.0 && spec.beta_bar < as))
          throw std::invalid_argument("sweep: regionIII-fixed needs 0 < beta_bar < a*");
        pt.beta = spec.beta_bar;
        break;
      case Schedule::region_III_approach:
        if (!(spec.gamma > 0.0 && spec.gamma < 1.0))
          throw std::invalid_argument("sweep: regionIII-approach needs gamma in (0, 1)");
        pt.beta = as - std::pow(as - pt.a, spec.gamma);
        if (!(pt.beta > 0.0))
          throw std::invalid_argument("sweep: regionIII-approach gives beta <= 0");
        break;
    }
    const TheoryConstants tc = theory_constants(pt.a, spec.b, pt.beta, spec.V1, spec.V2);
    const Prediction pr = predict(tc, pt.a, spec.b, pt.beta);
    pt.eps_pred = spec.schedule == Schedule::region_I ? pr.eps_I : pr.eps_III;
    if (!(pt.eps_pred > 0.0) || !std::isfinite(pt.eps_pred))
      throw std::invalid_argument("sweep: no predicted scale at m = " + std::to_string(m));
    pts.push_back(pt);
  }
  return pts;
}

// ---------------------------------------------------------------------------

double profile_error(const ScalarField2D& u, double normalization, double eps,
                     Point peak) {
  const RadialProfile& w = townes_profile();
  constexpr double radius = 6.0;
  constexpr double spacing = 0.05;
  const int half = static_cast<int>(std::lround(radius / spacing));
  double worst = 0.0;
  for (int j = -half; j <= half; ++j) {
    for (int i = -half; i <= half; ++i) {
      const Point x{i * spacing, j * spacing};
      const double r = norm(x);
      if (r > radius) continue;
      const double v = normalization * eps * interpolate(u, eps * x + peak);
      worst = std::max(worst, std::abs(v - w(r)));
    }
  }
  return worst;
}

ObservableRow measure(const MinimizerResult& res, const PhysParams& p,
                      const TheoryConstants& tc, double eps_pred) {
  const CondensatePair& s = res.state;
  const Grid2D& g = s.grid();
  const double as = tc.a_star;
  const EnergyParts parts =
      energy_parts(p, sample_potential(p.V1, g), sample_potential(p.V2, g), s);
  const Prediction pr = predict(tc, p.a, p.b, p.beta);

  ObservableRow row;
  row.a = p.a;
  row.b = p.b;
  row.beta = p.beta;
  row.region = to_string(tc.region);
  row.eps_pred = eps_pred;
  row.e = res.energy;
  row.e_pred = predicted_energy(pr, tc.region);
  try {
    const double tau = optimal_trial_tau(tc, p.a, p.b, p.beta);
    row.e_trial = gp_energy(p, trial_pair(tc, p.a, p.b, p.beta, tau, g));
  } catch (const std::exception&) {
    row.e_trial = not_applicable();
  }
  row.mass2 = integrate_product(s.u2, s.u2);
  row.l4_1 = parts.quartic1;
  row.l4_2 = parts.quartic2;
  row.grad1 = gradient_energy(s.u1);
  row.eps_l4 = row.l4_1 > 0.0 ? 1.0 / std::sqrt(row.l4_1) : not_applicable();
  row.eps_kin = row.grad1 > 0.0 ? 1.0 / std::sqrt(row.grad1) : not_applicable();
  row.sigma = s.u2.max_value();
  row.mu = res.mu;
  row.peak1 = res.peak1;
  row.peak2 = res.peak2;
  const bool scaled = eps_pred > 0.0 && std::isfinite(eps_pred);
  row.delta = scaled ? 1.0 + res.mu * eps_pred * eps_pred : not_applicable();
  row.profile_err1 =
      scaled ? profile_error(s.u1, std::sqrt(as), eps_pred, res.peak1) : not_applicable();
  if (!scaled || res.semi_trivial || !(p.beta > as) || !(p.b < as)) {
    row.profile_err2 = not_applicable();
  } else {
    const double c = std::sqrt(as * (as - p.b) / (p.beta - as));
    row.profile_err2 = profile_error(s.u2, c, eps_pred, res.peak2);
  }
  row.semi_trivial = res.semi_trivial;
  row.kkt = res.kkt;
  row.iters = res.iters;
  row.status = to_string(res.status);
  row.half_extent = g.half_extent();
  row.points = g.points();
  return row;
}

SweepOutput run_sweep(const SweepSpec& spec, int threads, bool keep_states) {
  const std::vector<SweepPoint> pts = sweep_points(spec);
  const int count = static_cast<int>(pts.size());
  SweepOutput out;
  out.rows.resize(pts.size());
  std::vector<MinimizerResult> results(pts.size());

  auto config_for = [&](int i) {
    MinimizerConfig c = spec.solver;
    const SweepPoint& pt = pts[static_cast<std::size_t>(i)];
    c.grid = make_grid(spec.grid.extent_factor * pt.eps_pred, spec.grid.points,
                       spec.grid.stencil);
    GaussianInit gi;
    gi.width = pt.eps_pred;
    gi.mass_fraction2 = spec.seed_fraction2;
    c.init = gi;
    return c;
  };
  auto solve = [&](int i, MinimizerConfig c) {
    const SweepPoint& pt = pts[static_cast<std::size_t>(i)];
    const PhysParams p{pt.a, spec.b, pt.beta, spec.V1, spec.V2};
    const TheoryConstants tc = theory_constants(pt.a, spec.b, pt.beta, spec.V1, spec.V2);
    MinimizerResult r = minimize(p, c);
    ObservableRow row = measure(r, p, tc, pt.eps_pred);
    row.m = pt.m;
    out.rows[static_cast<std::size_t>(i)] = std::move(row);
    results[static_cast<std::size_t>(i)] = std::move(r);
    if (i == count - 1) out.tc = tc;
  };

  if (spec.warm_start) {
    for (int i = 0; i < count; ++i) {
      MinimizerConfig c = config_for(i);
      if (i > 0) {
        const MinimizerResult& prev = results[static_cast<std::size_t>(i - 1)];
        c.init = WarmStart{prev.state, prev.state.grid().half_extent() / c.grid.half_extent(),
                           spec.reseed_fraction2};
      }
      solve(i, std::move(c));
      // Only the previous state is needed to continue the ladder.
      if (!keep_states && i > 0) results[static_cast<std::size_t>(i - 1)] = MinimizerResult{};
    }
  } else {
    run_indexed(count, threads, [&](int i) { solve(i, config_for(i)); });
  }
  if (keep_states) out.results = std::move(results);
  return out;
}

// ---------------------------------------------------------------------------

FitResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit: x and y differ in length");
  if (x.size() < 4) throw std::invalid_argument("fit: need at least 4 points");
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0) || !std::isfinite(x[k]) || !std::isfinite(y[k]))
      throw std::invalid_argument("fit: data must be positive and finite");
    lx[k] = std::log(x[k]);
    ly[k] = std::log(y[k]);
    sx += lx[k];
    sy += ly[k];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
    syy += (ly[k] - my) * (ly[k] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit: x values are all equal");
  FitResult f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  f.n_points = static_cast<int>(x.size());
  return f;
}

FitResult fit_scaling(const std::vector<ObservableRow>& rows, const RowExpr& x_expr,
                      const RowExpr& y_expr) {
  std::vector<double> x, y;
  for (const ObservableRow& r : rows) {
    x.push_back(x_expr(r));
    y.push_back(y_expr(r));
  }
  return fit_loglog(x, y);
}

bool decreasing_trend(const std::vector<double>& v) {
  if (v.size() < 2) return false;
  for (double x : v)
    if (!std::isfinite(x)) return false;
  const std::size_t k = v.size();
  std::size_t drops = 0;
  for (std::size_t i = 1; i < k; ++i)
    if (v[i] < v[i - 1]) ++drops;
  return v.back() < v.front() && drops >= k / 2;  // k / 2 == ceil((k - 1) / 2)
}

RatioDiagnostics limit_ratio_checks(const std::vector<ObservableRow>& rows,
                                    const TheoryConstants& tc) {
  const double as = tc.a_star;
  RatioDiagnostics d;
  std::vector<double> e1, e2, e3, e4;
  for (const ObservableRow& r : rows) {
    const double gap_b = as - r.b;
    const double excess = r.beta - as;
    const double R1 = r.l4_2 / r.l4_1 * (gap_b / excess) * (gap_b / excess);
    const double R2 = r.mass2 * gap_b / excess;
    const double R3 = as * gap_b * tc.c_inf * tc.c_inf * r.sigma * r.sigma * r.eps_pred *
                      r.eps_pred / excess;
    const double R4 = (r.grad1 / r.l4_1) / (0.5 * as);
    d.R1.push_back(R1);
    d.R2.push_back(R2);
    d.R3.push_back(R3);
    d.R4.push_back(R4);
    e1.push_back(std::abs(R1 - 1.0));
    e2.push_back(std::abs(R2 - 1.0));
    e3.push_back(std::abs(R3 - 1.0));
    e4.push_back(std::abs(R4 - 1.0));
  }
  d.trend_R1 = decreasing_trend(e1);
  d.trend_R2 = decreasing_trend(e2);
  d.trend_R3 = decreasing_trend(e3);
  d.trend_R4 = decreasing_trend(e4);
  return d;
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

Verdict verdict(std::string check, bool ok, std::string detail) {
  return {std::move(check), ok ? "pass" : "fail", std::move(detail)};
}

// |delta| at the last row against the m = 3 row (or the first row).
Verdict multiplier_verdict(const std::vector<ObservableRow>& rows) {
  const ObservableRow* ref = &rows.front();
  for (const ObservableRow& r : rows)
    if (r.m == 3) ref = &r;
  const double last = std::abs(rows.back().delta);
  const double early = std::abs(ref->delta);
  const bool ok = last < 0.1 && (rows.size() == 1 || last < early);
  return verdict("multiplier law |1 + mu eps^2|", ok,
                 "last " + fmt("%.4g", last) + ", m=" + std::to_string(ref->m) + " " +
                     fmt("%.4g", early) + ", need < 0.1 and decreasing");
}

Verdict upper_bound_verdict(const std::vector<ObservableRow>& rows) {
  int bad = 0;
  int missing = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (const ObservableRow& r : rows) {
    if (!std::isfinite(r.e_trial)) {
      ++missing;
      continue;
    }
    worst = std::max(worst, r.e - r.e_trial);
    if (r.e > r.e_trial) ++bad;
  }
  return verdict("variational upper bound e <= e_trial", bad == 0 && missing == 0,
                 std::to_string(bad) + " violations, " + std::to_string(missing) +
                     " without trial, max(e - e_trial) " + fmt("%.3e", worst));
}

Verdict energy_slope_verdict(const std::vector<ObservableRow>& rows, const RowExpr& gap,
                             FitResult* fit_out) {
  const std::string name = "energy law slope 1/2 +- 0.05";
  if (rows.size() < 4) return {name, insufficient_points, std::to_string(rows.size()) + " rows"};
  try {
    const FitResult f = fit_scaling(rows, gap, [](const ObservableRow& r) { return r.e; });
    if (fit_out) *fit_out = f;
    return verdict(name, std::abs(f.slope - 0.5) <= 0.05,
                   "slope " + fmt("%.4f", f.slope) + ", r^2 " + fmt("%.6f", f.r_squared));
  } catch (const std::invalid_argument& e) {
    return verdict(name, false, e.what());
  }
}

Verdict trend_verdict(const std::string& name, const std::vector<double>& v, double final_max) {
  if (v.size() < 2) return {name, insufficient_points, std::to_string(v.size()) + " values"};
  const bool ok = decreasing_trend(v) && v.back() < final_max;
  return verdict(name, ok,
                 "first " + fmt("%.4g", v.front()) + ", last " + fmt("%.4g", v.back()) +
                     ", need decreasing and < " + fmt("%g", final_max));
}

}  // namespace

std::vector<Verdict> sweep_verdicts(const std::vector<ObservableRow>& rows, Schedule schedule,
                                    const TheoryConstants& tc) {
  std::vector<Verdict> out;
  if (rows.empty()) return out;
  const double as = tc.a_star;
  const ObservableRow& last = rows.back();

  int trivial_late = 0, nontrivial_late = 0, late = 0;
  for (const ObservableRow& r : rows) {
    if (r.m < 3) continue;
    ++late;
    (r.semi_trivial ? trivial_late : nontrivial_late)++;
  }

  if (schedule == Schedule::region_I) {
    out.push_back(verdict("no semi-trivial rows for m >= 3", late > 0 && trivial_late == 0,
                          std::to_string(trivial_late) + " of " + std::to_string(late) +
                              " rows semi-trivial"));
    out.push_back(energy_slope_verdict(
        rows, [as](const ObservableRow& r) { return region_I_gap(as, r.a, r.b, r.beta); },
        nullptr));
    const double target = std::sqrt(0.5 * as);
    const double ratio = last.eps_l4 / last.eps_pred;
    out.push_back(verdict("eps_l4/eps_pred -> sqrt(a*/2) within 0.1",
                          std::abs(ratio - target) < 0.1,
                          "last " + fmt("%.4f", ratio) + " vs " + fmt("%.4f", target)));
    const RatioDiagnostics d = limit_ratio_checks(rows, tc);
    const struct {
      const char* name;
      double value;
      double tol;
    } ratios[] = {{"R1", d.R1.back(), 0.1}, {"R2", d.R2.back(), 0.1}, {"R3", d.R3.back(), 0.15}};
    for (const auto& q : ratios)
      out.push_back(verdict(std::string("ratio ") + q.name + " within " + fmt("%g", q.tol) +
                                " of 1",
                            std::abs(q.value - 1.0) < q.tol, "last " + fmt("%.4f", q.value)));
    const double sep = norm(last.peak2 - last.peak1) / last.eps_pred;
    out.push_back(verdict("peak separation / eps_pred < 0.1", sep < 0.1,
                          "last " + fmt("%.3e", sep)));
    std::vector<double> err2;
    for (const ObservableRow& r : rows) err2.push_back(r.profile_err2);
    out.push_back(trend_verdict("profile_err2 decreasing, final < 0.1", err2, 0.1));
  } else {
    out.push_back(verdict("semi-trivial for m >= 3", late > 0 && nontrivial_late == 0,
                          std::to_string(trivial_late) + " of " + std::to_string(late) +
                              " rows semi-trivial"));
    std::vector<double> err1;
    for (const ObservableRow& r : rows) err1.push_back(r.profile_err1);
    out.push_back(trend_verdict("profile_err1 decreasing, final < 0.05", err1, 0.05));
    FitResult f;
    out.push_back(energy_slope_verdict(
        rows, [as](const ObservableRow& r) { return as - r.a; }, &f));
    const double target = 2.0 * tc.lambda1 * tc.lambda1 / as;
    const std::string name = "energy law prefactor within 15% of 2 lambda1^2/a*";
    if (f.n_points == 0) {
      out.push_back({name, insufficient_points, std::to_string(rows.size()) + " rows"});
    } else {
      const double pref = std::exp(f.intercept);
      out.push_back(verdict(name, std::abs(pref / target - 1.0) <= 0.15,
                            fmt("%.4f", pref) + " vs " + fmt("%.4f", target)));
    }
  }
  out.push_back(multiplier_verdict(rows));
  out.push_back(upper_bound_verdict(rows));
  return out;
}

// ---------------------------------------------------------------------------

const char* to_string(PhaseClass c) {
  switch (c) {
    case PhaseClass::semi_trivial:
      return "semi-trivial";
    case PhaseClass::two_peak:
      return "two-peak";
    case PhaseClass::unresolved:
      return "unresolved";
  }
  return "?";
}

std::vector<PhaseEntry> phase_scan(double b,
                                   const std::vector<std::pair<double, double>>& points,
                                   const HomogeneousPotential& V1,
                                   const HomogeneousPotential& V2, const GridPolicy& grid,
                                   const MinimizerConfig& solver, int threads) {
  std::vector<PhaseEntry> out(points.size());
  run_indexed(static_cast<int>(points.size()), threads, [&](int i) {
    const auto [a, beta] = points[static_cast<std::size_t>(i)];
    const TheoryConstants tc = theory_constants(a, b, beta, V1, V2);
    const Prediction pr = predict(tc, a, b, beta);
    double eps = pr.eps_for(tc.region);
    if (!(eps > 0.0) || !std::isfinite(eps)) eps = 1.0;

    MinimizerConfig c = solver;
    c.grid = make_grid(grid.extent_factor * eps, grid.points, grid.stencil);
    GaussianInit gi;
    gi.width = eps;
    c.init = gi;
    const MinimizerResult r = minimize(PhysParams{a, b, beta, V1, V2}, c);

    PhaseEntry& e = out[static_cast<std::size_t>(i)];
    e.a = a;
    e.beta = beta;
    e.region = tc.region;
    e.mass2 = integrate_product(r.state.u2, r.state.u2);
    e.sigma = r.state.u2.max_value();
    e.energy = r.energy;
    e.status = to_string(r.status);
    const Grid2D& g = r.state.grid();
    const auto [pi, pj] = r.state.u2.argmax();
    const bool interior_peak = pi > 0 && pj > 0 && pi < g.points() - 1 && pj < g.points() - 1;
    if (r.status != Termination::converged || r.advisory)
      e.observed = PhaseClass::unresolved;
    else if (r.semi_trivial)
      e.observed = PhaseClass::semi_trivial;
    else if (e.sigma > 0.0 && interior_peak)
      e.observed = PhaseClass::two_peak;
    else
      e.observed = PhaseClass::unresolved;
    if (tc.region == Region::I) e.disagrees = e.observed != PhaseClass::two_peak;
    if (tc.region == Region::III) e.disagrees = e.observed != PhaseClass::semi_trivial;
  });
  return out;
}

// ---------------------------------------------------------------------------

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

std::vector<std::string> csv_columns() {
  return {"m",        "a",         "b",         "beta",         "region",       "eps_pred",
          "e",        "e_pred",    "e_trial",   "mass2",        "l4_1",         "l4_2",
          "grad1",    "eps_l4",    "eps_kin",   "sigma",        "mu",           "delta",
          "peak1_x",  "peak1_y",   "peak2_x",   "peak2_y",      "profile_err1", "profile_err2",
          "semi_trivial", "kkt",   "iters",     "status",       "half_extent",  "points"};
}

void write_rows_csv(std::ostream& os, const std::vector<ObservableRow>& rows,
                    const Provenance& provenance) {
  for (const auto& [k, v] : provenance) os << "# " << k << ": " << v << '\n';
  const auto cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const ObservableRow& r : rows) {
    const std::vector<std::string> f = {
        std::to_string(r.m),          format_number(r.a),          format_number(r.b),
        format_number(r.beta),        r.region,                    format_number(r.eps_pred),
        format_number(r.e),           format_number(r.e_pred),     format_number(r.e_trial),
        format_number(r.mass2),       format_number(r.l4_1),       format_number(r.l4_2),
        format_number(r.grad1),       format_number(r.eps_l4),     format_number(r.eps_kin),
        format_number(r.sigma),       format_number(r.mu),         format_number(r.delta),
        format_number(r.peak1.x),     format_number(r.peak1.y),    format_number(r.peak2.x),
        format_number(r.peak2.y),     format_number(r.profile_err1),
        format_number(r.profile_err2), r.semi_trivial ? "1" : "0", format_number(r.kkt),
        std::to_string(r.iters),      r.status,                    format_number(r.half_extent),
        std::to_string(r.points)};
    for (std::size_t i = 0; i < f.size(); ++i) os << (i ? "," : "") << f[i];
    os << '\n';
  }
}

namespace {

double parse_number(const std::string& s, std::size_t line) {
  if (s == "NA") return not_applicable();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty())
    throw std::runtime_error("line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

int parse_int(const std::string& s, std::size_t line) {
  const double v = parse_number(s, line);
  if (v != std::floor(v))
    throw std::runtime_error("line " + std::to_string(line) + ": bad integer '" + s + "'");
  return static_cast<int>(v);
}

}  // namespace

CsvTable read_rows_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  const auto cols = csv_columns();
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = line.substr(line.find_first_not_of("# "));
      const auto colon = body.find(": ");
      if (colon == std::string::npos)
        t.provenance.emplace_back(body, "");
      else
        t.provenance.emplace_back(body.substr(0, colon), body.substr(colon + 2));
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (!have_header) {
      if (f != cols)
        throw std::runtime_error("line " + std::to_string(lineno) +
                                 ": header does not match the observable columns");
      have_header = true;
      continue;
    }
    if (f.size() != cols.size())
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected " +
                               std::to_string(cols.size()) + " fields, found " +
                               std::to_string(f.size()));
    ObservableRow r;
    std::size_t k = 0;
    r.m = parse_int(f[k++], lineno);
    r.a = parse_number(f[k++], lineno);
    r.b = parse_number(f[k++], lineno);
    r.beta = parse_number(f[k++], lineno);
    r.region = f[k++];
    r.eps_pred = parse_number(f[k++], lineno);
    r.e = parse_number(f[k++], lineno);
    r.e_pred = parse_number(f[k++], lineno);
    r.e_trial = parse_number(f[k++], lineno);
    r.mass2 = parse_number(f[k++], lineno);
    r.l4_1 = parse_number(f[k++], lineno);
    r.l4_2 = parse_number(f[k++], lineno);
    r.grad1 = parse_number(f[k++], lineno);
    r.eps_l4 = parse_number(f[k++], lineno);
    r.eps_kin = parse_number(f[k++], lineno);
    r.sigma = parse_number(f[k++], lineno);
    r.mu = parse_number(f[k++], lineno);
    r.delta = parse_number(f[k++], lineno);
    r.peak1.x = parse_number(f[k++], lineno);
    r.peak1.y = parse_number(f[k++], lineno);
    r.peak2.x = parse_number(f[k++], lineno);
    r.peak2.y = parse_number(f[k++], lineno);
    r.profile_err1 = parse_number(f[k++], lineno);
    r.profile_err2 = parse_number(f[k++], lineno);
    r.semi_trivial = parse_int(f[k++], lineno) != 0;
    r.kkt = parse_number(f[k++], lineno);
    r.iters = parse_int(f[k++], lineno);
    r.status = f[k++];
    r.half_extent = parse_number(f[k++], lineno);
    r.points = parse_int(f[k++], lineno);
    t.rows.push_back(std::move(r));
  }
  if (!have_header) throw std::runtime_error("no CSV header found (empty file?)");
  return t;
}

}  // namespace gpduo
