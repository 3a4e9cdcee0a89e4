#include "gpduo/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "gpduo/asymptotics.hpp"
#include "gpduo/config.hpp"
#include "gpduo/theory.hpp"
#include "gpduo/townes.hpp"

namespace gpduo {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* advisory_stamp = "NON-EXISTENCE-REGION";

// Exceptions thrown by the numerics (a solve that cannot proceed).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string num(double v) { return format_number(v); }

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError("cannot create output directory '" + dir + "'");
  return fs::path(dir);
}

// Writes the whole file or throws IoError naming it.
void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  os << content;
  os.close();
  if (!os) throw IoError("cannot write '" + path.string() + "'");
}

std::string config_path_of(const Invocation& inv) {
  if (!inv.config_path.empty()) {
    if (!inv.inputs.empty()) throw ConfigError("give the config either positionally or with --config");
    return inv.config_path;
  }
  if (inv.inputs.size() > 1) throw ConfigError("expected at most one config file");
  return inv.inputs.empty() ? "" : inv.inputs.front();
}

// Parses the config file and applies command-line overrides.
ConfigFile load_config(const Invocation& inv) {
  const std::string path = config_path_of(inv);
  ConfigFile cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      cfg = ConfigFile::parse(ss.str());
    } catch (const ConfigError& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
  if (inv.seed) cfg.set("seed", std::to_string(*inv.seed));
  if (inv.tol) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *inv.tol);
    cfg.set(inv.command == "townes" ? "townes.tol" : "solver.tol_grad", buf);
  }
  if (inv.threads) cfg.set("threads", std::to_string(*inv.threads));
  if (inv.out_dir) cfg.set("output.dir", *inv.out_dir);
  return cfg;
}

json theory_json(const TheoryConstants& tc) {
  return json{{"a_star", number(tc.a_star)},     {"w0", number(townes().w0)},
              {"beta_star", number(tc.beta_star)}, {"H1_at_y0", number(tc.H1_at_y0)},
              {"H2_at_y0", number(tc.H2_at_y0)},   {"y0", {number(tc.y0.x), number(tc.y0.y)}},
              {"lambda", number(tc.lambda)},       {"lambda1", number(tc.lambda1)},
              {"p1", number(tc.p1)},               {"p2", number(tc.p2)},
              {"c_inf", number(tc.c_inf)},         {"region", to_string(tc.region)},
              {"nondegenerate", tc.nondegenerate}};
}

Provenance theory_provenance(const TheoryConstants& tc) {
  return {{"a_star", num(tc.a_star)},
          {"w0", num(townes().w0)},
          {"lambda", num(tc.lambda)},
          {"lambda1", num(tc.lambda1)},
          {"c_inf", num(tc.c_inf)},
          {"H1", num(tc.H1_at_y0)},
          {"H2", num(tc.H2_at_y0)},
          {"y0", num(tc.y0.x) + " " + num(tc.y0.y)}};
}

// Constants for parameters theory_constants rejects (a or b above a*): only
// a* and the region label are meaningful.
TheoryConstants fallback_constants(const PhysParams& p) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  TheoryConstants tc;
  tc.a_star = townes().a_star;
  tc.beta_star = nan;
  tc.H1_at_y0 = tc.H2_at_y0 = nan;
  tc.y0 = {nan, nan};
  tc.lambda = tc.lambda1 = nan;
  tc.p1 = p.V1.degree();
  tc.p2 = p.V2.degree();
  tc.c_inf = townes().c_inf;
  tc.region = Region::outside;
  return tc;
}

std::string grid_text(const Grid2D& g) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "L=%.17g n=%d stencil=%d", g.half_extent(), g.points(),
                static_cast<int>(g.stencil()));
  return buf;
}

std::string policy_text(const GridPolicy& g) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "L=%.17g*eps n=%d stencil=%d", g.extent_factor, g.points,
                static_cast<int>(g.stencil));
  return buf;
}

// --- townes -----------------------------------------------------------------

int cmd_townes(const RunConfig& rc, bool write_files, std::ostream& out) {
  const RadialProfile w = solve_townes(rc.townes);
  const TownesConstants c = townes_constants(w);
  TownesOptions half = rc.townes;
  half.step *= 0.5;
  const TownesConstants ch = townes_constants(solve_townes(half));
  const double stability = std::abs(ch.a_star - c.a_star) / c.a_star;
  const double decay = decay_check(w);

  char line[160];
  std::snprintf(line, sizeof line, "a*                     %.12f\n", c.a_star);
  out << line;
  std::snprintf(line, sizeof line, "w(0)                   %.12f\n", c.w0);
  out << line;
  std::snprintf(line, sizeof line, "|a* - |grad w|^2|/a*   %.3e\n", c.gradient_identity_defect());
  out << line;
  std::snprintf(line, sizeof line, "|a* - |w|_4^4/2|/a*    %.3e\n", c.quartic_identity_defect());
  out << line;
  std::snprintf(line, sizeof line, "a* change, step/2      %.3e\n", stability);
  out << line;
  std::snprintf(line, sizeof line, "decay fit deviation    %.3e\n", decay);
  out << line;

  if (write_files) {
    const fs::path dir = prepare_dir(rc.out_dir);
    std::ostringstream prof;
    prof << "# config_hash: " << rc.hash << '\n';
    write_profile(prof, w);
    write_file(dir / (rc.prefix + "_profile.dat"), prof.str());
    const json j = {{"config_hash", rc.hash},
                    {"tol", rc.townes.tol},
                    {"step", rc.townes.step},
                    {"a_star", c.a_star},
                    {"w0", c.w0},
                    {"grad_sq", c.grad_sq},
                    {"l4_4", c.l4_4},
                    {"c_inf", c.c_inf},
                    {"gradient_identity_defect", c.gradient_identity_defect()},
                    {"quartic_identity_defect", c.quartic_identity_defect()},
                    {"a_star_half_step_change", stability},
                    {"decay_deviation", decay}};
    write_file(dir / (rc.prefix + ".json"), j.dump(2) + "\n");
  }
  return exit_ok;
}

// --- solve ------------------------------------------------------------------

int cmd_solve(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const PhysParams& p = rc.params;
  const double as = townes().a_star;
  TheoryConstants tc;
  try {
    tc = theory_constants(p.a, p.b, p.beta, p.V1, p.V2);
  } catch (const std::domain_error&) {
    tc = fallback_constants(p);
  }
  const bool exists = minimizer_exists(as, p.a, p.b, p.beta);
  double eps = std::numeric_limits<double>::quiet_NaN();
  if (exists && std::isfinite(tc.lambda)) eps = predict(tc, p.a, p.b, p.beta).eps_for(tc.region);
  if (!exists)
    err << json{{"warning", "parameters outside the existence region; running in advisory mode"},
                {"stamp", advisory_stamp}}
               .dump()
        << '\n';

  MinimizerConfig cfg = rc.solver;
  if (rc.init_kind == "trial") {
    if (!exists) throw ConfigError("init.kind = trial needs parameters inside the existence region");
    try {
      cfg.init = TrialInit{tc, optimal_trial_tau(tc, p.a, p.b, p.beta), rc.init_seed_fraction2};
    } catch (const std::domain_error& e) {
      throw ConfigError(std::string("init.kind = trial: ") + e.what());
    }
  } else {
    GaussianInit g;
    g.width = rc.init_width;
    g.mass_fraction2 = rc.init_mass_fraction2;
    cfg.init = g;
  }

  const MinimizerResult res = minimize(p, cfg);
  if (!res.state.u1.all_finite() || !res.state.u2.all_finite())
    throw NumericalError("solve produced non-finite values");
  ObservableRow row = measure(res, p, tc, eps);

  ProbeResult probe;
  if (rc.probe_starts >= 2) probe = multistart_probe(p, cfg, rc.probe_starts, rc.seed, rc.threads);

  const fs::path dir = prepare_dir(rc.out_dir);
  Checkpoint cp{res.state, p.a, p.b, p.beta, res.mu, res.energy, rc.hash};
  std::ostringstream state;
  write_checkpoint(state, cp);
  write_file(dir / (rc.prefix + "_state.txt"), state.str());

  Provenance prov = {{"config_hash", rc.hash}, {"command", "solve"}};
  if (res.advisory) prov.emplace_back("stamp", advisory_stamp);
  for (auto& kv : theory_provenance(tc)) prov.push_back(kv);
  prov.emplace_back("grid", grid_text(rc.grid));
  prov.emplace_back("V1", describe(p.V1));
  prov.emplace_back("V2", describe(p.V2));
  std::ostringstream csv;
  write_rows_csv(csv, {row}, prov);
  write_file(dir / (rc.prefix + ".csv"), csv.str());

  json j = {{"config_hash", rc.hash},
            {"command", "solve"},
            {"stamp", res.advisory ? json(advisory_stamp) : json(nullptr)},
            {"params", {{"a", p.a}, {"b", p.b}, {"beta", p.beta}}},
            {"V1", describe(p.V1)},
            {"V2", describe(p.V2)},
            {"grid", grid_text(rc.grid)},
            {"theory", theory_json(tc)},
            {"eps_pred", number(eps)},
            {"energy", res.energy},
            {"mu", res.mu},
            {"kkt", res.kkt},
            {"iters", res.iters},
            {"rejected_steps", res.rejected_steps},
            {"status", to_string(res.status)},
            {"semi_trivial", res.semi_trivial},
            {"mass2", row.mass2},
            {"e_trial", number(row.e_trial)},
            {"peak1", {res.peak1.x, res.peak1.y}},
            {"peak2", {number(res.peak2.x), number(res.peak2.y)}}};
  if (rc.probe_starts >= 2) {
    json runs = json::array();
    for (const MinimizerResult& r : probe.runs)
      runs.push_back({{"energy", r.energy}, {"kkt", r.kkt}, {"status", to_string(r.status)}});
    j["probe"] = {{"starts", rc.probe_starts},
                  {"seed", rc.seed},
                  {"max_pairwise_distance", probe.max_pairwise_distance},
                  {"runs", runs}};
  }
  write_file(dir / (rc.prefix + ".json"), j.dump(2) + "\n");

  char line[200];
  std::snprintf(line, sizeof line, "region %s  e = %.12f  mu = %.8f  kkt = %.2e  iters = %d  %s\n",
                to_string(tc.region), res.energy, res.mu, res.kkt, res.iters,
                to_string(res.status));
  out << line;
  std::snprintf(line, sizeof line, "mass2 = %.6e  semi_trivial = %s\n", row.mass2,
                res.semi_trivial ? "yes" : "no");
  out << line;
  if (rc.probe_starts >= 2) {
    std::snprintf(line, sizeof line, "multistart: %d starts, max pairwise distance %.3e\n",
                  rc.probe_starts, probe.max_pairwise_distance);
    out << line;
  }
  if (res.advisory) out << advisory_stamp << '\n';

  if (!res.converged() && !res.advisory) {
    err << json{{"error", "numerical"},
                {"exit", exit_numerical},
                {"message", std::string("solver stopped without converging (") +
                                to_string(res.status) + ")"}}
               .dump()
        << '\n';
    return exit_numerical;
  }
  return exit_ok;
}

// --- sweep ------------------------------------------------------------------

std::string row_gap_label(Schedule s) {
  return s == Schedule::region_I ? "(a*-a)(a*-b)-(beta-a*)^2" : "a*-a";
}

double row_gap(const ObservableRow& r, Schedule s, double as) {
  return s == Schedule::region_I ? region_I_gap(as, r.a, r.b, r.beta) : as - r.a;
}

json verdicts_json(const std::vector<Verdict>& vs) {
  json a = json::array();
  for (const Verdict& v : vs) a.push_back({{"check", v.check}, {"status", v.status}, {"detail", v.detail}});
  return a;
}

json fit_json(const std::vector<ObservableRow>& rows, const RowExpr& x, const RowExpr& y) {
  try {
    const FitResult f = fit_scaling(rows, x, y);
    return {{"slope", f.slope},
            {"intercept", f.intercept},
            {"prefactor", std::exp(f.intercept)},
            {"r_squared", f.r_squared},
            {"n_points", f.n_points}};
  } catch (const std::invalid_argument& e) {
    return {{"error", e.what()}};
  }
}

int cmd_sweep(const RunConfig& rc, std::ostream& out) {
  const SweepSpec& spec = rc.sweep;
  const SweepOutput so = run_sweep(spec, rc.threads);
  for (const ObservableRow& r : so.rows)
    if (!std::isfinite(r.e)) throw NumericalError("sweep row m=" + std::to_string(r.m) + " has non-finite energy");
  const TheoryConstants& tc = so.tc;
  const double as = tc.a_star;

  Provenance prov = {{"config_hash", rc.hash}, {"command", "sweep"},
                     {"schedule", to_string(spec.schedule)}};
  for (auto& kv : theory_provenance(tc)) prov.push_back(kv);
  prov.emplace_back("b", num(spec.b));
  prov.emplace_back("grid", policy_text(spec.grid));
  prov.emplace_back("V1", describe(spec.V1));
  prov.emplace_back("V2", describe(spec.V2));
  prov.emplace_back("seed", std::to_string(rc.seed));
  std::ostringstream csv;
  write_rows_csv(csv, so.rows, prov);
  const fs::path dir = prepare_dir(rc.out_dir);
  write_file(dir / (rc.prefix + ".csv"), csv.str());

  const Schedule s = spec.schedule;
  const std::vector<Verdict> vs = sweep_verdicts(so.rows, s, tc);
  json fits = json::object();
  fits["energy_vs_gap"] = fit_json(
      so.rows, [&](const ObservableRow& r) { return row_gap(r, s, as); },
      [](const ObservableRow& r) { return r.e; });
  fits["energy_vs_gap"]["x"] = row_gap_label(s);
  fits["eps_l4_vs_gap"] = fit_json(
      so.rows, [&](const ObservableRow& r) { return row_gap(r, s, as); },
      [](const ObservableRow& r) { return r.eps_l4; });
  fits["eps_l4_vs_gap"]["x"] = row_gap_label(s);
  json j = {{"config_hash", rc.hash},
            {"command", "sweep"},
            {"schedule", to_string(s)},
            {"rows", so.rows.size()},
            {"theory", theory_json(tc)},
            {"grid", policy_text(spec.grid)},
            {"fits", fits}};
  if (s == Schedule::region_I) {
    const RatioDiagnostics d = limit_ratio_checks(so.rows, tc);
    j["ratios"] = {{"R1", d.R1}, {"R2", d.R2}, {"R3", d.R3}, {"R4", d.R4},
                   {"trend_R1", d.trend_R1}, {"trend_R2", d.trend_R2},
                   {"trend_R3", d.trend_R3}, {"trend_R4", d.trend_R4}};
  }
  bool all = !vs.empty();
  for (const Verdict& v : vs) all = all && v.passed();
  j["verdicts"] = verdicts_json(vs);
  j["all_passed"] = all;
  write_file(dir / (rc.prefix + ".json"), j.dump(2) + "\n");

  char line[200];
  for (const ObservableRow& r : so.rows) {
    std::snprintf(line, sizeof line, "m=%d a=%.6f beta=%.6f e=%.10f mass2=%.3e kkt=%.1e %s\n",
                  r.m, r.a, r.beta, r.e, r.mass2, r.kkt, r.status.c_str());
    out << line;
  }
  for (const Verdict& v : vs) out << (v.passed() ? "PASS " : "FAIL ") << v.check << " (" << v.detail << ")\n";
  return exit_ok;
}

// --- phase ------------------------------------------------------------------

int cmd_phase(const RunConfig& rc, std::ostream& out) {
  const std::vector<PhaseEntry> entries =
      phase_scan(rc.phase_b, rc.phase_points, rc.params.V1, rc.params.V2, rc.sweep.grid,
                 rc.solver, rc.threads);
  std::ostringstream csv;
  csv << "# config_hash: " << rc.hash << '\n'
      << "# command: phase\n"
      << "# a_star: " << num(townes().a_star) << '\n'
      << "# b: " << num(rc.phase_b) << '\n'
      << "# grid: " << policy_text(rc.sweep.grid) << '\n'
      << "# V1: " << describe(rc.params.V1) << '\n'
      << "# V2: " << describe(rc.params.V2) << '\n'
      << "a,beta,region,observed,disagrees,mass2,sigma,energy,status\n";
  int disagreements = 0;
  for (const PhaseEntry& e : entries) {
    csv << num(e.a) << ',' << num(e.beta) << ',' << to_string(e.region) << ','
        << to_string(e.observed) << ',' << (e.disagrees ? 1 : 0) << ',' << num(e.mass2) << ','
        << num(e.sigma) << ',' << num(e.energy) << ',' << e.status << '\n';
    disagreements += e.disagrees ? 1 : 0;
  }
  const fs::path dir = prepare_dir(rc.out_dir);
  write_file(dir / (rc.prefix + ".csv"), csv.str());
  out << entries.size() << " points, " << disagreements << " disagree with the region label\n";
  return exit_ok;
}

// --- report -----------------------------------------------------------------

std::string provenance_value(const Provenance& p, const std::string& key) {
  for (const auto& [k, v] : p)
    if (k == key) return v;
  return "";
}

double provenance_number(const Provenance& p, const std::string& key, const std::string& file) {
  const std::string v = provenance_value(p, key);
  if (v == "NA") return std::numeric_limits<double>::quiet_NaN();
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    throw IoError(file + ": provenance entry '" + key + "' missing or not a number");
  }
}

std::string dat_file(const std::string& hash, const std::string& title, const std::string& xlabel,
                     const std::string& ylabel, const std::vector<double>& x,
                     const std::vector<double>& y) {
  std::ostringstream os;
  os << "# config_hash: " << hash << '\n' << "# " << title << '\n' << "# " << xlabel << ' ' << ylabel << '\n';
  for (std::size_t k = 0; k < x.size(); ++k) os << num(x[k]) << ' ' << num(y[k]) << '\n';
  return os.str();
}

int cmd_report(const Invocation& inv, std::ostream& out) {
  if (inv.inputs.empty()) throw ConfigError("report needs at least one CSV file");
  if (!inv.config_path.empty()) throw ConfigError("report takes CSV files, not --config");
  std::vector<ObservableRow> rows;
  std::string hash, schedule_name;
  Provenance prov;
  for (const std::string& path : inv.inputs) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    CsvTable t;
    try {
      t = read_rows_csv(in);
    } catch (const std::runtime_error& e) {
      throw IoError(path + ": " + e.what());
    }
    if (t.rows.empty()) throw IoError(path + ": no data rows");
    const std::string h = provenance_value(t.provenance, "config_hash");
    if (h.empty()) throw IoError(path + ": no config_hash in provenance");
    if (hash.empty()) {
      hash = h;
      prov = t.provenance;
      schedule_name = provenance_value(t.provenance, "schedule");
    } else if (h != hash) {
      throw ConfigError("mixed config hashes: " + hash + " and " + h + " (" + path + ")");
    }
    rows.insert(rows.end(), t.rows.begin(), t.rows.end());
  }
  if (schedule_name.empty()) throw IoError(inv.inputs.front() + ": not a sweep CSV (no schedule)");
  Schedule s;
  try {
    s = schedule_from_string(schedule_name);
  } catch (const std::invalid_argument& e) {
    throw IoError(inv.inputs.front() + ": " + e.what());
  }
  TheoryConstants tc;
  tc.a_star = provenance_number(prov, "a_star", inv.inputs.front());
  tc.lambda1 = provenance_number(prov, "lambda1", inv.inputs.front());
  tc.c_inf = provenance_number(prov, "c_inf", inv.inputs.front());
  const double as = tc.a_star;

  const fs::path dir = prepare_dir(inv.out_dir.value_or("gpduo_out"));
  std::vector<double> gap, e, da, R2, R3, delta, err1, err2;
  for (const ObservableRow& r : rows) {
    gap.push_back(row_gap(r, s, as));
    e.push_back(r.e);
    da.push_back(as - r.a);
    delta.push_back(r.delta);
    err1.push_back(r.profile_err1);
    err2.push_back(r.profile_err2);
  }
  write_file(dir / "energy_vs_gap.dat",
             dat_file(hash, "energy law", row_gap_label(s), "e", gap, e));
  if (s == Schedule::region_I) {
    const RatioDiagnostics d = limit_ratio_checks(rows, tc);
    R2 = d.R2;
    R3 = d.R3;
  }
  const std::string note = s == Schedule::region_I ? "" : " (defined for region I only)";
  write_file(dir / "ratio_R2.dat", dat_file(hash, "ratio R2" + note, "a*-a", "R2", R2.empty() ? R2 : da, R2));
  write_file(dir / "ratio_R3.dat", dat_file(hash, "ratio R3" + note, "a*-a", "R3", R3.empty() ? R3 : da, R3));
  write_file(dir / "delta.dat", dat_file(hash, "multiplier law", "a*-a", "1+mu*eps^2", da, delta));
  write_file(dir / "profile_err.dat", [&] {
    std::ostringstream os;
    os << "# config_hash: " << hash << "\n# rescaled profile errors\n# a*-a err1 err2\n";
    for (std::size_t k = 0; k < rows.size(); ++k)
      os << num(da[k]) << ' ' << num(err1[k]) << ' ' << num(err2[k]) << '\n';
    return os.str();
  }());

  const std::vector<Verdict> vs = sweep_verdicts(rows, s, tc);
  std::ostringstream table;
  table << "config_hash " << hash << "  schedule " << schedule_name << "  rows " << rows.size() << '\n';
  if (rows.size() < 4) table << insufficient_points << '\n';
  for (const Verdict& v : vs) {
    char line[96];
    std::snprintf(line, sizeof line, "%-52s %-6s ", v.check.c_str(),
                  v.passed() ? "PASS" : (v.status == "fail" ? "FAIL" : "-"));
    table << line << (v.status == insufficient_points ? std::string(insufficient_points) : v.detail)
          << '\n';
  }
  write_file(dir / "verdicts.txt", table.str());
  out << table.str();
  return exit_ok;
}

}  // namespace

int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
  auto fail = [&](const char* kind, int code, const std::string& msg) {
    err << json{{"error", kind}, {"exit", code}, {"message", msg}}.dump() << '\n';
    return code;
  };
  try {
    if (inv.command == "report") return cmd_report(inv, out);
    if (inv.threads && *inv.threads < 1) throw ConfigError("--threads must be >= 1");
    const ConfigFile cfg = load_config(inv);
    RunConfig rc;
    try {
      rc = make_run_config(inv.command, cfg);
    } catch (const ConfigError& e) {
      const std::string path = config_path_of(inv);
      throw ConfigError(path.empty() ? e.what() : path + ": " + e.what());
    }
    if (inv.command == "townes") return cmd_townes(rc, cfg.has("output.dir"), out);
    if (inv.command == "solve") return cmd_solve(rc, out, err);
    if (inv.command == "sweep") return cmd_sweep(rc, out);
    return cmd_phase(rc, out);
  } catch (const ConfigError& e) {
    return fail("config", exit_config, e.what());
  } catch (const IoError& e) {
    return fail("io", exit_io, e.what());
  } catch (const std::ios_base::failure& e) {
    return fail("io", exit_io, e.what());
  } catch (const std::invalid_argument& e) {
    return fail("config", exit_config, e.what());
  } catch (const std::exception& e) {
    return fail("numerical", exit_numerical, e.what());
  }
}

}  // namespace gpduo
