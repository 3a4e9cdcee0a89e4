#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gpduo/cli.hpp"

using namespace gpduo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("gpduo_test_cli_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& text) const {
    const fs::path p = path / name;
    std::ofstream(p) << text;
    return p.string();
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(Invocation inv) {
  std::ostringstream out, err;
  const int code = run(inv, out, err);
  return {code, out.str(), err.str()};
}

const char* small_sweep =
    "command = sweep\n"
    "sweep.schedule = regionIII-fixed\n"
    "sweep.m_first = 0\n"
    "sweep.m_last = 1\n"
    "grid.points = 65\n"
    "solver.tol_grad = 1e-6\n";

}  // namespace

TEST_CASE("townes prints the constants") {
  TempDir d("townes");
  Invocation inv{.command = "townes", .inputs = {d.file("t.cfg", "townes.tol = 1e-10\n")}};
  const Outcome o = call(inv);
  CHECK(o.code == exit_ok);
  CHECK(o.out.find("11.7008") != std::string::npos);
  CHECK(o.out.find("2.2062") != std::string::npos);
}

TEST_CASE("config failures exit with 2 and name the file") {
  TempDir d("badcfg");
  const std::string path = d.file("bad.cfg", "params.a = 1\nsolver.tolerance = 1\n");
  const Outcome o = call({.command = "solve", .inputs = {path}});
  CHECK(o.code == exit_config);
  CHECK(o.err.find("line 2") != std::string::npos);
  CHECK(o.err.find("\"error\":\"config\"") != std::string::npos);

  const std::string range = d.file("range.cfg", "grid.points = 4\n");
  const Outcome r = call({.command = "solve", .inputs = {range}});
  CHECK(r.code == exit_config);
  CHECK(r.err.find("range.cfg") != std::string::npos);

  CHECK(call({.command = "solve", .inputs = {path}, .threads = 0}).code == exit_config);
  CHECK(call({.command = "solve", .inputs = {(d.path / "missing.cfg").string()}}).code == exit_io);
}

TEST_CASE("solve writes state, csv and json; advisory is stamped") {
  TempDir d("solve");
  const std::string cfg = d.file("s.cfg",
                                 "params.a = 11.0\nparams.b = 5.85\nparams.beta = 5.85\n"
                                 "grid.half_extent = 6\ngrid.points = 65\ninit.kind = trial\n"
                                 "solver.tol_grad = 1e-6\noutput.prefix = s\n");
  const Outcome o = call({.command = "solve", .inputs = {cfg}, .out_dir = d.path.string()});
  CHECK(o.code == exit_ok);
  CHECK(fs::exists(d.path / "s_state.txt"));
  CHECK(fs::exists(d.path / "s.json"));
  const std::string csv = slurp(d.path / "s.csv");
  CHECK(csv.find("# config_hash:") != std::string::npos);
  CHECK(csv.find("NON-EXISTENCE-REGION") == std::string::npos);

  const std::string adv = d.file("adv.cfg",
                                 "params.a = 12.5\nparams.b = 5.85\nparams.beta = 5.85\n"
                                 "grid.half_extent = 6\ngrid.points = 65\nsolver.max_iters = 30\n"
                                 "output.prefix = adv\n");
  const Outcome a = call({.command = "solve", .inputs = {adv}, .out_dir = d.path.string()});
  CHECK(a.code == exit_ok);
  CHECK(a.err.find("advisory") != std::string::npos);
  CHECK(slurp(d.path / "adv.csv").find("NON-EXISTENCE-REGION") != std::string::npos);
}

TEST_CASE("report refuses bad inputs") {
  TempDir d("report");
  const std::string empty = d.file("empty.csv", "");
  const Outcome e = call({.command = "report", .inputs = {empty}, .out_dir = d.path.string()});
  CHECK(e.code == exit_io);
  CHECK(e.err.find("empty.csv") != std::string::npos);

  const std::string cfg = d.file("sw.cfg", small_sweep);
  const std::string other = d.file("sw2.cfg", std::string(small_sweep) + "seed = 9\n");
  REQUIRE(call({.command = "sweep", .inputs = {cfg}, .out_dir = (d.path / "a").string()}).code ==
          exit_ok);
  REQUIRE(call({.command = "sweep", .inputs = {other}, .out_dir = (d.path / "b").string()}).code ==
          exit_ok);
  const std::string csv_a = (d.path / "a" / "sweep.csv").string();
  const std::string csv_b = (d.path / "b" / "sweep.csv").string();
  REQUIRE(fs::exists(csv_a));

  const Outcome mixed =
      call({.command = "report", .inputs = {csv_a, csv_b}, .out_dir = d.path.string()});
  CHECK(mixed.code == exit_config);
  CHECK(mixed.err.find("mixed config hashes") != std::string::npos);

  const Outcome few = call({.command = "report", .inputs = {csv_a}, .out_dir = d.path.string()});
  CHECK(few.code == exit_ok);
  CHECK(few.out.find("insufficient points for fits") != std::string::npos);
  const std::string dat = slurp(d.path / "energy_vs_gap.dat");
  CHECK(dat.rfind("# config_hash: ", 0) == 0);
  CHECK(fs::exists(d.path / "verdicts.txt"));

  // A header without a hash line.
  std::string text = slurp(csv_a);
  std::string stripped;
  std::istringstream lines(text);
  for (std::string l; std::getline(lines, l);)
    if (l.rfind("# config_hash", 0) != 0) stripped += l + "\n";
  const std::string nohash = d.file("nohash.csv", stripped);
  CHECK(call({.command = "report", .inputs = {nohash}, .out_dir = d.path.string()}).code ==
        exit_io);
}

TEST_CASE("sweep output does not depend on threads or output directory") {
  TempDir d("det");
  const std::string cfg = d.file("sw.cfg", small_sweep);
  REQUIRE(call({.command = "sweep", .inputs = {cfg}, .out_dir = (d.path / "1").string(), .threads = 1})
              .code == exit_ok);
  REQUIRE(call({.command = "sweep", .inputs = {cfg}, .out_dir = (d.path / "3").string(), .threads = 3})
              .code == exit_ok);
  CHECK(slurp(d.path / "1" / "sweep.csv") == slurp(d.path / "3" / "sweep.csv"));
}
