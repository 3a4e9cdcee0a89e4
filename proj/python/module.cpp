#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "gpduo/cli.hpp"
#include "gpduo/minimizer.hpp"
#include "gpduo/theory.hpp"
#include "gpduo/townes.hpp"

namespace py = pybind11;
using namespace gpduo;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Grid storage is row-major with x fastest, so rows of the array are y.
Array to_numpy(const ScalarField2D& f) {
  const int n = f.grid().points();
  Array out({n, n});
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

ScalarField2D from_numpy(const Array& a, const Grid2D& g) {
  if (a.ndim() != 2 || a.shape(0) != g.points() || a.shape(1) != g.points())
    throw std::invalid_argument("expected a square array matching the grid");
  return ScalarField2D(g, std::vector<double>(a.data(), a.data() + a.size()));
}

py::dict constants_dict(const TheoryConstants& tc) {
  py::dict d;
  d["a_star"] = tc.a_star;
  d["beta_star"] = tc.beta_star;
  d["H1"] = tc.H1_at_y0;
  d["H2"] = tc.H2_at_y0;
  d["y0"] = py::make_tuple(tc.y0.x, tc.y0.y);
  d["lambda"] = tc.lambda;
  d["lambda1"] = tc.lambda1;
  d["c_inf"] = tc.c_inf;
  d["region"] = to_string(tc.region);
  d["nondegenerate"] = tc.nondegenerate;
  return d;
}

py::dict minimize_py(double a, double b, double beta, double half_extent, int points, double p1,
                     double p2, double tol, double width, double mass_fraction2, int max_iters) {
  PhysParams p{a, b, beta, HomogeneousPotential::isotropic(p1), HomogeneousPotential::isotropic(p2)};
  MinimizerConfig cfg;
  cfg.grid = make_grid(half_extent, points);
  cfg.tol_grad = tol;
  cfg.max_iters = max_iters;
  GaussianInit g;
  g.width = width;
  g.mass_fraction2 = mass_fraction2;
  cfg.init = g;
  MinimizerResult r;
  {
    py::gil_scoped_release release;
    r = minimize(p, cfg);
  }
  py::dict d;
  d["energy"] = r.energy;
  d["mu"] = r.mu;
  d["kkt"] = r.kkt;
  d["iters"] = r.iters;
  d["status"] = to_string(r.status);
  d["semi_trivial"] = r.semi_trivial;
  d["advisory"] = r.advisory;
  d["peak1"] = py::make_tuple(r.peak1.x, r.peak1.y);
  d["peak2"] = py::make_tuple(r.peak2.x, r.peak2.y);
  d["u1"] = to_numpy(r.state.u1);
  d["u2"] = to_numpy(r.state.u2);
  return d;
}

py::tuple run_py(const std::string& command, const std::vector<std::string>& inputs,
                 std::optional<std::string> out_dir, std::optional<int> threads,
                 std::optional<std::uint64_t> seed, std::optional<double> tol) {
  Invocation inv;
  inv.command = command;
  inv.inputs = inputs;
  inv.out_dir = std::move(out_dir);
  inv.threads = threads;
  inv.seed = seed;
  inv.tol = tol;
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = run(inv, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_gpduo, m) {
  m.doc() = "Two-component attractive GP ground-state solver";

  m.def("townes_constants", [] {
    const TownesConstants& c = townes();
    py::dict d;
    d["a_star"] = c.a_star;
    d["grad_sq"] = c.grad_sq;
    d["l4_4"] = c.l4_4;
    d["w0"] = c.w0;
    d["c_inf"] = c.c_inf;
    return d;
  });
  m.def("townes_profile", [] {
    const RadialProfile& w = townes_profile();
    std::vector<double> r(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) r[i] = w.radius(i);
    const auto n = static_cast<py::ssize_t>(w.size());
    return py::make_tuple(py::array_t<double>(n, r.data()), py::array_t<double>(n, w.w.data()));
  }, "(r, w) samples of the ground state of Delta w - w + w^3 = 0");

  m.def("beta_star", [](double a, double b) { return beta_star(townes().a_star, a, b); },
        py::arg("a"), py::arg("b"));
  m.def("classify_region",
        [](double a, double b, double beta) {
          return std::string(to_string(classify_region(townes().a_star, a, b, beta)));
        },
        py::arg("a"), py::arg("b"), py::arg("beta"));
  m.def("theory_constants",
        [](double a, double b, double beta, double p1, double p2) {
          return constants_dict(theory_constants(a, b, beta, HomogeneousPotential::isotropic(p1),
                                                 HomogeneousPotential::isotropic(p2)));
        },
        py::arg("a"), py::arg("b"), py::arg("beta"), py::arg("p1") = 2.0, py::arg("p2") = 2.0);

  m.def("gn_quotient",
        [](const Array& u1, const Array& u2, double half_extent) {
          const Grid2D g = make_grid(half_extent, static_cast<int>(u1.shape(0)));
          return gn_quotient({from_numpy(u1, g), from_numpy(u2, g)});
        },
        py::arg("u1"), py::arg("u2"), py::arg("half_extent"));

  m.def("minimize", &minimize_py, py::arg("a"), py::arg("b"), py::arg("beta"), py::kw_only(),
        py::arg("half_extent") = 8.0, py::arg("points") = 129, py::arg("p1") = 2.0,
        py::arg("p2") = 2.0, py::arg("tol") = 1e-6, py::arg("width") = 1.0,
        py::arg("mass_fraction2") = 0.5, py::arg("max_iters") = 20000,
        "Ground state with isotropic traps |x|^p1, |x|^p2 from Gaussian starts.");

  m.def("run_command", &run_py, py::arg("command"), py::arg("inputs"), py::kw_only(),
        py::arg("out_dir") = py::none(), py::arg("threads") = py::none(),
        py::arg("seed") = py::none(), py::arg("tol") = py::none(),
        "Same as the gpduo tool; returns (exit_code, stdout, stderr).");
}
