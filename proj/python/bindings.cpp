#include "sgcalc/bmo.hpp"
#include "sgcalc/calculus.hpp"
#include "sgcalc/error.hpp"
#include "sgcalc/geometry.hpp"
#include "sgcalc/paraproduct.hpp"
#include "sgcalc/runner.hpp"
#include "sgcalc/t1.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace sgcalc;

namespace {

// pybind11 holders cannot point to const; spaces are never mutated from Python.
using SpaceHolder = std::shared_ptr<Space>;
SpaceHolder hold(SpacePtr s) { return std::const_pointer_cast<Space>(std::move(s)); }

// A space together with its generator, calculus and default scale grid.
struct Model {
  SpacePtr space;
  GeneratorPtr gen;
  Calculus calc;
  ScaleGrid grid;
  explicit Model(SpacePtr s)
      : space(std::move(s)), gen(assemble_generator(space)), calc(gen), grid(ScaleGrid::for_generator(*gen)) {}
};

SpectralFunction named_function(const std::string& name, int k) {
  if (name == "heat") return fn::exp_neg();
  if (name == "derivative") return fn::semigroup_derivative(k);
  if (name == "psi") return fn::psi(k);
  if (name == "resolvent") return fn::resolvent_power(k);
  throw InvalidArgument("unknown function '" + name + "' (heat, derivative, psi, resolvent)");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Semigroup calculus on weighted graphs";

  py::register_exception<Error>(m, "SgcalcError", PyExc_ValueError);

  py::class_<Space, SpaceHolder>(m, "Space")
      .def_property_readonly("size", &Space::size)
      .def_property_readonly("diameter", &Space::diameter)
      .def_property_readonly("measure", [](const Space& s) { return Field(s.measure()); })
      .def_property_readonly("family", &Space::family)
      .def("distance", [](const Space& s, Vertex x, Vertex y) { return s.distance(x, y); })
      .def("ball_mass", &Space::ball_mass, py::arg("x"), py::arg("r"));

  m.def("path", [](std::size_t n) { return hold(path_graph(n)); }, py::arg("n"));
  m.def("cycle", [](std::size_t n) { return hold(cycle_graph(n)); }, py::arg("n"));
  m.def("grid2d", [](std::size_t nx, std::size_t ny) { return hold(grid2d(nx, ny)); }, py::arg("nx"), py::arg("ny"));
  m.def("read_edge_list", [](const std::string& p) { return hold(read_edge_list(p)); }, py::arg("path"));

  m.def(
      "doubling",
      [](const Space& s) {
        const GeometryReport r = measure_doubling(s, positive_radii(s));
        py::dict d;
        d["C0"] = r.C0;
        d["d_hom"] = r.d_hom;
        d["c_comp"] = r.c_comp;
        d["N_comp"] = r.N_comp;
        return d;
      },
      py::arg("space"));

  py::class_<Model>(m, "Model")
      .def(py::init([](SpaceHolder s) { return Model(std::move(s)); }), py::arg("space"))
      .def_property_readonly("space", [](const Model& md) { return hold(md.space); })
      .def_property_readonly("eigenvalues", [](const Model& md) { return Field(md.gen->eigensystem().values); })
      .def(
          "apply",
          [](const Model& md, const std::string& name, double t, const Field& f, int k, const std::string& path) {
            const ActionPath p = path == "dense"       ? ActionPath::Dense
                                 : path == "chebyshev" ? ActionPath::Chebyshev
                                                       : ActionPath::Auto;
            return md.calc.apply(named_function(name, k), t, f, p);
          },
          py::arg("function"), py::arg("t"), py::arg("f"), py::arg("k") = 1, py::arg("path") = "auto")
      .def("bmo_norm", [](const Model& md, const Field& f) { return bmo_l_norm(md.calc, f, md.grid).norm; },
           py::arg("f"))
      .def(
          "carleson_norm",
          [](const Model& md, const Field& f, int k) { return carleson_norm(md.calc, f, k, md.grid).norm; },
          py::arg("f"), py::arg("k") = 1)
      .def(
          "reproducing_residual",
          [](const Model& md, const Field& f) { return reproducing_residual(md.calc, f, md.grid); }, py::arg("f"))
      .def(
          "pi1",
          [](const Model& md, const Field& h, const Field& f, int N) {
            return paraproduct_pi1(md.calc, CalculusPair::with_order(N), h, f, md.grid);
          },
          py::arg("h"), py::arg("f"), py::arg("N") = 2)
      .def(
          "l2_norm",
          [](const Model& md, const Eigen::MatrixXd& T) {
            const auto op = OperatorUnderTest::from_matrix(T, md.space->measure(), "matrix");
            return estimate_l2_norm(op, md.space->measure()).value;
          },
          py::arg("T"));

  m.def(
      "run",
      [](const std::string& command, const std::optional<std::filesystem::path>& config,
         const std::filesystem::path& out, std::optional<std::uint64_t> seed, std::vector<std::size_t> levels) {
        CliRequest req;
        req.command = command;
        req.config = config;
        req.out = out;
        req.seed = seed;
        req.levels = std::move(levels);
        std::ostringstream log, err;
        const int code = run_cli(req, log, err);
        return py::make_tuple(code, err.str());
      },
      py::arg("command"), py::arg("config") = py::none(), py::arg("out") = "sgcalc-out",
      py::arg("seed") = py::none(), py::arg("levels") = std::vector<std::size_t>{},
      "Runs a CLI subcommand; returns (exit code, diagnostics).");
}
