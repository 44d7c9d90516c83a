#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lifshitz/anderson.hpp"
#include "lifshitz/census.hpp"
#include "lifshitz/cli.hpp"
#include "lifshitz/dispersion.hpp"
#include "lifshitz/expansion.hpp"
#include "lifshitz/feynman_graph.hpp"
#include "lifshitz/lattice_green.hpp"
#include "lifshitz/partitions.hpp"

namespace py = pybind11;
using namespace lifshitz;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lifshitz-tail perturbation toolkit";

  py::class_<EnergyContext>(m, "EnergyContext")
      .def_readonly("lambda_", &EnergyContext::lambda)
      .def_readonly("energy", &EnergyContext::energy)
      .def_readonly("estar", &EnergyContext::estar)
      .def_readonly("sigma", &EnergyContext::sigma)
      .def_readonly("iterations", &EnergyContext::iterations)
      .def("fixed_point_residual", &EnergyContext::fixed_point_residual)
      .def("__repr__", [](const EnergyContext& c) {
        return "EnergyContext(E=" + std::to_string(c.energy) + ", E*=" + std::to_string(c.estar) + ")";
      });

  m.def("lattice_constant", &lattice_constant);
  m.def("energy_of_estar", &energy_of_estar, py::arg("estar"), py::arg("lam"));
  m.def("solve_self_energy", [](double E, double lam) { return solve_self_energy(E, lam); }, py::arg("energy"),
        py::arg("lam"));
  m.def("context_from_estar", [](double estar, double lam) { return context_from_estar(estar, lam); },
        py::arg("estar"), py::arg("lam"));
  m.def("torus_integral_I1", [](double estar) { return torus_integral_I1(estar).value; }, py::arg("estar"));

  m.def("green_free", [](int x, int y, int z, double estar) { return green_free({x, y, z}, estar); },
        py::arg("x"), py::arg("y"), py::arg("z"), py::arg("estar"));
  m.def("axis_decay_rate", &axis_decay_rate, py::arg("estar"));

  m.def("gate_free_pairings", [](int n) {
    EnumerationOptions o;
    o.pairings_only = true;
    o.gate_free = true;
    std::vector<std::string> out;
    for (const auto& p : enumerate_partitions(IndexSet::upsilon(n, n), o)) out.push_back(p.to_string());
    return out;
  }, py::arg("n"));
  m.def("superficially_convergent", [](const std::string& partition, int n, double eps) {
    return classify_superficial_convergence(FeynmanGraph::from_partition(parse_partition(partition), n), eps)
        .superficially_convergent;
  }, py::arg("partition"), py::arg("n"), py::arg("eps") = 0.1);

  m.def("expansion_terms", [](int N) {
    std::vector<std::string> out;
    for (const auto& t : generate_terms(N).all()) out.push_back(t.render());
    return out;
  }, py::arg("N"));

  m.def("run_command", [](const std::string& command, const std::map<std::string, std::string>& overrides,
                          const std::string& out_dir) {
    cli::Config cfg = cli::resolve_config(command, {}, overrides);
    std::ostringstream log;
    cli::RunResult r = cli::run(cfg, cli::output_directory(out_dir), log);
    py::dict d;
    d["exit_code"] = r.exit_code;
    d["outputs"] = r.outputs;
    d["error"] = r.error;
    return d;
  }, py::arg("command"), py::arg("overrides") = std::map<std::string, std::string>{}, py::arg("out_dir") = "");

  py::register_exception<Error>(m, "LifshitzError", PyExc_RuntimeError);
  py::register_exception<cli::ConfigError>(m, "ConfigError", PyExc_ValueError);
}
