#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gridzones/case_io.hpp"
#include "gridzones/clustering.hpp"
#include "gridzones/errors.hpp"
#include "gridzones/opf.hpp"
#include "gridzones/pipeline.hpp"
#include "gridzones/ptdf.hpp"
#include "gridzones/scenarios.hpp"

namespace py = pybind11;
using namespace gridzones;

namespace {

ScenarioSet scenarios_for(const Network& net, int count, std::uint64_t seed) {
    return monte_carlo_scenarios(net, count, seed);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Electricity network zoning core";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);

    py::class_<Network>(m, "Network")
        .def_property_readonly("num_buses", &Network::num_buses)
        .def_property_readonly("num_branches", &Network::num_branches)
        .def_property_readonly("num_generators", [](const Network& n) { return n.generators.size(); })
        .def_property_readonly("total_demand", &Network::total_demand)
        .def("to_json", &network_to_json);

    m.def("parse_case", [](const std::string& text) { return parse_case_file(text); }, py::arg("text"));
    m.def("load_case", [](const std::string& path) { return load_case_file(path); }, py::arg("path"));
    m.def("incidence_matrix", &incidence_matrix, py::arg("network"));

    m.def("dc_opf_json", [](const Network& net, bool enforce_limits) { return dispatch_to_json(dc_opf(net, enforce_limits)); },
          py::arg("network"), py::arg("enforce_limits") = true);

    m.def("ptdf_matrix", [](const Network& net, int ref) { return ptdf_matrix(net, ref).values; },
          py::arg("network"), py::arg("reference_bus") = 0);
    m.def("generalized_ptdf", [](const Network& net, int ref) { return generalized_ptdf(ptdf_matrix(net, ref), net).values; },
          py::arg("network"), py::arg("reference_bus") = 0);

    m.def("capacity_factor", [](double v) { return capacity_factor(v, WindModel{}); }, py::arg("speed"));
    m.def("scenarios_csv", [](const Network& net, int count, std::uint64_t seed) {
              return scenarios_to_csv(scenarios_for(net, count, seed), net);
          },
          py::arg("network"), py::arg("count") = 100, py::arg("seed") = 1);

    m.def("ward_cluster", [](const Network& net, const std::vector<double>& prices, int k) {
              return ward_connectivity_cluster(prices, net, k).zone_of;
          },
          py::arg("network"), py::arg("prices"), py::arg("k"));

    m.def("compare_json", [](const Network& net, int count, std::uint64_t seed, int max_k, int threads) {
              PipelineConfig cfg;
              cfg.max_k = max_k;
              cfg.welfare.threads = threads;
              py::gil_scoped_release release;
              return comparison_to_json(compare_methods(net, scenarios_for(net, count, seed), cfg));
          },
          py::arg("network"), py::arg("count") = 100, py::arg("seed") = 1, py::arg("max_k") = 6, py::arg("threads") = 1);
}
