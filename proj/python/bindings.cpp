#include "stablab/bounds.hpp"
#include "stablab/cli.hpp"
#include "stablab/dataset.hpp"
#include "stablab/objective.hpp"
#include "stablab/sgd.hpp"
#include "stablab/smoothness.hpp"
#include "stablab/stability.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace stablab;
using json = nlohmann::json;

namespace {

// Configs cross the boundary as JSON text; the Python side wraps them with json.dumps/loads.
json parse(const std::string& text) { return json::parse(text); }

py::dict trajectory_dict(const TrajectoryRecord& rec) {
  py::dict d;
  std::vector<int> t, index;
  std::vector<double> alpha, loss, grad_norm;
  for (const auto& s : rec.steps) {
    t.push_back(s.t);
    index.push_back(s.index);
    alpha.push_back(s.alpha);
    loss.push_back(s.loss);
    grad_norm.push_back(s.grad_norm);
  }
  d["t"] = t;
  d["i_t"] = index;
  d["alpha"] = alpha;
  d["loss"] = loss;
  d["grad_norm"] = grad_norm;
  d["final_theta"] = rec.final_theta;
  d["swa"] = rec.swa_average ? py::cast(*rec.swa_average) : py::none();
  d["seed"] = rec.seed;
  d["scheme"] = to_string(rec.scheme);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "stablab core bindings";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<Unsupported>(m, "Unsupported", PyExc_NotImplementedError);

  py::class_<Objective, std::shared_ptr<Objective>>(m, "Objective")
      .def_property_readonly("family", [](const Objective& o) { return to_string(o.family()); })
      .def_property_readonly("param_dim", &Objective::param_dim)
      .def_property_readonly("example_dim", &Objective::example_dim)
      .def_property_readonly("domain_radius", &Objective::domain_radius)
      .def_property_readonly("convex", &Objective::convex)
      .def("constants_json", [](const Objective& o) { return to_json(o.constants()).dump(); })
      .def("config_json", [](const Objective& o) { return o.to_json().dump(); })
      .def("value", &Objective::value, py::arg("theta"), py::arg("z"))
      .def("subgradient", &Objective::subgradient, py::arg("theta"), py::arg("z"))
      .def("inner_maximize", [](const Objective& o, const Vector& theta, const Example& z) {
        InnerResult r = o.inner_maximize(theta, z);
        return py::make_tuple(r.maximizer, r.attained);
      });

  m.def("make_objective", [](const std::string& config) {
    return std::const_pointer_cast<Objective>(make_objective(parse(config)));
  });

  m.def("make_hard_instance", [](const std::string& config, int n) {
    auto [obj, pair] = make_hard_instance(hard_instance_params_from_json(parse(config)), n);
    return py::make_tuple(std::const_pointer_cast<Objective>(obj), pair.S, pair.S_prime, pair.differing_index);
  });

  m.def("make_neighbors", [](const std::string& distribution, int n, int i, std::uint64_t seed, bool identical) {
    NeighborPair p = make_neighbors(*make_distribution(parse(distribution)), n, i, seed, identical);
    return py::make_tuple(p.S, p.S_prime, p.differing_index);
  }, py::arg("distribution"), py::arg("n"), py::arg("i"), py::arg("seed"), py::arg("identical") = false);

  m.def("estimate_constants", [](const Objective& o, int N, std::uint64_t seed) {
    return to_json(estimate_constants(o, N, seed)).dump();
  });
  m.def("check_descent", [](const Objective& o, double beta, double eta, int N, std::uint64_t seed) {
    return to_json(check_descent(o, beta, eta, N, seed)).dump();
  });
  m.def("check_cocoercive", [](const Objective& o, double beta, double eta, int N, std::uint64_t seed) {
    return to_json(check_cocoercive(o, beta, eta, N, seed)).dump();
  });
  m.def("check_update_expansiveness",
        [](const Objective& o, double alpha, const std::string& mode, int N, std::uint64_t seed) {
          return to_json(check_update_expansiveness(o, alpha, expansion_mode_from_string(mode), N, seed)).dump();
        });

  m.def("schedule_alpha", [](const std::string& schedule, int t) {
    return schedule_alpha(schedule_from_json(parse(schedule)), t);
  });
  m.def("tstar", &tstar, py::arg("D"), py::arg("alpha"), py::arg("L"), py::arg("eta"), py::arg("n"));

  m.def("run", [](const Objective& o, const Dataset& S, const std::string& schedule, const std::string& scheme,
                  int T, std::uint64_t seed, bool swa) {
    RunOptions opt;
    opt.swa = swa;
    return trajectory_dict(run(o, S, schedule_from_json(parse(schedule), o.constants().beta),
                               scheme_from_string(scheme), T, seed, opt));
  }, py::arg("objective"), py::arg("S"), py::arg("schedule"), py::arg("scheme"), py::arg("T"), py::arg("seed"),
     py::arg("swa") = false);

  m.def("coupled_run", [](const Objective& o, const Dataset& S, const Dataset& S_prime, int differing_index,
                          const std::string& schedule, const std::string& scheme, int T, std::uint64_t seed) {
    NeighborPair pair{S, S_prime, differing_index};
    CoupledRun r = coupled_run(o, pair, schedule_from_json(parse(schedule), o.constants().beta),
                               scheme_from_string(scheme), T, seed);
    py::dict d;
    d["t"] = r.t;
    d["delta"] = r.delta;
    d["delta_swa"] = r.delta_swa;
    d["i_t"] = r.indices;
    d["path_violations"] = r.path_violations;
    d["path_certified"] = r.path_certified;
    return d;
  });

  m.def("evaluate_bound", [](const std::string& id, const std::string& inputs) {
    return to_json(evaluate_bound(id, parse(inputs))).dump();
  });
  m.def("bound_ids", &bound_ids);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::vector<const char*> argv{"stablab"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
