// Python bindings: scenario runs, refinement and the small building blocks.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "vcsim/config.hpp"
#include "vcsim/placement.hpp"
#include "vcsim/radio.hpp"

namespace py = pybind11;
using namespace vcsim;

namespace {

ScenarioConfig config_from(const std::map<std::string, std::string>& settings) {
  KeyValueConfig kv;
  for (const auto& [k, v] : settings) kv.set(k, v);
  return ScenarioConfig::from(kv);
}

py::dict record_dict(const BeaconRecord& r) {
  py::dict d;
  d["vehicle_id"] = r.vehicle_id;
  d["seq"] = r.seq;
  d["rsu_id"] = r.rsu_id;
  d["detector_id"] = r.detector_id;
  d["d_air_up"] = r.d_air_up;
  d["d_up"] = r.d_up;
  d["d_proc"] = r.d_proc;
  d["d_down"] = r.d_down;
  d["d_air_down"] = r.d_air_down;
  d["total"] = r.total;
  d["outcome"] = to_string(r.outcome);
  d["alerts"] = r.alerts;
  return d;
}

Beacon beacon(const std::string& id, std::pair<double, double> x, std::pair<double, double> v) {
  return {id, {x.first, x.second}, {v.first, v.second}, 0.0};
}

}  // namespace

PYBIND11_MODULE(_vcsim, m) {
  m.doc() = "Vehicular collision detection over an SDN backhaul, simulated.";

  py::register_exception<Error>(m, "VcsimError", PyExc_RuntimeError);

  m.def(
      "cpa",
      [](std::pair<double, double> xa, std::pair<double, double> va, std::pair<double, double> xb,
         std::pair<double, double> vb) {
        const auto r = cpa_pair(beacon("a", xa, va), beacon("b", xb, vb));
        const char* kind = r.kind == CpaKind::approaching ? "approaching"
                           : r.kind == CpaKind::diverging ? "diverging"
                                                          : "parallel";
        return py::make_tuple(r.t_star, r.d_star, kind);
      },
      py::arg("xa"), py::arg("va"), py::arg("xb"), py::arg("vb"),
      "Closest approach of two constant-velocity vehicles: (t_star, d_star, kind).");

  m.def(
      "access_delay",
      [](double t_gen, std::uint64_t seed) {
        Rng rng(seed);
        return access_delay(t_gen, WaveParams{}, rng);
      },
      py::arg("t_gen"), py::arg("seed") = 1, "WAVE channel access delay with default parameters.");

  m.def("config_defaults", &config_defaults, "Every configuration key with its default value.");

  m.def(
      "run",
      [](const std::map<std::string, std::string>& settings, bool records) {
        const auto cfg = config_from(settings);
        const Scenario sc = cfg.materialize();
        if (sc.placement.empty()) throw UsageError("run needs a placement");
        RunResult res;
        {
          py::gil_scoped_release release;
          res = run(sc);
        }
        const SummaryLabels labels{sc.placement.size(), to_string(sc.topology), cfg.controller, sc.seed};
        py::dict out;
        out["summary"] = py::module_::import("json").attr("loads")(summary_json(res.summary, labels, false));
        if (records) {
          py::list rows;
          for (const auto& r : res.records) rows.append(record_dict(r));
          out["records"] = rows;
        }
        return out;
      },
      py::arg("settings"), py::arg("records") = false,
      "Runs one scenario described by configuration key/value pairs.");

  m.def(
      "refine",
      [](const std::map<std::string, std::string>& settings, std::size_t n, std::size_t iters, bool invert) {
        const auto cfg = config_from(settings);
        const Scenario sc = cfg.materialize();
        RefineResult res;
        {
          py::gil_scoped_release release;
          res = refine(n, sc, iters, sc.seed, RefineOptions{.invert_source = invert});
        }
        py::list log;
        for (const auto& e : res.log) log.append(py::make_tuple(e.iteration, e.config.key(), e.objective, e.mutated));
        py::dict out;
        out["best"] = res.best.nodes();
        out["best_objective"] = res.best_objective;
        out["log"] = log;
        return out;
      },
      py::arg("settings"), py::arg("n"), py::arg("iters") = 30, py::arg("invert") = false,
      "Detector placement refinement; returns the best placement and the per-iteration log.");

  m.def(
      "topology_json",
      [](const std::map<std::string, std::string>& settings) {
        const Scenario sc = config_from(settings).materialize();
        return build_topology(sc.rsus, sc.n_core, sc.topology, sc.link).to_json();
      },
      py::arg("settings"), "Backhaul graph for a configuration, as JSON text.");

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::main(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process: (exit_code, stdout, stderr).");
}
