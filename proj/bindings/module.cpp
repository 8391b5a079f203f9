#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <complex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gridflow/errors.hpp"
#include "gridflow/io/bench.hpp"
#include "gridflow/io/case.hpp"
#include "gridflow/io/solution.hpp"
#include "gridflow/powerflow/cim.hpp"
#include "gridflow/powerflow/newton.hpp"
#include "gridflow/synth/synth.hpp"

namespace py = pybind11;
using namespace gridflow;

namespace {

/// A solved case together with the network it was solved on, which the
/// writers need for bus ids and phase layout.
struct Result {
  std::variant<std::pair<PowerFlowSolution, SinglePhaseNetwork>, std::pair<ThreePhaseSolution, ThreePhaseNetwork>> data;

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit([&](const auto& p) -> decltype(auto) { return f(p.first, p.second); }, data);
  }

  bool single_phase() const { return data.index() == 0; }

  std::vector<std::complex<double>> voltages() const {
    if (const auto* sp = std::get_if<0>(&data)) {
      const VoltageState& s = sp->first.state;
      std::vector<std::complex<double>> v(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) v[i] = std::polar(s.magnitude[i], s.angle[i]);
      return v;
    }
    const VoltageState3& s = std::get<1>(data).first.state;
    return {s.begin(), s.end()};
  }

  std::vector<std::size_t> bus_ids() const {
    std::vector<std::size_t> ids;
    if (const auto* sp = std::get_if<0>(&data)) {
      for (const Bus& b : sp->second.buses) ids.push_back(b.id);
    } else {
      const auto& [sol, net] = std::get<1>(data);
      for (const auto& node : sol.indexer.nodes()) ids.push_back(net.buses[node.bus].id);
    }
    return ids;
  }

  std::optional<std::string> phases() const {
    if (single_phase()) return std::nullopt;
    std::string out;
    for (const auto& node : std::get<1>(data).first.indexer.nodes()) out += phase_letter(node.phase);
    return out;
  }
};

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
  return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

LinearSolverConfig linear_config(const std::string& solver) {
  LinearSolverConfig c;
  c.kind = parse_solver_kind(solver);
  return c;
}

Result solve(const CaseFile& c, const std::string& solver, std::size_t threads, double tol,
             std::optional<std::size_t> max_iter, const std::optional<CaseFile>& warm_base) {
  if (const auto* net = std::get_if<SinglePhaseNetwork>(&c.network)) {
    NewtonOptions o;
    o.linear = linear_config(solver);
    o.tol_angle = o.tol_vm = tol;
    if (max_iter) o.max_iter = *max_iter;
    std::optional<VoltageState> start;
    if (warm_base) {
      start = replicated_start(c, *warm_base);
      o.flat_start = false;
    }
    py::gil_scoped_release release;
    return Result{std::pair{solve_nr(*net, o, threads, start ? &*start : nullptr), *net}};
  }
  if (warm_base) throw std::invalid_argument("warm_base applies to single-phase cases only");
  const auto& net = std::get<ThreePhaseNetwork>(c.network);
  CimOptions o;
  o.linear = linear_config(solver);
  o.tol_v = tol;
  if (max_iter) o.max_iter = *max_iter;
  py::gil_scoped_release release;
  return Result{std::pair{solve_cim(net, o, threads), net}};
}

CaseFile replicate(const CaseFile& base, std::size_t copies, std::size_t links, std::uint64_t seed, bool ring,
                   const std::optional<std::string>& name) {
  const SynthSpec spec{.copies = copies, .links_per_pair = links, .seed = seed, .ring = ring};
  CaseFile out;
  if (const auto* net = std::get_if<SinglePhaseNetwork>(&base.network)) {
    out.network = replicate_transmission(*net, spec);
  } else {
    out.network = replicate_feeder(std::get<ThreePhaseNetwork>(base.network), spec);
  }
  out.metadata.name = name.value_or(base.metadata.name + "_x" + std::to_string(copies));
  out.metadata.source = "synthesized from " + base.metadata.name;
  out.metadata.synth = SynthRecord{base.metadata.name, spec};
  return out;
}

py::dict timings_dict(const SolveTimings& t) {
  py::dict d;
  d["jacobian_build"] = t.jacobian_build;
  d["linear_solve"] = t.linear_solve;
  d["mismatch_eval"] = t.mismatch_eval;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sparse Newton power flow for transmission and three-phase distribution cases";

  // Created once per process; the module keeps them alive.
  static PyObject* const error = PyErr_NewException("gridflow.Error", PyExc_RuntimeError, nullptr);
  static PyObject* const case_error = PyErr_NewException("gridflow.CaseError", error, nullptr);
  static PyObject* const network_error = PyErr_NewException("gridflow.NetworkError", error, nullptr);
  static PyObject* const solver_error = PyErr_NewException("gridflow.SolverError", error, nullptr);
  m.attr("Error") = py::handle(error);
  m.attr("CaseError") = py::handle(case_error);
  m.attr("NetworkError") = py::handle(network_error);
  m.attr("SolverError") = py::handle(solver_error);

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const CaseError& e) {
      py::object exc = py::handle(case_error)(e.what());
      exc.attr("kind") = std::string(to_string(e.kind()));
      exc.attr("location") = e.location();
      PyErr_SetObject(case_error, exc.ptr());
    } catch (const NetworkError& e) {
      py::set_error(network_error, e.what());
    } catch (const DimensionError& e) {
      py::set_error(PyExc_ValueError, e.what());
    } catch (const Error& e) {
      py::set_error(solver_error, e.what());
    }
  });

  py::class_<CaseFile>(m, "Case", "A parsed case file, single-phase or three-phase")
      .def_static("load", &load_case, py::arg("path"), "Read and validate a case file")
      .def_static("parse", [](const std::string& text) { return parse_case(text); }, py::arg("text"),
                  "Parse case JSON text")
      .def("to_json", &write_case, "Canonical JSON text")
      .def_property_readonly("kind", [](const CaseFile& c) { return std::string(to_string(c.kind())); })
      .def_property_readonly("name", [](const CaseFile& c) { return c.metadata.name; })
      .def_property_readonly("source", [](const CaseFile& c) { return c.metadata.source; })
      .def_property_readonly("bus_count", &CaseFile::bus_count, "Buses, including a feeder's source bus")
      .def_property_readonly("branch_count",
                             [](const CaseFile& c) {
                               return std::visit([](const auto& n) { return n.branches.size(); }, c.network);
                             })
      .def_property_readonly("synth",
                             [](const CaseFile& c) -> py::object {
                               if (!c.metadata.synth) return py::none();
                               const SynthRecord& r = *c.metadata.synth;
                               py::dict d;
                               d["base"] = r.base;
                               d["copies"] = r.spec.copies;
                               d["links_per_pair"] = r.spec.links_per_pair;
                               d["seed"] = r.spec.seed;
                               d["ring"] = r.spec.ring;
                               return std::move(d);
                             })
      .def(py::self == py::self)
      .def("__repr__", [](const CaseFile& c) {
        return "<Case '" + c.metadata.name + "' " + std::string(to_string(c.kind())) + ", " +
               std::to_string(c.bus_count()) + " buses>";
      });

  py::class_<Result>(m, "Solution", "Converged or final Newton state of a case")
      .def_property_readonly("kind", [](const Result& r) { return r.single_phase() ? "single_phase" : "three_phase"; })
      .def_property_readonly("converged", [](const Result& r) { return r.visit([](const auto& s, const auto&) { return s.converged; }); })
      .def_property_readonly("iterations", [](const Result& r) { return r.visit([](const auto& s, const auto&) { return s.iterations; }); })
      .def_property_readonly("mismatch_history",
                             [](const Result& r) { return r.visit([](const auto& s, const auto&) { return s.mismatch_history; }); })
      .def_property_readonly("update_history",
                             [](const Result& r) { return r.visit([](const auto& s, const auto&) { return s.update_history; }); })
      .def_property_readonly("krylov_fallbacks",
                             [](const Result& r) { return r.visit([](const auto& s, const auto&) { return s.krylov_fallbacks; }); })
      .def_property_readonly("timings", [](const Result& r) { return r.visit([](const auto& s, const auto&) { return timings_dict(s.timings); }); })
      .def_property_readonly("voltages", [](const Result& r) { return to_array(r.voltages()); },
                             "Complex voltage per bus, or per phase-node for three-phase cases")
      .def_property_readonly("buses", [](const Result& r) { return to_array(r.bus_ids()); },
                             "Bus id of each entry of `voltages`")
      .def_property_readonly("phases", &Result::phases, "Phase letter of each entry, or None for single-phase cases")
      .def("to_json", [](const Result& r) { return r.visit([](const auto& s, const auto& n) { return write_solution(s, n, OutputFormat::json); }); })
      .def("to_csv", [](const Result& r) { return r.visit([](const auto& s, const auto& n) { return write_solution(s, n, OutputFormat::csv); }); });

  m.def("solve", &solve, py::arg("case"), py::arg("solver") = "direct", py::arg("threads") = 1, py::arg("tol") = 1e-8,
        py::arg("max_iter") = py::none(), py::arg("warm_base") = py::none(),
        "Newton power flow: polar form for single-phase cases, current injection for three-phase feeders.\n"
        "warm_base: the base case of a synthesized transmission case, used to build the starting point.");

  m.def("replicate", &replicate, py::arg("base"), py::arg("copies"), py::arg("links") = 2, py::arg("seed") = 0,
        py::arg("ring") = false, py::arg("name") = py::none(),
        "Synthesize a larger case: linked transmission blocks, or feeder replicas sharing the source.");

  m.def(
      "bench",
      [](const CaseFile& c, const std::vector<std::size_t>& threads, std::size_t repeat, const std::string& solver,
         const std::optional<CaseFile>& warm_base) {
        BenchOptions o;
        o.threads = threads;
        o.repeat = repeat;
        o.linear = linear_config(solver);
        if (warm_base) o.initial = replicated_start(c, *warm_base);
        std::vector<BenchRecord> records;
        {
          py::gil_scoped_release release;
          records = run_bench(c, o);
        }
        return write_bench_csv(records);
      },
      py::arg("case"), py::arg("threads") = std::vector<std::size_t>{1, 2, 4, 8}, py::arg("repeat") = 5,
      py::arg("solver") = "krylov", py::arg("warm_base") = py::none(),
      "Thread sweep; returns CSV with median solve and other times per thread count.");
}
