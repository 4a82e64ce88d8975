#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "renass/cli.hpp"
#include "renass/engine.hpp"
#include "renass/metrics.hpp"
#include "renass/oracle.hpp"
#include "renass/scenario.hpp"

namespace py = pybind11;
using namespace renass;

namespace {

using PmTuple = std::tuple<std::string, std::uint32_t, Tick, Tick>;

AgentId agent_from(const std::string& kind, std::uint32_t index) {
  if (kind == "component") return component_id(index);
  if (kind == "connector") return connector_id(index);
  throw ParamError("agent kind must be \"component\" or \"connector\", got \"" + kind + "\"");
}

SimParams make_params(Tick ticks, std::uint64_t seed, bool reconfig, std::optional<double> reliability,
                      const std::vector<PmTuple>& pm, std::uint32_t replications) {
  SimParams p;
  p.ticks = ticks;
  p.seed = seed;
  p.reconfig_enabled = reconfig;
  p.reliability_override = reliability;
  p.replications = replications;
  for (const auto& [kind, index, period, duration] : pm) p.pm_schedule.push_back({agent_from(kind, index), period, duration});
  return p;
}

py::dict counters_dict(const TimeCounters& c) {
  py::dict d;
  d["ot"] = c.ot;
  d["st"] = c.st;
  d["tcm"] = c.tcm;
  d["tpm"] = c.tpm;
  return d;
}

py::dict report_dict(const ComparisonReport& r) {
  py::dict d;
  d["ticks"] = r.ticks;
  d["reconfig"] = r.reconfig;
  d["baseline"] = r.baseline;
  d["gap"] = r.gap;
  d["min_gap"] = r.min_gap;
  d["gap_trend"] = r.gap_trend;
  return d;
}

unsigned threads_or_env(std::optional<unsigned> threads) { return threads ? *threads : cli::thread_limit(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Agent-based availability simulation of reconfigurable networked software";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<LookupError>(m, "LookupError", base);
  py::register_exception<RuleMissingError>(m, "RuleMissingError", base);
  py::register_exception<ValidationError>(m, "ValidationError", base);
  py::register_exception<ParamError>(m, "ParamError", base);
  py::register_exception<EndOfHorizonError>(m, "EndOfHorizonError", base);
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", base);
  py::register_exception<ShapeError>(m, "ShapeError", base);
  py::register_exception<UnsupportedConfigError>(m, "UnsupportedConfigError", base);
  py::register_exception<SizeError>(m, "SizeError", base);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<GenerationError>(m, "GenerationError", base);
  py::register_exception<IoError>(m, "IoError", base);

  py::class_<SystemModel>(m, "Model")
      .def_static("from_json", &from_json, py::arg("text"))
      .def_static("load", &load, py::arg("path"))
      .def("to_json", &to_json)
      .def("save", &save, py::arg("path"))
      .def("validate",
           [](const SystemModel& self) {
             std::vector<std::pair<std::string, std::string>> out;
             for (const auto& v : validate(self)) out.emplace_back(v.path, v.message);
             return out;
           })
      .def_property_readonly("components", [](const SystemModel& s) { return s.components.size(); })
      .def_property_readonly("connectors", [](const SystemModel& s) { return s.connectors.size(); })
      .def_property_readonly("services", [](const SystemModel& s) { return s.services.size(); })
      .def_property_readonly("businesses", [](const SystemModel& s) { return s.businesses.size(); })
      .def_property_readonly("rules", [](const SystemModel& s) { return s.reconfig.rules.size(); })
      .def("__eq__", [](const SystemModel& a, const SystemModel& b) { return a == b; })
      .def("__repr__", [](const SystemModel& s) {
        return "<Model components=" + std::to_string(s.components.size()) +
               " connectors=" + std::to_string(s.connectors.size()) +
               " businesses=" + std::to_string(s.businesses.size()) + ">";
      });

  m.def("load", &load, py::arg("path"));
  m.def("save", &save, py::arg("model"), py::arg("path"));
  m.def("to_json", &to_json, py::arg("model"));
  m.def("from_json", &from_json, py::arg("text"));

  const GenParams defaults;
  m.def(
      "generate",
      [](std::uint32_t components, std::uint32_t connectors, std::uint32_t services, std::uint32_t businesses,
         double critical_fraction, std::uint32_t substitutes, std::pair<std::uint32_t, std::uint32_t> support,
         std::pair<std::uint32_t, std::uint32_t> services_per_business, double reliability, std::uint64_t seed) {
        return generate({components, connectors, services, businesses, critical_fraction, substitutes, support,
                         services_per_business, reliability, seed});
      },
      py::kw_only(), py::arg("components") = defaults.components, py::arg("connectors") = defaults.connectors,
      py::arg("services") = defaults.services, py::arg("businesses") = defaults.businesses,
      py::arg("critical_fraction") = defaults.critical_fraction,
      py::arg("substitutes") = defaults.substitutes_per_critical_agent,
      py::arg("support_size") = defaults.support_size_range,
      py::arg("services_per_business") = defaults.services_per_business_range,
      py::arg("reliability") = defaults.reliability, py::arg("seed") = defaults.seed);

  py::class_<SimulationTrace>(m, "Trace")
      .def_property_readonly("business_ids", [](const SimulationTrace& t) { return t.business_ids; })
      .def_property_readonly("ticks", [](const SimulationTrace& t) { return t.samples.size(); })
      .def_property_readonly("system",
                             [](const SimulationTrace& t) {
                               std::vector<double> v;
                               v.reserve(t.samples.size());
                               for (const auto& s : t.samples) v.push_back(s.system);
                               return v;
                             })
      .def_property_readonly("per_business",
                             [](const SimulationTrace& t) {
                               std::vector<std::vector<double>> v;
                               v.reserve(t.samples.size());
                               for (const auto& s : t.samples) v.push_back(s.per_business);
                               return v;
                             })
      .def_property_readonly("counters",
                             [](const SimulationTrace& t) {
                               py::list out;
                               for (const auto& c : t.final_counters) out.append(counters_dict(c));
                               return out;
                             })
      .def_property_readonly("events", [](const SimulationTrace& t) {
        py::list out;
        for (const auto& e : t.events)
          out.append(py::make_tuple(e.tick, to_string(e.kind), to_string(e.agent),
                                    e.from ? py::object(py::str(to_string(*e.from))) : py::none(),
                                    e.to ? py::object(py::str(to_string(*e.to))) : py::none()));
        return out;
      });

  m.def(
      "run",
      [](const SystemModel& model, Tick ticks, std::uint64_t seed, bool reconfig, std::optional<double> reliability,
         const std::vector<PmTuple>& pm) {
        const auto p = make_params(ticks, seed, reconfig, reliability, pm, 1);
        py::gil_scoped_release release;
        return run(model, p);
      },
      py::arg("model"), py::kw_only(), py::arg("ticks"), py::arg("seed") = 1, py::arg("reconfig") = true,
      py::arg("reliability") = py::none(), py::arg("pm") = std::vector<PmTuple>{});

  m.def(
      "compare",
      [](const SystemModel& model, Tick ticks, std::uint64_t seed, std::optional<double> reliability,
         const std::vector<PmTuple>& pm, std::uint32_t replications, std::optional<unsigned> threads) {
        const auto p = make_params(ticks, seed, true, reliability, pm, replications);
        check_params(p, model);
        const unsigned workers = threads_or_env(threads);
        std::vector<ComparisonReport> reports(replications);
        {
          py::gil_scoped_release release;
          for_each_replication(p, replications, workers, [&](std::size_t i, const SimParams& pi) {
            auto off = pi;
            off.reconfig_enabled = false;
            reports[i] = compare(run(model, pi), run(model, off));
          });
        }
        if (replications == 1) return report_dict(reports[0]);
        const auto agg = aggregate(reports);
        auto d = report_dict(agg.mean);
        d["se_reconfig"] = agg.se_reconfig;
        d["se_baseline"] = agg.se_baseline;
        d["se_gap"] = agg.se_gap;
        d["replications"] = agg.replications;
        return d;
      },
      py::arg("model"), py::kw_only(), py::arg("ticks"), py::arg("seed") = 1, py::arg("reliability") = py::none(),
      py::arg("pm") = std::vector<PmTuple>{}, py::arg("replications") = 1, py::arg("threads") = py::none());

  m.def(
      "operational_availability",
      [](Tick ot, Tick st, Tick tcm, Tick tpm) { return operational_availability({ot, st, tcm, tpm}); },
      py::arg("ot"), py::arg("st"), py::arg("tcm"), py::arg("tpm"));

  m.def(
      "exact_availability",
      [](const SystemModel& model, Tick ticks, bool reconfig) { return exact_expected_availability(model, ticks, reconfig); },
      py::arg("model"), py::kw_only(), py::arg("ticks"), py::arg("reconfig") = true);

  m.def("brute_force_availability", &brute_force_availability, py::arg("model"), py::kw_only(), py::arg("ticks"),
        py::arg("reconfig") = true);

  m.def(
      "oracle_check",
      [](const SystemModel& model, Tick ticks, std::uint64_t seed, bool reconfig, std::optional<double> reliability,
         std::uint32_t replications, std::optional<unsigned> threads) {
        const auto p = make_params(ticks, seed, reconfig, reliability, {}, replications);
        const unsigned workers = threads_or_env(threads);
        OracleCheck c;
        {
          py::gil_scoped_release release;
          c = oracle_check(model, p, workers);
        }
        py::dict d;
        d["oracle"] = c.oracle;
        d["estimate"] = c.estimate;
        d["std_error"] = c.std_error;
        d["replications"] = c.replications;
        d["z"] = c.z;
        d["passed"] = c.passed();
        return d;
      },
      py::arg("model"), py::kw_only(), py::arg("ticks"), py::arg("seed") = 1, py::arg("reconfig") = true,
      py::arg("reliability") = py::none(), py::arg("replications") = 100000, py::arg("threads") = py::none());
}
