#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>
#include <vector>

#include "minsim/config.hpp"
#include "minsim/costmodel.hpp"
#include "minsim/engine.hpp"
#include "minsim/harness.hpp"
#include "minsim/metrics.hpp"
#include "minsim/reliability.hpp"

namespace py = pybind11;

namespace {

// Keyword arguments become config overrides, so key names and validation
// match the command line and config files.
minsim::SimConfig config_from_kwargs(const py::kwargs& kwargs) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& [k, v] : kwargs) {
    std::string value;
    if (py::isinstance<py::bool_>(v)) {
      value = v.cast<bool>() ? "true" : "false";
    } else {
      value = py::str(v).cast<std::string>();
    }
    overrides.emplace_back(k.cast<std::string>(), value);
  }
  return minsim::parse_config(overrides);
}

py::dict metrics_dict(const minsim::MetricsRecord& m) {
  py::dict out;
  for (const auto& field : minsim::metric_fields()) {
    out[py::str(std::string(field.name))] = field.get(m);
  }
  out["steady_state_reached"] = m.steady_state_reached;
  return out;
}

py::dict aggregate_dict(const minsim::AggregateRecord& agg) {
  py::dict out;
  const auto fields = minsim::metric_fields();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string name(fields[i].name);
    out[py::str(name)] = agg.fields[i].mean;
    out[py::str(name + "_std")] = agg.fields[i].stddev;
  }
  out["replications"] = agg.replications;
  out["steady_count"] = agg.steady_count;
  out["all_steady"] = agg.all_steady;
  return out;
}

}  // namespace

PYBIND11_MODULE(_minsim, m) {
  m.doc() = "Multi-lane wormhole Delta network simulator";

  py::register_exception<minsim::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def(
      "run",
      [](std::uint64_t seed, const py::kwargs& kwargs) {
        const auto cfg = config_from_kwargs(kwargs);
        minsim::MetricsRecord rec;
        {
          py::gil_scoped_release release;
          rec = minsim::run(cfg, seed);
        }
        return metrics_dict(rec);
      },
      py::arg("seed") = 1, "One replication; keyword arguments are config keys.");

  m.def(
      "simulate",
      [](int threads, const py::kwargs& kwargs) {
        const auto cfg = config_from_kwargs(kwargs);
        std::vector<minsim::PointResult> res;
        {
          py::gil_scoped_release release;
          res = minsim::run_points({cfg}, threads);
        }
        return aggregate_dict(res.front().aggregate);
      },
      py::arg("threads") = 0, "All replications of one point, aggregated.");

  m.def("ideal_delay", &minsim::ideal_delay, py::arg("stages"), py::arg("packet_length"));

  m.def("min_reliability", &minsim::min_reliability_uniform, py::arg("r_flit"),
        py::arg("n_lanes"), py::arg("stages"));
  m.def(
      "min_reliability_general",
      [](const std::vector<std::vector<double>>& per_lane_r) {
        minsim::ReliabilityParams p;
        p.per_lane_r = per_lane_r;
        p.stages = static_cast<int>(per_lane_r.size());
        p.n_lanes = per_lane_r.empty() ? 0 : static_cast<int>(per_lane_r.front().size());
        return minsim::min_reliability(p);
      },
      py::arg("per_lane_r"), "Per-[stage][lane] reliabilities.");

  m.def(
      "complexity",
      [](const std::string& kind, long long ports, int n_lanes) {
        return minsim::complexity(minsim::parse_fabric_kind(kind), ports, n_lanes);
      },
      py::arg("kind"), py::arg("ports"), py::arg("n_lanes") = 1);
  m.def(
      "cost_units",
      [](const std::string& kind, long long ports, int n_lanes, double se_cost) {
        return minsim::cost_units(minsim::parse_fabric_kind(kind), ports, n_lanes,
                                  minsim::CostConfig{se_cost});
      },
      py::arg("kind"), py::arg("ports"), py::arg("n_lanes") = 1, py::arg("se_cost") = 4.0);
}
