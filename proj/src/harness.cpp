#include "minsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "minsim/engine.hpp"
#include "minsim/reliability.hpp"

namespace minsim {
namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view s) {
  const std::string text(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size()) throw ConfigError("not a number: '" + text + "'");
  return v;
}

int to_int(std::string_view s) {
  const double v = to_double(s);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw ConfigError("not an integer: '" + std::string(s) + "'");
  }
  return static_cast<int>(v);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Row {
  std::vector<std::string> values;
  const PointResult* point = nullptr;
  bool aggregate = true;
};

std::vector<Row> build_rows(const std::vector<PointResult>& results, bool per_replication) {
  std::vector<Row> rows;
  for (std::size_t p = 0; p < results.size(); ++p) {
    const auto& pr = results[p];
    const SimConfig& c = pr.config;
    auto common = [&](const std::string& id, std::uint64_t seed) {
      return std::vector<std::string>{id,
                                      std::to_string(c.radix),
                                      std::to_string(1LL << c.radix),
                                      std::to_string(c.n_lanes),
                                      std::to_string(c.effective_lane_capacity()),
                                      std::to_string(c.n_flits),
                                      fmt_double(c.offered_load),
                                      std::to_string(seed)};
    };
    Row agg;
    agg.point = &pr;
    agg.values = common("p" + std::to_string(p), c.base_seed);
    const auto& a = pr.aggregate;
    agg.values.push_back(fmt_double(a.get("cycles_measured").mean));
    agg.values.push_back(a.all_steady ? "true" : "false");
    for (const char* name : {"packets_delivered", "flits_delivered", "throughput_flits_per_cycle",
                             "normalized_throughput", "mean_wait", "mean_service",
                             "mean_total_delay", "buffer_utilization", "undelivered_packets"}) {
      agg.values.push_back(fmt_double(a.get(name).mean));
    }
    rows.push_back(std::move(agg));
    if (!per_replication) continue;
    for (std::size_t r = 0; r < pr.runs.size(); ++r) {
      const MetricsRecord& m = pr.runs[r].metrics;
      Row row;
      row.point = &pr;
      row.aggregate = false;
      row.values = common("p" + std::to_string(p) + "r" + std::to_string(r), pr.runs[r].seed);
      row.values.push_back(std::to_string(m.cycles_measured));
      row.values.push_back(m.steady_state_reached ? "true" : "false");
      row.values.push_back(std::to_string(m.packets_delivered));
      row.values.push_back(std::to_string(m.flits_delivered));
      for (double v : {m.throughput_flits_per_cycle, m.normalized_throughput, m.mean_wait,
                       m.mean_service, m.mean_total_delay, m.buffer_utilization}) {
        row.values.push_back(fmt_double(v));
      }
      row.values.push_back(std::to_string(m.undelivered_packets));
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string figure_file_stem(const ExperimentSpec& spec) {
  switch (spec.kind) {
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::Sweep: return "sweep";
    case ExperimentKind::Reliability: return "reliability";
    case ExperimentKind::Cost: return "cost";
    case ExperimentKind::Figure: return spec.figure;
  }
  return "out";
}

std::vector<double> default_r_grid() { return parse_double_list("0.5:1.0:0.01"); }

}  // namespace

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  for (auto item : split(text, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() == 1) {
      out.push_back(to_int(parts[0]));
      continue;
    }
    if (parts.size() > 3) throw ConfigError("bad range '" + std::string(item) + "'");
    const int start = to_int(parts[0]);
    const int stop = to_int(parts[1]);
    const int step = parts.size() == 3 ? to_int(parts[2]) : 1;
    if (step <= 0 || stop < start) throw ConfigError("bad range '" + std::string(item) + "'");
    for (int v = start; v <= stop; v += step) out.push_back(v);
  }
  return out;
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  for (auto item : split(text, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() == 1) {
      out.push_back(to_double(parts[0]));
      continue;
    }
    if (parts.size() != 3) throw ConfigError("range needs start:stop:step, got '" + std::string(item) + "'");
    const double start = to_double(parts[0]);
    const double stop = to_double(parts[1]);
    const double step = to_double(parts[2]);
    if (!(step > 0.0) || stop < start) throw ConfigError("bad range '" + std::string(item) + "'");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) {
      out.push_back(std::round((start + static_cast<double>(i) * step) * 1e9) / 1e9);
    }
  }
  return out;
}

std::vector<SimConfig> expand_points(const SimConfig& base, const SweepAxes& axes) {
  const auto radix = axes.radix.empty() ? std::vector<int>{base.radix} : axes.radix;
  const auto lanes = axes.lanes.empty() ? std::vector<int>{base.n_lanes} : axes.lanes;
  const auto caps = axes.lane_capacity.empty() ? std::vector<int>{base.lane_capacity} : axes.lane_capacity;
  const auto flits = axes.flits.empty() ? std::vector<int>{base.n_flits} : axes.flits;
  const auto load = axes.load.empty() ? std::vector<double>{base.offered_load} : axes.load;
  std::vector<SimConfig> out;
  for (int r : radix) {
    for (int l : lanes) {
      for (int c : caps) {
        for (int f : flits) {
          for (double x : load) {
            SimConfig cfg = base;
            cfg.radix = r;
            cfg.n_lanes = l;
            cfg.lane_capacity = c;
            cfg.n_flits = f;
            cfg.offered_load = x;
            cfg.validate();
            out.push_back(cfg);
          }
        }
      }
    }
  }
  return out;
}

std::vector<PointResult> run_points(const std::vector<SimConfig>& points, int threads) {
  struct Job {
    std::size_t point;
    int replica;
  };
  std::vector<Job> jobs;
  std::vector<PointResult> results(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    points[p].validate();
    results[p].config = points[p];
    results[p].runs.resize(static_cast<std::size_t>(points[p].replications));
    for (int r = 0; r < points[p].replications; ++r) jobs.push_back({p, r});
  }
  const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
  const std::size_t workers =
      std::min<std::size_t>(jobs.size(), threads > 0 ? static_cast<unsigned>(threads) : hw);

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      const SimConfig& cfg = points[job.point];
      const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(job.replica);
      try {
        RunResult rr{cfg, seed, run(cfg, seed)};
        results[job.point].runs[static_cast<std::size_t>(job.replica)] = std::move(rr);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  for (auto& pr : results) pr.aggregate = aggregate_replications(pr.runs);
  return results;
}

std::vector<std::string_view> sim_csv_columns() {
  return {"run_id",           "radix",
          "N",                "n_lanes",
          "lane_capacity",    "n_flits",
          "offered_load",     "seed",
          "cycles_measured",  "steady_state_reached",
          "packets_delivered", "flits_delivered",
          "throughput_flits_per_cycle", "normalized_throughput",
          "mean_wait",        "mean_service",
          "mean_total_delay", "buffer_utilization",
          "undelivered_packets"};
}

void write_sim_csv(std::ostream& os, const std::vector<PointResult>& results, bool per_replication) {
  const auto cols = sim_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const Row& row : build_rows(results, per_replication)) {
    for (std::size_t i = 0; i < row.values.size(); ++i) os << (i ? "," : "") << row.values[i];
    os << '\n';
  }
}

void write_sim_json(std::ostream& os, const std::vector<PointResult>& results, bool per_replication) {
  using nlohmann::json;
  const auto cols = sim_csv_columns();
  json rows = json::array();
  for (const Row& row : build_rows(results, per_replication)) {
    json obj = json::object();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const std::string key(cols[i]);
      const std::string& v = row.values[i];
      if (key == "run_id") {
        obj[key] = v;
      } else if (key == "steady_state_reached") {
        obj[key] = v == "true";
      } else {
        obj[key] = std::stod(v);
      }
    }
    if (row.aggregate) {
      const auto& agg = row.point->aggregate;
      json sd = json::object();
      const auto fields = metric_fields();
      for (std::size_t i = 0; i < fields.size(); ++i) sd[std::string(fields[i].name)] = agg.fields[i].stddev;
      obj["replications"] = agg.replications;
      obj["steady_replications"] = agg.steady_count;
      obj["stddev"] = std::move(sd);
      obj["normalization"] = std::string(to_string(row.point->config.normalization));
      obj["load_interpretation"] = std::string(to_string(row.point->config.load_interpretation));
    }
    rows.push_back(std::move(obj));
  }
  os << json{{"rows", rows}}.dump(2) << '\n';
}

bool figure_is_simulation(std::string_view name) { return name == "fig10" || name == "fig11"; }

ExperimentSpec figure_spec(std::string_view name, const SimConfig& base) {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::Figure;
  spec.figure = std::string(name);
  spec.base = base;
  if (name == "fig5" || name == "fig6" || name == "fig7") {
    spec.r_grid = default_r_grid();
    spec.axes.radix = parse_int_list("3:10");
    spec.axes.lanes = name == "fig5" ? std::vector<int>{2}
                      : name == "fig6" ? std::vector<int>{4}
                                       : std::vector<int>{1, 2};
  } else if (name == "fig8") {
    spec.axes.radix = parse_int_list("3:10");
    spec.axes.lanes = {1, 2, 4, 6, 8, 10, 12};
    spec.fabrics = {FabricKind::Proposed};
    spec.se_cost_units = 1.0;
  } else if (name == "fig9") {
    spec.axes.radix = parse_int_list("3:10");
    spec.axes.lanes = {1, 2, 4, 10};
    spec.fabrics = {kAllFabrics.begin(), kAllFabrics.end()};
    spec.se_cost_units = 1.0;
  } else if (name == "fig10") {
    spec.axes.radix = {4, 5, 7, 9, 10};
    spec.axes.lanes = parse_int_list("1:12");
    spec.axes.load = {0.80};
    spec.base.n_flits = 12;
  } else if (name == "fig11") {
    spec.axes.radix = {8};
    spec.axes.lanes = {1, 2, 4, 6, 8, 10};
    spec.axes.load = parse_double_list("0.05:0.95:0.05");
    spec.base.n_flits = 12;
  } else {
    throw ConfigError("unknown figure '" + std::string(name) + "' (expected fig5..fig11)");
  }
  return spec;
}

std::string resolve_output_path(const ExperimentSpec& spec) {
  if (!spec.output_path.empty()) return spec.output_path;
  const char* dir = std::getenv(kOutputDirEnv);
  if (dir == nullptr || *dir == '\0') return {};
  const char* ext = spec.format == OutputFormat::Json ? ".json" : ".csv";
  return (std::filesystem::path(dir) / (figure_file_stem(spec) + ext)).string();
}

namespace {

void write_table(const ExperimentSpec& spec, std::ostream& os,
                 const std::vector<PointResult>* sims,
                 const std::vector<ReliabilityRow>* rel, const std::vector<CostRow>* cost) {
  if (sims) {
    if (spec.format == OutputFormat::Json) {
      write_sim_json(os, *sims, spec.per_replication_rows);
    } else {
      write_sim_csv(os, *sims, spec.per_replication_rows);
    }
    return;
  }
  using nlohmann::json;
  if (rel) {
    if (spec.format == OutputFormat::Csv) return write_reliability_csv(os, *rel);
    json rows = json::array();
    for (const auto& r : *rel) {
      rows.push_back({{"radix", r.radix}, {"n_lanes", r.n_lanes}, {"r_flit", r.r_flit}, {"R_MIN", r.r_min}});
    }
    os << json{{"rows", rows}}.dump(2) << '\n';
    return;
  }
  if (cost) {
    if (spec.format == OutputFormat::Csv) return write_cost_csv(os, *cost);
    json rows = json::array();
    for (const auto& r : *cost) {
      rows.push_back({{"kind", std::string(to_string(r.kind))},
                      {"radix", r.radix},
                      {"n_lanes", r.n_lanes},
                      {"complexity", r.complexity},
                      {"cost_units", r.cost_units}});
    }
    os << json{{"rows", rows}}.dump(2) << '\n';
  }
}

void summarize(std::ostream& out, const std::vector<PointResult>& results) {
  char buf[256];
  for (const auto& pr : results) {
    const auto& a = pr.aggregate;
    std::snprintf(buf, sizeof buf,
                  "radix=%d lanes=%d cap=%d flits=%d load=%.3f  Th_N=%.4f+-%.4f  "
                  "delay=%.2f+-%.2f  util=%.3f  steady=%d/%d\n",
                  pr.config.radix, pr.config.n_lanes, pr.config.effective_lane_capacity(),
                  pr.config.n_flits, pr.config.offered_load, a.get("normalized_throughput").mean,
                  a.get("normalized_throughput").stddev, a.get("mean_total_delay").mean,
                  a.get("mean_total_delay").stddev, a.get("buffer_utilization").mean,
                  a.steady_count, a.replications);
    out << buf;
    if (a.get("max_stall_cycles").mean > 1000.0) {
      out << "  warning: up to " << fmt_double(a.get("max_stall_cycles").mean)
          << " cycles without a delivery (possible deadlock)\n";
    }
  }
}

}  // namespace

int run_experiment(const ExperimentSpec& spec, std::ostream& summary, std::ostream& diag) {
  std::vector<PointResult> sims;
  std::vector<ReliabilityRow> rel;
  std::vector<CostRow> cost;
  const std::vector<PointResult>* sims_ptr = nullptr;
  const std::vector<ReliabilityRow>* rel_ptr = nullptr;
  const std::vector<CostRow>* cost_ptr = nullptr;

  try {
    const bool figure = spec.kind == ExperimentKind::Figure;
    if (spec.kind == ExperimentKind::Simulate || spec.kind == ExperimentKind::Sweep ||
        (figure && figure_is_simulation(spec.figure))) {
      sims = run_points(expand_points(spec.base, spec.axes), spec.threads);
      sims_ptr = &sims;
    } else if (spec.kind == ExperimentKind::Reliability ||
               (figure && (spec.figure == "fig5" || spec.figure == "fig6" || spec.figure == "fig7"))) {
      const auto grid = spec.r_grid.empty() ? default_r_grid() : spec.r_grid;
      const auto lanes = spec.axes.lanes.empty() ? std::vector<int>{spec.base.n_lanes} : spec.axes.lanes;
      const auto radix = spec.axes.radix.empty() ? std::vector<int>{spec.base.radix} : spec.axes.radix;
      rel = reliability_sweep(grid, lanes, radix);
      rel_ptr = &rel;
    } else if (spec.kind == ExperimentKind::Cost || (figure && (spec.figure == "fig8" || spec.figure == "fig9"))) {
      CostConfig cc;
      if (spec.se_cost_units) cc.se_cost_units = *spec.se_cost_units;
      const auto radix = spec.axes.radix.empty() ? std::vector<int>{spec.base.radix} : spec.axes.radix;
      const auto lanes = spec.axes.lanes.empty() ? std::vector<int>{spec.base.n_lanes} : spec.axes.lanes;
      std::vector<FabricKind> kinds = spec.fabrics;
      if (kinds.empty()) kinds.assign(kAllFabrics.begin(), kAllFabrics.end());
      if (figure && spec.figure == "fig9") {
        // Comparison fabrics are plotted as single-lane designs only.
        const std::vector<FabricKind> proposed{FabricKind::Proposed};
        cost = cost_sweep(radix, lanes, proposed, cc);
        std::vector<FabricKind> others;
        for (auto k : kinds) {
          if (k != FabricKind::Proposed) others.push_back(k);
        }
        if (!others.empty()) {
          const std::vector<int> one{1};
          auto rest = cost_sweep(radix, one, others, cc);
          cost.insert(cost.end(), rest.begin(), rest.end());
        }
      } else {
        cost = cost_sweep(radix, lanes, kinds, cc);
      }
      cost_ptr = &cost;
    } else {
      throw ConfigError("unknown figure '" + spec.figure + "'");
    }
  } catch (const ConfigError& e) {
    diag << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    diag << "runtime failure: " << e.what() << '\n';
    return 2;
  }

  const std::string path = resolve_output_path(spec);
  if (path.empty()) {
    write_table(spec, summary, sims_ptr, rel_ptr, cost_ptr);
    if (sims_ptr) summarize(diag, sims);
    return 0;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    diag << "error: cannot write " << path << '\n';
    return 2;
  }
  write_table(spec, out, sims_ptr, rel_ptr, cost_ptr);
  out.close();
  if (!out) {
    diag << "error: failed writing " << path << '\n';
    return 2;
  }
  if (sims_ptr) summarize(summary, sims);
  const std::size_t n = sims_ptr ? sims.size() : rel_ptr ? rel.size() : cost.size();
  summary << "wrote " << n << " rows to " << path << '\n';
  return 0;
}

}  // namespace minsim
