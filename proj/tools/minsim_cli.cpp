// minsim: command-line front end for the wormhole MIN simulator and the
// analytic reliability / cost calculators.

#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "minsim/costmodel.hpp"
#include "minsim/engine.hpp"
#include "minsim/harness.hpp"

namespace {

using minsim::ConfigError;

// Flags that map onto SimConfig keys. Axis flags accept lists for sweeps.
struct FlagDef {
  const char* flag;
  const char* key;
  const char* help;
  bool axis;
};

constexpr FlagDef kSimFlags[] = {
    {"--radix", "radix", "number of stages L (N = 2^L)", true},
    {"--lanes", "n_lanes", "storage lanes per buffer", true},
    {"--lane-capacity", "lane_capacity", "flits per lane", true},
    {"--channel-capacity", "channel_capacity", "total flits per channel (overrides lane capacity)", false},
    {"--flits", "n_flits", "flits per packet", true},
    {"--load", "offered_load", "offered load in [0,1]", true},
    {"--load-as", "load_interpretation", "flit-rate | packet-rate", false},
    {"--warmup", "warmup_cycles", "cycles discarded before measuring", false},
    {"--max-cycles", "max_cycles", "hard cycle limit", false},
    {"--window", "steady_window", "cycles per steady-state window", false},
    {"--windows", "steady_windows_required", "windows that must agree", false},
    {"--tolerance", "steady_tolerance", "relative stddev for steady state", false},
    {"--replications", "replications", "independent seeded runs per point", false},
    {"--seed", "base_seed", "base seed; replica i uses seed + i", false},
    {"--normalization", "normalization", "per-port | eq5", false},
    {"--lane-selection", "lane_selection", "lowest | random", false},
};

struct SimFlags {
  std::map<std::string, std::string> values;
  std::string config_file;
  std::string out;
  std::string format = "csv";
  bool trace = false;
  bool per_replication = false;
  bool run_to_max = false;
  bool check_invariants = false;
  int threads = 0;
};

void add_output_flags(CLI::App* cmd, SimFlags& f) {
  cmd->add_option("--out", f.out, "output file (default: stdout or $MINSIM_OUTPUT_DIR)");
  cmd->add_option("--format", f.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
}

void add_sim_flags(CLI::App* cmd, SimFlags& f) {
  for (const auto& def : kSimFlags) {
    cmd->add_option_function<std::string>(
        def.flag, [&f, key = def.key](const std::string& v) { f.values[key] = v; }, def.help);
  }
  cmd->add_option("--config", f.config_file, "key = value configuration file");
  cmd->add_flag("--trace", f.trace, "per-flit trace of the first replication on stderr");
  cmd->add_flag("--per-replication", f.per_replication, "also emit one row per replication");
  cmd->add_flag("--run-to-max", f.run_to_max, "keep running after steady state is reached");
  cmd->add_flag("--check-invariants", f.check_invariants, "full structural check every cycle");
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  add_output_flags(cmd, f);
}

bool is_axis(const std::string& key) {
  for (const auto& def : kSimFlags) {
    if (def.key == key) return def.axis;
  }
  return false;
}

// Scalar flags go to the config; axis flags become sweep axes when `sweep`.
minsim::ExperimentSpec build_sim_spec(const SimFlags& f, bool sweep, minsim::ExperimentSpec spec) {
  std::vector<std::pair<std::string, std::string>> scalars;
  for (const auto& [key, value] : f.values) {
    if (sweep && is_axis(key)) continue;
    scalars.emplace_back(key, value);
  }
  if (f.run_to_max) scalars.emplace_back("stop_at_steady_state", "false");
  if (f.check_invariants) scalars.emplace_back("check_invariants", "true");
  minsim::SimConfig base = minsim::parse_config(scalars, f.config_file);
  if (spec.kind == minsim::ExperimentKind::Figure) {
    // Figure presets fix some scalars; keep them unless overridden.
    if (!f.values.count("n_flits")) base.n_flits = spec.base.n_flits;
  }
  spec.base = base;
  if (sweep) {
    for (const auto& [key, value] : f.values) {
      if (!is_axis(key)) continue;
      if (key == "radix") spec.axes.radix = minsim::parse_int_list(value);
      if (key == "n_lanes") spec.axes.lanes = minsim::parse_int_list(value);
      if (key == "lane_capacity") spec.axes.lane_capacity = minsim::parse_int_list(value);
      if (key == "n_flits") spec.axes.flits = minsim::parse_int_list(value);
      if (key == "offered_load") spec.axes.load = minsim::parse_double_list(value);
    }
  }
  spec.output_path = f.out;
  spec.format = f.format == "json" ? minsim::OutputFormat::Json : minsim::OutputFormat::Csv;
  spec.per_replication_rows = f.per_replication;
  spec.threads = f.threads;
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flit-level simulator of multi-lane wormhole Delta networks"};
  app.require_subcommand(1);

  SimFlags sim_flags;
  auto* simulate = app.add_subcommand("simulate", "run one configuration");
  add_sim_flags(simulate, sim_flags);

  SimFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "run the product of list-valued axes");
  add_sim_flags(sweep, sweep_flags);

  SimFlags rel_flags;
  std::string rel_radix = "3:10";
  std::string rel_lanes = "1,2,4";
  std::string rel_r = "0.5:1.0:0.01";
  auto* reliability = app.add_subcommand("reliability", "terminal reliability sweep");
  reliability->add_option("--radix", rel_radix, "radix list");
  reliability->add_option("--lanes", rel_lanes, "lane count list");
  reliability->add_option("--r", rel_r, "lane reliability grid");
  add_output_flags(reliability, rel_flags);

  SimFlags cost_flags;
  std::string cost_radix = "3:10";
  std::string cost_lanes = "1";
  std::string cost_kinds = "proposed,egn,asen,pars,two-layered,three-layered";
  double se_cost = 4.0;
  auto* cost = app.add_subcommand("cost", "complexity and cost-unit sweep");
  cost->add_option("--radix", cost_radix, "radix list");
  cost->add_option("--lanes", cost_lanes, "lane count list");
  cost->add_option("--kinds", cost_kinds, "fabric kinds");
  cost->add_option("--se-cost", se_cost, "cost units of one single-lane 2x2 SE");
  add_output_flags(cost, cost_flags);

  SimFlags fig_flags;
  std::string fig_name;
  double fig_se_cost = 0.0;
  auto* figure = app.add_subcommand("figure", "regenerate a figure's data (fig5..fig11)");
  figure->add_option("name", fig_name, "figure name")->required();
  figure->add_option("--se-cost", fig_se_cost, "cost units per SE for fig8/fig9");
  add_sim_flags(figure, fig_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  minsim::ExperimentSpec spec;
  try {
    if (*simulate) {
      spec.kind = minsim::ExperimentKind::Simulate;
      spec = build_sim_spec(sim_flags, false, spec);
      if (sim_flags.trace) minsim::run(spec.base, spec.base.base_seed, &std::cerr);
    } else if (*sweep) {
      spec.kind = minsim::ExperimentKind::Sweep;
      spec = build_sim_spec(sweep_flags, true, spec);
    } else if (*reliability) {
      spec.kind = minsim::ExperimentKind::Reliability;
      spec.axes.radix = minsim::parse_int_list(rel_radix);
      spec.axes.lanes = minsim::parse_int_list(rel_lanes);
      spec.r_grid = minsim::parse_double_list(rel_r);
      spec.output_path = rel_flags.out;
      spec.format = rel_flags.format == "json" ? minsim::OutputFormat::Json : minsim::OutputFormat::Csv;
    } else if (*cost) {
      spec.kind = minsim::ExperimentKind::Cost;
      spec.axes.radix = minsim::parse_int_list(cost_radix);
      spec.axes.lanes = minsim::parse_int_list(cost_lanes);
      spec.fabrics.clear();
      std::string item;
      for (char c : cost_kinds + ",") {
        if (c != ',') {
          item.push_back(c);
        } else if (!item.empty()) {
          spec.fabrics.push_back(minsim::parse_fabric_kind(item));
          item.clear();
        }
      }
      spec.se_cost_units = se_cost;
      spec.output_path = cost_flags.out;
      spec.format = cost_flags.format == "json" ? minsim::OutputFormat::Json : minsim::OutputFormat::Csv;
    } else if (*figure) {
      // Axis flags replace the matching preset axis; the rest of the preset stays.
      spec = build_sim_spec(fig_flags, true, minsim::figure_spec(fig_name));
      if (fig_se_cost > 0.0) spec.se_cost_units = fig_se_cost;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return 2;
  }

  return minsim::run_experiment(spec, std::cout, std::cerr);
}
