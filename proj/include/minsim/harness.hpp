#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minsim/config.hpp"
#include "minsim/costmodel.hpp"
#include "minsim/metrics.hpp"

namespace minsim {

enum class ExperimentKind { Simulate, Sweep, Reliability, Cost, Figure };
enum class OutputFormat { Csv, Json };

// Swept values; an empty axis falls back to the scalar in the base config.
struct SweepAxes {
  std::vector<int> radix;
  std::vector<int> lanes;
  std::vector<int> lane_capacity;
  std::vector<int> flits;
  std::vector<double> load;
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::Simulate;
  std::string figure;  // fig5..fig11 when kind == Figure
  SimConfig base;
  SweepAxes axes;
  std::vector<double> r_grid;         // reliability
  std::vector<FabricKind> fabrics;    // cost
  std::optional<double> se_cost_units;
  bool per_replication_rows = false;
  int threads = 0;  // 0 = hardware concurrency
  std::string output_path;  // empty = standard output
  OutputFormat format = OutputFormat::Csv;
};

// "a,b,c", "start:stop" (step 1) or "start:stop:step"; inclusive of stop.
std::vector<int> parse_int_list(std::string_view text);
std::vector<double> parse_double_list(std::string_view text);

// Cartesian product of the axes over `base`, radix-major, load fastest.
std::vector<SimConfig> expand_points(const SimConfig& base, const SweepAxes& axes);

struct PointResult {
  SimConfig config;
  std::vector<RunResult> runs;  // one per replication, seed = base_seed + index
  AggregateRecord aggregate;
};

// Runs every (point, replication) pair, possibly on several threads. Results
// come back in point order with replications in index order.
std::vector<PointResult> run_points(const std::vector<SimConfig>& points, int threads = 0);

// Fixed-column simulation table.
std::vector<std::string_view> sim_csv_columns();
void write_sim_csv(std::ostream& os, const std::vector<PointResult>& results, bool per_replication);
void write_sim_json(std::ostream& os, const std::vector<PointResult>& results, bool per_replication);

// Preset for fig5..fig11. Throws ConfigError for an unknown name.
ExperimentSpec figure_spec(std::string_view name, const SimConfig& base = {});
bool figure_is_simulation(std::string_view name);

// Executes the experiment, writes its table and prints a short summary.
// Returns the process exit status (0 ok, 1 config error, 2 runtime failure).
int run_experiment(const ExperimentSpec& spec, std::ostream& summary, std::ostream& diag);

// Output path after applying the default-directory environment variable.
std::string resolve_output_path(const ExperimentSpec& spec);

inline constexpr const char* kOutputDirEnv = "MINSIM_OUTPUT_DIR";

}  // namespace minsim
