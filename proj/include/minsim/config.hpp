#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "minsim/traffic.hpp"

namespace minsim {

enum class Normalization : std::uint8_t { PerPort, Eq5 };
enum class LaneSelection : std::uint8_t { Lowest, Random };

// Full parameter set of one simulation point. Defaults are the documented
// command-line defaults.
struct SimConfig {
  int radix = 4;
  int n_lanes = 2;
  int lane_capacity = 2;     // flits per lane
  int channel_capacity = 0;  // when > 0, lane_capacity = channel_capacity / n_lanes
  int n_flits = 12;
  double offered_load = 0.5;
  LoadInterpretation load_interpretation = LoadInterpretation::FlitRate;
  std::int64_t warmup_cycles = 1000;
  std::int64_t max_cycles = 20000;
  std::int64_t steady_window = 1000;
  int steady_windows_required = 5;
  double steady_tolerance = 0.04;
  bool stop_at_steady_state = true;
  int replications = 10;
  std::uint64_t base_seed = 1;
  Normalization normalization = Normalization::PerPort;
  LaneSelection lane_selection = LaneSelection::Lowest;
  bool check_invariants = false;

  int effective_lane_capacity() const;
  ArrivalModel arrival_model() const;

  // Throws ConfigError naming the first offending key.
  void validate() const;

  // True when both configs describe the same experiment point (seed and
  // replication count are ignored).
  bool same_point(const SimConfig& other) const;
};

std::string_view to_string(LoadInterpretation v);
std::string_view to_string(Normalization v);
std::string_view to_string(LaneSelection v);

LoadInterpretation parse_load_interpretation(std::string_view s);
Normalization parse_normalization(std::string_view s);
LaneSelection parse_lane_selection(std::string_view s);

// Sets one field from its textual form. Keys use the field names above.
// Throws ConfigError for an unknown key or a malformed value.
void set_config_value(SimConfig& cfg, std::string_view key, std::string_view value);

// Reads "key = value" lines ('#' starts a comment) on top of `base`.
SimConfig load_config_file(const std::string& path, SimConfig base = {});

// Defaults, then the optional file, then the explicit (key, value)
// overrides, then validation.
SimConfig parse_config(std::span<const std::pair<std::string, std::string>> overrides,
                       const std::string& config_file = {});

}  // namespace minsim
