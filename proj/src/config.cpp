#include "minsim/config.hpp"

#include <charconv>
#include <fstream>
#include <string>

namespace minsim {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw ConfigError(std::string(key) + ": expected " + std::string(want) + ", got '" +
                    std::string(value) + "'");
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view value) {
  Int out{};
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) bad_value(key, value, "an integer");
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  // from_chars for double is not available in every libstdc++ we target.
  const std::string text(value);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(text, &used);
  } catch (const std::exception&) {
    bad_value(key, value, "a number");
  }
  if (used != text.size()) bad_value(key, value, "a number");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  bad_value(key, value, "a boolean");
}

void require(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ConfigError(std::string(key) + ": " + what);
}

}  // namespace

int SimConfig::effective_lane_capacity() const {
  if (channel_capacity > 0) return channel_capacity / n_lanes;
  return lane_capacity;
}

ArrivalModel SimConfig::arrival_model() const {
  return ArrivalModel::from_load(offered_load, n_flits, load_interpretation);
}

void SimConfig::validate() const {
  require(radix >= 1 && radix <= 20, "radix", "must be in 1..20");
  require(n_lanes >= 1, "n_lanes", "must be >= 1");
  require(lane_capacity >= 1, "lane_capacity", "must be >= 1");
  require(channel_capacity >= 0, "channel_capacity", "must be >= 0");
  require(effective_lane_capacity() >= 1, "channel_capacity",
          "must provide at least one flit per lane");
  require(n_flits >= 1 && n_flits <= 65535, "n_flits", "must be in 1..65535");
  require(offered_load >= 0.0 && offered_load <= 1.0, "offered_load", "must be in [0, 1]");
  require(warmup_cycles >= 0, "warmup_cycles", "must be >= 0");
  require(max_cycles > warmup_cycles, "max_cycles", "must exceed warmup_cycles");
  require(steady_window >= 1, "steady_window", "must be >= 1");
  require(steady_windows_required >= 2, "steady_windows_required", "must be >= 2");
  require(steady_tolerance > 0.0, "steady_tolerance", "must be > 0");
  require(replications >= 1, "replications", "must be >= 1");
}

bool SimConfig::same_point(const SimConfig& o) const {
  return radix == o.radix && n_lanes == o.n_lanes &&
         effective_lane_capacity() == o.effective_lane_capacity() && n_flits == o.n_flits &&
         offered_load == o.offered_load && load_interpretation == o.load_interpretation &&
         warmup_cycles == o.warmup_cycles && max_cycles == o.max_cycles &&
         steady_window == o.steady_window &&
         steady_windows_required == o.steady_windows_required &&
         steady_tolerance == o.steady_tolerance &&
         stop_at_steady_state == o.stop_at_steady_state && normalization == o.normalization &&
         lane_selection == o.lane_selection;
}

std::string_view to_string(LoadInterpretation v) {
  return v == LoadInterpretation::FlitRate ? "flit-rate" : "packet-rate";
}

std::string_view to_string(Normalization v) {
  return v == Normalization::PerPort ? "per-port" : "eq5";
}

std::string_view to_string(LaneSelection v) {
  return v == LaneSelection::Lowest ? "lowest" : "random";
}

LoadInterpretation parse_load_interpretation(std::string_view s) {
  if (s == "flit-rate") return LoadInterpretation::FlitRate;
  if (s == "packet-rate") return LoadInterpretation::PacketRate;
  bad_value("load_interpretation", s, "flit-rate or packet-rate");
}

Normalization parse_normalization(std::string_view s) {
  if (s == "per-port") return Normalization::PerPort;
  if (s == "eq5") return Normalization::Eq5;
  bad_value("normalization", s, "per-port or eq5");
}

LaneSelection parse_lane_selection(std::string_view s) {
  if (s == "lowest") return LaneSelection::Lowest;
  if (s == "random") return LaneSelection::Random;
  bad_value("lane_selection", s, "lowest or random");
}

void set_config_value(SimConfig& cfg, std::string_view key, std::string_view raw) {
  const std::string_view v = trim(raw);
  if (key == "radix") {
    cfg.radix = parse_int<int>(key, v);
  } else if (key == "n_lanes") {
    cfg.n_lanes = parse_int<int>(key, v);
  } else if (key == "lane_capacity") {
    cfg.lane_capacity = parse_int<int>(key, v);
  } else if (key == "channel_capacity") {
    cfg.channel_capacity = parse_int<int>(key, v);
  } else if (key == "n_flits") {
    cfg.n_flits = parse_int<int>(key, v);
  } else if (key == "offered_load") {
    cfg.offered_load = parse_double(key, v);
  } else if (key == "load_interpretation") {
    cfg.load_interpretation = parse_load_interpretation(v);
  } else if (key == "warmup_cycles") {
    cfg.warmup_cycles = parse_int<std::int64_t>(key, v);
  } else if (key == "max_cycles") {
    cfg.max_cycles = parse_int<std::int64_t>(key, v);
  } else if (key == "steady_window") {
    cfg.steady_window = parse_int<std::int64_t>(key, v);
  } else if (key == "steady_windows_required") {
    cfg.steady_windows_required = parse_int<int>(key, v);
  } else if (key == "steady_tolerance") {
    cfg.steady_tolerance = parse_double(key, v);
  } else if (key == "stop_at_steady_state") {
    cfg.stop_at_steady_state = parse_bool(key, v);
  } else if (key == "replications") {
    cfg.replications = parse_int<int>(key, v);
  } else if (key == "base_seed") {
    cfg.base_seed = parse_int<std::uint64_t>(key, v);
  } else if (key == "normalization") {
    cfg.normalization = parse_normalization(v);
  } else if (key == "lane_selection") {
    cfg.lane_selection = parse_lane_selection(v);
  } else if (key == "check_invariants") {
    cfg.check_invariants = parse_bool(key, v);
  } else {
    throw ConfigError("unknown key '" + std::string(key) + "'");
  }
}

SimConfig load_config_file(const std::string& path, SimConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) {
      body = body.substr(0, hash);
    }
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    set_config_value(base, trim(body.substr(0, eq)), body.substr(eq + 1));
  }
  return base;
}

SimConfig parse_config(std::span<const std::pair<std::string, std::string>> overrides,
                       const std::string& config_file) {
  SimConfig cfg = config_file.empty() ? SimConfig{} : load_config_file(config_file);
  for (const auto& [key, value] : overrides) set_config_value(cfg, key, value);
  cfg.validate();
  return cfg;
}

}  // namespace minsim
