#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "minsim/config.hpp"
#include "minsim/topology.hpp"
#include "minsim/traffic.hpp"

namespace minsim {

struct MetricsRecord {
  std::int64_t cycles_measured = 0;
  std::int64_t termination_cycle = 0;
  std::int64_t packets_generated = 0;
  std::int64_t flits_delivered = 0;
  std::int64_t packets_delivered = 0;
  std::int64_t undelivered_packets = 0;
  double throughput_flits_per_cycle = 0.0;
  double normalized_throughput = 0.0;
  double mean_wait = 0.0;
  double mean_service = 0.0;
  double mean_total_delay = 0.0;
  double buffer_utilization = 0.0;
  bool steady_state_reached = false;
  // Longest run of cycles with packets present but nothing delivered.
  std::int64_t max_stall_cycles = 0;
};

// Contention-free delay of one packet: the header needs L cycles to leave the
// fabric and the remaining flits follow one per cycle.
std::int64_t ideal_delay(int stages, int packet_length);

// Packets per cycle when N_max packets circulate without contention.
double max_throughput(double n_max, int stages, int packet_length);

// Per-port normalization: delivered flits per cycle over the N ports.
double normalized_throughput(double flits_per_cycle, const NetworkShape& shape);

// Alternate normalization against the contention-free packet rate with N_max = N.
double normalized_throughput_eq5(double packets_per_cycle, const NetworkShape& shape,
                                 int packet_length);

double buffer_utilization(std::int64_t busy_lanes, std::int64_t total_lanes);

struct DelayBreakdown {
  std::int64_t wait = 0;
  std::int64_t service = 0;
  std::int64_t traverse = 0;
  std::int64_t total = 0;
};

// Empty when the packet has not been both injected and delivered.
std::optional<DelayBreakdown> delay_decomposition(const Packet& packet, const NetworkShape& shape);

class DelayAccumulator {
 public:
  void add(const DelayBreakdown& d);
  std::int64_t count() const { return count_; }
  double mean_wait() const;
  double mean_service() const;
  double mean_total() const;

 private:
  std::int64_t count_ = 0;
  double wait_ = 0.0;
  double service_ = 0.0;
  double total_ = 0.0;
};

// Keeps the most recent per-window statistics and reports convergence once
// enough mutually exclusive windows agree to within `tolerance` of their mean.
class SteadyStateDetector {
 public:
  SteadyStateDetector(std::int64_t window_cycles = 1000, int windows_required = 5,
                      double tolerance = 0.04);

  bool update(double window_value);
  bool converged() const;

  std::int64_t window_cycles() const { return window_cycles_; }
  int windows_required() const { return windows_required_; }
  double tolerance() const { return tolerance_; }
  const std::deque<double>& windows() const { return windows_; }

 private:
  std::int64_t window_cycles_;
  int windows_required_;
  double tolerance_;
  std::deque<double> windows_;
};

bool steady_state_update(SteadyStateDetector& detector, double window_value);

// Same rule applied to an explicit list of window values.
bool windows_converged(std::span<const double> windows, double tolerance);

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single record
};

struct MetricField {
  std::string_view name;
  double (*get)(const MetricsRecord&);
};

// Numeric fields in CSV order.
std::span<const MetricField> metric_fields();

struct RunResult {
  SimConfig config;
  std::uint64_t seed = 0;
  MetricsRecord metrics;
};

struct AggregateRecord {
  SimConfig config;
  int replications = 0;
  std::vector<Summary> fields;  // parallel to metric_fields()
  // True only when every replication reached steady state.
  bool all_steady = false;
  int steady_count = 0;

  const Summary& get(std::string_view name) const;
};

// Throws ConfigError when the records mix different experiment points.
AggregateRecord aggregate_replications(std::span<const RunResult> records);

}  // namespace minsim
