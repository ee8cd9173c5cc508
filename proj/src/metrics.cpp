#include "minsim/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace minsim {

std::int64_t ideal_delay(int stages, int packet_length) {
  if (stages < 1 || packet_length < 1) throw ConfigError("ideal_delay needs L >= 1 and P >= 1");
  return static_cast<std::int64_t>(stages) + packet_length - 1;
}

double max_throughput(double n_max, int stages, int packet_length) {
  if (!(n_max >= 1.0)) throw ConfigError("N_max must be >= 1");
  return n_max / static_cast<double>(ideal_delay(stages, packet_length));
}

double normalized_throughput(double flits_per_cycle, const NetworkShape& shape) {
  if (flits_per_cycle < 0.0) throw ConfigError("throughput must be non-negative");
  return flits_per_cycle / shape.ports;
}

double normalized_throughput_eq5(double packets_per_cycle, const NetworkShape& shape,
                                 int packet_length) {
  if (packets_per_cycle < 0.0) throw ConfigError("throughput must be non-negative");
  return packets_per_cycle / max_throughput(shape.ports, shape.radix, packet_length);
}

double buffer_utilization(std::int64_t busy_lanes, std::int64_t total_lanes) {
  if (total_lanes <= 0) return 0.0;
  return static_cast<double>(busy_lanes) / static_cast<double>(total_lanes);
}

std::optional<DelayBreakdown> delay_decomposition(const Packet& packet, const NetworkShape& shape) {
  if (!packet.injected_cycle || !packet.delivered_cycle) return std::nullopt;
  DelayBreakdown d;
  d.wait = *packet.injected_cycle - packet.generated_cycle;
  d.traverse = shape.radix - 1;
  d.service = *packet.delivered_cycle - *packet.injected_cycle - d.traverse;
  d.total = d.wait + d.service + d.traverse;
  return d;
}

void DelayAccumulator::add(const DelayBreakdown& d) {
  ++count_;
  wait_ += static_cast<double>(d.wait);
  service_ += static_cast<double>(d.service);
  total_ += static_cast<double>(d.total);
}

double DelayAccumulator::mean_wait() const { return count_ ? wait_ / count_ : 0.0; }
double DelayAccumulator::mean_service() const { return count_ ? service_ / count_ : 0.0; }
double DelayAccumulator::mean_total() const { return count_ ? total_ / count_ : 0.0; }

SteadyStateDetector::SteadyStateDetector(std::int64_t window_cycles, int windows_required,
                                         double tolerance)
    : window_cycles_(window_cycles), windows_required_(windows_required), tolerance_(tolerance) {
  if (window_cycles_ < 1) throw ConfigError("steady_window must be >= 1");
  if (windows_required_ < 2) throw ConfigError("steady_windows_required must be >= 2");
  if (!(tolerance_ > 0.0)) throw ConfigError("steady_tolerance must be > 0");
}

bool SteadyStateDetector::update(double window_value) {
  windows_.push_back(window_value);
  while (static_cast<int>(windows_.size()) > windows_required_) windows_.pop_front();
  return converged();
}

bool SteadyStateDetector::converged() const {
  if (static_cast<int>(windows_.size()) < windows_required_) return false;
  const std::vector<double> values(windows_.begin(), windows_.end());
  return windows_converged(values, tolerance_);
}

bool steady_state_update(SteadyStateDetector& detector, double window_value) {
  return detector.update(window_value);
}

bool windows_converged(std::span<const double> windows, double tolerance) {
  if (windows.size() < 2) return false;
  double mean = 0.0;
  for (double v : windows) mean += v;
  mean /= static_cast<double>(windows.size());
  if (mean == 0.0) {
    return std::all_of(windows.begin(), windows.end(), [](double v) { return v == 0.0; });
  }
  double ss = 0.0;
  for (double v : windows) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(windows.size() - 1));
  return sd <= tolerance * std::abs(mean);
}

namespace {

template <auto Member>
double field(const MetricsRecord& r) {
  return static_cast<double>(r.*Member);
}

constexpr std::array<MetricField, 12> kFields{{
    {"cycles_measured", &field<&MetricsRecord::cycles_measured>},
    {"packets_delivered", &field<&MetricsRecord::packets_delivered>},
    {"flits_delivered", &field<&MetricsRecord::flits_delivered>},
    {"throughput_flits_per_cycle", &field<&MetricsRecord::throughput_flits_per_cycle>},
    {"normalized_throughput", &field<&MetricsRecord::normalized_throughput>},
    {"mean_wait", &field<&MetricsRecord::mean_wait>},
    {"mean_service", &field<&MetricsRecord::mean_service>},
    {"mean_total_delay", &field<&MetricsRecord::mean_total_delay>},
    {"buffer_utilization", &field<&MetricsRecord::buffer_utilization>},
    {"undelivered_packets", &field<&MetricsRecord::undelivered_packets>},
    {"termination_cycle", &field<&MetricsRecord::termination_cycle>},
    {"max_stall_cycles", &field<&MetricsRecord::max_stall_cycles>},
}};

}  // namespace

std::span<const MetricField> metric_fields() { return kFields; }

const Summary& AggregateRecord::get(std::string_view name) const {
  const auto all = metric_fields();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].name == name) return fields.at(i);
  }
  throw std::out_of_range("no metric named " + std::string(name));
}

AggregateRecord aggregate_replications(std::span<const RunResult> records) {
  if (records.empty()) throw ConfigError("aggregate_replications needs at least one record");
  for (const auto& r : records) {
    if (!r.config.same_point(records.front().config)) {
      throw ConfigError("aggregate_replications: records come from different configurations");
    }
  }
  AggregateRecord agg;
  agg.config = records.front().config;
  agg.replications = static_cast<int>(records.size());
  const auto all = metric_fields();
  agg.fields.resize(all.size());
  const double n = static_cast<double>(records.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    double mean = 0.0;
    for (const auto& r : records) mean += all[i].get(r.metrics);
    mean /= n;
    double ss = 0.0;
    for (const auto& r : records) {
      const double d = all[i].get(r.metrics) - mean;
      ss += d * d;
    }
    agg.fields[i] = Summary{mean, records.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
  }
  agg.steady_count = static_cast<int>(std::count_if(
      records.begin(), records.end(), [](const RunResult& r) { return r.metrics.steady_state_reached; }));
  agg.all_steady = agg.steady_count == agg.replications;
  return agg;
}

}  // namespace minsim
