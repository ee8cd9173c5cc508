#include "minsim/reliability.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "minsim/topology.hpp"

namespace minsim {
namespace {

void check_probability(double r) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw ConfigError("reliability must be in [0, 1], got " + std::to_string(r));
  }
}

}  // namespace

double series_reliability(std::span<const double> r) {
  double out = 1.0;
  for (double v : r) {
    check_probability(v);
    out *= v;
  }
  return out;
}

double parallel_reliability(std::span<const double> r) {
  double fail = 1.0;
  for (double v : r) {
    check_probability(v);
    fail *= 1.0 - v;
  }
  return r.empty() ? 0.0 : 1.0 - fail;
}

double buffer_reliability(std::span<const double> lane_rs) { return parallel_reliability(lane_rs); }

ReliabilityParams ReliabilityParams::uniform(double r_flit, int n_lanes, int stages) {
  if (n_lanes < 1 || stages < 1) throw ConfigError("n_lanes and stages must be >= 1");
  ReliabilityParams p;
  p.n_lanes = n_lanes;
  p.stages = stages;
  p.per_lane_r.assign(static_cast<std::size_t>(stages),
                      std::vector<double>(static_cast<std::size_t>(n_lanes), r_flit));
  return p;
}

double min_reliability(const ReliabilityParams& params) {
  if (params.stages < 1 || params.n_lanes < 1) throw ConfigError("n_lanes and stages must be >= 1");
  if (params.per_lane_r.size() != static_cast<std::size_t>(params.stages)) {
    throw ConfigError("per_lane_r has " + std::to_string(params.per_lane_r.size()) +
                      " stages, expected " + std::to_string(params.stages));
  }
  std::vector<double> per_stage;
  per_stage.reserve(params.per_lane_r.size());
  for (const auto& lanes : params.per_lane_r) {
    if (lanes.size() != static_cast<std::size_t>(params.n_lanes)) {
      throw ConfigError("per_lane_r row has " + std::to_string(lanes.size()) + " lanes, expected " +
                        std::to_string(params.n_lanes));
    }
    per_stage.push_back(buffer_reliability(lanes));
  }
  return series_reliability(per_stage);
}

double min_reliability_uniform(double r_flit, int n_lanes, int stages) {
  check_probability(r_flit);
  if (n_lanes < 1 || stages < 1) throw ConfigError("n_lanes and stages must be >= 1");
  return std::pow(1.0 - std::pow(1.0 - r_flit, n_lanes), stages);
}

std::vector<ReliabilityRow> reliability_sweep(std::span<const double> r_grid,
                                              std::span<const int> lanes_list,
                                              std::span<const int> radix_list) {
  if (r_grid.empty() || lanes_list.empty() || radix_list.empty()) {
    throw ConfigError("reliability sweep axes must be non-empty");
  }
  std::vector<ReliabilityRow> rows;
  rows.reserve(r_grid.size() * lanes_list.size() * radix_list.size());
  for (int radix : radix_list) {
    for (int lanes : lanes_list) {
      for (double r : r_grid) {
        rows.push_back({radix, lanes, r, min_reliability_uniform(r, lanes, radix)});
      }
    }
  }
  return rows;
}

void write_reliability_csv(std::ostream& os, std::span<const ReliabilityRow> rows) {
  os << "radix,n_lanes,r_flit,R_MIN\n";
  char buf[96];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f\n", row.radix, row.n_lanes, row.r_flit,
                  row.r_min);
    os << buf;
  }
}

}  // namespace minsim
