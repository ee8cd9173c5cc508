#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace minsim {

// Terminal reliability of a multi-lane MIN. The unique input-output path
// crosses one buffer per stage; each buffer works while any of its lanes does.

// Product of the element reliabilities; 1 for an empty list.
double series_reliability(std::span<const double> r);

// 1 - product of failure probabilities; 0 for an empty list.
double parallel_reliability(std::span<const double> r);

double buffer_reliability(std::span<const double> lane_rs);

// General case with per-(stage, lane) reliabilities.
struct ReliabilityParams {
  std::vector<std::vector<double>> per_lane_r;  // [stage][lane]
  int n_lanes = 1;
  int stages = 1;

  static ReliabilityParams uniform(double r_flit, int n_lanes, int stages);
};

double min_reliability(const ReliabilityParams& params);

// Closed form when every lane has reliability r_flit.
double min_reliability_uniform(double r_flit, int n_lanes, int stages);

struct ReliabilityRow {
  int radix = 0;
  int n_lanes = 0;
  double r_flit = 0.0;
  double r_min = 0.0;
};

// Rows ordered radix-major, then lanes, then r_flit.
std::vector<ReliabilityRow> reliability_sweep(std::span<const double> r_grid,
                                              std::span<const int> lanes_list,
                                              std::span<const int> radix_list);

// Header radix,n_lanes,r_flit,R_MIN with six decimals per value.
void write_reliability_csv(std::ostream& os, std::span<const ReliabilityRow> rows);

}  // namespace minsim
