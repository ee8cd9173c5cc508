#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace minsim {

enum class FabricKind { Proposed, EGN, ASEN, Pars, TwoLayered, ThreeLayered };

inline constexpr std::array<FabricKind, 6> kAllFabrics = {
    FabricKind::Proposed, FabricKind::EGN,        FabricKind::ASEN,
    FabricKind::Pars,     FabricKind::TwoLayered, FabricKind::ThreeLayered};

std::string_view to_string(FabricKind kind);
FabricKind parse_fabric_kind(std::string_view name);

// Cost model: a 2x2 SE with single-lane storage costs `se_cost_units`,
// and cost scales linearly with the lane count.
struct CostConfig {
  double se_cost_units = 4.0;
};

// SE-count complexity. n_lanes only affects the proposed fabric; the
// comparison fabrics are single-lane designs.
double complexity(FabricKind kind, long long ports, int n_lanes = 1);

double cost_units(FabricKind kind, long long ports, int n_lanes, const CostConfig& cfg = {});

struct CostRow {
  FabricKind kind = FabricKind::Proposed;
  int radix = 0;
  int n_lanes = 0;
  double complexity = 0.0;
  double cost_units = 0.0;
};

// Rows ordered kind, radix, lanes.
std::vector<CostRow> cost_sweep(std::span<const int> radix_list, std::span<const int> lanes_list,
                                std::span<const FabricKind> kinds, const CostConfig& cfg = {});

// Header kind,radix,n_lanes,complexity,cost_units.
void write_cost_csv(std::ostream& os, std::span<const CostRow> rows);

}  // namespace minsim
