#include "minsim/costmodel.hpp"

#include <cstdio>
#include <ostream>
#include <string>

#include "minsim/topology.hpp"

namespace minsim {
namespace {

int log2_exact(long long ports) {
  if (ports < 2 || (ports & (ports - 1)) != 0) {
    throw ConfigError("N must be a power of two >= 2, got " + std::to_string(ports));
  }
  int l = 0;
  while ((1LL << l) < ports) ++l;
  return l;
}

}  // namespace

std::string_view to_string(FabricKind kind) {
  switch (kind) {
    case FabricKind::Proposed: return "proposed";
    case FabricKind::EGN: return "egn";
    case FabricKind::ASEN: return "asen";
    case FabricKind::Pars: return "pars";
    case FabricKind::TwoLayered: return "two-layered";
    case FabricKind::ThreeLayered: return "three-layered";
  }
  return "unknown";
}

FabricKind parse_fabric_kind(std::string_view name) {
  for (FabricKind k : kAllFabrics) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown fabric kind '" + std::string(name) + "'");
}

double complexity(FabricKind kind, long long ports, int n_lanes) {
  const double n = static_cast<double>(ports);
  const double l = log2_exact(ports);
  if (n_lanes < 1) throw ConfigError("n_lanes must be >= 1");
  switch (kind) {
    case FabricKind::Proposed: return n / 2.0 * l * n_lanes;
    case FabricKind::EGN: return 6.0 * n + 3.0 * n * (l - 1.0);
    case FabricKind::ASEN: return 6.0 * n + 4.5 * n * (l - 2.0);
    case FabricKind::Pars: return 6.0 * n + 3.0 * n * (l - 1.0);
    case FabricKind::TwoLayered: return n / 2.0 * (l - 1.0) + 2.0 * n;
    case FabricKind::ThreeLayered: return n / 2.0 * (l - 1.0) + 3.0 * n;
  }
  throw ConfigError("unknown fabric kind");
}

double cost_units(FabricKind kind, long long ports, int n_lanes, const CostConfig& cfg) {
  if (!(cfg.se_cost_units > 0.0)) throw ConfigError("se_cost_units must be > 0");
  // The proposed complexity already carries the lane factor.
  const double lane_factor = kind == FabricKind::Proposed ? 1.0 : static_cast<double>(n_lanes);
  return complexity(kind, ports, n_lanes) * cfg.se_cost_units * lane_factor;
}

std::vector<CostRow> cost_sweep(std::span<const int> radix_list, std::span<const int> lanes_list,
                                std::span<const FabricKind> kinds, const CostConfig& cfg) {
  if (radix_list.empty() || lanes_list.empty() || kinds.empty()) {
    throw ConfigError("cost sweep axes must be non-empty");
  }
  std::vector<CostRow> rows;
  for (FabricKind kind : kinds) {
    for (int radix : radix_list) {
      if (radix < 1 || radix > 40) throw ConfigError("radix out of range: " + std::to_string(radix));
      const long long ports = 1LL << radix;
      for (int lanes : lanes_list) {
        rows.push_back({kind, radix, lanes, complexity(kind, ports, lanes),
                        cost_units(kind, ports, lanes, cfg)});
      }
    }
  }
  return rows;
}

void write_cost_csv(std::ostream& os, std::span<const CostRow> rows) {
  os << "kind,radix,n_lanes,complexity,cost_units\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%.10g,%.10g\n", std::string(to_string(r.kind)).c_str(),
                  r.radix, r.n_lanes, r.complexity, r.cost_units);
    os << buf;
  }
}

}  // namespace minsim
