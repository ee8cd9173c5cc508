#include "minsim/traffic.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace minsim {
namespace {

constexpr int kMaxFlits = std::numeric_limits<std::uint16_t>::max();

void check_flits(int n_flits) {
  if (n_flits < 1 || n_flits > kMaxFlits) {
    throw ConfigError("n_flits must be in 1.." + std::to_string(kMaxFlits) + ", got " +
                      std::to_string(n_flits));
  }
}

}  // namespace

ArrivalModel ArrivalModel::from_load(double offered_load, int n_flits, LoadInterpretation how) {
  check_flits(n_flits);
  if (!(offered_load >= 0.0 && offered_load <= 1.0)) {
    throw ConfigError("offered_load must be in [0, 1], got " + std::to_string(offered_load));
  }
  ArrivalModel model;
  model.offered_load = offered_load;
  model.n_flits = n_flits;
  model.lambda = how == LoadInterpretation::FlitRate ? offered_load / n_flits : offered_load;
  return model;
}

std::vector<Packet> sample_arrivals(const ArrivalModel& model, const NetworkShape& shape, Rng& rng,
                                    std::int64_t cycle, PacketId& next_id) {
  std::vector<Packet> out;
  if (model.lambda <= 0.0) return out;
  std::bernoulli_distribution arrive(model.lambda);
  std::uniform_int_distribution<int> pick_dest(0, shape.ports - 1);
  for (int input = 0; input < shape.ports; ++input) {
    if (!arrive(rng)) continue;
    Packet p;
    p.id = next_id++;
    p.source = input;
    p.destination = pick_dest(rng);
    p.n_flits = model.n_flits;
    p.generated_cycle = cycle;
    out.push_back(p);
  }
  return out;
}

double binomial_first_stage_pmf(int n, double lambda, int k) {
  if (k < 1) throw ConfigError("k must be positive");
  if (!(lambda >= 0.0 && lambda <= k)) {
    throw ConfigError("lambda must be in [0, k], got " + std::to_string(lambda));
  }
  if (n < 0 || n > k) return 0.0;
  const double p = lambda / k;
  double choose = 1.0;
  for (int i = 1; i <= n; ++i) choose = choose * (k - n + i) / i;
  return choose * std::pow(p, n) * std::pow(1.0 - p, k - n);
}

std::vector<Flit> flitize(const Packet& packet) {
  check_flits(packet.n_flits);
  std::vector<Flit> flits;
  flits.reserve(static_cast<std::size_t>(packet.n_flits));
  for (int seq = 0; seq < packet.n_flits; ++seq) flits.push_back(make_flit(packet, seq));
  return flits;
}

}  // namespace minsim
