#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "minsim/topology.hpp"

namespace minsim {

using Rng = std::mt19937_64;
using PacketId = std::uint64_t;

struct Packet {
  PacketId id = 0;
  int source = 0;
  int destination = 0;
  int n_flits = 1;
  std::int64_t generated_cycle = 0;
  std::optional<std::int64_t> injected_cycle;
  std::optional<std::int64_t> delivered_cycle;
};

enum class FlitKind : std::uint8_t { Header, Body, Tail, HeaderTail };

struct Flit {
  PacketId packet_id = 0;
  FlitKind kind = FlitKind::Header;
  std::uint16_t seq = 0;
  // Destination tag; only meaningful on a header flit, -1 otherwise.
  std::int32_t tag = -1;

  bool is_header() const { return kind == FlitKind::Header || kind == FlitKind::HeaderTail; }
  bool is_tail() const { return kind == FlitKind::Tail || kind == FlitKind::HeaderTail; }
};

inline FlitKind flit_kind(int seq, int n_flits) {
  if (n_flits == 1) return FlitKind::HeaderTail;
  if (seq == 0) return FlitKind::Header;
  if (seq == n_flits - 1) return FlitKind::Tail;
  return FlitKind::Body;
}

inline Flit make_flit(const Packet& packet, int seq) {
  Flit f;
  f.packet_id = packet.id;
  f.seq = static_cast<std::uint16_t>(seq);
  f.kind = flit_kind(seq, packet.n_flits);
  f.tag = f.is_header() ? packet.destination : -1;
  return f;
}

enum class LoadInterpretation : std::uint8_t { FlitRate, PacketRate };

// Bernoulli arrival process: each input generates a packet with probability
// `lambda` per cycle. Under the flit-rate reading the offered load is the flit
// injection rate per input, so lambda = load / n_flits.
struct ArrivalModel {
  double lambda = 0.0;
  double offered_load = 0.0;
  int n_flits = 1;

  static ArrivalModel from_load(double offered_load, int n_flits, LoadInterpretation how);
};

// Draws this cycle's arrivals for every input in index order. Ids are taken
// from `next_id`, which is advanced.
std::vector<Packet> sample_arrivals(const ArrivalModel& model, const NetworkShape& shape, Rng& rng,
                                    std::int64_t cycle, PacketId& next_id);

// Probability that n of k first-stage inputs carry a packet in one cycle,
// bin(k, lambda/k). Zero outside 0..k.
double binomial_first_stage_pmf(int n, double lambda, int k = 2);

std::vector<Flit> flitize(const Packet& packet);

}  // namespace minsim
