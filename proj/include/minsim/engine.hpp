#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <unordered_map>
#include <vector>

#include "minsim/config.hpp"
#include "minsim/metrics.hpp"
#include "minsim/topology.hpp"
#include "minsim/traffic.hpp"

namespace minsim {

// Stateless uniform draw in [0, n) keyed by (seed, cycle, channel). Every
// contention decision in the fabric goes through this so that a run is a pure
// function of its seed.
std::uint64_t splitmix64(std::uint64_t x);
int arbitration_draw(std::uint64_t seed, std::int64_t cycle, std::uint64_t channel, int n);

// One FIFO segment of a channel buffer. Holds flits of at most one packet.
class Lane {
 public:
  explicit Lane(int capacity = 1);

  int capacity() const { return static_cast<int>(slots_.size()); }
  int size() const { return count_; }
  bool empty() const { return count_ == 0; }
  bool full() const { return count_ == capacity(); }

  const Flit& front() const { return slots_[static_cast<std::size_t>(head_)]; }
  const Flit& at(int i) const { return slots_[static_cast<std::size_t>(wrap(head_ + i))]; }
  // Both throw std::logic_error on overflow / underflow.
  void push(const Flit& f) {
    if (full()) overflow();
    slots_[static_cast<std::size_t>(wrap(head_ + count_))] = f;
    ++count_;
  }
  Flit pop() {
    if (empty()) underflow();
    Flit f = slots_[static_cast<std::size_t>(head_)];
    head_ = wrap(head_ + 1);
    --count_;
    return f;
  }

  std::optional<PacketId> owner;
  // Output port this worm leaves through; set when the header arrives.
  int out_port = -1;
  // Lane index granted to this worm in the downstream buffer; -1 for none/sink.
  int reserved_next = -1;

 private:
  int wrap(int i) const { return i >= capacity() ? i - capacity() : i; }
  [[noreturn]] static void overflow();
  [[noreturn]] static void underflow();

  std::vector<Flit> slots_;
  int head_ = 0;
  int count_ = 0;
};

struct SwitchBuffer {
  std::vector<Lane> lanes;
};

// Lowest-index lane without an owner, which becomes owned by the header's
// packet. Empty when every lane is owned.
std::optional<int> allocate_lane(SwitchBuffer& buffer, const Flit& header);

// Endpoint of one flit move. Stage -1 is a source queue, stage L a sink; in
// both cases `line` is the port index and `lane` is unused.
struct LaneRef {
  int stage = 0;
  int line = 0;
  int lane = -1;

  friend bool operator==(const LaneRef&, const LaneRef&) = default;
};

struct AdvanceGrant {
  LaneRef from;
  LaneRef to;
  Flit flit;
};

struct DeliveryEvent {
  std::int64_t cycle = 0;
  int sink = 0;
  PacketId packet_id = 0;
  int seq = 0;
};

struct EngineParams {
  NetworkShape shape;
  int n_lanes = 1;
  int lane_capacity = 2;
  LaneSelection lane_selection = LaneSelection::Lowest;
  std::uint64_t arbitration_seed = 0;
  bool record_deliveries = false;
};

// Discrete-time wormhole fabric. Each cycle has two sub-periods: a flow
// control pass from the last stage back to the sources that decides which
// head flits may advance, then a data pass that moves them one hop.
class Network {
 public:
  explicit Network(EngineParams params);

  const NetworkShape& shape() const { return params_.shape; }
  const EngineParams& params() const { return params_; }
  std::int64_t cycle() const { return cycle_; }

  // Appends a packet to its source queue (FCFS).
  void enqueue(const Packet& packet);

  std::vector<AdvanceGrant> flow_control_pass();
  void data_pass(const std::vector<AdvanceGrant>& grants);
  // One full cycle: flow control, data movement, cycle counter advance.
  std::vector<AdvanceGrant> step();

  // Buffer at the input of `stage` fed by `line`.
  const SwitchBuffer& buffer(int stage, int line) const;
  const SwitchBuffer& buffer(const PortAddress& input) const;
  const std::deque<Packet>& source_queue(int input) const { return sources_.at(input).queue; }
  // Oldest packet still streaming out of `input`, if any.
  std::optional<PacketId> injecting(int input) const;
  // Packets with flits still to send from `input`, oldest first.
  int streams(int input) const { return static_cast<int>(sources_.at(input).active.size()); }

  std::int64_t total_lanes() const {
    return static_cast<std::int64_t>(buffers_.size()) * params_.n_lanes;
  }
  // Owned lanes as seen by the most recent flow control pass.
  std::int64_t busy_lanes_at_last_pass() const { return busy_at_pass_; }
  std::int64_t busy_lanes() const;
  std::int64_t resident_flits() const;
  std::int64_t queued_flits() const { return queued_flits_; }
  std::int64_t generated_flits() const { return generated_flits_; }
  std::int64_t delivered_flits() const { return delivered_flits_; }
  std::int64_t generated_packets() const { return generated_packets_; }
  std::int64_t delivered_packets() const { return delivered_packets_; }
  std::int64_t live_packets() const { return generated_packets_ - delivered_packets_; }

  const std::vector<DeliveryEvent>& deliveries() const { return deliveries_; }

  // Called with the completed packet record when its tail reaches a sink.
  std::function<void(const Packet&)> on_delivered;
  // Per-flit event lines "cycle event packet_id stage se lane" when set.
  std::ostream* trace = nullptr;

  // Full structural check; throws std::logic_error on the first violation.
  void check_invariants() const;

 private:
  // A packet whose header has left the source but whose tail has not. The
  // input link interleaves these like any other multi-lane channel.
  struct Stream {
    PacketId id = 0;
    int n_flits = 0;
    int destination = 0;
    int next_seq = 0;
    int lane = -1;
  };

  struct Source {
    std::deque<Packet> queue;
    std::vector<Stream> active;
  };

  struct LivePacket {
    Packet packet;
    int delivered_flits = 0;
  };

  std::size_t buffer_index(int stage, int line) const {
    return static_cast<std::size_t>(stage) * params_.shape.ports + line;
  }
  std::size_t flag_index(int stage, int line, int lane) const {
    return buffer_index(stage, line) * static_cast<std::size_t>(params_.n_lanes) + lane;
  }
  Lane& lane_at(int stage, int line, int lane) {
    return buffers_[buffer_index(stage, line)].lanes[static_cast<std::size_t>(lane)];
  }
  const Lane& lane_at(int stage, int line, int lane) const {
    return buffers_[buffer_index(stage, line)].lanes[static_cast<std::size_t>(lane)];
  }
  int free_slots(int stage, int line, int lane) const {
    const Lane& l = lane_at(stage, line, lane);
    return l.capacity() - l.size() + departing_[flag_index(stage, line, lane)];
  }
  std::optional<int> claim_lane(int stage, int line, const Flit& header, std::uint64_t channel);
  bool has_free_lane(int stage, int line) const;
  void emit(const char* event, const Flit& f, int stage, int se, int lane) const;
  void check_conservation() const;

  EngineParams params_;
  std::vector<SwitchBuffer> buffers_;  // indexed by stage * N + line
  std::vector<char> departing_;
  std::vector<int> owned_;  // owned lanes per buffer
  std::vector<Source> sources_;
  std::unordered_map<PacketId, LivePacket> live_;
  std::vector<DeliveryEvent> deliveries_;
  std::int64_t cycle_ = 0;
  std::int64_t queued_flits_ = 0;
  std::int64_t resident_flits_ = 0;
  std::int64_t generated_flits_ = 0;
  std::int64_t delivered_flits_ = 0;
  std::int64_t generated_packets_ = 0;
  std::int64_t delivered_packets_ = 0;
  std::int64_t busy_at_pass_ = 0;
  struct Candidate {
    int line;
    int lane;
  };
  std::vector<Candidate> candidates_[2];
};

// Runs one seeded simulation of `config` and returns its metrics.
MetricsRecord run(const SimConfig& config, std::uint64_t seed, std::ostream* trace = nullptr);

}  // namespace minsim
