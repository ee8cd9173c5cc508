#include "minsim/engine.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <string>

namespace minsim {
namespace {

// Line carried by port `port` of SE `se` at a stage resolving address bit `bit`.
inline int se_line(int se, int bit, int port) {
  const int low = se & ((1 << bit) - 1);
  return ((se >> bit) << (bit + 1)) | (port << bit) | low;
}

inline int line_se(int line, int bit) {
  const int low = line & ((1 << bit) - 1);
  return ((line >> (bit + 1)) << bit) | low;
}

[[noreturn]] void fail(const std::string& what) {
  throw std::logic_error("engine invariant violated: " + what);
}

constexpr std::uint64_t kLaneDrawSalt = 0x8000000000000000ULL;

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int arbitration_draw(std::uint64_t seed, std::int64_t cycle, std::uint64_t channel, int n) {
  if (n <= 1) return 0;
  const std::uint64_t h =
      splitmix64(splitmix64(seed ^ static_cast<std::uint64_t>(cycle)) ^ channel);
  return static_cast<int>((static_cast<unsigned __int128>(h) * static_cast<unsigned>(n)) >> 64);
}

Lane::Lane(int capacity) : slots_(static_cast<std::size_t>(std::max(capacity, 1))) {}

void Lane::overflow() { fail("push into a full lane"); }
void Lane::underflow() { fail("pop from an empty lane"); }

std::optional<int> allocate_lane(SwitchBuffer& buffer, const Flit& header) {
  for (std::size_t i = 0; i < buffer.lanes.size(); ++i) {
    if (!buffer.lanes[i].owner) {
      buffer.lanes[i].owner = header.packet_id;
      return static_cast<int>(i);
    }
  }
  return std::nullopt;
}

Network::Network(EngineParams params) : params_(std::move(params)) {
  const auto& shape = params_.shape;
  if (shape.radix < 1) throw ConfigError("engine needs a built NetworkShape");
  if (params_.n_lanes < 1) throw ConfigError("n_lanes must be >= 1");
  if (params_.lane_capacity < 1) throw ConfigError("lane_capacity must be >= 1");
  SwitchBuffer proto;
  proto.lanes.assign(static_cast<std::size_t>(params_.n_lanes), Lane(params_.lane_capacity));
  buffers_.assign(static_cast<std::size_t>(shape.radix) * shape.ports, proto);
  departing_.assign(static_cast<std::size_t>(total_lanes()), 0);
  owned_.assign(buffers_.size(), 0);
  sources_.resize(static_cast<std::size_t>(shape.ports));
  for (auto& c : candidates_) c.reserve(static_cast<std::size_t>(2 * params_.n_lanes));
}

void Network::enqueue(const Packet& packet) {
  const auto& shape = params_.shape;
  if (packet.source < 0 || packet.source >= shape.ports) throw ConfigError("packet source out of range");
  if (packet.destination < 0 || packet.destination >= shape.ports) {
    throw ConfigError("packet destination out of range");
  }
  if (packet.n_flits < 1) throw ConfigError("packet must have at least one flit");
  sources_[static_cast<std::size_t>(packet.source)].queue.push_back(packet);
  queued_flits_ += packet.n_flits;
  generated_flits_ += packet.n_flits;
  ++generated_packets_;
}

const SwitchBuffer& Network::buffer(int stage, int line) const {
  if (stage < 0 || stage >= params_.shape.radix || line < 0 || line >= params_.shape.ports) {
    throw std::out_of_range("buffer index out of range");
  }
  return buffers_[buffer_index(stage, line)];
}

const SwitchBuffer& Network::buffer(const PortAddress& input) const {
  return buffer(input.stage, line_of(input, params_.shape));
}

std::optional<PacketId> Network::injecting(int input) const {
  const auto& active = sources_.at(input).active;
  if (active.empty()) return std::nullopt;
  return active.front().id;
}

std::int64_t Network::busy_lanes() const {
  std::int64_t n = 0;
  for (const auto& b : buffers_) {
    for (const auto& l : b.lanes) n += l.owner.has_value();
  }
  return n;
}

std::int64_t Network::resident_flits() const {
  std::int64_t n = 0;
  for (const auto& b : buffers_) {
    for (const auto& l : b.lanes) n += l.size();
  }
  return n;
}

bool Network::has_free_lane(int stage, int line) const {
  return owned_[buffer_index(stage, line)] < params_.n_lanes;
}

std::optional<int> Network::claim_lane(int stage, int line, const Flit& header,
                                       std::uint64_t channel) {
  const std::size_t idx = buffer_index(stage, line);
  SwitchBuffer& buf = buffers_[idx];
  if (params_.lane_selection == LaneSelection::Lowest) {
    const auto lane = allocate_lane(buf, header);
    if (lane) ++owned_[idx];
    return lane;
  }
  int free = 0;
  for (const auto& l : buf.lanes) free += !l.owner;
  if (free == 0) return std::nullopt;
  int pick = arbitration_draw(params_.arbitration_seed, cycle_, channel | kLaneDrawSalt, free);
  for (std::size_t i = 0; i < buf.lanes.size(); ++i) {
    if (buf.lanes[i].owner) continue;
    if (pick-- == 0) {
      buf.lanes[i].owner = header.packet_id;
      ++owned_[idx];
      return static_cast<int>(i);
    }
  }
  return std::nullopt;
}

std::vector<AdvanceGrant> Network::flow_control_pass() {
  const auto& shape = params_.shape;
  const int stages = shape.radix;
  const int nl = params_.n_lanes;
  std::fill(departing_.begin(), departing_.end(), 0);
  std::vector<AdvanceGrant> grants;
  grants.reserve(static_cast<std::size_t>(shape.ports) * (stages + 1));
  std::int64_t resident = 0;
  std::int64_t busy = 0;

  for (int stage = stages - 1; stage >= 0; --stage) {
    const int bit = stages - 1 - stage;
    const bool last = stage == stages - 1;
    for (int se = 0; se < shape.ses_per_stage; ++se) {
      candidates_[0].clear();
      candidates_[1].clear();
      for (int in_port = 0; in_port < 2; ++in_port) {
        const int line = se_line(se, bit, in_port);
        auto& lanes = buffers_[buffer_index(stage, line)].lanes;
        for (int l = 0; l < nl; ++l) {
          const Lane& lane = lanes[static_cast<std::size_t>(l)];
          busy += lane.owner.has_value();
          if (lane.empty()) continue;
          resident += lane.size();
          const int port = lane.out_port;
          bool eligible = true;
          if (!last) {
            const int out_line = se_line(se, bit, port);
            eligible = lane.front().is_header() ? has_free_lane(stage + 1, out_line)
                                                : free_slots(stage + 1, out_line, lane.reserved_next) > 0;
          }
          if (eligible) candidates_[port].push_back({line, l});
        }
      }
      for (int port = 0; port < 2; ++port) {
        auto& cands = candidates_[port];
        if (cands.empty()) continue;
        const int out_line = se_line(se, bit, port);
        const std::uint64_t channel = static_cast<std::uint64_t>(stage) * shape.ports + out_line;
        const int pick = arbitration_draw(params_.arbitration_seed, cycle_, channel,
                                          static_cast<int>(cands.size()));
        const Candidate win = cands[static_cast<std::size_t>(pick)];
        Lane& lane = lane_at(stage, win.line, win.lane);
        departing_[flag_index(stage, win.line, win.lane)] = 1;
        AdvanceGrant g;
        g.from = LaneRef{stage, win.line, win.lane};
        g.flit = lane.front();
        if (last) {
          g.to = LaneRef{stages, out_line, -1};
        } else if (g.flit.is_header()) {
          const auto next = claim_lane(stage + 1, out_line, g.flit, channel);
          if (!next) fail("eligible header found no free lane");
          lane.reserved_next = *next;
          g.to = LaneRef{stage + 1, out_line, *next};
        } else {
          g.to = LaneRef{stage + 1, out_line, lane.reserved_next};
        }
        grants.push_back(g);
      }
    }
  }

  for (int input = 0; input < shape.ports; ++input) {
    Source& src = sources_[static_cast<std::size_t>(input)];
    // Candidates: streams with room in their lane, then the queue head when a
    // first-stage lane is free. Index active.size() stands for the queue head.
    auto& cands = candidates_[0];
    cands.clear();
    for (std::size_t i = 0; i < src.active.size(); ++i) {
      if (free_slots(0, input, src.active[i].lane) > 0) cands.push_back({static_cast<int>(i), 0});
    }
    if (!src.queue.empty() && has_free_lane(0, input)) {
      cands.push_back({static_cast<int>(src.active.size()), 0});
    }
    if (cands.empty()) continue;
    const std::uint64_t channel = static_cast<std::uint64_t>(-1) - static_cast<std::uint64_t>(input);
    const int pick = arbitration_draw(params_.arbitration_seed, cycle_, channel,
                                      static_cast<int>(cands.size()));
    const std::size_t which = static_cast<std::size_t>(cands[static_cast<std::size_t>(pick)].line);
    AdvanceGrant g;
    g.from = LaneRef{-1, input, -1};
    if (which < src.active.size()) {
      const Stream& st = src.active[which];
      Packet shell;
      shell.id = st.id;
      shell.destination = st.destination;
      shell.n_flits = st.n_flits;
      g.flit = make_flit(shell, st.next_seq);
      g.to = LaneRef{0, input, st.lane};
    } else {
      g.flit = make_flit(src.queue.front(), 0);
      const auto lane = claim_lane(0, input, g.flit, channel);
      if (!lane) fail("source found no free lane");
      g.to = LaneRef{0, input, *lane};
    }
    grants.push_back(g);
  }

  busy_at_pass_ = busy;
  if (resident != resident_flits_) {
    fail("resident flit count " + std::to_string(resident) + " != tracked " +
         std::to_string(resident_flits_));
  }
  check_conservation();
  return grants;
}

void Network::data_pass(const std::vector<AdvanceGrant>& grants) {
  const auto& shape = params_.shape;
  const int stages = shape.radix;
  for (const AdvanceGrant& g : grants) {
    Flit f;
    if (g.from.stage < 0) {
      Source& src = sources_[static_cast<std::size_t>(g.from.line)];
      if (g.flit.seq == 0) {
        if (src.queue.empty() || src.queue.front().id != g.flit.packet_id) {
          fail("injection grant does not match the source queue head");
        }
        Packet p = std::move(src.queue.front());
        src.queue.pop_front();
        p.injected_cycle = cycle_;
        src.active.push_back(Stream{p.id, p.n_flits, p.destination, 0, g.to.lane});
        live_.emplace(p.id, LivePacket{std::move(p), 0});
      }
      const auto it = std::find_if(src.active.begin(), src.active.end(),
                                   [&](const Stream& st) { return st.id == g.flit.packet_id; });
      if (it == src.active.end()) fail("injection grant for a packet that is not streaming");
      Packet shell;
      shell.id = it->id;
      shell.destination = it->destination;
      shell.n_flits = it->n_flits;
      f = make_flit(shell, it->next_seq++);
      if (f.is_tail()) src.active.erase(it);
      --queued_flits_;
      ++resident_flits_;
      if (trace) emit("inject", f, 0, line_se(g.from.line, stages - 1), g.to.lane);
    } else {
      Lane& lane = lane_at(g.from.stage, g.from.line, g.from.lane);
      f = lane.pop();
      if (f.is_tail()) {
        lane.owner.reset();
        --owned_[buffer_index(g.from.stage, g.from.line)];
        lane.out_port = -1;
        lane.reserved_next = -1;
      }
    }
    if (f.packet_id != g.flit.packet_id || f.seq != g.flit.seq) fail("granted flit is not at the head");

    if (g.to.stage == stages) {
      auto it = live_.find(f.packet_id);
      if (it == live_.end()) fail("flit of an unknown packet reached a sink");
      LivePacket& lp = it->second;
      if (lp.packet.destination != g.to.line) fail("packet delivered to the wrong sink");
      if (f.seq != lp.delivered_flits) fail("out-of-order delivery");
      ++lp.delivered_flits;
      ++delivered_flits_;
      --resident_flits_;
      if (params_.record_deliveries) {
        deliveries_.push_back(DeliveryEvent{cycle_, g.to.line, f.packet_id, f.seq});
      }
      if (trace) emit("deliver", f, stages - 1, line_se(g.to.line, 0), g.from.lane);
      if (f.is_tail()) {
        lp.packet.delivered_cycle = cycle_;
        ++delivered_packets_;
        if (on_delivered) on_delivered(lp.packet);
        live_.erase(it);
      }
    } else {
      Lane& dst = lane_at(g.to.stage, g.to.line, g.to.lane);
      if (dst.owner != f.packet_id) fail("flit entered a lane owned by another packet");
      dst.push(f);
      if (f.is_header()) dst.out_port = route_port(f.tag, g.to.stage, shape);
      if (trace && g.from.stage >= 0) {
        emit("hop", f, g.to.stage, line_se(g.to.line, stages - 1 - g.to.stage), g.to.lane);
      }
    }
  }
}

std::vector<AdvanceGrant> Network::step() {
  auto grants = flow_control_pass();
  data_pass(grants);
  ++cycle_;
  return grants;
}

void Network::emit(const char* event, const Flit& f, int stage, int se, int lane) const {
  *trace << cycle_ << ' ' << event << ' ' << f.packet_id << ' ' << stage << ' ' << se << ' '
         << lane << '\n';
}

void Network::check_conservation() const {
  if (queued_flits_ + resident_flits_ + delivered_flits_ != generated_flits_) {
    fail("flit conservation: queued " + std::to_string(queued_flits_) + " + resident " +
         std::to_string(resident_flits_) + " + delivered " + std::to_string(delivered_flits_) +
         " != generated " + std::to_string(generated_flits_));
  }
}

void Network::check_invariants() const {
  const auto& shape = params_.shape;
  check_conservation();
  if (resident_flits() != resident_flits_) fail("resident flit count drifted");
  for (int stage = 0; stage < shape.radix; ++stage) {
    for (int line = 0; line < shape.ports; ++line) {
      const auto& lanes = buffers_[buffer_index(stage, line)].lanes;
      const auto owners = std::count_if(lanes.begin(), lanes.end(),
                                        [](const Lane& l) { return l.owner.has_value(); });
      if (owners != owned_[buffer_index(stage, line)]) fail("owned lane count drifted");
      for (std::size_t l = 0; l < lanes.size(); ++l) {
        const Lane& lane = lanes[l];
        const std::string where = "stage " + std::to_string(stage) + " line " +
                                  std::to_string(line) + " lane " + std::to_string(l);
        if (lane.size() > lane.capacity()) fail(where + " over capacity");
        if (!lane.owner) {
          if (!lane.empty()) fail(where + " holds flits without an owner");
          if (lane.reserved_next != -1) fail(where + " has a reservation without an owner");
          continue;
        }
        const auto it = live_.find(*lane.owner);
        if (it == live_.end()) fail(where + " owned by a packet that is not live");
        const int n_flits = it->second.packet.n_flits;
        for (int i = 0; i < lane.size(); ++i) {
          const Flit& f = lane.at(i);
          if (f.packet_id != *lane.owner) fail(where + " mixes packets");
          if (i > 0 && f.seq != lane.at(i - 1).seq + 1) fail(where + " has non-consecutive flits");
          if (f.seq >= n_flits) fail(where + " flit seq beyond packet length");
        }
        if (lane.reserved_next >= 0) {
          if (stage + 1 >= shape.radix) fail(where + " reserves past the last stage");
          const int bit = shape.radix - 1 - stage;
          const int out_line = se_line(line_se(line, bit), bit, lane.out_port);
          const Lane& next = lane_at(stage + 1, out_line, lane.reserved_next);
          if (next.owner != lane.owner) fail(where + " reservation not owned by its worm");
        }
      }
    }
  }
}

MetricsRecord run(const SimConfig& config, std::uint64_t seed, std::ostream* trace) {
  config.validate();
  const NetworkShape shape = build_shape(config.radix);
  const ArrivalModel model = config.arrival_model();

  EngineParams params;
  params.shape = shape;
  params.n_lanes = config.n_lanes;
  params.lane_capacity = config.effective_lane_capacity();
  params.lane_selection = config.lane_selection;
  params.arbitration_seed = splitmix64(seed ^ 0x5bd1e9955bd1e995ULL);
  Network net(params);
  net.trace = trace;

  Rng rng(seed);
  PacketId next_id = 0;
  const std::int64_t warmup = config.warmup_cycles;

  DelayAccumulator delays;
  double window_delay_sum = 0.0;
  std::int64_t window_delay_count = 0;
  net.on_delivered = [&](const Packet& p) {
    if (net.cycle() < warmup) return;
    const auto d = delay_decomposition(p, shape);
    if (!d) return;
    delays.add(*d);
    window_delay_sum += static_cast<double>(d->total);
    ++window_delay_count;
  };

  SteadyStateDetector throughput_detector(config.steady_window, config.steady_windows_required,
                                          config.steady_tolerance);
  SteadyStateDetector delay_detector(config.steady_window, config.steady_windows_required,
                                     config.steady_tolerance);
  const double total_lanes = static_cast<double>(net.total_lanes());
  double utilization_sum = 0.0;
  std::int64_t window_flits = 0;
  std::int64_t stall = 0;
  std::int64_t max_stall = 0;
  bool steady = false;
  std::int64_t cycle = 0;

  for (; cycle < config.max_cycles; ++cycle) {
    for (const Packet& p : sample_arrivals(model, shape, rng, cycle, next_id)) net.enqueue(p);
    const std::int64_t before = net.delivered_flits();
    const bool had_live = net.live_packets() > 0;
    net.step();
    if (config.check_invariants) net.check_invariants();
    const std::int64_t moved = net.delivered_flits() - before;
    if (had_live && moved == 0) {
      max_stall = std::max(max_stall, ++stall);
    } else {
      stall = 0;
    }
    if (cycle < warmup) continue;

    utilization_sum += static_cast<double>(net.busy_lanes_at_last_pass()) / total_lanes;
    window_flits += moved;
    if ((cycle - warmup + 1) % config.steady_window == 0) {
      const double window_throughput =
          static_cast<double>(window_flits) / static_cast<double>(config.steady_window);
      const double window_delay =
          window_delay_count ? window_delay_sum / static_cast<double>(window_delay_count) : 0.0;
      const bool a = throughput_detector.update(window_throughput);
      const bool b = delay_detector.update(window_delay);
      window_flits = 0;
      window_delay_sum = 0.0;
      window_delay_count = 0;
      if (a && b) {
        steady = true;
        if (config.stop_at_steady_state) {
          ++cycle;
          break;
        }
      }
    }
  }

  MetricsRecord m;
  m.termination_cycle = cycle;
  m.cycles_measured = cycle - warmup;
  m.packets_generated = net.generated_packets();
  m.packets_delivered = delays.count();
  m.flits_delivered = delays.count() * config.n_flits;
  m.undelivered_packets = net.live_packets();
  const double cycles = static_cast<double>(m.cycles_measured);
  m.throughput_flits_per_cycle = static_cast<double>(m.flits_delivered) / cycles;
  m.normalized_throughput =
      config.normalization == Normalization::PerPort
          ? normalized_throughput(m.throughput_flits_per_cycle, shape)
          : normalized_throughput_eq5(static_cast<double>(m.packets_delivered) / cycles, shape,
                                      config.n_flits);
  m.mean_wait = delays.mean_wait();
  m.mean_service = delays.mean_service();
  m.mean_total_delay = delays.mean_total();
  m.buffer_utilization = utilization_sum / cycles;
  m.steady_state_reached = steady;
  m.max_stall_cycles = max_stall;
  return m;
}

}  // namespace minsim
