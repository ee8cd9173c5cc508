#include "minsim/topology.hpp"

#include <sstream>

namespace minsim {
namespace {

constexpr int kMaxRadix = 20;

int insert_bit(int value, int bit, int v) {
  const int low = value & ((1 << bit) - 1);
  return ((value >> bit) << (bit + 1)) | (v << bit) | low;
}

int remove_bit(int line, int bit) {
  const int low = line & ((1 << bit) - 1);
  return ((line >> (bit + 1)) << bit) | low;
}

int stage_bit(int stage, const NetworkShape& shape) { return shape.radix - 1 - stage; }

void check_stage(int stage, const NetworkShape& shape) {
  if (stage < 0 || stage >= shape.radix) {
    throw ConfigError("stage " + std::to_string(stage) + " outside 0.." +
                      std::to_string(shape.radix - 1));
  }
}

void check_se(int se_index, const NetworkShape& shape) {
  if (se_index < 0 || se_index >= shape.ses_per_stage) {
    throw ConfigError("se_index " + std::to_string(se_index) + " outside 0.." +
                      std::to_string(shape.ses_per_stage - 1));
  }
}

void check_port(int port) {
  if (port != 0 && port != 1) throw ConfigError("port must be 0 or 1");
}

}  // namespace

NetworkShape build_shape(int radix) {
  if (radix < 1 || radix > kMaxRadix) {
    throw ConfigError("radix must be in 1.." + std::to_string(kMaxRadix) + ", got " +
                      std::to_string(radix));
  }
  NetworkShape shape;
  shape.radix = radix;
  shape.ports = 1 << radix;
  shape.ses_per_stage = shape.ports / 2;
  return shape;
}

RoutingTag routing_tag(int destination, const NetworkShape& shape) {
  if (destination < 0 || destination >= shape.ports) {
    throw ConfigError("destination " + std::to_string(destination) + " outside 0.." +
                      std::to_string(shape.ports - 1));
  }
  RoutingTag tag;
  tag.destination = destination;
  tag.bits.reserve(static_cast<std::size_t>(shape.radix));
  for (int stage = 0; stage < shape.radix; ++stage) {
    tag.bits.push_back(static_cast<std::uint8_t>(route_port(destination, stage, shape)));
  }
  return tag;
}

int line_of(const PortAddress& addr, const NetworkShape& shape) {
  check_stage(addr.stage, shape);
  check_se(addr.se_index, shape);
  check_port(addr.port);
  return insert_bit(addr.se_index, stage_bit(addr.stage, shape), addr.port);
}

Hop input_of_line(int stage, int line, const NetworkShape& shape) {
  check_stage(stage, shape);
  const int bit = stage_bit(stage, shape);
  return Hop{remove_bit(line, bit), (line >> bit) & 1};
}

Hop next_hop(int stage, int se_index, int out_port, const NetworkShape& shape) {
  check_stage(stage, shape);
  if (stage == shape.radix - 1) {
    throw std::out_of_range("no next hop after the last stage");
  }
  const int line = line_of(PortAddress{stage, se_index, Side::Output, out_port}, shape);
  return input_of_line(stage + 1, line, shape);
}

int sink_of(int se_index, int out_port, const NetworkShape& shape) {
  return line_of(PortAddress{shape.radix - 1, se_index, Side::Output, out_port}, shape);
}

std::vector<Hop> trace_path(int source, int destination, const NetworkShape& shape) {
  if (source < 0 || source >= shape.ports) {
    throw ConfigError("source " + std::to_string(source) + " out of range");
  }
  const RoutingTag tag = routing_tag(destination, shape);
  std::vector<Hop> path;
  path.reserve(static_cast<std::size_t>(shape.radix));
  Hop hop = input_of_line(0, source, shape);
  for (int stage = 0; stage < shape.radix; ++stage) {
    path.push_back(hop);
    if (stage + 1 < shape.radix) hop = next_hop(stage, hop.se_index, tag.port_at(stage), shape);
  }
  return path;
}

std::string to_string(const PortAddress& addr) {
  std::ostringstream os;
  os << "stage " << addr.stage << " se " << addr.se_index << ' '
     << (addr.side == Side::Input ? "in" : "out") << addr.port;
  return os.str();
}

}  // namespace minsim
