#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace minsim {

// Raised for any invalid user-supplied parameter.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Side : std::uint8_t { Input, Output };

// Shape of an N x N Delta network built from 2x2 switching elements.
struct NetworkShape {
  int radix = 0;          // stages L
  int ports = 0;          // N = 2^L
  int ses_per_stage = 0;  // N / 2

  int stages() const { return radix; }
  int total_ses() const { return ses_per_stage * radix; }
  // Links between consecutive stages, not counting the N input and N output links.
  int internal_links() const { return ports * (radix - 1); }
};

struct PortAddress {
  int stage = 0;
  int se_index = 0;
  Side side = Side::Input;
  int port = 0;

  friend bool operator==(const PortAddress&, const PortAddress&) = default;
};

// Destination tag, most significant bit first: bit i picks the output port at
// stage i (0 = upper, 1 = lower).
struct RoutingTag {
  int destination = 0;
  std::vector<std::uint8_t> bits;

  int port_at(int stage) const { return bits.at(static_cast<std::size_t>(stage)); }
};

struct Hop {
  int se_index = 0;
  int in_port = 0;

  friend bool operator==(const Hop&, const Hop&) = default;
};

NetworkShape build_shape(int radix);

RoutingTag routing_tag(int destination, const NetworkShape& shape);

// Output port selected at `stage` for a packet headed to `destination`.
inline int route_port(int destination, int stage, const NetworkShape& shape) {
  return (destination >> (shape.radix - 1 - stage)) & 1;
}

// Butterfly wiring. Stage i resolves address bit (L-1-i): the two inputs of an
// SE carry lines that differ only in that bit, and output port p drives the
// line whose bit equals p. Line numbers are preserved between stages, so the
// line leaving the last stage is the destination.
//
// Throws std::out_of_range when stage is the last stage (the flit exits to a sink).
Hop next_hop(int stage, int se_index, int out_port, const NetworkShape& shape);

// Line index carried by a given SE port. Inputs of stage 0 are the sources,
// outputs of stage L-1 are the sinks.
int line_of(const PortAddress& addr, const NetworkShape& shape);

// Inverse of line_of for the input side of a stage.
Hop input_of_line(int stage, int line, const NetworkShape& shape);

// Sink reached by output `out_port` of an SE at the last stage.
int sink_of(int se_index, int out_port, const NetworkShape& shape);

// Sequence of (se_index, in_port) visited from `source` following the
// destination tag. Length equals the stage count.
std::vector<Hop> trace_path(int source, int destination, const NetworkShape& shape);

std::string to_string(const PortAddress& addr);

}  // namespace minsim
