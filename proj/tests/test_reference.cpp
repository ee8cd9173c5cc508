#include <algorithm>
#include <map>

#include "doctest.h"
#include "minsim/engine.hpp"
#include "reference/monolithic_reference.hpp"

using namespace minsim;

namespace {

reference::RefScenario random_scenario(std::uint64_t seed, int radix, int packets, int max_flits) {
  Rng rng(seed);
  reference::RefScenario sc;
  sc.radix = radix;
  sc.capacity = 1 + static_cast<int>(rng() % 3);
  sc.arbitration_seed = rng();
  sc.cycles = 400;
  const int n = 1 << radix;
  std::int64_t t = 0;
  for (int i = 0; i < packets; ++i) {
    t += static_cast<std::int64_t>(rng() % 3);
    reference::RefPacket p;
    p.id = static_cast<std::uint64_t>(i);
    p.source = static_cast<int>(rng() % n);
    p.destination = static_cast<int>(rng() % n);
    p.n_flits = 1 + static_cast<int>(rng() % max_flits);
    p.generated = t;
    sc.packets.push_back(p);
  }
  return sc;
}

std::map<std::uint64_t, reference::RefOutcome> run_engine(const reference::RefScenario& sc) {
  EngineParams params;
  params.shape = build_shape(sc.radix);
  params.n_lanes = 1;
  params.lane_capacity = sc.capacity;
  params.arbitration_seed = sc.arbitration_seed;
  Network net(params);
  std::map<std::uint64_t, reference::RefOutcome> out;
  net.on_delivered = [&](const Packet& p) {
    out[p.id] = reference::RefOutcome{*p.injected_cycle, *p.delivered_cycle};
  };
  std::size_t next = 0;
  for (std::int64_t c = 0; c < sc.cycles; ++c) {
    while (next < sc.packets.size() && sc.packets[next].generated == c) {
      const auto& rp = sc.packets[next++];
      Packet p;
      p.id = rp.id;
      p.source = rp.source;
      p.destination = rp.destination;
      p.n_flits = rp.n_flits;
      p.generated_cycle = rp.generated;
      net.enqueue(p);
    }
    net.step();
  }
  return out;
}

}  // namespace

TEST_CASE("reference: lone packet timing") {
  reference::RefScenario sc;
  sc.radix = 3;
  sc.packets.push_back({0, 2, 5, 4, 3});
  const auto out = reference::simulate_monolithic(sc);
  REQUIRE(out.count(0));
  CHECK(out.at(0).injected == 3);
  CHECK(out.at(0).delivered == 3 + 3 + 4 - 1);
}

TEST_CASE("single-lane engine matches the monolithic reference") {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto sc = random_scenario(1000 + s, 2 + static_cast<int>(s % 3), 60, 6);
    const auto ref = reference::simulate_monolithic(sc);
    const auto eng = run_engine(sc);
    CHECK(ref.size() == eng.size());
    for (const auto& [id, o] : ref) {
      if (o.delivered < 0) continue;
      REQUIRE(eng.count(id));
      CHECK(eng.at(id).injected == o.injected);
      CHECK(eng.at(id).delivered == o.delivered);
    }
  }
}
