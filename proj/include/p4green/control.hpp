#pragma once

#include "p4green/pipeline.hpp"
#include "p4green/scenario.hpp"
#include "p4green/topology.hpp"

#include <cstdint>
#include <vector>

namespace p4green {

enum class Policy {
    p4green,      // consolidation registers live
    pinned_ecmp,  // width pinned to the uplink count: plain ECMP baseline
};

/// Initial data-plane state for every switch. switches[i] belongs to
/// topology.nodes[i].
struct Installation {
    Topology topology;
    std::vector<SwitchState> switches;
    Policy policy = Policy::p4green;
};

/// Installs registers and tables: aggr_switches = 1, traffic = 0,
/// epoch_start = 0, servers_data zeroed, LPM routes derived from shortest
/// paths (ties to the lowest node index) plus explicit overrides.
Installation install(const Scenario& s, Policy policy = Policy::p4green);

/// Process-wide count of install() calls. The engine samples it around its
/// run phase.
std::uint64_t installer_invocations();

}  // namespace p4green
