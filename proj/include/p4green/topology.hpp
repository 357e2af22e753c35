#pragma once

#include "p4green/net.hpp"
#include "p4green/scenario.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace p4green {

struct Attachment {
    int peer = -1;  // node index
    Port peer_port = 0;
    SimTime delay{0};
};

struct TopoNode {
    std::string id;
    bool is_switch = false;
    int spec_index = -1;  // into Scenario::switches or Scenario::hosts
    MacAddr mac;
    std::optional<Ipv4Addr> ip;     // hosts
    std::map<Port, Attachment> ports;  // ports numbered from 1 in link order
};

/// Switches occupy node indices [0, switch_count); hosts follow in file order.
struct Topology {
    std::vector<TopoNode> nodes;
    int switch_count = 0;

    std::optional<int> find(const std::string& id) const;
    /// Lowest-numbered port on `node` that leads to `peer`.
    std::optional<Port> port_towards(int node, int peer) const;
};

/// Throws ValidationError on dangling link endpoints, duplicate ids, or hosts
/// that are not attached exactly once.
Topology build_topology(const Scenario& s);

}  // namespace p4green
