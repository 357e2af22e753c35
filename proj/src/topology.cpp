#include "p4green/topology.hpp"

#include "p4green/errors.hpp"

#include <map>

namespace p4green {

std::optional<int> Topology::find(const std::string& id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == id) return static_cast<int>(i);
    return std::nullopt;
}

std::optional<Port> Topology::port_towards(int node, int peer) const {
    for (const auto& [port, att] : nodes[static_cast<std::size_t>(node)].ports)
        if (att.peer == peer) return port;
    return std::nullopt;
}

Topology build_topology(const Scenario& s) {
    Topology t;
    std::map<std::string, int> index;
    auto add = [&](TopoNode n, const std::string& where) {
        if (n.id.empty()) throw ValidationError(where + ": empty id");
        if (!index.emplace(n.id, static_cast<int>(t.nodes.size())).second)
            throw ValidationError(where + ": duplicate node id '" + n.id + "'");
        t.nodes.push_back(std::move(n));
    };

    for (std::size_t i = 0; i < s.switches.size(); ++i) {
        TopoNode n;
        n.id = s.switches[i].id;
        n.is_switch = true;
        n.spec_index = static_cast<int>(i);
        n.mac = s.switches[i].mac.value_or(MacAddr::from_u64(0x020000000000ull + i + 1));
        add(std::move(n), "scenario.switches[" + std::to_string(i) + "]");
    }
    t.switch_count = static_cast<int>(t.nodes.size());
    for (std::size_t i = 0; i < s.hosts.size(); ++i) {
        TopoNode n;
        n.id = s.hosts[i].id;
        n.spec_index = static_cast<int>(i);
        n.ip = s.hosts[i].ip;
        n.mac = s.hosts[i].mac.value_or(MacAddr::from_u64(0x020000010000ull + i + 1));
        add(std::move(n), "scenario.hosts[" + std::to_string(i) + "]");
    }

    for (std::size_t i = 0; i < s.links.size(); ++i) {
        const auto& l = s.links[i];
        const std::string where = "scenario.links[" + std::to_string(i) + "]";
        auto a = index.find(l.a);
        auto b = index.find(l.b);
        if (a == index.end()) throw ValidationError(where + ": unknown node '" + l.a + "'");
        if (b == index.end()) throw ValidationError(where + ": unknown node '" + l.b + "'");
        if (a->second == b->second) throw ValidationError(where + ": self loop on '" + l.a + "'");
        auto& na = t.nodes[static_cast<std::size_t>(a->second)];
        auto& nb = t.nodes[static_cast<std::size_t>(b->second)];
        const SimTime delay = l.delay.value_or(s.link_delay);
        if (delay.count() < 0) throw ValidationError(where + ": negative delay");
        const Port pa = static_cast<Port>(na.ports.size() + 1);
        const Port pb = static_cast<Port>(nb.ports.size() + 1);
        na.ports[pa] = {b->second, pb, delay};
        nb.ports[pb] = {a->second, pa, delay};
    }

    for (std::size_t i = static_cast<std::size_t>(t.switch_count); i < t.nodes.size(); ++i) {
        const auto& n = t.nodes[i];
        if (n.ports.size() != 1)
            throw ValidationError("scenario.hosts[" + std::to_string(n.spec_index) + "] (" + n.id +
                                  "): host must have exactly one link, has " + std::to_string(n.ports.size()));
    }
    return t;
}

}  // namespace p4green
