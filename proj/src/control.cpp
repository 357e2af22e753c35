#include "p4green/control.hpp"

#include <atomic>
#include <deque>
#include <limits>

namespace p4green {

namespace {

std::atomic<std::uint64_t> g_install_calls{0};

bool is_aggregation(const Scenario& s, const Topology& t, int node) {
    const auto& n = t.nodes[static_cast<std::size_t>(node)];
    return n.is_switch && s.switches[static_cast<std::size_t>(n.spec_index)].type == SwitchType::aggregation;
}

bool is_server(const Scenario& s, const Topology& t, int node) {
    const auto& n = t.nodes[static_cast<std::size_t>(node)];
    return !n.is_switch && s.hosts[static_cast<std::size_t>(n.spec_index)].role == HostRole::server;
}

// Hop distance from every node to `dest`, walking only through switches.
std::vector<int> distances_to(const Topology& t, int dest) {
    constexpr int inf = std::numeric_limits<int>::max();
    std::vector<int> dist(t.nodes.size(), inf);
    std::deque<int> q{dest};
    dist[static_cast<std::size_t>(dest)] = 0;
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        if (u != dest && !t.nodes[static_cast<std::size_t>(u)].is_switch) continue;
        for (const auto& [port, att] : t.nodes[static_cast<std::size_t>(u)].ports) {
            if (dist[static_cast<std::size_t>(att.peer)] != inf) continue;
            dist[static_cast<std::size_t>(att.peer)] = dist[static_cast<std::size_t>(u)] + 1;
            q.push_back(att.peer);
        }
    }
    return dist;
}

// Port on `node` towards `dest` along a shortest path; ties go to the lowest
// neighbor node index, then the lowest port.
std::optional<Port> next_hop_port(const Topology& t, const std::vector<int>& dist, int node) {
    const int d = dist[static_cast<std::size_t>(node)];
    if (d == std::numeric_limits<int>::max() || d == 0) return std::nullopt;
    std::optional<Port> best;
    int best_peer = std::numeric_limits<int>::max();
    for (const auto& [port, att] : t.nodes[static_cast<std::size_t>(node)].ports) {
        if (dist[static_cast<std::size_t>(att.peer)] != d - 1) continue;
        if (att.peer < best_peer) {
            best_peer = att.peer;
            best = port;
        }
    }
    return best;
}

}  // namespace

std::uint64_t installer_invocations() { return g_install_calls.load(); }

Installation install(const Scenario& s, Policy policy) {
    g_install_calls.fetch_add(1);

    Installation inst;
    inst.policy = policy;
    inst.topology = build_topology(s);
    const Topology& t = inst.topology;

    for (int i = 0; i < t.switch_count; ++i) {
        const auto& node = t.nodes[static_cast<std::size_t>(i)];
        const auto& spec = s.switches[static_cast<std::size_t>(node.spec_index)];
        SwitchState st;
        SwitchConfig& cfg = st.config;
        cfg.switch_id = spec.id;
        cfg.switch_type = spec.type;
        cfg.mac = node.mac;
        for (const auto& [port, att] : node.ports) {
            cfg.neighbor_macs[port] = t.nodes[static_cast<std::size_t>(att.peer)].mac;
            if (spec.type == SwitchType::aggregation) continue;
            if (is_aggregation(s, t, att.peer)) cfg.uplink_ports.push_back(port);
            else if (spec.type == SwitchType::access && is_server(s, t, att.peer)) cfg.server_ports.push_back(port);
            else if (spec.type == SwitchType::core && !cfg.external_port) cfg.external_port = port;
        }
        if (spec.type != SwitchType::aggregation) {
            st.consolidation = ConsolidationState(spec.epoch_length, spec.thresholds,
                                                  static_cast<int>(cfg.uplink_ports.size()));
            if (policy == Policy::pinned_ecmp) st.consolidation.pin_to_max();
        }
        if (spec.type == SwitchType::access) {
            cfg.subnet_prefix = spec.subnet;
            cfg.virtual_ip = spec.virtual_ip;
            HostInfoTable table;
            for (Port p : cfg.server_ports) {
                const auto& peer = t.nodes[static_cast<std::size_t>(node.ports.at(p).peer)];
                table.add({*peer.ip, peer.mac, p});
            }
            st.workload = WorkloadState(*spec.virtual_ip, std::move(table));
        }
        inst.switches.push_back(std::move(st));
    }

    // Host routes (/32) for every host address and every VIP.
    std::vector<std::pair<Ipv4Addr, int>> destinations;
    for (std::size_t i = static_cast<std::size_t>(t.switch_count); i < t.nodes.size(); ++i)
        destinations.emplace_back(*t.nodes[i].ip, static_cast<int>(i));
    for (int i = 0; i < t.switch_count; ++i)
        if (const auto& vip = inst.switches[static_cast<std::size_t>(i)].config.virtual_ip)
            destinations.emplace_back(*vip, i);

    for (const auto& [addr, dest] : destinations) {
        const auto dist = distances_to(t, dest);
        for (int i = 0; i < t.switch_count; ++i) {
            auto port = next_hop_port(t, dist, i);
            if (!port) continue;
            auto& st = inst.switches[static_cast<std::size_t>(i)];
            st.lpm.insert(addr, 32, {*port, st.config.neighbor_macs.at(*port)});
        }
    }

    for (const auto& r : s.routes) {
        const int sw = *t.find(r.switch_id);
        const auto port = *t.port_towards(sw, *t.find(r.via));
        auto& st = inst.switches[static_cast<std::size_t>(sw)];
        st.lpm.insert(r.prefix, r.length, {port, st.config.neighbor_macs.at(port)});
    }
    return inst;
}

}  // namespace p4green
