#pragma once

#include "p4green/forwarding.hpp"
#include "p4green/packet.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace p4green {

struct HostInfoEntry {
    Ipv4Addr ip;
    MacAddr mac;
    Port port = 0;
};

/// Local server ID -> rewrite target, plus the reverse (port, ip) -> ID map.
class HostInfoTable {
public:
    /// IDs must be added densely from 0. Throws ValidationError on duplicate
    /// (port, ip) or an ID that does not fit three bits.
    void add(HostInfoEntry entry);

    const HostInfoEntry* find(int server_id) const;
    std::optional<int> reverse(Port ingress_port, Ipv4Addr ip) const;
    int size() const { return static_cast<int>(entries_.size()); }
    const std::vector<HostInfoEntry>& entries() const { return entries_; }

private:
    std::vector<HostInfoEntry> entries_;
    std::map<std::pair<Port, std::uint32_t>, int> reverse_;
};

/// Registers and tables of the workload-control block of one access switch.
struct WorkloadState {
    Ipv4Addr virtual_ip;
    HostInfoTable host_info;
    std::vector<std::uint8_t> servers_data;  // availability index per server ID
    int next_id = 0;                         // shared round-robin cursor

    WorkloadState() = default;
    WorkloadState(Ipv4Addr vip, HostInfoTable table);
    int server_count() const { return host_info.size(); }
};

/// Stores the reported index for the sender; the packet is consumed.
std::optional<DropCause> handle_info(WorkloadState& state, const ParsedPacket& p, Port ingress_port);

/// Round-robin over all servers when none reports availability, otherwise the
/// next server (from the cursor) whose index is non-zero. -1 without servers.
int select_server(WorkloadState& state);

/// VIP -> server translation for client traffic. SYN segments pick a server;
/// other segments follow the ID echoed in the timestamp.
ForwardingDecision handle_server_in(WorkloadState& state, ParsedPacket p);

/// Stamps the local server ID into tsval and rewrites the source to the VIP.
std::optional<DropCause> handle_server_out(const WorkloadState& state, ParsedPacket& p, Port ingress_port);

}  // namespace p4green
