#include "p4green/workload.hpp"

#include "p4green/errors.hpp"

#include <string>

namespace p4green {

void HostInfoTable::add(HostInfoEntry entry) {
    const int id = size();
    if (id >= kMaxServersPerSwitch)
        throw ValidationError("3-bit server ID overflow: more than 8 servers behind one VIP");
    auto [it, inserted] = reverse_.emplace(std::pair{entry.port, entry.ip.value}, id);
    if (!inserted)
        throw ValidationError("duplicate host_info entry for " + entry.ip.to_string() + " on port " +
                              std::to_string(entry.port));
    entries_.push_back(entry);
}

const HostInfoEntry* HostInfoTable::find(int server_id) const {
    if (server_id < 0 || server_id >= size()) return nullptr;
    return &entries_[static_cast<std::size_t>(server_id)];
}

std::optional<int> HostInfoTable::reverse(Port ingress_port, Ipv4Addr ip) const {
    auto it = reverse_.find({ingress_port, ip.value});
    if (it == reverse_.end()) return std::nullopt;
    return it->second;
}

WorkloadState::WorkloadState(Ipv4Addr vip, HostInfoTable table)
    : virtual_ip(vip), host_info(std::move(table)),
      servers_data(static_cast<std::size_t>(host_info.size()), 0) {}

std::optional<DropCause> handle_info(WorkloadState& state, const ParsedPacket& p, Port ingress_port) {
    const InfoReport r = decode_info_packet(p, ingress_port);
    auto id = state.host_info.reverse(r.ingress_port, r.sender_ip);
    if (!id) return DropCause::unknown_sender;
    state.servers_data[static_cast<std::size_t>(*id)] = r.availability_index;
    return std::nullopt;
}

int select_server(WorkloadState& state) {
    const int n = state.server_count();
    if (n == 0) return -1;
    int chosen = state.next_id;
    for (int step = 0; step < n; ++step) {
        const int id = (state.next_id + step) % n;
        if (state.servers_data[static_cast<std::size_t>(id)] > 0) {
            chosen = id;
            break;
        }
    }
    // With no non-zero index the loop falls through and `chosen` stays at the
    // cursor: plain round-robin.
    state.next_id = (chosen + 1) % n;
    return chosen;
}

ForwardingDecision handle_server_in(WorkloadState& state, ParsedPacket p) {
    if (!p.tcp) return ForwardingDecision::drop(DropCause::unsupported_protocol, PacketClass::server_in);

    ForwardingDecision d;
    d.packet_class = PacketClass::server_in;
    int server_id = 0;
    if (p.tcp->syn()) {
        Selection sel;
        sel.indices = state.servers_data;
        server_id = select_server(state);
        sel.server_id = server_id;
        d.selection = std::move(sel);
    } else {
        if (!p.has_timestamp()) return ForwardingDecision::drop(DropCause::missing_timestamp, d.packet_class);
        server_id = decode_server_id_tsecr(p.tcp->timestamp.tsecr);
    }
    const HostInfoEntry* target = state.host_info.find(server_id);
    if (!target) return ForwardingDecision::drop(DropCause::unknown_server_id, d.packet_class);

    p.ip_dst = target->ip;
    p.eth_dst = target->mac;
    refresh_checksums(p);
    d.action = Action::forward;
    d.egress_port = target->port;
    d.packet = std::move(p);
    return d;
}

std::optional<DropCause> handle_server_out(const WorkloadState& state, ParsedPacket& p, Port ingress_port) {
    auto id = state.host_info.reverse(ingress_port, p.ip_src);
    if (!id) return DropCause::unknown_sender;
    if (!p.has_timestamp()) return DropCause::missing_timestamp;
    TcpTimestamp ts = p.tcp->timestamp;
    ts.tsval = encode_server_id_tsval(ts.tsval, *id);
    set_timestamp(*p.tcp, ts);
    p.ip_src = state.virtual_ip;
    refresh_checksums(p);
    return std::nullopt;
}

}  // namespace p4green
