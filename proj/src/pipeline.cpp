#include "p4green/pipeline.hpp"

#include "p4green/checksum.hpp"
#include "p4green/errors.hpp"

#include <algorithm>
#include <string>

namespace p4green {

std::string_view to_string(SwitchType t) {
    switch (t) {
        case SwitchType::core: return "core";
        case SwitchType::aggregation: return "aggregation";
        case SwitchType::access: return "access";
    }
    return "?";
}

std::optional<SwitchType> switch_type_from_string(std::string_view s) {
    if (s == "core") return SwitchType::core;
    if (s == "aggregation") return SwitchType::aggregation;
    if (s == "access") return SwitchType::access;
    return std::nullopt;
}

std::string_view to_string(PacketClass c) {
    switch (c) {
        case PacketClass::aggregation_in: return "Aggregation_in";
        case PacketClass::server_in: return "Server_in";
        case PacketClass::server_out: return "Server_out";
        case PacketClass::info: return "Info";
        case PacketClass::transit: return "Transit";
    }
    return "?";
}

namespace {
constexpr std::array<std::string_view, kDropCauseCount> kDropNames = {
    "malformed",           "no_route",          "unknown_sender",     "missing_timestamp",
    "unknown_server_id",   "unsupported_protocol", "ttl_expired",
};
}  // namespace

std::string_view to_string(DropCause c) { return kDropNames[static_cast<std::size_t>(c)]; }

std::optional<DropCause> drop_cause_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kDropNames.size(); ++i)
        if (kDropNames[i] == s) return static_cast<DropCause>(i);
    return std::nullopt;
}

bool SwitchConfig::is_server_port(Port p) const {
    return std::find(server_ports.begin(), server_ports.end(), p) != server_ports.end();
}

namespace {
constexpr std::uint32_t prefix_mask(int length) {
    return length == 0 ? 0u : ~std::uint32_t{0} << (32 - length);
}
}  // namespace

void LpmTable::insert(Ipv4Addr prefix, int length, LpmTarget target) {
    if (length < 0 || length > 32) throw Error("prefix length " + std::to_string(length) + " out of range");
    by_length_[static_cast<std::size_t>(length)].insert_or_assign(prefix.value & prefix_mask(length), target);
}

std::optional<LpmTarget> LpmTable::lookup(Ipv4Addr ip) const {
    for (int len = 32; len >= 0; --len) {
        const auto& bucket = by_length_[static_cast<std::size_t>(len)];
        if (bucket.empty()) continue;
        auto it = bucket.find(ip.value & prefix_mask(len));
        if (it != bucket.end()) return it->second;
    }
    return std::nullopt;
}

std::size_t LpmTable::size() const {
    std::size_t n = 0;
    for (const auto& b : by_length_) n += b.size();
    return n;
}

std::array<std::uint8_t, 13> ecmp_key(const FiveTuple& ft) {
    std::array<std::uint8_t, 13> k{};
    for (int i = 0; i < 4; ++i) {
        k[static_cast<std::size_t>(i)] = ft.ip_src.octet(i);
        k[static_cast<std::size_t>(4 + i)] = ft.ip_dst.octet(i);
    }
    k[8] = ft.ip_proto;
    k[9] = static_cast<std::uint8_t>(ft.src_port >> 8);
    k[10] = static_cast<std::uint8_t>(ft.src_port);
    k[11] = static_cast<std::uint8_t>(ft.dst_port >> 8);
    k[12] = static_cast<std::uint8_t>(ft.dst_port);
    return k;
}

int ecmp_bucket(const FiveTuple& ft, int width) {
    if (width < 1) throw WidthOutOfRange("ecmp width must be at least 1");
    const auto key = ecmp_key(ft);
    return static_cast<int>(crc32(key) % static_cast<std::uint32_t>(width));
}

Port ecmp_select(const FiveTuple& ft, int width, std::span<const Port> uplinks) {
    if (width < 1 || static_cast<std::size_t>(width) > uplinks.size())
        throw WidthOutOfRange("ecmp width " + std::to_string(width) + " outside [1, " +
                              std::to_string(uplinks.size()) + "]");
    return uplinks[static_cast<std::size_t>(ecmp_bucket(ft, width))];
}

PacketClass classify(const ParsedPacket& p, const SwitchConfig& cfg, Port ingress_port) {
    switch (cfg.switch_type) {
        case SwitchType::access:
            if (p.ip_proto == kProtoInfo) return PacketClass::info;
            if (cfg.virtual_ip && p.ip_dst == *cfg.virtual_ip) return PacketClass::server_in;
            if (cfg.is_server_port(ingress_port)) return PacketClass::server_out;
            return PacketClass::transit;
        case SwitchType::core:
            if (cfg.external_port && ingress_port == *cfg.external_port) return PacketClass::aggregation_in;
            return PacketClass::transit;
        case SwitchType::aggregation:
            return PacketClass::transit;
    }
    return PacketClass::transit;
}

namespace {

ForwardingDecision lpm_forward(const SwitchState& s, ParsedPacket p, PacketClass cls) {
    auto hit = s.lpm.lookup(p.ip_dst);
    if (!hit) return ForwardingDecision::drop(DropCause::no_route, cls);
    p.eth_src = s.config.mac;
    p.eth_dst = hit->next_hop;
    refresh_checksums(p);
    return ForwardingDecision::forward(hit->port, std::move(p), cls);
}

ForwardingDecision ecmp_forward(SwitchState& s, ParsedPacket p, PacketClass cls, SimTime now) {
    const auto acc = s.consolidation.account(p.wire_len(), now);
    const auto& uplinks = s.config.uplink_ports;
    const Port egress = ecmp_select(five_tuple(p), acc.width, uplinks);

    EcmpChoice choice;
    choice.width = acc.width;
    choice.uplink_index = static_cast<int>(std::find(uplinks.begin(), uplinks.end(), egress) - uplinks.begin());
    choice.rotated = acc.rotated;
    choice.evaluated_traffic = acc.evaluated_traffic;
    choice.previous_width = acc.previous_width;

    p.eth_src = s.config.mac;
    if (auto it = s.config.neighbor_macs.find(egress); it != s.config.neighbor_macs.end()) p.eth_dst = it->second;
    refresh_checksums(p);

    auto d = ForwardingDecision::forward(egress, std::move(p), cls);
    d.ecmp = choice;
    return d;
}

}  // namespace

ForwardingDecision ingress(SwitchState& s, ParsedPacket p, Port ingress_port, SimTime now) {
    const PacketClass cls = classify(p, s.config, ingress_port);

    if (cls == PacketClass::info) {
        if (!s.workload) return ForwardingDecision::drop(DropCause::unknown_sender, cls);
        if (auto why = handle_info(*s.workload, p, ingress_port)) return ForwardingDecision::drop(*why, cls);
        ForwardingDecision d;
        d.action = Action::consume;
        d.packet_class = cls;
        return d;
    }

    // Aggregation switches forward on the destination address and rewrite
    // nothing but the MAC header.
    if (s.config.switch_type == SwitchType::aggregation) return lpm_forward(s, std::move(p), cls);

    if (p.ip_ttl <= 1) return ForwardingDecision::drop(DropCause::ttl_expired, cls);
    --p.ip_ttl;

    switch (cls) {
        case PacketClass::server_in: {
            if (!s.workload) return ForwardingDecision::drop(DropCause::no_route, cls);
            auto d = handle_server_in(*s.workload, std::move(p));
            if (d.action == Action::forward) d.packet.eth_src = s.config.mac;
            return d;
        }
        case PacketClass::server_out: {
            // Traffic between two local servers never reaches the aggregation layer.
            if (auto hit = s.lpm.lookup(p.ip_dst); hit && s.config.is_server_port(hit->port))
                return lpm_forward(s, std::move(p), cls);
            if (!p.is_tcp()) return lpm_forward(s, std::move(p), cls);
            if (!s.workload) return ForwardingDecision::drop(DropCause::unknown_sender, cls);
            if (auto why = handle_server_out(*s.workload, p, ingress_port)) return ForwardingDecision::drop(*why, cls);
            return ecmp_forward(s, std::move(p), cls, now);
        }
        case PacketClass::aggregation_in:
            return ecmp_forward(s, std::move(p), cls, now);
        default:
            return lpm_forward(s, std::move(p), cls);
    }
}

}  // namespace p4green
