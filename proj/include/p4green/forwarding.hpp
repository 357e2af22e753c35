#pragma once

#include "p4green/packet.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace p4green {

enum class PacketClass { aggregation_in, server_in, server_out, info, transit };

enum class DropCause {
    malformed,
    no_route,
    unknown_sender,
    missing_timestamp,
    unknown_server_id,
    unsupported_protocol,
    ttl_expired,
};
inline constexpr std::size_t kDropCauseCount = 7;

std::string_view to_string(PacketClass c);
std::string_view to_string(DropCause c);
std::optional<DropCause> drop_cause_from_string(std::string_view s);

enum class Action { forward, drop, consume };

/// Server chosen for a new flow, with the servers_data snapshot it was chosen from.
struct Selection {
    int server_id = 0;
    std::vector<std::uint8_t> indices;
};

/// ECMP choice made for an uplink-bound packet.
struct EcmpChoice {
    int width = 1;
    int uplink_index = 0;
    bool rotated = false;
    std::uint64_t evaluated_traffic = 0;
    int previous_width = 1;
};

struct ForwardingDecision {
    Action action = Action::drop;
    Port egress_port = 0;
    ParsedPacket packet;
    PacketClass packet_class = PacketClass::transit;
    std::optional<DropCause> cause;
    std::optional<Selection> selection;
    std::optional<EcmpChoice> ecmp;

    static ForwardingDecision forward(Port egress, ParsedPacket p, PacketClass cls) {
        return {Action::forward, egress, std::move(p), cls, std::nullopt, std::nullopt, std::nullopt};
    }
    static ForwardingDecision drop(DropCause why, PacketClass cls) {
        ForwardingDecision d;
        d.action = Action::drop;
        d.cause = why;
        d.packet_class = cls;
        return d;
    }
};

}  // namespace p4green
