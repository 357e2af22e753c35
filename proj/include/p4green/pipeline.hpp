#pragma once

#include "p4green/consolidation.hpp"
#include "p4green/forwarding.hpp"
#include "p4green/packet.hpp"
#include "p4green/workload.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace p4green {

enum class SwitchType { core, aggregation, access };

std::string_view to_string(SwitchType t);
std::optional<SwitchType> switch_type_from_string(std::string_view s);

struct SwitchConfig {
    std::string switch_id;
    SwitchType switch_type = SwitchType::aggregation;
    std::optional<SubnetPrefix> subnet_prefix;  // access only
    std::optional<Ipv4Addr> virtual_ip;         // access only
    std::vector<Port> uplink_ports;             // ordered; ECMP bucket i -> uplink_ports[i]
    std::vector<Port> server_ports;             // access only
    std::optional<Port> external_port;          // core only
    MacAddr mac;
    std::map<Port, MacAddr> neighbor_macs;

    bool is_server_port(Port p) const;
};

struct LpmTarget {
    Port port = 0;
    MacAddr next_hop;
};

class LpmTable {
public:
    /// Installs or replaces the entry for (prefix, length).
    void insert(Ipv4Addr prefix, int length, LpmTarget target);
    std::optional<LpmTarget> lookup(Ipv4Addr ip) const;
    std::size_t size() const;

private:
    std::array<std::unordered_map<std::uint32_t, LpmTarget>, 33> by_length_;
};

inline std::optional<LpmTarget> lpm_lookup(const LpmTable& t, Ipv4Addr ip) { return t.lookup(ip); }

/// The 13-octet key src_ip|dst_ip|proto|src_port|dst_port, network order.
std::array<std::uint8_t, 13> ecmp_key(const FiveTuple& ft);

/// Index into the uplink list: crc32(key) mod width.
int ecmp_bucket(const FiveTuple& ft, int width);

/// uplinks[crc32(key) mod width]. Throws WidthOutOfRange unless
/// 1 <= width <= uplinks.size().
Port ecmp_select(const FiveTuple& ft, int width, std::span<const Port> uplinks);

struct SwitchState {
    SwitchConfig config;
    LpmTable lpm;
    ConsolidationState consolidation;    // core and access switches
    std::optional<WorkloadState> workload;  // access switches
};

PacketClass classify(const ParsedPacket& p, const SwitchConfig& cfg, Port ingress_port);

/// One pass of the ingress pipeline. Mutates only `state`.
ForwardingDecision ingress(SwitchState& state, ParsedPacket p, Port ingress_port, SimTime now);

}  // namespace p4green
