#pragma once

#include "p4green/net.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace p4green {

inline constexpr std::uint16_t kEtherTypeIpv4 = 0x0800;
inline constexpr std::uint8_t kProtoTcp = 6;
inline constexpr std::uint8_t kProtoInfo = 0x8F;
inline constexpr std::size_t kEthHeaderLen = 14;
inline constexpr std::size_t kIpv4MinHeaderLen = 20;
inline constexpr std::size_t kTcpMinHeaderLen = 20;
inline constexpr std::uint8_t kTcpOptTimestamp = 8;

namespace tcp_flags {
inline constexpr std::uint8_t fin = 0x01;
inline constexpr std::uint8_t syn = 0x02;
inline constexpr std::uint8_t rst = 0x04;
inline constexpr std::uint8_t psh = 0x08;
inline constexpr std::uint8_t ack = 0x10;
}  // namespace tcp_flags

struct TcpTimestamp {
    std::uint32_t tsval = 0;
    std::uint32_t tsecr = 0;
};

struct TcpHeader {
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint32_t seq = 0;
    std::uint32_t ack = 0;
    std::uint8_t reserved = 0;  // low nibble of the data-offset octet
    std::uint8_t flags = 0;
    std::uint16_t window = 0;
    std::uint16_t checksum = 0;
    std::uint16_t urgent = 0;
    // Raw option octets (length is a multiple of 4). Non-timestamp options
    // are carried through verbatim.
    std::vector<std::uint8_t> options;
    // Offset of the kind-8 option within `options`, if present.
    std::optional<std::size_t> timestamp_offset;
    TcpTimestamp timestamp;

    bool syn() const { return (flags & tcp_flags::syn) != 0; }
    bool has_timestamp() const { return timestamp_offset.has_value(); }
    std::size_t header_len() const { return kTcpMinHeaderLen + options.size(); }
};

/// Decoded Ethernet II + IPv4 (+ TCP) frame.
struct ParsedPacket {
    MacAddr eth_dst;
    MacAddr eth_src;

    std::uint8_t ip_tos = 0;
    std::uint16_t ip_id = 0;
    std::uint16_t ip_frag = 0;  // flags + fragment offset, carried verbatim
    std::uint8_t ip_ttl = 64;
    std::uint8_t ip_proto = 0;
    std::uint16_t ip_checksum = 0;
    Ipv4Addr ip_src;
    Ipv4Addr ip_dst;
    std::vector<std::uint8_t> ip_options;

    std::optional<TcpHeader> tcp;  // present iff ip_proto == TCP
    std::vector<std::uint8_t> payload;

    std::size_t ip_header_len() const { return kIpv4MinHeaderLen + ip_options.size(); }
    std::size_t ip_total_len() const {
        return ip_header_len() + (tcp ? tcp->header_len() : 0) + payload.size();
    }
    std::size_t payload_len() const { return payload.size(); }
    std::size_t wire_len() const { return kEthHeaderLen + ip_total_len(); }
    bool is_tcp() const { return tcp.has_value(); }
    bool has_timestamp() const { return tcp && tcp->has_timestamp(); }
};

struct FiveTuple {
    Ipv4Addr ip_src;
    Ipv4Addr ip_dst;
    std::uint8_t ip_proto = 0;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;

    friend auto operator<=>(const FiveTuple&, const FiveTuple&) = default;
};

FiveTuple five_tuple(const ParsedPacket& p);

/// Throws MalformedPacket on truncation, bad IHL/data offset, bad option
/// lengths, or a non-IPv4 ethertype.
ParsedPacket parse_packet(std::span<const std::uint8_t> bytes);

/// Emits the frame with freshly computed IPv4 and TCP checksums; the stored
/// checksum fields are ignored. Throws MalformedPacket if option blocks are
/// not 32-bit aligned or the datagram exceeds 65535 octets.
std::vector<std::uint8_t> serialize_packet(const ParsedPacket& p);

/// Recomputes ip_checksum and tcp->checksum in place.
void refresh_checksums(ParsedPacket& p);

/// Writes the timestamp values into the option octets. Requires the option.
void set_timestamp(TcpHeader& tcp, TcpTimestamp ts);

/// Builds a TCP segment with a NOP,NOP,TS option block.
ParsedPacket make_tcp_packet(MacAddr src_mac, MacAddr dst_mac, FiveTuple ft, std::uint8_t flags,
                             TcpTimestamp ts, std::size_t payload_len);

// --- Info-packets -----------------------------------------------------------

struct InfoReport {
    Port ingress_port = 0;
    Ipv4Addr sender_ip;
    std::uint8_t availability_index = 0;

    friend auto operator<=>(const InfoReport&, const InfoReport&) = default;
};

/// Throws IndexOutOfRange when index > 255.
ParsedPacket encode_info_packet(SubnetPrefix switch_subnet, int index, Ipv4Addr src_ip,
                                MacAddr src_mac, MacAddr dst_mac);

/// Throws NotAnInfoPacket unless ip_proto == 0x8F.
InfoReport decode_info_packet(const ParsedPacket& p, Port ingress_port);

// --- Timestamp server-ID codec ------------------------------------------------

inline constexpr int kMaxServersPerSwitch = 8;

/// Replaces the three low bits of tsval with the server ID. Throws
/// ServerIdOverflow when server_id >= 8.
std::uint32_t encode_server_id_tsval(std::uint32_t tsval, int server_id);

/// Low three bits of the echoed timestamp.
constexpr int decode_server_id_tsecr(std::uint32_t tsecr) { return static_cast<int>(tsecr & 0x7u); }

/// Throws MissingTimestampOption if the packet carries no timestamp option.
int decode_server_id_tsecr(const ParsedPacket& p);

}  // namespace p4green
