#include "p4green/packet.hpp"

#include "p4green/checksum.hpp"
#include "p4green/errors.hpp"

#include <string>

namespace p4green {

namespace {

std::uint16_t rd16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

std::uint32_t rd32(std::span<const std::uint8_t> b, std::size_t at) {
    return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
           (std::uint32_t{b[at + 2]} << 8) | b[at + 3];
}

void wr16(std::vector<std::uint8_t>& b, std::size_t at, std::uint16_t v) {
    b[at] = static_cast<std::uint8_t>(v >> 8);
    b[at + 1] = static_cast<std::uint8_t>(v);
}

void wr32(std::uint8_t* p, std::uint32_t v) {
    p[0] = static_cast<std::uint8_t>(v >> 24);
    p[1] = static_cast<std::uint8_t>(v >> 16);
    p[2] = static_cast<std::uint8_t>(v >> 8);
    p[3] = static_cast<std::uint8_t>(v);
}

[[noreturn]] void malformed(const std::string& what) { throw MalformedPacket(what); }

// Locates the timestamp option; validates every option length on the way.
std::optional<std::size_t> scan_tcp_options(std::span<const std::uint8_t> opts) {
    std::optional<std::size_t> ts;
    std::size_t i = 0;
    while (i < opts.size()) {
        std::uint8_t kind = opts[i];
        if (kind == 0) break;  // end of option list; remainder is padding
        if (kind == 1) {
            ++i;
            continue;
        }
        if (i + 1 >= opts.size()) malformed("tcp option overflows header");
        std::size_t len = opts[i + 1];
        if (len < 2 || i + len > opts.size()) malformed("tcp option overflows header");
        if (kind == kTcpOptTimestamp) {
            if (len != 10) malformed("tcp timestamp option has length " + std::to_string(len));
            if (!ts) ts = i;
        }
        i += len;
    }
    return ts;
}

}  // namespace

FiveTuple five_tuple(const ParsedPacket& p) {
    FiveTuple ft{p.ip_src, p.ip_dst, p.ip_proto, 0, 0};
    if (p.tcp) {
        ft.src_port = p.tcp->src_port;
        ft.dst_port = p.tcp->dst_port;
    }
    return ft;
}

ParsedPacket parse_packet(std::span<const std::uint8_t> b) {
    if (b.size() < kEthHeaderLen + kIpv4MinHeaderLen) malformed("truncated frame");
    if (rd16(b, 12) != kEtherTypeIpv4) malformed("not an IPv4 frame");

    ParsedPacket p;
    std::copy_n(b.begin(), 6, p.eth_dst.bytes.begin());
    std::copy_n(b.begin() + 6, 6, p.eth_src.bytes.begin());

    const auto ip = b.subspan(kEthHeaderLen);
    if ((ip[0] >> 4) != 4) malformed("ip version is not 4");
    const std::size_t ihl = std::size_t{ip[0] & 0x0Fu} * 4;
    const std::size_t total = rd16(ip, 2);
    if (ihl < kIpv4MinHeaderLen) malformed("bad ihl");
    if (total < ihl) malformed("ip total length shorter than header");
    if (total > ip.size()) malformed("truncated ip datagram");

    p.ip_tos = ip[1];
    p.ip_id = rd16(ip, 4);
    p.ip_frag = rd16(ip, 6);
    p.ip_ttl = ip[8];
    p.ip_proto = ip[9];
    p.ip_checksum = rd16(ip, 10);
    p.ip_src = Ipv4Addr(rd32(ip, 12));
    p.ip_dst = Ipv4Addr(rd32(ip, 16));
    p.ip_options.assign(ip.begin() + kIpv4MinHeaderLen, ip.begin() + ihl);
    if ((p.ip_frag & 0x3FFF) != 0) malformed("ip fragments are not supported");

    const auto l4 = ip.subspan(ihl, total - ihl);
    if (p.ip_proto != kProtoTcp) {
        p.payload.assign(l4.begin(), l4.end());
        return p;
    }

    if (l4.size() < kTcpMinHeaderLen) malformed("truncated tcp header");
    TcpHeader t;
    t.src_port = rd16(l4, 0);
    t.dst_port = rd16(l4, 2);
    t.seq = rd32(l4, 4);
    t.ack = rd32(l4, 8);
    const std::size_t doff = static_cast<std::size_t>(l4[12] >> 4) * 4;
    t.reserved = l4[12] & 0x0F;
    t.flags = l4[13];
    t.window = rd16(l4, 14);
    t.checksum = rd16(l4, 16);
    t.urgent = rd16(l4, 18);
    if (doff < kTcpMinHeaderLen) malformed("bad tcp data offset");
    if (doff > l4.size()) malformed("tcp options overflow segment");
    t.options.assign(l4.begin() + kTcpMinHeaderLen, l4.begin() + doff);
    t.timestamp_offset = scan_tcp_options(t.options);
    if (t.timestamp_offset) {
        const auto o = std::span<const std::uint8_t>(t.options).subspan(*t.timestamp_offset);
        t.timestamp = {rd32(o, 2), rd32(o, 6)};
    }
    p.tcp = std::move(t);
    p.payload.assign(l4.begin() + doff, l4.end());
    return p;
}

void set_timestamp(TcpHeader& tcp, TcpTimestamp ts) {
    if (!tcp.timestamp_offset) throw MissingTimestampOption("tcp segment has no timestamp option");
    tcp.timestamp = ts;
    std::uint8_t* o = tcp.options.data() + *tcp.timestamp_offset;
    wr32(o + 2, ts.tsval);
    wr32(o + 6, ts.tsecr);
}

std::vector<std::uint8_t> serialize_packet(const ParsedPacket& p) {
    const std::size_t ihl = p.ip_header_len();
    const std::size_t total = p.ip_total_len();
    if (ihl > 60 || ihl % 4 != 0) malformed("ip options must be a multiple of 4, at most 40 octets");
    if (total > 0xFFFF) malformed("ip datagram too long");
    if (p.tcp && (p.tcp->header_len() > 60 || p.tcp->options.size() % 4 != 0))
        malformed("tcp options must be a multiple of 4, at most 40 octets");
    if (p.tcp.has_value() != (p.ip_proto == kProtoTcp)) malformed("tcp header presence disagrees with protocol");

    std::vector<std::uint8_t> b(kEthHeaderLen + total);
    std::copy(p.eth_dst.bytes.begin(), p.eth_dst.bytes.end(), b.begin());
    std::copy(p.eth_src.bytes.begin(), p.eth_src.bytes.end(), b.begin() + 6);
    wr16(b, 12, kEtherTypeIpv4);

    const std::size_t ip = kEthHeaderLen;
    b[ip] = static_cast<std::uint8_t>(0x40 | (ihl / 4));
    b[ip + 1] = p.ip_tos;
    wr16(b, ip + 2, static_cast<std::uint16_t>(total));
    wr16(b, ip + 4, p.ip_id);
    wr16(b, ip + 6, p.ip_frag);
    b[ip + 8] = p.ip_ttl;
    b[ip + 9] = p.ip_proto;
    wr32(&b[ip + 12], p.ip_src.value);
    wr32(&b[ip + 16], p.ip_dst.value);
    std::copy(p.ip_options.begin(), p.ip_options.end(), b.begin() + ip + kIpv4MinHeaderLen);
    wr16(b, ip + 10, internet_checksum(std::span(b).subspan(ip, ihl)));

    std::size_t l4 = ip + ihl;
    if (p.tcp) {
        const TcpHeader& t = *p.tcp;
        wr16(b, l4, t.src_port);
        wr16(b, l4 + 2, t.dst_port);
        wr32(&b[l4 + 4], t.seq);
        wr32(&b[l4 + 8], t.ack);
        b[l4 + 12] = static_cast<std::uint8_t>(((t.header_len() / 4) << 4) | (t.reserved & 0x0F));
        b[l4 + 13] = t.flags;
        wr16(b, l4 + 14, t.window);
        wr16(b, l4 + 18, t.urgent);
        std::copy(t.options.begin(), t.options.end(), b.begin() + l4 + kTcpMinHeaderLen);
        std::copy(p.payload.begin(), p.payload.end(), b.begin() + l4 + t.header_len());
        const auto seg_len = static_cast<std::uint16_t>(total - ihl);
        const auto sum = pseudo_header_sum(p.ip_src, p.ip_dst, kProtoTcp, seg_len);
        wr16(b, l4 + 16, internet_checksum(std::span(b).subspan(l4, seg_len), sum));
    } else {
        std::copy(p.payload.begin(), p.payload.end(), b.begin() + l4);
    }
    return b;
}

void refresh_checksums(ParsedPacket& p) {
    const auto bytes = serialize_packet(p);
    p.ip_checksum = rd16(bytes, kEthHeaderLen + 10);
    if (p.tcp) p.tcp->checksum = rd16(bytes, kEthHeaderLen + p.ip_header_len() + 16);
}

ParsedPacket make_tcp_packet(MacAddr src_mac, MacAddr dst_mac, FiveTuple ft, std::uint8_t flags,
                             TcpTimestamp ts, std::size_t payload_len) {
    ParsedPacket p;
    p.eth_src = src_mac;
    p.eth_dst = dst_mac;
    p.ip_proto = kProtoTcp;
    p.ip_src = ft.ip_src;
    p.ip_dst = ft.ip_dst;
    TcpHeader t;
    t.src_port = ft.src_port;
    t.dst_port = ft.dst_port;
    t.flags = flags;
    t.window = 65535;
    t.options = {1, 1, kTcpOptTimestamp, 10, 0, 0, 0, 0, 0, 0, 0, 0};
    t.timestamp_offset = 2;
    set_timestamp(t, ts);
    p.tcp = std::move(t);
    p.payload.assign(payload_len, 0);
    return p;
}

ParsedPacket encode_info_packet(SubnetPrefix switch_subnet, int index, Ipv4Addr src_ip, MacAddr src_mac,
                                MacAddr dst_mac) {
    if (index < 0 || index > 255)
        throw IndexOutOfRange("availability index " + std::to_string(index) + " does not fit one octet");
    ParsedPacket p;
    p.eth_src = src_mac;
    p.eth_dst = dst_mac;
    p.ip_proto = kProtoInfo;
    p.ip_src = src_ip;
    p.ip_dst = switch_subnet.with_host(static_cast<std::uint8_t>(index));
    return p;
}

InfoReport decode_info_packet(const ParsedPacket& p, Port ingress_port) {
    if (p.ip_proto != kProtoInfo) throw NotAnInfoPacket("ip protocol is not 0x8F");
    return {ingress_port, p.ip_src, p.ip_dst.octet(3)};
}

std::uint32_t encode_server_id_tsval(std::uint32_t tsval, int server_id) {
    if (server_id < 0 || server_id >= kMaxServersPerSwitch)
        throw ServerIdOverflow("server id " + std::to_string(server_id) + " needs more than 3 bits");
    return (tsval & ~std::uint32_t{7}) | static_cast<std::uint32_t>(server_id);
}

int decode_server_id_tsecr(const ParsedPacket& p) {
    if (!p.has_timestamp()) throw MissingTimestampOption("packet carries no tcp timestamp option");
    return decode_server_id_tsecr(p.tcp->timestamp.tsecr);
}

}  // namespace p4green
