#include "p4green/net.hpp"

#include <charconv>
#include <cstdio>

namespace p4green {

namespace {

// Parses `count` dot-separated decimal octets.
template <std::size_t N>
bool parse_octets(std::string_view text, std::array<std::uint8_t, N>& out) {
    const char* p = text.data();
    const char* end = text.data() + text.size();
    for (std::size_t i = 0; i < N; ++i) {
        if (i > 0) {
            if (p == end || *p != '.') return false;
            ++p;
        }
        unsigned v = 0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc{} || next == p || v > 255 || next - p > 3) return false;
        out[i] = static_cast<std::uint8_t>(v);
        p = next;
    }
    return p == end;
}

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

std::optional<Ipv4Addr> Ipv4Addr::parse(std::string_view text) {
    std::array<std::uint8_t, 4> o{};
    if (!parse_octets(text, o)) return std::nullopt;
    return Ipv4Addr(o[0], o[1], o[2], o[3]);
}

std::string Ipv4Addr::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", octet(0), octet(1), octet(2), octet(3));
    return buf;
}

std::optional<SubnetPrefix> SubnetPrefix::parse(std::string_view text) {
    SubnetPrefix s;
    if (!parse_octets(text, s.octets)) return std::nullopt;
    return s;
}

std::string SubnetPrefix::to_string() const {
    char buf[12];
    std::snprintf(buf, sizeof buf, "%u.%u.%u", octets[0], octets[1], octets[2]);
    return buf;
}

std::optional<MacAddr> MacAddr::parse(std::string_view text) {
    if (text.size() != 17) return std::nullopt;
    MacAddr m;
    for (std::size_t i = 0; i < 6; ++i) {
        if (i > 0 && text[3 * i - 1] != ':') return std::nullopt;
        int hi = hex_digit(text[3 * i]);
        int lo = hex_digit(text[3 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        m.bytes[i] = static_cast<std::uint8_t>(hi * 16 + lo);
    }
    return m;
}

std::string MacAddr::to_string() const {
    char buf[18];
    std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", bytes[0], bytes[1], bytes[2],
                  bytes[3], bytes[4], bytes[5]);
    return buf;
}

}  // namespace p4green
