#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace p4green {

/// Simulated time. The engine runs on a microsecond clock.
using SimTime = std::chrono::microseconds;

/// Switch port number. Ports are numbered from 1 in link order.
using Port = std::uint16_t;

struct Ipv4Addr {
    std::uint32_t value = 0;

    constexpr Ipv4Addr() = default;
    constexpr explicit Ipv4Addr(std::uint32_t v) : value(v) {}
    constexpr Ipv4Addr(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
        : value((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) | d) {}

    constexpr std::uint8_t octet(int i) const { return static_cast<std::uint8_t>(value >> (24 - 8 * i)); }

    static std::optional<Ipv4Addr> parse(std::string_view text);
    std::string to_string() const;

    friend constexpr auto operator<=>(const Ipv4Addr&, const Ipv4Addr&) = default;
};

/// First three octets of an IPv4 /24, e.g. "10.0.1".
struct SubnetPrefix {
    std::array<std::uint8_t, 3> octets{};

    static std::optional<SubnetPrefix> parse(std::string_view text);
    std::string to_string() const;
    constexpr Ipv4Addr with_host(std::uint8_t host) const {
        return Ipv4Addr(octets[0], octets[1], octets[2], host);
    }
    constexpr bool contains(Ipv4Addr ip) const {
        return ip.octet(0) == octets[0] && ip.octet(1) == octets[1] && ip.octet(2) == octets[2];
    }

    friend constexpr auto operator<=>(const SubnetPrefix&, const SubnetPrefix&) = default;
};

struct MacAddr {
    std::array<std::uint8_t, 6> bytes{};

    static constexpr MacAddr from_u64(std::uint64_t v) {
        MacAddr m;
        for (int i = 0; i < 6; ++i) m.bytes[i] = static_cast<std::uint8_t>(v >> (40 - 8 * i));
        return m;
    }
    static std::optional<MacAddr> parse(std::string_view text);
    std::string to_string() const;

    friend constexpr auto operator<=>(const MacAddr&, const MacAddr&) = default;
};

}  // namespace p4green
