#pragma once

#include "p4green/net.hpp"

#include <cstdint>
#include <span>

namespace p4green {

/// Ones-complement sum of 16-bit big-endian words, folded, not inverted.
std::uint16_t ones_complement_sum(std::span<const std::uint8_t> data, std::uint32_t initial = 0);

/// Internet checksum (inverted folded sum).
std::uint16_t internet_checksum(std::span<const std::uint8_t> data, std::uint32_t initial = 0);

/// Sum of the TCP/UDP pseudo header, unfolded.
std::uint32_t pseudo_header_sum(Ipv4Addr src, Ipv4Addr dst, std::uint8_t proto, std::uint16_t l4_len);

/// IEEE 802.3 CRC-32 (reflected, init and xorout 0xFFFFFFFF).
std::uint32_t crc32(std::span<const std::uint8_t> data);

}  // namespace p4green
