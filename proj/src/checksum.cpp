#include "p4green/checksum.hpp"

#include <array>

namespace p4green {

std::uint16_t ones_complement_sum(std::span<const std::uint8_t> data, std::uint32_t initial) {
    std::uint64_t acc = initial;
    std::size_t i = 0;
    for (; i + 1 < data.size(); i += 2) acc += (std::uint32_t{data[i]} << 8) | data[i + 1];
    if (i < data.size()) acc += std::uint32_t{data[i]} << 8;
    while (acc >> 16) acc = (acc & 0xFFFF) + (acc >> 16);
    return static_cast<std::uint16_t>(acc);
}

std::uint16_t internet_checksum(std::span<const std::uint8_t> data, std::uint32_t initial) {
    return static_cast<std::uint16_t>(~ones_complement_sum(data, initial));
}

std::uint32_t pseudo_header_sum(Ipv4Addr src, Ipv4Addr dst, std::uint8_t proto, std::uint16_t l4_len) {
    return (src.value >> 16) + (src.value & 0xFFFF) + (dst.value >> 16) + (dst.value & 0xFFFF) +
           proto + l4_len;
}

namespace {

constexpr std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t n = 0; n < 256; ++n) {
        std::uint32_t c = n;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        t[n] = c;
    }
    return t;
}

constexpr auto kCrcTable = make_crc_table();

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> data) {
    std::uint32_t c = 0xFFFFFFFFu;
    for (auto b : data) c = kCrcTable[(c ^ b) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

}  // namespace p4green
