#include "p4green/metrics.hpp"

#include <algorithm>

namespace p4green {

std::uint64_t MetricsReport::dropped_bytes() const {
    std::uint64_t n = 0;
    for (const auto& d : drops) n += d.bytes;
    return n;
}

std::uint64_t MetricsReport::dropped_packets() const {
    std::uint64_t n = 0;
    for (const auto& d : drops) n += d.packets;
    return n;
}

namespace {
int find_index(const std::vector<std::string>& v, const std::string& id) {
    auto it = std::find(v.begin(), v.end(), id);
    return it == v.end() ? -1 : static_cast<int>(it - v.begin());
}
}  // namespace

int MetricsReport::switch_index(const std::string& id) const { return find_index(switch_ids, id); }
int MetricsReport::server_index(const std::string& id) const { return find_index(server_ids, id); }

}  // namespace p4green
