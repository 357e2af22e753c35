#pragma once

#include "p4green/forwarding.hpp"
#include "p4green/net.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace p4green {

struct WindowCount {
    std::uint64_t bytes = 0;
    std::uint64_t packets = 0;
    friend bool operator==(const WindowCount&, const WindowCount&) = default;
};

struct WidthChange {
    std::int64_t time_us = 0;
    int switch_index = 0;
    std::uint64_t traffic = 0;  // epoch volume that was evaluated
    int previous_width = 1;
    int width = 1;
    friend bool operator==(const WidthChange&, const WidthChange&) = default;
};

struct InfoRecord {
    std::int64_t time_us = 0;
    int server_index = 0;
    int index = 0;
    friend bool operator==(const InfoRecord&, const InfoRecord&) = default;
};

struct FlowRecord {
    std::uint64_t flow_id = 0;
    std::int64_t start_us = 0;
    Ipv4Addr vip;
    int server_index = -1;   // server that received the SYN (-1: never delivered)
    int selected_id = -1;    // local server ID chosen by the access switch
    std::vector<std::uint8_t> indices;  // servers_data at selection time
    std::uint64_t bytes = 0;  // client-to-server bytes delivered
    friend bool operator==(const FlowRecord&, const FlowRecord&) = default;
};

struct DropCounter {
    std::uint64_t packets = 0;
    std::uint64_t bytes = 0;
    friend bool operator==(const DropCounter&, const DropCounter&) = default;
};

/// Raw counters of one run. Every summary figure is derived from these.
struct MetricsReport {
    std::string scenario;
    std::string policy;
    std::int64_t seed = 0;
    std::int64_t until_us = 0;
    std::int64_t window_us = 0;          // switch accounting window
    std::int64_t server_bin_us = 0;      // server tally bin
    double day_seconds = 86400;

    // Switch layout.
    std::vector<std::string> switch_ids;
    std::vector<std::string> switch_types;
    std::vector<std::vector<WindowCount>> switch_windows;  // [switch][window]
    std::vector<WidthChange> width_log;

    // Servers: id, pool (access switch id).
    std::vector<std::string> server_ids;
    std::vector<std::string> server_pools;
    std::vector<std::vector<WindowCount>> server_bins;  // bytes received, packets = new flows
    std::vector<InfoRecord> info_log;
    std::vector<FlowRecord> flows;

    std::array<DropCounter, kDropCauseCount> drops{};
    std::uint64_t injected_bytes = 0;
    std::uint64_t delivered_bytes = 0;
    std::uint64_t consumed_bytes = 0;   // info-packets absorbed by access switches
    std::uint64_t in_flight_bytes = 0;  // still on a link when the run stopped
    std::uint64_t injected_packets = 0;
    std::uint64_t delivered_packets = 0;

    std::uint64_t affinity_checked = 0;     // non-SYN segments delivered to a server
    std::uint64_t affinity_violations = 0;  // ... that reached a server other than the SYN's
    std::uint64_t ecmp_checked = 0;
    std::uint64_t ecmp_out_of_width = 0;    // uplink index >= width in force
    std::uint64_t control_plane_calls = 0;  // installer invocations during the run phase

    std::uint64_t dropped_bytes() const;
    std::uint64_t dropped_packets() const;
    bool conserved() const {
        return injected_bytes == delivered_bytes + consumed_bytes + dropped_bytes() + in_flight_bytes;
    }
    int switch_index(const std::string& id) const;
    int server_index(const std::string& id) const;
};

}  // namespace p4green
