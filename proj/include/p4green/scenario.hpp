#pragma once

#include "p4green/net.hpp"
#include "p4green/pipeline.hpp"
#include "p4green/traces.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace p4green {

inline constexpr int kScenarioSchemaVersion = 1;

struct SwitchSpec {
    std::string id;
    SwitchType type = SwitchType::aggregation;
    SimTime epoch_length{1'000'000};
    std::vector<std::uint64_t> thresholds;
    std::optional<SubnetPrefix> subnet;
    std::optional<Ipv4Addr> virtual_ip;
    std::optional<MacAddr> mac;
};

enum class HostRole { server, client };

struct HostSpec {
    std::string id;
    HostRole role = HostRole::server;
    Ipv4Addr ip;
    std::optional<MacAddr> mac;
    // Server only.
    EnergyTrace energy;            // in the server's local clock
    double energy_lag_hours = 0;   // local clock runs this many hours behind scenario time
    double report_period_s = 0;    // 0 = report on change only
};

struct LinkSpec {
    std::string a;
    std::string b;
    std::optional<SimTime> delay;
};

struct RouteSpec {
    std::string switch_id;
    Ipv4Addr prefix;
    int length = 32;
    std::string via;  // neighbor node id
};

struct ClientSpec {
    std::string host;
    std::vector<Ipv4Addr> targets;  // VIPs; one is picked uniformly per flow
    std::uint16_t dst_port = 80;
    TrafficProfile profile;
};

/// Named time-of-day window over which per-server load shares are reported.
struct ReportInterval {
    std::string name;
    double from_h = 0;
    double to_h = 24;
};

struct EnergyModel {
    int aggregation_switches = 32;
    double watt_hours_per_switch = 400;
};

struct Scenario {
    int schema_version = kScenarioSchemaVersion;
    std::string name;
    std::uint64_t seed = 1;
    double day_seconds = 86400;  // simulated seconds that represent 24 h
    double duration_s = 0;       // 0 = one full day
    SimTime link_delay{10};
    SimTime accounting_window{0};  // 0 = epoch length of the first core switch
    int server_window_minutes = 15;  // time-of-day minutes per server tally bin

    std::vector<SwitchSpec> switches;
    std::vector<HostSpec> hosts;
    std::vector<LinkSpec> links;
    std::vector<RouteSpec> routes;
    std::vector<ClientSpec> clients;
    std::vector<ReportInterval> intervals;
    EnergyModel energy_model;

    SimTime duration() const;
    SimTime at_hour(double hour) const;       // scenario time of a time-of-day
    double hour_of(SimTime t) const;          // time of day (may exceed 24 on multi-day runs)
    SimTime window() const;                   // resolved accounting window
};

/// Throws ParseError on malformed text and ValidationError (naming the
/// offending field) when an invariant does not hold.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text);

/// Raises ValidationError for the first violated invariant.
void validate_scenario(const Scenario& s);

}  // namespace p4green
