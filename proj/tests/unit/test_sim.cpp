#include "doctest.h"

#include "p4green/control.hpp"
#include "p4green/harness.hpp"
#include "p4green/sim.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <set>

using namespace p4green;
using nlohmann::json;

namespace {

json fig3_json() {
    std::ifstream f(P4GREEN_SCENARIO_DIR "/fig3.scenario");
    return json::parse(f);
}

Scenario from(const json& j) { return parse_scenario(j.dump()); }

}  // namespace

TEST_CASE("no traffic leaves everything idle") {
    auto j = fig3_json();
    j.erase("clients");
    const auto r = simulate(from(j));
    CHECK(r.injected_bytes == 0);
    CHECK(r.delivered_bytes == 0);
    CHECK(r.flows.empty());
    CHECK(r.width_log.empty());
    for (const auto& sw : r.switch_windows)
        for (const auto& w : sw) CHECK(w.bytes == 0);
}

TEST_CASE("a single flow crosses every tier and keeps affinity") {
    auto j = fig3_json();
    j["clients"][0]["targets"] = {"access1"};
    j["clients"][0]["profile"]["max_flows"] = 1;
    j["clients"][0]["profile"]["request_packets"] = 3;
    j["clients"][0]["profile"]["response_packets"] = 1;
    const Scenario s = from(j);

    auto inst = install(s);
    std::set<std::string> seen;
    std::vector<std::string> order;
    const Topology topo = inst.topology;
    Engine e(s, std::move(inst));
    e.observe([&](int sw, SimTime, const ForwardingDecision& d) {
        if (d.action != Action::forward) return;
        const auto& id = topo.nodes[static_cast<std::size_t>(sw)].id;
        if (!seen.count(id)) order.push_back(id);
        seen.insert(id);
    });
    const auto r = e.run(s.duration());

    REQUIRE(r.flows.size() == 1);
    CHECK(r.flows[0].server_index >= 0);
    CHECK(r.flows[0].selected_id == r.flows[0].server_index);  // servers 1,2 are ids 0,1 and first in order
    CHECK(r.affinity_checked == 3);
    CHECK(r.affinity_violations == 0);
    CHECK(r.conserved());
    CHECK(r.dropped_packets() == 0);
    CHECK(r.in_flight_bytes == 0);
    // Width 1 everywhere: only the first aggregation switch carries the flow.
    const std::vector<std::string> expected = {"core1", "aggr1", "access1"};
    CHECK(order == expected);
    // SYN, SYN-ACK, 3 requests and 3 responses delivered at hosts.
    CHECK(r.delivered_packets == 8);
    CHECK(r.control_plane_calls == 0);
}

TEST_CASE("runs are deterministic") {
    const Scenario s = load_scenario(P4GREEN_SCENARIO_DIR "/fig3.scenario");
    const auto a = run_with_baseline(s);
    const auto b = run_with_baseline(s, std::nullopt, false);
    CHECK(render_summary(a) == render_summary(b));
    CHECK(a.p4green.flows == b.p4green.flows);
    CHECK(a.p4green.switch_windows == b.p4green.switch_windows);
    CHECK(a.p4green.width_log == b.p4green.width_log);
    CHECK(a.baseline.switch_windows == b.baseline.switch_windows);

    auto j = fig3_json();
    j["seed"] = 99;
    const auto c = simulate(from(j));
    CHECK_FALSE(c.flows == a.p4green.flows);
}

TEST_CASE("flow arrivals follow the configured rate") {
    auto j = fig3_json();
    j["clients"][0]["profile"]["rate"] = {{0, 20}, {24, 20}};
    j["duration_s"] = 100;
    const auto r = simulate(from(j));
    const double mean = 20.0 * 100;
    CHECK(std::abs(static_cast<double>(r.flows.size()) - mean) < 3 * std::sqrt(mean));

    j["clients"][0]["profile"]["rate"] = {{0, 0}, {24, 0}};
    CHECK(simulate(from(j)).flows.empty());
}

TEST_CASE("flow arrivals follow a time-varying rate") {
    auto j = fig3_json();
    j["day_seconds"] = 240;
    j["duration_s"] = 240;
    j["clients"][0]["profile"]["rate"] = {{0, 0}, {12, 0}, {12.001, 40}, {24, 40}};
    const auto r = simulate(from(j));
    for (const auto& f : r.flows) CHECK(f.start_us >= 120'000'000);
    const double mean = 40.0 * 120;
    CHECK(std::abs(static_cast<double>(r.flows.size()) - mean) < 3 * std::sqrt(mean) + 10);
}

TEST_CASE("servers report their traces") {
    auto j = fig3_json();
    j.erase("clients");
    j["day_seconds"] = 2400;
    j["duration_s"] = 2400;
    j["hosts"][0]["energy"] = {{"samples", {{0, 0}, {5, 40}}}};
    j["hosts"][1]["energy"] = {{"samples", {{0, 7}}}, {"report_period_s", 300}};
    const Scenario s = from(j);
    const auto r = simulate(s);

    std::vector<InfoRecord> s1, s2;
    for (const auto& i : r.info_log) (i.server_index == 0 ? s1 : s2).push_back(i);
    // Registers start at 0, so only the step to 40 is reported.
    REQUIRE(s1.size() == 1);
    CHECK(s1[0].time_us == s.at_hour(5).count());
    CHECK(s1[0].index == 40);
    // Flat trace: the initial report, then one every period.
    REQUIRE(s2.size() == 8);
    for (std::size_t k = 0; k < s2.size(); ++k) {
        CHECK(s2[k].time_us == static_cast<std::int64_t>(k) * 300'000'000);
        CHECK(s2[k].index == 7);
    }
    CHECK(r.consumed_bytes > 0);
    CHECK(r.conserved());
}

TEST_CASE("info reports steer new flows") {
    auto j = fig3_json();
    j["clients"][0]["targets"] = {"access1"};
    j["hosts"][1]["energy"] = {{"samples", {{0, 50}}}};
    const auto r = simulate(from(j));
    REQUIRE(r.flows.size() > 10);
    int to_server2 = 0, counted = 0;
    for (const auto& f : r.flows) {
        if (f.start_us < 1000) continue;  // before the first report lands
        ++counted;
        to_server2 += f.server_index == 1;
    }
    CHECK(to_server2 == counted);
    CHECK(green_share(r).fraction > 0.99);
}

TEST_CASE("the engine never reinstalls") {
    const Scenario s = load_scenario(P4GREEN_SCENARIO_DIR "/fig3.scenario");
    Engine e(s, install(s));
    const auto before = installer_invocations();
    const auto r = e.run(s.duration());
    CHECK(r.control_plane_calls == 0);
    CHECK(installer_invocations() == before);
}

TEST_CASE("stopping early leaves packets in flight but still conserves bytes") {
    auto j = fig3_json();
    j["link_delay_us"] = 20000;
    const Scenario s = from(j);
    const auto r = simulate(s, Policy::p4green, SimTime(5'010'000));
    CHECK(r.in_flight_bytes > 0);
    CHECK(r.conserved());
}
