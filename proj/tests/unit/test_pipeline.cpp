#include "doctest.h"
#include "oracles.hpp"

#include "p4green/control.hpp"
#include "p4green/errors.hpp"
#include "p4green/pipeline.hpp"
#include "p4green/scenario.hpp"

#include <map>
#include <random>

using namespace p4green;
using namespace std::chrono_literals;

namespace {

const Ipv4Addr kClient(192, 168, 0, 10);
const Ipv4Addr kVip1(10, 0, 1, 100);

Scenario fig3() { return load_scenario(P4GREEN_SCENARIO_DIR "/fig3.scenario"); }

SwitchState& by_id(Installation& inst, const std::string& id) {
    return inst.switches[static_cast<std::size_t>(*inst.topology.find(id))];
}

Port port_to(const Installation& inst, const std::string& from, const std::string& to) {
    return *inst.topology.port_towards(*inst.topology.find(from), *inst.topology.find(to));
}

ParsedPacket client_syn(std::uint16_t sport = 10000) {
    return make_tcp_packet({}, {}, {kClient, kVip1, kProtoTcp, sport, 80}, tcp_flags::syn, {1, 0}, 0);
}

}  // namespace

TEST_CASE("longest prefix match") {
    LpmTable t;
    CHECK_FALSE(t.lookup(Ipv4Addr(1, 2, 3, 4)));
    t.insert(Ipv4Addr(10, 0, 1, 0), 24, {1, {}});
    t.insert(Ipv4Addr(0, 0, 0, 0), 0, {9, {}});
    CHECK(t.lookup(Ipv4Addr(10, 0, 1, 7))->port == 1);
    CHECK(t.lookup(Ipv4Addr(8, 8, 8, 8))->port == 9);
    t.insert(Ipv4Addr(10, 0, 1, 7), 32, {3, {}});
    CHECK(t.lookup(Ipv4Addr(10, 0, 1, 7))->port == 3);
    t.insert(Ipv4Addr(10, 0, 1, 7), 32, {4, {}});
    CHECK(t.lookup(Ipv4Addr(10, 0, 1, 7))->port == 4);
    CHECK(t.size() == 3);
    CHECK_THROWS_AS(t.insert(Ipv4Addr(1, 0, 0, 0), 33, {}), Error);
}

TEST_CASE("ecmp key layout and bucket") {
    const FiveTuple ft{kClient, kVip1, kProtoTcp, 10000, 80};
    const auto key = ecmp_key(ft);
    const std::array<std::uint8_t, 13> expected = {192, 168, 0, 10, 10, 0, 1, 100, 6, 0x27, 0x10, 0x00, 0x50};
    CHECK(key == expected);
    // crc32 of this key, computed offline with zlib, is 0x1e9ffcd4.
    CHECK(oracle::zlib_crc32(key.data(), key.size()) == 0x1e9ffcd4u);
    CHECK(ecmp_bucket(ft, 3) == 2);
    CHECK(ecmp_bucket(ft, 2) == 0);
    const std::vector<Port> uplinks = {11, 12, 13};
    CHECK(ecmp_select(ft, 3, uplinks) == 13);
    CHECK(ecmp_select(ft, 1, uplinks) == 11);
    CHECK_THROWS_AS(ecmp_select(ft, 0, uplinks), WidthOutOfRange);
    CHECK_THROWS_AS(ecmp_select(ft, 4, uplinks), WidthOutOfRange);
}

TEST_CASE("property: ecmp spreads random tuples evenly") {
    std::mt19937 rng(23);
    const std::vector<Port> uplinks = {1, 2, 3};
    std::map<Port, int> tally;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const FiveTuple ft{Ipv4Addr(static_cast<std::uint32_t>(rng())), kVip1, kProtoTcp,
                           static_cast<std::uint16_t>(rng()), 80};
        const Port p = ecmp_select(ft, 3, uplinks);
        CHECK(p == ecmp_select(ft, 3, uplinks));
        ++tally[p];
    }
    for (Port p : uplinks) {
        CHECK(tally[p] > n / 3 * 0.9);
        CHECK(tally[p] < n / 3 * 1.1);
    }
}

TEST_CASE("installation of the default topology") {
    const Scenario s = fig3();
    auto inst = install(s, Policy::p4green);
    CHECK(inst.topology.switch_count == 8);

    auto& access1 = by_id(inst, "access1");
    REQUIRE(access1.workload);
    const auto& hi = access1.workload->host_info;
    REQUIRE(hi.size() == 2);
    CHECK(hi.find(0)->ip == Ipv4Addr(10, 0, 1, 1));
    CHECK(hi.find(1)->ip == Ipv4Addr(10, 0, 1, 2));
    CHECK(hi.find(0)->port == port_to(inst, "access1", "server1"));
    CHECK(access1.workload->servers_data == std::vector<std::uint8_t>{0, 0});
    CHECK(access1.config.uplink_ports.size() == 3);
    CHECK(access1.consolidation.aggr_switches() == 1);
    CHECK(access1.consolidation.traffic() == 0);

    auto& core = by_id(inst, "core1");
    CHECK(core.config.external_port == port_to(inst, "core1", "client"));
    CHECK(core.config.uplink_ports ==
          std::vector<Port>{port_to(inst, "core1", "aggr1"), port_to(inst, "core1", "aggr2"),
                            port_to(inst, "core1", "aggr3")});
    CHECK_FALSE(core.workload);

    // Every switch can reach every host and VIP.
    for (const auto& sw : inst.switches) {
        for (const auto& n : inst.topology.nodes)
            if (n.ip) CHECK(sw.lpm.lookup(*n.ip));
        if (sw.config.switch_id != "access1") CHECK(sw.lpm.lookup(kVip1));
    }

    auto pinned = install(s, Policy::pinned_ecmp);
    CHECK(by_id(pinned, "core1").consolidation.aggr_switches() == 3);
    CHECK(by_id(pinned, "core1").consolidation.pinned());
}

TEST_CASE("classification") {
    auto inst = install(fig3());
    auto& access1 = by_id(inst, "access1");
    const Port server_port = port_to(inst, "access1", "server1");
    const Port up = port_to(inst, "access1", "aggr1");
    CHECK(classify(client_syn(), access1.config, up) == PacketClass::server_in);
    const auto info = encode_info_packet(*SubnetPrefix::parse("10.0.1"), 5, Ipv4Addr(10, 0, 1, 1), {}, {});
    CHECK(classify(info, access1.config, server_port) == PacketClass::info);
    auto reply = make_tcp_packet({}, {}, {Ipv4Addr(10, 0, 1, 1), kClient, kProtoTcp, 80, 10000}, tcp_flags::ack,
                                 {1, 1}, 0);
    CHECK(classify(reply, access1.config, server_port) == PacketClass::server_out);
    CHECK(classify(reply, by_id(inst, "aggr1").config, 1) == PacketClass::transit);
    auto& core = by_id(inst, "core1");
    CHECK(classify(client_syn(), core.config, *core.config.external_port) == PacketClass::aggregation_in);
    CHECK(classify(reply, core.config, port_to(inst, "core1", "aggr1")) == PacketClass::transit);
}

TEST_CASE("ingress at each tier") {
    auto inst = install(fig3());

    SUBCASE("core spreads inbound traffic over the current width") {
        auto& core = by_id(inst, "core1");
        const auto d = ingress(core, client_syn(), *core.config.external_port, 0us);
        REQUIRE(d.action == Action::forward);
        REQUIRE(d.ecmp);
        CHECK(d.ecmp->width == 1);
        CHECK(d.egress_port == core.config.uplink_ports[0]);
        CHECK(d.packet.ip_ttl == 63);
        CHECK(d.packet.eth_src == core.config.mac);
        CHECK(d.packet.eth_dst == inst.topology.nodes[static_cast<std::size_t>(*inst.topology.find("aggr1"))].mac);
        CHECK(core.consolidation.traffic() == client_syn().wire_len());
    }
    SUBCASE("aggregation forwards on the destination only") {
        auto& aggr = by_id(inst, "aggr2");
        const auto in = client_syn();
        const auto d = ingress(aggr, in, port_to(inst, "aggr2", "core1"), 0us);
        REQUIRE(d.action == Action::forward);
        CHECK(d.egress_port == port_to(inst, "aggr2", "access1"));
        CHECK_FALSE(d.ecmp);
        CHECK(d.packet.ip_ttl == in.ip_ttl);
        CHECK(d.packet.ip_dst == in.ip_dst);
        CHECK(d.packet.ip_src == in.ip_src);
        CHECK(d.packet.tcp->timestamp.tsval == in.tcp->timestamp.tsval);
    }
    SUBCASE("access consumes info-packets") {
        auto& access1 = by_id(inst, "access1");
        const auto info = encode_info_packet(*SubnetPrefix::parse("10.0.1"), 77, Ipv4Addr(10, 0, 1, 2), {}, {});
        const auto d = ingress(access1, info, port_to(inst, "access1", "server2"), 0us);
        CHECK(d.action == Action::consume);
        CHECK(access1.workload->servers_data[1] == 77);
    }
    SUBCASE("access translates the VIP") {
        auto& access1 = by_id(inst, "access1");
        access1.workload->servers_data = {0, 9};
        const auto d = ingress(access1, client_syn(), port_to(inst, "access1", "aggr3"), 0us);
        REQUIRE(d.action == Action::forward);
        CHECK(d.packet.ip_dst == Ipv4Addr(10, 0, 1, 2));
        CHECK(d.egress_port == port_to(inst, "access1", "server2"));
        CHECK(d.packet.eth_src == access1.config.mac);
    }
    SUBCASE("server replies are stamped and spread upwards") {
        auto& access1 = by_id(inst, "access1");
        auto reply = make_tcp_packet({}, {}, {Ipv4Addr(10, 0, 1, 2), kClient, kProtoTcp, 80, 10000},
                                     tcp_flags::ack, {800, 1}, 0);
        const auto d = ingress(access1, reply, port_to(inst, "access1", "server2"), 0us);
        REQUIRE(d.action == Action::forward);
        REQUIRE(d.ecmp);
        CHECK(d.packet.ip_src == kVip1);
        CHECK(d.packet.tcp->timestamp.tsval == 801);
        CHECK(d.egress_port == access1.config.uplink_ports[0]);
    }
    SUBCASE("local traffic between servers is not spread") {
        auto& access1 = by_id(inst, "access1");
        auto local = make_tcp_packet({}, {}, {Ipv4Addr(10, 0, 1, 1), Ipv4Addr(10, 0, 1, 2), kProtoTcp, 5, 6},
                                     tcp_flags::ack, {1, 1}, 0);
        const auto d = ingress(access1, local, port_to(inst, "access1", "server1"), 0us);
        REQUIRE(d.action == Action::forward);
        CHECK_FALSE(d.ecmp);
        CHECK(d.egress_port == port_to(inst, "access1", "server2"));
    }
    SUBCASE("non-TCP server traffic passes untranslated") {
        auto& access1 = by_id(inst, "access1");
        ParsedPacket icmp;
        icmp.ip_proto = 1;
        icmp.ip_src = Ipv4Addr(10, 0, 1, 1);
        icmp.ip_dst = kClient;
        const auto d = ingress(access1, icmp, port_to(inst, "access1", "server1"), 0us);
        REQUIRE(d.action == Action::forward);
        CHECK(d.packet.ip_src == Ipv4Addr(10, 0, 1, 1));
    }
    SUBCASE("unrouted destination is dropped") {
        auto& aggr = by_id(inst, "aggr1");
        auto p = client_syn();
        p.ip_dst = Ipv4Addr(172, 16, 0, 1);
        CHECK(ingress(aggr, p, 1, 0us).cause == DropCause::no_route);
    }
    SUBCASE("expiring TTL is dropped at a routing tier") {
        auto& core = by_id(inst, "core1");
        auto p = client_syn();
        p.ip_ttl = 1;
        CHECK(ingress(core, p, *core.config.external_port, 0us).cause == DropCause::ttl_expired);
    }
}

TEST_CASE("pipeline does not mutate other switches") {
    auto inst = install(fig3());
    auto& core = by_id(inst, "core1");
    const auto before = by_id(inst, "access2").consolidation.traffic();
    for (int i = 0; i < 100; ++i)
        ingress(core, client_syn(static_cast<std::uint16_t>(10000 + i)), *core.config.external_port, SimTime(i));
    CHECK(by_id(inst, "access2").consolidation.traffic() == before);
}
