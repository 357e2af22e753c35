#include "doctest.h"

#include "p4green/consolidation.hpp"
#include "p4green/errors.hpp"

#include <random>

using namespace p4green;
using namespace std::chrono_literals;

namespace {
const std::vector<std::uint64_t> kThresholds = {10240, 20480};

int count_exceeded(std::uint64_t traffic) {
    int w = 1;
    for (auto t : kThresholds) w += traffic > t;
    return w;
}
}  // namespace

TEST_CASE("width from epoch volume") {
    CHECK(recompute_width(5000, kThresholds, 3) == 1);
    CHECK(recompute_width(15000, kThresholds, 3) == 2);
    CHECK(recompute_width(10240, kThresholds, 3) == 1);
    CHECK(recompute_width(10241, kThresholds, 3) == 2);
    CHECK(recompute_width(20480, kThresholds, 3) == 2);
    CHECK(recompute_width(20481, kThresholds, 3) == 3);
    CHECK(recompute_width(1'000'000, kThresholds, 2) == 2);
    CHECK(recompute_width(0, {}, 1) == 1);
}

TEST_CASE("epoch rotation") {
    ConsolidationState s(1s, kThresholds, 3);
    s.account(15000, 0us);  // opens the epoch at 0
    CHECK(s.traffic() == 15000);

    SUBCASE("packet after the epoch closes it") {
        const auto acc = s.account(500, 1200ms);
        CHECK(acc.rotated);
        CHECK(acc.evaluated_traffic == 15000);
        CHECK(acc.width == 2);
        CHECK(s.aggr_switches() == 2);
        CHECK(s.traffic() == 500);
        CHECK(s.epoch_start() == 1200ms);
    }
    SUBCASE("packet inside the epoch only counts") {
        const auto acc = s.account(500, 500ms);
        CHECK_FALSE(acc.rotated);
        CHECK(s.traffic() == 15500);
        CHECK(s.aggr_switches() == 1);
    }
    SUBCASE("exactly one epoch later rotates") {
        CHECK(s.account(1, 1s).rotated);
    }
}

TEST_CASE("a long silence causes a single rotation") {
    ConsolidationState s(1s, kThresholds, 3);
    s.account(25000, 0us);
    const auto acc = s.account(100, 10s + 300ms);
    CHECK(acc.rotated);
    CHECK(acc.evaluated_traffic == 25000);
    CHECK(acc.width == 3);
    CHECK(s.traffic() == 100);
    // The next epoch is measured afresh from the late packet.
    CHECK_FALSE(s.account(100, 11s).rotated);
    const auto next = s.account(100, 11s + 300ms);
    CHECK(next.rotated);
    CHECK(next.evaluated_traffic == 200);
    CHECK(next.width == 1);
}

TEST_CASE("time must not run backwards") {
    ConsolidationState s(1s, kThresholds, 3);
    s.account(10, 2s);
    s.account(10, 3s);
    CHECK_THROWS_AS(s.account(10, 2500ms), ClockRegression);
}

TEST_CASE("pinned state stays at max width") {
    ConsolidationState s(1s, kThresholds, 3);
    s.pin_to_max();
    CHECK(s.aggr_switches() == 3);
    s.account(1, 0us);
    CHECK(s.account(1, 5s).width == 3);
}

TEST_CASE("property: width tracks the previous epoch and stays in range") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        ConsolidationState s(1s, kThresholds, 3);
        SimTime now{0};
        std::uint64_t epoch_bytes = 0;
        int expected = 1;
        SimTime start{0};
        for (int i = 0; i < 2000; ++i) {
            now += SimTime(static_cast<std::int64_t>(rng() % 40'000));
            const std::uint64_t bytes = 64 + rng() % 1400;
            const auto acc = s.account(bytes, now);
            if (now - start >= 1s) {
                REQUIRE(acc.rotated);
                CHECK(acc.evaluated_traffic == epoch_bytes);
                expected = count_exceeded(epoch_bytes);
                epoch_bytes = 0;
                start = now;
            } else {
                REQUIRE_FALSE(acc.rotated);
            }
            epoch_bytes += bytes;
            CHECK(acc.width == expected);
            CHECK(acc.width >= 1);
            CHECK(acc.width <= 3);
        }
    }
}
