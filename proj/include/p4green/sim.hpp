#pragma once

#include "p4green/control.hpp"
#include "p4green/metrics.hpp"
#include "p4green/scenario.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <variant>
#include <vector>

namespace p4green {

struct PacketArrival {
    int node = -1;
    Port port = 0;
    std::vector<std::uint8_t> bytes;
};

enum class TimerTag { next_flow, send_request, report_change, report_periodic };

struct HostTimer {
    int node = -1;
    TimerTag tag = TimerTag::next_flow;
    std::uint64_t arg = 0;
};

struct Event {
    SimTime time{0};
    std::uint64_t seq = 0;
    std::variant<PacketArrival, HostTimer> kind;
};

/// Min-heap on (time, insertion sequence).
class EventQueue {
public:
    void push(SimTime time, std::variant<PacketArrival, HostTimer> kind);
    bool empty() const { return heap_.empty(); }
    SimTime next_time() const { return heap_.top().time; }
    Event pop();
    std::size_t size() const { return heap_.size(); }
    /// Total wire bytes of queued packet arrivals.
    std::uint64_t queued_packet_bytes() const;

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };
    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::uint64_t next_seq_ = 0;
};

/// Per-flow plan drawn by the client when the flow starts.
struct FlowModel {
    std::uint64_t id = 0;
    FiveTuple tuple;  // client -> VIP
    SimTime start{0};
    std::vector<int> response_packets;  // per round; round 0 answers the SYN
    int request_bytes = 0;
    int response_bytes = 0;
    IntRange think_time_ms;
    int rounds_done = 0;
    std::uint32_t client_clock_offset = 0;
    std::uint32_t last_client_tsval = 0;
    std::uint32_t last_server_tsval = 0;  // as received (VIP-stamped)
};

class Engine {
public:
    Engine(const Scenario& scenario, Installation installation);
    ~Engine();
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    /// Drains every event scheduled before `until`.
    MetricsReport run(SimTime until);

    const std::vector<SwitchState>& switches() const;

    /// Hook for tests: called with every ForwardingDecision an ECMP-capable
    /// switch makes.
    using DecisionObserver = std::function<void(int switch_index, SimTime now, const ForwardingDecision&)>;
    void observe(DecisionObserver obs);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// install + run. `until` defaults to the scenario duration.
MetricsReport simulate(const Scenario& scenario, Policy policy = Policy::p4green,
                       std::optional<SimTime> until = std::nullopt);

}  // namespace p4green
