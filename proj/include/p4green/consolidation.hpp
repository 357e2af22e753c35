#pragma once

#include "p4green/net.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace p4green {

/// Number of uplinks eligible for a given epoch volume: one plus the count of
/// thresholds strictly exceeded, capped at max_width.
int recompute_width(std::uint64_t traffic, std::span<const std::uint64_t> thresholds, int max_width);

/// Epoch-based volume estimator driving the ECMP width register of a core or
/// access switch.
class ConsolidationState {
public:
    ConsolidationState() = default;
    /// `thresholds` must be strictly ascending with max_width - 1 entries.
    ConsolidationState(SimTime epoch_length, std::vector<std::uint64_t> thresholds, int max_width);

    struct Accounting {
        int width = 1;
        bool rotated = false;
        std::uint64_t evaluated_traffic = 0;  // epoch volume compared against thresholds
        int previous_width = 1;
    };

    /// Counts `bytes` into the current epoch, first closing the epoch if
    /// `now - epoch_start >= epoch_length`. At most one rotation per call.
    /// Throws ClockRegression if now < epoch_start.
    Accounting account(std::uint64_t bytes, SimTime now);

    /// Forces the width to max_width forever (plain ECMP baseline).
    void pin_to_max() { pinned_ = true; aggr_switches_ = max_width_; }

    int aggr_switches() const { return aggr_switches_; }
    SimTime epoch_start() const { return epoch_start_; }
    std::uint64_t traffic() const { return traffic_; }
    SimTime epoch_length() const { return epoch_length_; }
    int max_width() const { return max_width_; }
    bool pinned() const { return pinned_; }
    const std::vector<std::uint64_t>& thresholds() const { return thresholds_; }

private:
    int aggr_switches_ = 1;
    SimTime epoch_start_{0};
    std::uint64_t traffic_ = 0;
    SimTime epoch_length_{1'000'000};
    std::vector<std::uint64_t> thresholds_;
    int max_width_ = 1;
    bool pinned_ = false;
};

}  // namespace p4green
