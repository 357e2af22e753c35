#include "p4green/consolidation.hpp"

#include "p4green/errors.hpp"

#include <algorithm>
#include <string>

namespace p4green {

int recompute_width(std::uint64_t traffic, std::span<const std::uint64_t> thresholds, int max_width) {
    int exceeded = 0;
    for (auto t : thresholds)
        if (traffic > t) ++exceeded;
    return std::clamp(1 + exceeded, 1, std::max(max_width, 1));
}

ConsolidationState::ConsolidationState(SimTime epoch_length, std::vector<std::uint64_t> thresholds,
                                       int max_width)
    : epoch_length_(epoch_length), thresholds_(std::move(thresholds)), max_width_(max_width) {
    if (max_width_ < 1) throw WidthOutOfRange("max_width must be at least 1");
    if (epoch_length_.count() <= 0) throw Error("epoch_length must be positive");
}

ConsolidationState::Accounting ConsolidationState::account(std::uint64_t bytes, SimTime now) {
    if (now < epoch_start_)
        throw ClockRegression("packet time " + std::to_string(now.count()) + "us precedes epoch start " +
                              std::to_string(epoch_start_.count()) + "us");
    Accounting acc;
    acc.previous_width = aggr_switches_;
    if (now - epoch_start_ >= epoch_length_) {
        acc.rotated = true;
        acc.evaluated_traffic = traffic_;
        if (!pinned_) aggr_switches_ = recompute_width(traffic_, thresholds_, max_width_);
        traffic_ = 0;
        epoch_start_ = now;
    }
    traffic_ += bytes;
    acc.width = aggr_switches_;
    return acc;
}

}  // namespace p4green
