#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace p4green {

/// Step-interpolated availability index over one day (hours 0-24).
class EnergyTrace {
public:
    struct Sample {
        double hour = 0;
        int index = 0;
    };

    EnergyTrace() = default;
    explicit EnergyTrace(std::vector<Sample> samples) : samples_(std::move(samples)) {}

    /// A half-sine day: index rises from sunrise, peaks mid-way and returns to
    /// zero at sunset, sampled every `step_minutes` (values inside the day are
    /// at least 1).
    static EnergyTrace solar(double sunrise_h, double sunset_h, int peak, double step_minutes);

    /// Value of the last sample at or before `hour`; 0 before the first one.
    int value_at(double hour) const;

    /// The same curve seen from a clock that runs `lag_hours` ahead, wrapped
    /// into [0, 24).
    EnergyTrace shifted(double lag_hours) const;

    /// Hours at which the step function changes value, ascending.
    std::vector<double> change_points() const;

    const std::vector<Sample>& samples() const { return samples_; }
    bool empty() const { return samples_.empty(); }

private:
    std::vector<Sample> samples_;
};

struct IntRange {
    int min = 1;
    int max = 1;
};

/// Daily new-flow rate curve (linear between samples) plus flow-shape
/// parameters. Rates are flows per simulated second.
struct TrafficProfile {
    struct Sample {
        double hour = 0;
        double rate = 0;
    };
    std::vector<Sample> rate;
    IntRange request_packets{1, 1};  // client segments after the SYN
    int request_bytes = 1000;        // payload per request segment
    IntRange response_packets{1, 1}; // server segments per request
    int response_bytes = 100;
    IntRange think_time_ms{1, 1};    // client pause between rounds
    std::optional<std::uint64_t> max_flows;

    double rate_at(double hour) const;
    double max_rate() const;
};

}  // namespace p4green
