#pragma once

#include "p4green/metrics.hpp"
#include "p4green/scenario.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace p4green {

struct Reduction {
    double fraction = 0;  // 1 - active / baseline_active
    bool no_traffic = false;
    std::uint64_t active_windows = 0;
    std::uint64_t baseline_active_windows = 0;
};

/// Aggregation-switch operation time: accounting windows in which a switch
/// forwarded at least one byte, summed over aggregation switches.
std::uint64_t aggregation_active_windows(const MetricsReport& r);

Reduction switch_hour_reduction(const MetricsReport& report, const MetricsReport& baseline);

/// reduction x switches x watt-hours per switch.
double energy_saving_estimate(double reduction, int n_switches, double per_switch_wh);

/// A flow is green-directed when its server held the largest index at
/// selection time, that index was positive, and some other candidate reported
/// strictly less.
bool is_green_directed(const FlowRecord& f);

struct GreenShare {
    double fraction = 0;
    std::uint64_t green_bytes = 0;
    std::uint64_t total_bytes = 0;
};
GreenShare green_share(const MetricsReport& r);

struct IntervalShare {
    std::string interval;
    std::string server;
    std::string pool;
    std::uint64_t bytes = 0;
    std::uint64_t pool_bytes = 0;
    std::uint64_t flows = 0;
    std::uint64_t pool_flows = 0;
    double share() const { return pool_bytes ? static_cast<double>(bytes) / static_cast<double>(pool_bytes) : 0.0; }
};

/// Per-server share of its pool's received bytes inside each time-of-day
/// interval. Pools that received nothing in an interval are omitted.
std::vector<IntervalShare> interval_shares(const MetricsReport& r, const std::vector<ReportInterval>& intervals);

/// Everything `report` needs besides the raw counters.
struct SummaryParams {
    EnergyModel energy_model;
    std::vector<ReportInterval> intervals;
};

struct RunOutput {
    MetricsReport p4green;
    MetricsReport baseline;
    SummaryParams params;
};

/// Runs the scenario under P4Green and under pinned ECMP. The two engines
/// share nothing and run concurrently when `parallel` is set.
RunOutput run_with_baseline(const Scenario& s, std::optional<SimTime> until = std::nullopt, bool parallel = true);

/// key=value lines, deterministic formatting.
std::string render_summary(const RunOutput& run);

// --- files --------------------------------------------------------------------

inline constexpr int kCsvSchemaVersion = 1;

/// Writes <dir>/{run_info.txt, switch_windows.csv, width_log.csv, server_bins.csv,
/// info_reports.csv, flows.csv, drops.csv, totals.csv, report_params.txt,
/// summary.txt} and the baseline's raw files under <dir>/baseline/.
void write_run(const std::filesystem::path& dir, const RunOutput& run);

/// Reads back what write_run produced (raw CSVs only; the summary is not
/// consulted). Throws ParseError on missing or malformed files.
RunOutput read_run(const std::filesystem::path& dir);

}  // namespace p4green
