// p4green command-line driver: run / validate / compare / report.

#include "p4green/errors.hpp"
#include "p4green/harness.hpp"
#include "p4green/scenario.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

enum Exit : int {
    ok = 0,
    usage = 2,
    file_error = 3,
    parse_error = 4,
    validation_error = 5,
    runtime_error = 6,
    report_mismatch = 7,
};

namespace fs = std::filesystem;
using namespace p4green;

Scenario load(const std::string& path, std::optional<std::uint64_t> seed) {
    if (!fs::exists(path)) throw FileError("no such file: " + path);
    Scenario s = load_scenario(path);
    if (seed) s.seed = *seed;
    return s;
}

std::optional<SimTime> until_of(std::optional<double> seconds) {
    if (!seconds) return std::nullopt;
    if (*seconds <= 0) throw ValidationError("--until must be positive");
    return SimTime(static_cast<std::int64_t>(*seconds * 1e6));
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, std::optional<double> until,
            const std::string& out) {
    const Scenario s = load(path, seed);
    const RunOutput run = run_with_baseline(s, until_of(until));
    write_run(out, run);
    std::cout << render_summary(run);
    return ok;
}

int cmd_validate(const std::string& path) {
    const Scenario s = load(path, std::nullopt);
    std::size_t servers = 0;
    for (const auto& h : s.hosts) servers += h.role == HostRole::server;
    std::cout << "ok: " << (s.name.empty() ? path : s.name) << " (" << s.switches.size() << " switches, "
              << servers << " servers, " << s.clients.size() << " clients)\n";
    return ok;
}

int cmd_compare(const std::string& path, std::optional<std::uint64_t> seed, std::optional<double> until) {
    const Scenario s = load(path, seed);
    const RunOutput run = run_with_baseline(s, until_of(until));
    const Reduction r = switch_hour_reduction(run.p4green, run.baseline);
    const auto& em = s.energy_model;
    std::printf("p4green_active_windows=%llu\n", static_cast<unsigned long long>(r.active_windows));
    std::printf("baseline_active_windows=%llu\n", static_cast<unsigned long long>(r.baseline_active_windows));
    std::printf("no_traffic=%s\n", r.no_traffic ? "true" : "false");
    std::printf("switch_hour_reduction_pct=%.2f\n", 100.0 * r.fraction);
    std::printf("energy_saving_wh=%.1f\n",
                energy_saving_estimate(r.fraction, em.aggregation_switches, em.watt_hours_per_switch));
    return ok;
}

int cmd_report(const std::string& dir) {
    if (!fs::is_directory(dir)) throw FileError("no such directory: " + dir);
    const std::string summary = render_summary(read_run(dir));
    std::cout << summary;
    const fs::path stored = fs::path(dir) / "summary.txt";
    if (fs::exists(stored)) {
        std::ifstream f(stored, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        if (ss.str() != summary) {
            std::cerr << "error: " << stored.string() << " differs from the re-derived summary\n";
            return report_mismatch;
        }
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"P4Green data-center simulator"};
    app.require_subcommand(1);

    std::string scenario, out = "out", dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> until;

    auto* run = app.add_subcommand("run", "simulate a scenario and write CSVs plus summary.txt");
    run->add_option("scenario", scenario, "scenario file")->required();
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--until", until, "stop after this many simulated seconds");
    run->add_option("--out", out, "output directory")->capture_default_str();

    auto* validate = app.add_subcommand("validate", "check a scenario file");
    validate->add_option("scenario", scenario, "scenario file")->required();

    auto* compare = app.add_subcommand("compare", "aggregation-switch time reduction against pinned ECMP");
    compare->add_option("scenario", scenario, "scenario file")->required();
    compare->add_option("--seed", seed, "override the scenario seed");
    compare->add_option("--until", until, "stop after this many simulated seconds");

    auto* report = app.add_subcommand("report", "re-derive the summary from a run directory");
    report->add_option("dir", dir, "directory written by run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    try {
        if (*run) return cmd_run(scenario, seed, until, out);
        if (*validate) return cmd_validate(scenario);
        if (*compare) return cmd_compare(scenario, seed, until);
        if (*report) return cmd_report(dir);
    } catch (const FileError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return file_error;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return file_error;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return parse_error;
    } catch (const ValidationError& e) {
        std::cerr << "invalid: " << e.what() << '\n';
        return validation_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return runtime_error;
    }
    return usage;
}
