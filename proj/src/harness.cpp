#include "p4green/harness.hpp"

#include "p4green/control.hpp"
#include "p4green/errors.hpp"
#include "p4green/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace p4green {

std::uint64_t aggregation_active_windows(const MetricsReport& r) {
    std::uint64_t n = 0;
    for (std::size_t s = 0; s < r.switch_windows.size(); ++s) {
        if (r.switch_types[s] != "aggregation") continue;
        for (const auto& w : r.switch_windows[s])
            if (w.bytes > 0) ++n;
    }
    return n;
}

Reduction switch_hour_reduction(const MetricsReport& report, const MetricsReport& baseline) {
    Reduction r;
    r.active_windows = aggregation_active_windows(report);
    r.baseline_active_windows = aggregation_active_windows(baseline);
    if (r.baseline_active_windows == 0) {
        r.no_traffic = true;
        return r;
    }
    r.fraction = 1.0 - static_cast<double>(r.active_windows) / static_cast<double>(r.baseline_active_windows);
    return r;
}

double energy_saving_estimate(double reduction, int n_switches, double per_switch_wh) {
    return reduction * n_switches * per_switch_wh;
}

bool is_green_directed(const FlowRecord& f) {
    if (f.selected_id < 0 || static_cast<std::size_t>(f.selected_id) >= f.indices.size()) return false;
    const auto [lo, hi] = std::minmax_element(f.indices.begin(), f.indices.end());
    return *hi > 0 && *lo < *hi && f.indices[static_cast<std::size_t>(f.selected_id)] == *hi;
}

GreenShare green_share(const MetricsReport& r) {
    GreenShare g;
    for (const auto& f : r.flows) {
        g.total_bytes += f.bytes;
        if (is_green_directed(f)) g.green_bytes += f.bytes;
    }
    if (g.total_bytes) g.fraction = static_cast<double>(g.green_bytes) / static_cast<double>(g.total_bytes);
    return g;
}

namespace {

double bin_hour(const MetricsReport& r, std::size_t b) {
    const double h = static_cast<double>(b) * static_cast<double>(r.server_bin_us) * 24.0 / (r.day_seconds * 1e6);
    return std::fmod(h + 1e-9, 24.0);
}

bool in_interval(const ReportInterval& iv, double h) {
    if (iv.from_h <= iv.to_h) return h >= iv.from_h && h < iv.to_h;
    return h >= iv.from_h || h < iv.to_h;
}

}  // namespace

std::vector<IntervalShare> interval_shares(const MetricsReport& r, const std::vector<ReportInterval>& intervals) {
    std::vector<IntervalShare> out;
    for (const auto& iv : intervals) {
        std::vector<IntervalShare> rows(r.server_ids.size());
        std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> pool;
        for (std::size_t s = 0; s < r.server_ids.size(); ++s) {
            rows[s].interval = iv.name;
            rows[s].server = r.server_ids[s];
            rows[s].pool = r.server_pools[s];
            const auto& bins = r.server_bins[s];
            for (std::size_t b = 0; b < bins.size(); ++b) {
                if (!in_interval(iv, bin_hour(r, b))) continue;
                rows[s].bytes += bins[b].bytes;
                rows[s].flows += bins[b].packets;
            }
            pool[rows[s].pool].first += rows[s].bytes;
            pool[rows[s].pool].second += rows[s].flows;
        }
        for (auto& row : rows) {
            std::tie(row.pool_bytes, row.pool_flows) = pool[row.pool];
            if (row.pool_bytes > 0) out.push_back(std::move(row));
        }
    }
    return out;
}

RunOutput run_with_baseline(const Scenario& s, std::optional<SimTime> until, bool parallel) {
    const SimTime stop = until.value_or(s.duration());
    // Both installs precede both runs so neither run phase sees an install.
    Engine green(s, install(s, Policy::p4green));
    Engine base(s, install(s, Policy::pinned_ecmp));
    RunOutput out;
    out.params.energy_model = s.energy_model;
    out.params.intervals = s.intervals;
    if (parallel) {
        std::thread t([&] { out.baseline = base.run(stop); });
        out.p4green = green.run(stop);
        t.join();
    } else {
        out.p4green = green.run(stop);
        out.baseline = base.run(stop);
    }
    return out;
}

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string exact(double v) { return fmt("%.17g", v); }

class Lines {
public:
    template <class T>
    void put(const std::string& key, const T& value) {
        os_ << key << '=' << value << '\n';
    }
    void flag(const std::string& key, bool v) { put(key, v ? "true" : "false"); }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

}  // namespace

std::string render_summary(const RunOutput& run) {
    const MetricsReport& g = run.p4green;
    const MetricsReport& b = run.baseline;
    Lines l;
    l.put("summary_schema", 1);
    l.put("scenario", g.scenario);
    l.put("seed", g.seed);
    l.put("until_s", fmt("%.6f", static_cast<double>(g.until_us) / 1e6));
    l.put("policy", g.policy);
    l.put("baseline_policy", b.policy);
    l.put("flows", g.flows.size());
    l.put("injected_bytes", g.injected_bytes);
    l.put("delivered_bytes", g.delivered_bytes);
    l.put("consumed_bytes", g.consumed_bytes);
    l.put("dropped_bytes", g.dropped_bytes());
    l.put("in_flight_bytes", g.in_flight_bytes);
    l.flag("conserved", g.conserved());
    l.flag("baseline_conserved", b.conserved());
    for (std::size_t c = 0; c < kDropCauseCount; ++c)
        l.put("drops." + std::string(to_string(static_cast<DropCause>(c))), g.drops[c].packets);
    l.put("affinity_checked", g.affinity_checked);
    l.put("affinity_violations", g.affinity_violations);
    l.put("ecmp_checked", g.ecmp_checked);
    l.put("ecmp_out_of_width", g.ecmp_out_of_width);
    l.put("epoch_evaluations", g.width_log.size());
    l.put("control_plane_calls", g.control_plane_calls);

    const Reduction red = switch_hour_reduction(g, b);
    l.put("aggregation_active_windows", red.active_windows);
    l.put("baseline_aggregation_active_windows", red.baseline_active_windows);
    l.flag("no_traffic", red.no_traffic);
    l.put("switch_hour_reduction_pct", fmt("%.2f", 100.0 * red.fraction));
    const auto& em = run.params.energy_model;
    l.put("energy_saving_wh",
          fmt("%.1f", energy_saving_estimate(red.fraction, em.aggregation_switches, em.watt_hours_per_switch)));

    const GreenShare gs = green_share(g);
    l.put("green_bytes", gs.green_bytes);
    l.put("green_share_pct", fmt("%.2f", 100.0 * gs.fraction));
    for (const auto& s : interval_shares(g, run.params.intervals))
        l.put("share." + s.interval + "." + s.server + "_pct", fmt("%.2f", 100.0 * s.share()));
    return l.str();
}

// --- files ----------------------------------------------------------------------

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw FileError("cannot write " + p.string());
    return f;
}

void write_raw(const fs::path& dir, const MetricsReport& r) {
    fs::create_directories(dir);
    {
        auto f = open_out(dir / "run_info.txt");
        f << "csv_schema=" << kCsvSchemaVersion << '\n'
          << "scenario=" << r.scenario << '\n'
          << "policy=" << r.policy << '\n'
          << "seed=" << r.seed << '\n'
          << "until_us=" << r.until_us << '\n'
          << "window_us=" << r.window_us << '\n'
          << "server_bin_us=" << r.server_bin_us << '\n'
          << "day_seconds=" << exact(r.day_seconds) << '\n';
    }
    {
        auto f = open_out(dir / "switch_windows.csv");
        f << "window,start_s,switch,type,bytes,packets\n";
        for (std::size_t s = 0; s < r.switch_windows.size(); ++s)
            for (std::size_t w = 0; w < r.switch_windows[s].size(); ++w)
                f << w << ',' << fmt("%.6f", static_cast<double>(w) * static_cast<double>(r.window_us) / 1e6) << ','
                  << r.switch_ids[s] << ',' << r.switch_types[s] << ',' << r.switch_windows[s][w].bytes << ','
                  << r.switch_windows[s][w].packets << '\n';
    }
    {
        auto f = open_out(dir / "width_log.csv");
        f << "time_us,switch,traffic_bytes,previous_width,width\n";
        for (const auto& c : r.width_log)
            f << c.time_us << ',' << r.switch_ids[static_cast<std::size_t>(c.switch_index)] << ',' << c.traffic
              << ',' << c.previous_width << ',' << c.width << '\n';
    }
    {
        auto f = open_out(dir / "server_bins.csv");
        f << "bin,start_hour,server,pool,bytes,new_flows\n";
        for (std::size_t s = 0; s < r.server_bins.size(); ++s)
            for (std::size_t b = 0; b < r.server_bins[s].size(); ++b)
                f << b << ',' << fmt("%.4f", bin_hour(r, b)) << ',' << r.server_ids[s] << ',' << r.server_pools[s]
                  << ',' << r.server_bins[s][b].bytes << ',' << r.server_bins[s][b].packets << '\n';
    }
    {
        auto f = open_out(dir / "info_reports.csv");
        f << "time_us,server,index\n";
        for (const auto& i : r.info_log)
            f << i.time_us << ',' << r.server_ids[static_cast<std::size_t>(i.server_index)] << ',' << i.index << '\n';
    }
    {
        auto f = open_out(dir / "flows.csv");
        f << "flow_id,start_us,vip,server,selected_id,indices,bytes\n";
        for (const auto& fl : r.flows) {
            f << fl.flow_id << ',' << fl.start_us << ',' << fl.vip.to_string() << ','
              << (fl.server_index >= 0 ? r.server_ids[static_cast<std::size_t>(fl.server_index)] : "") << ','
              << fl.selected_id << ',';
            for (std::size_t i = 0; i < fl.indices.size(); ++i) f << (i ? ";" : "") << int{fl.indices[i]};
            f << ',' << fl.bytes << '\n';
        }
    }
    {
        auto f = open_out(dir / "drops.csv");
        f << "cause,packets,bytes\n";
        for (std::size_t c = 0; c < kDropCauseCount; ++c)
            f << to_string(static_cast<DropCause>(c)) << ',' << r.drops[c].packets << ',' << r.drops[c].bytes << '\n';
    }
    {
        auto f = open_out(dir / "totals.csv");
        f << "counter,value\n"
          << "injected_bytes," << r.injected_bytes << '\n'
          << "injected_packets," << r.injected_packets << '\n'
          << "delivered_bytes," << r.delivered_bytes << '\n'
          << "delivered_packets," << r.delivered_packets << '\n'
          << "consumed_bytes," << r.consumed_bytes << '\n'
          << "in_flight_bytes," << r.in_flight_bytes << '\n'
          << "affinity_checked," << r.affinity_checked << '\n'
          << "affinity_violations," << r.affinity_violations << '\n'
          << "ecmp_checked," << r.ecmp_checked << '\n'
          << "ecmp_out_of_width," << r.ecmp_out_of_width << '\n'
          << "control_plane_calls," << r.control_plane_calls << '\n';
    }
}

// --- reading ---

struct Table {
    fs::path path;
    std::vector<std::vector<std::string>> rows;
    [[noreturn]] void fail(std::size_t row, const std::string& what) const {
        throw ParseError(path.string() + ":" + std::to_string(row + 2) + ": " + what);
    }
};

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string::npos) return out;
        start = pos + 1;
    }
}

std::ifstream open_in(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw ParseError("cannot read " + p.string());
    return f;
}

Table read_csv(const fs::path& p, const std::string& header) {
    auto f = open_in(p);
    Table t{p, {}};
    std::string line;
    if (!std::getline(f, line) || line != header) throw ParseError(p.string() + ": expected header '" + header + "'");
    const auto columns = split(header, ',').size();
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        t.rows.push_back(split(line, ','));
        if (t.rows.back().size() != columns) t.fail(t.rows.size() - 1, "expected " + std::to_string(columns) + " fields");
    }
    return t;
}

template <class T>
T num(const Table& t, std::size_t row, const std::string& s) {
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) t.fail(row, "bad number '" + s + "'");
    return v;
}

double real(const std::string& where, const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw ParseError(where + ": bad number '" + s + "'");
    return v;
}

std::map<std::string, std::string> read_keyvalues(const fs::path& p) {
    auto f = open_in(p);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(p.string() + ": expected key=value, got '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

const std::string& need(const std::map<std::string, std::string>& kv, const std::string& key, const fs::path& p) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(p.string() + ": missing " + key);
    return it->second;
}

template <class T>
T kv_num(const std::map<std::string, std::string>& kv, const std::string& key, const fs::path& p) {
    const auto& s = need(kv, key, p);
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError(p.string() + ": bad " + key);
    return v;
}

int index_of(std::vector<std::string>& ids, const std::string& id) {
    auto it = std::find(ids.begin(), ids.end(), id);
    if (it != ids.end()) return static_cast<int>(it - ids.begin());
    ids.push_back(id);
    return static_cast<int>(ids.size()) - 1;
}

template <class Grid>
auto& cell(Grid& g, std::size_t row, std::size_t col) {
    if (g.size() <= row) g.resize(row + 1);
    if (g[row].size() <= col) g[row].resize(col + 1);
    return g[row][col];
}

MetricsReport read_raw(const fs::path& dir) {
    MetricsReport r;
    {
        const auto p = dir / "run_info.txt";
        const auto kv = read_keyvalues(p);
        if (kv_num<int>(kv, "csv_schema", p) != kCsvSchemaVersion) throw ParseError(p.string() + ": unsupported csv_schema");
        r.scenario = need(kv, "scenario", p);
        r.policy = need(kv, "policy", p);
        r.seed = kv_num<std::int64_t>(kv, "seed", p);
        r.until_us = kv_num<std::int64_t>(kv, "until_us", p);
        r.window_us = kv_num<std::int64_t>(kv, "window_us", p);
        r.server_bin_us = kv_num<std::int64_t>(kv, "server_bin_us", p);
        r.day_seconds = real(p.string(), need(kv, "day_seconds", p));
    }
    {
        const auto t = read_csv(dir / "switch_windows.csv", "window,start_s,switch,type,bytes,packets");
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const auto& row = t.rows[i];
            const auto before = r.switch_ids.size();
            const int s = index_of(r.switch_ids, row[2]);
            if (r.switch_ids.size() != before) r.switch_types.push_back(row[3]);
            auto& w = cell(r.switch_windows, static_cast<std::size_t>(s), num<std::size_t>(t, i, row[0]));
            w.bytes = num<std::uint64_t>(t, i, row[4]);
            w.packets = num<std::uint64_t>(t, i, row[5]);
        }
    }
    {
        const auto t = read_csv(dir / "width_log.csv", "time_us,switch,traffic_bytes,previous_width,width");
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const auto& row = t.rows[i];
            const int s = r.switch_index(row[1]);
            if (s < 0) t.fail(i, "unknown switch " + row[1]);
            r.width_log.push_back({num<std::int64_t>(t, i, row[0]), s, num<std::uint64_t>(t, i, row[2]),
                                   num<int>(t, i, row[3]), num<int>(t, i, row[4])});
        }
    }
    {
        const auto t = read_csv(dir / "server_bins.csv", "bin,start_hour,server,pool,bytes,new_flows");
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const auto& row = t.rows[i];
            const auto before = r.server_ids.size();
            const int s = index_of(r.server_ids, row[2]);
            if (r.server_ids.size() != before) r.server_pools.push_back(row[3]);
            auto& b = cell(r.server_bins, static_cast<std::size_t>(s), num<std::size_t>(t, i, row[0]));
            b.bytes = num<std::uint64_t>(t, i, row[4]);
            b.packets = num<std::uint64_t>(t, i, row[5]);
        }
    }
    {
        const auto t = read_csv(dir / "info_reports.csv", "time_us,server,index");
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const auto& row = t.rows[i];
            const int s = r.server_index(row[1]);
            if (s < 0) t.fail(i, "unknown server " + row[1]);
            r.info_log.push_back({num<std::int64_t>(t, i, row[0]), s, num<int>(t, i, row[2])});
        }
    }
    {
        const auto t = read_csv(dir / "flows.csv", "flow_id,start_us,vip,server,selected_id,indices,bytes");
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const auto& row = t.rows[i];
            FlowRecord f;
            f.flow_id = num<std::uint64_t>(t, i, row[0]);
            f.start_us = num<std::int64_t>(t, i, row[1]);
            auto vip = Ipv4Addr::parse(row[2]);
            if (!vip) t.fail(i, "bad vip " + row[2]);
            f.vip = *vip;
            if (!row[3].empty()) {
                f.server_index = r.server_index(row[3]);
                if (f.server_index < 0) t.fail(i, "unknown server " + row[3]);
            }
            f.selected_id = num<int>(t, i, row[4]);
            if (!row[5].empty())
                for (const auto& v : split(row[5], ';')) f.indices.push_back(num<std::uint8_t>(t, i, v));
            f.bytes = num<std::uint64_t>(t, i, row[6]);
            r.flows.push_back(std::move(f));
        }
    }
    {
        const auto t = read_csv(dir / "drops.csv", "cause,packets,bytes");
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const auto& row = t.rows[i];
            auto c = drop_cause_from_string(row[0]);
            if (!c) t.fail(i, "unknown drop cause " + row[0]);
            r.drops[static_cast<std::size_t>(*c)] = {num<std::uint64_t>(t, i, row[1]), num<std::uint64_t>(t, i, row[2])};
        }
    }
    {
        const auto t = read_csv(dir / "totals.csv", "counter,value");
        const std::map<std::string, std::uint64_t*> slots = {
            {"injected_bytes", &r.injected_bytes},       {"injected_packets", &r.injected_packets},
            {"delivered_bytes", &r.delivered_bytes},     {"delivered_packets", &r.delivered_packets},
            {"consumed_bytes", &r.consumed_bytes},       {"in_flight_bytes", &r.in_flight_bytes},
            {"affinity_checked", &r.affinity_checked},   {"affinity_violations", &r.affinity_violations},
            {"ecmp_checked", &r.ecmp_checked},           {"ecmp_out_of_width", &r.ecmp_out_of_width},
            {"control_plane_calls", &r.control_plane_calls},
        };
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            auto it = slots.find(t.rows[i][0]);
            if (it == slots.end()) t.fail(i, "unknown counter " + t.rows[i][0]);
            *it->second = num<std::uint64_t>(t, i, t.rows[i][1]);
        }
    }
    return r;
}

}  // namespace

void write_run(const fs::path& dir, const RunOutput& run) {
    write_raw(dir, run.p4green);
    write_raw(dir / "baseline", run.baseline);
    {
        auto f = open_out(dir / "report_params.txt");
        const auto& em = run.params.energy_model;
        f << "aggregation_switches=" << em.aggregation_switches << '\n'
          << "watt_hours_per_switch=" << exact(em.watt_hours_per_switch) << '\n';
        for (const auto& iv : run.params.intervals)
            f << "interval=" << iv.name << ',' << exact(iv.from_h) << ',' << exact(iv.to_h) << '\n';
    }
    auto f = open_out(dir / "summary.txt");
    f << render_summary(run);
}

RunOutput read_run(const fs::path& dir) {
    RunOutput run;
    run.p4green = read_raw(dir);
    run.baseline = read_raw(dir / "baseline");
    const auto p = dir / "report_params.txt";
    auto f = open_in(p);
    std::string line;
    bool saw_n = false, saw_wh = false;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(p.string() + ": expected key=value, got '" + line + "'");
        const auto key = line.substr(0, eq);
        const auto value = line.substr(eq + 1);
        if (key == "aggregation_switches") {
            run.params.energy_model.aggregation_switches = static_cast<int>(real(p.string(), value));
            saw_n = true;
        } else if (key == "watt_hours_per_switch") {
            run.params.energy_model.watt_hours_per_switch = real(p.string(), value);
            saw_wh = true;
        } else if (key == "interval") {
            const auto parts = split(value, ',');
            if (parts.size() != 3) throw ParseError(p.string() + ": interval needs name,from,to");
            run.params.intervals.push_back({parts[0], real(p.string(), parts[1]), real(p.string(), parts[2])});
        } else {
            throw ParseError(p.string() + ": unknown key " + key);
        }
    }
    if (!saw_n || !saw_wh) throw ParseError(p.string() + ": missing energy model");
    return run;
}

}  // namespace p4green
