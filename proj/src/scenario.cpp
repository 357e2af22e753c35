#include "p4green/scenario.hpp"

#include "p4green/errors.hpp"
#include "p4green/topology.hpp"

#include "json.hpp"

#include <cctype>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace p4green {

using nlohmann::json;

SimTime Scenario::duration() const {
    const double s = duration_s > 0 ? duration_s : day_seconds;
    return SimTime(static_cast<std::int64_t>(std::llround(s * 1e6)));
}

SimTime Scenario::at_hour(double hour) const {
    return SimTime(static_cast<std::int64_t>(std::llround(hour / 24.0 * day_seconds * 1e6)));
}

double Scenario::hour_of(SimTime t) const { return static_cast<double>(t.count()) / (day_seconds * 1e6) * 24.0; }

SimTime Scenario::window() const {
    if (accounting_window.count() > 0) return accounting_window;
    for (const auto& sw : switches)
        if (sw.type == SwitchType::core) return sw.epoch_length;
    return SimTime(1'000'000);
}

namespace {

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
    throw ParseError(where + ": " + what);
}

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
    throw ValidationError(where + ": " + what);
}

// Thin cursor over one JSON object that remembers its path for messages and
// rejects keys nobody asked for.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) parse_fail(path_, "expected an object");
    }

    std::string at(const std::string& key) const { return path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) parse_fail(path_, "missing required field '" + key + "'");
        return *it;
    }

    template <class T>
    T get(const std::string& key) {
        const json& v = raw(key);
        try {
            return v.get<T>();
        } catch (const json::exception& e) {
            parse_fail(at(key), std::string("wrong type (") + e.what() + ")");
        }
    }

    template <class T>
    T get(const std::string& key, T fallback) {
        if (!has(key)) {
            seen_.insert(key);
            return fallback;
        }
        return get<T>(key);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) parse_fail(at(it.key()), "unknown field");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

Ipv4Addr ip_field(Obj& o, const std::string& key) {
    auto text = o.get<std::string>(key);
    auto ip = Ipv4Addr::parse(text);
    if (!ip) parse_fail(o.at(key), "'" + text + "' is not an IPv4 address");
    return *ip;
}

std::optional<MacAddr> mac_field(Obj& o, const std::string& key) {
    if (!o.has(key)) return std::nullopt;
    auto text = o.get<std::string>(key);
    auto mac = MacAddr::parse(text);
    if (!mac) parse_fail(o.at(key), "'" + text + "' is not a MAC address");
    return mac;
}

IntRange range_field(Obj& o, const std::string& key, IntRange fallback) {
    if (!o.has(key)) return fallback;
    const json& v = o.raw(key);
    try {
        if (v.is_number_integer()) return {v.get<int>(), v.get<int>()};
        auto pair = v.get<std::vector<int>>();
        if (pair.size() != 2) parse_fail(o.at(key), "expected an integer or [min, max]");
        return {pair[0], pair[1]};
    } catch (const json::exception&) {
        parse_fail(o.at(key), "expected an integer or [min, max]");
    }
}

SimTime ms(double v) { return SimTime(static_cast<std::int64_t>(std::llround(v * 1000.0))); }

EnergyTrace parse_energy(Obj& o, const std::string& path) {
    if (o.has("solar")) {
        Obj s(o.raw("solar"), path + ".solar");
        auto t = EnergyTrace::solar(s.get<double>("sunrise_h"), s.get<double>("sunset_h"), s.get<int>("peak", 255),
                                    s.get<double>("step_minutes", 15.0));
        s.finish();
        return t;
    }
    std::vector<EnergyTrace::Sample> samples;
    const json& arr = o.raw("samples");
    if (!arr.is_array()) parse_fail(path + ".samples", "expected an array of [hour, index]");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& e = arr[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number_integer())
            parse_fail(path + ".samples[" + std::to_string(i) + "]", "expected [hour, index]");
        samples.push_back({e[0].get<double>(), e[1].get<int>()});
    }
    return EnergyTrace(std::move(samples));
}

TrafficProfile parse_profile(Obj& o, const std::string& path) {
    TrafficProfile p;
    const json& arr = o.raw("rate");
    if (!arr.is_array()) parse_fail(path + ".rate", "expected an array of [hour, flows_per_second]");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& e = arr[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            parse_fail(path + ".rate[" + std::to_string(i) + "]", "expected [hour, flows_per_second]");
        p.rate.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    p.request_packets = range_field(o, "request_packets", p.request_packets);
    p.request_bytes = o.get<int>("request_bytes", p.request_bytes);
    p.response_packets = range_field(o, "response_packets", p.response_packets);
    p.response_bytes = o.get<int>("response_bytes", p.response_bytes);
    p.think_time_ms = range_field(o, "think_time_ms", p.think_time_ms);
    if (o.has("max_flows")) p.max_flows = o.get<std::uint64_t>("max_flows");
    return p;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }
    Obj top(root, "scenario");
    Scenario s;
    s.schema_version = top.get<int>("schema_version");
    if (s.schema_version != kScenarioSchemaVersion)
        invalid(top.at("schema_version"), "unsupported version " + std::to_string(s.schema_version));
    s.name = top.get<std::string>("name", "");
    s.seed = top.get<std::uint64_t>("seed", s.seed);
    s.day_seconds = top.get<double>("day_seconds", s.day_seconds);
    s.duration_s = top.get<double>("duration_s", 0.0);
    s.link_delay = SimTime(top.get<std::int64_t>("link_delay_us", s.link_delay.count()));
    s.accounting_window = ms(top.get<double>("accounting_window_ms", 0.0));
    s.server_window_minutes = top.get<int>("server_window_minutes", s.server_window_minutes);

    double default_epoch_ms = 1000;
    std::vector<std::uint64_t> default_thresholds;
    if (top.has("defaults")) {
        Obj d(top.raw("defaults"), "scenario.defaults");
        default_epoch_ms = d.get<double>("epoch_length_ms", default_epoch_ms);
        default_thresholds = d.get<std::vector<std::uint64_t>>("thresholds", {});
        d.finish();
    }

    const json& switches = top.raw("switches");
    if (!switches.is_array()) parse_fail("scenario.switches", "expected an array");
    for (std::size_t i = 0; i < switches.size(); ++i) {
        const std::string path = "scenario.switches[" + std::to_string(i) + "]";
        Obj o(switches[i], path);
        SwitchSpec sw;
        sw.id = o.get<std::string>("id");
        auto type_text = o.get<std::string>("type");
        auto type = switch_type_from_string(type_text);
        if (!type) parse_fail(o.at("type"), "'" + type_text + "' is not one of core, aggregation, access");
        sw.type = *type;
        sw.epoch_length = ms(o.get<double>("epoch_length_ms", default_epoch_ms));
        sw.thresholds = o.get<std::vector<std::uint64_t>>("thresholds", default_thresholds);
        if (o.has("subnet")) {
            auto text = o.get<std::string>("subnet");
            sw.subnet = SubnetPrefix::parse(text);
            if (!sw.subnet) parse_fail(o.at("subnet"), "'" + text + "' is not a three-octet prefix");
        }
        if (o.has("virtual_ip")) sw.virtual_ip = ip_field(o, "virtual_ip");
        sw.mac = mac_field(o, "mac");
        o.finish();
        s.switches.push_back(std::move(sw));
    }

    const json& hosts = top.raw("hosts");
    if (!hosts.is_array()) parse_fail("scenario.hosts", "expected an array");
    for (std::size_t i = 0; i < hosts.size(); ++i) {
        const std::string path = "scenario.hosts[" + std::to_string(i) + "]";
        Obj o(hosts[i], path);
        HostSpec h;
        h.id = o.get<std::string>("id");
        auto role = o.get<std::string>("role");
        if (role == "server") h.role = HostRole::server;
        else if (role == "client") h.role = HostRole::client;
        else parse_fail(o.at("role"), "'" + role + "' is not one of server, client");
        h.ip = ip_field(o, "ip");
        h.mac = mac_field(o, "mac");
        if (o.has("energy")) {
            Obj e(o.raw("energy"), path + ".energy");
            h.energy = parse_energy(e, path + ".energy");
            h.energy_lag_hours = e.get<double>("lag_hours", 0.0);
            h.report_period_s = e.get<double>("report_period_s", 0.0);
            e.finish();
        }
        o.finish();
        s.hosts.push_back(std::move(h));
    }

    const json& links = top.raw("links");
    if (!links.is_array()) parse_fail("scenario.links", "expected an array");
    for (std::size_t i = 0; i < links.size(); ++i) {
        const std::string path = "scenario.links[" + std::to_string(i) + "]";
        LinkSpec l;
        if (links[i].is_array()) {
            if (links[i].size() != 2 || !links[i][0].is_string() || !links[i][1].is_string())
                parse_fail(path, "expected [node, node]");
            l.a = links[i][0].get<std::string>();
            l.b = links[i][1].get<std::string>();
        } else {
            Obj o(links[i], path);
            l.a = o.get<std::string>("a");
            l.b = o.get<std::string>("b");
            if (o.has("delay_us")) l.delay = SimTime(o.get<std::int64_t>("delay_us"));
            o.finish();
        }
        s.links.push_back(std::move(l));
    }

    if (top.has("routes")) {
        const json& routes = top.raw("routes");
        if (!routes.is_array()) parse_fail("scenario.routes", "expected an array");
        for (std::size_t i = 0; i < routes.size(); ++i) {
            const std::string path = "scenario.routes[" + std::to_string(i) + "]";
            Obj o(routes[i], path);
            RouteSpec r;
            r.switch_id = o.get<std::string>("switch");
            auto text = o.get<std::string>("prefix");
            auto slash = text.find('/');
            auto ip = Ipv4Addr::parse(text.substr(0, slash));
            if (!ip) parse_fail(o.at("prefix"), "'" + text + "' is not a prefix");
            r.prefix = *ip;
            if (slash != std::string::npos) {
                try {
                    r.length = std::stoi(text.substr(slash + 1));
                } catch (const std::exception&) {
                    parse_fail(o.at("prefix"), "'" + text + "' has a bad length");
                }
            }
            r.via = o.get<std::string>("via");
            o.finish();
            s.routes.push_back(std::move(r));
        }
    }

    if (top.has("clients")) {
        const json& clients = top.raw("clients");
        if (!clients.is_array()) parse_fail("scenario.clients", "expected an array");
        for (std::size_t i = 0; i < clients.size(); ++i) {
            const std::string path = "scenario.clients[" + std::to_string(i) + "]";
            Obj o(clients[i], path);
            ClientSpec c;
            c.host = o.get<std::string>("host");
            auto targets = o.get<std::vector<std::string>>("targets");
            for (std::size_t t = 0; t < targets.size(); ++t) {
                if (auto ip = Ipv4Addr::parse(targets[t])) {
                    c.targets.push_back(*ip);
                    continue;
                }
                auto sw = std::find_if(s.switches.begin(), s.switches.end(),
                                       [&](const SwitchSpec& x) { return x.id == targets[t]; });
                if (sw == s.switches.end() || !sw->virtual_ip)
                    invalid(o.at("targets") + "[" + std::to_string(t) + "]",
                            "'" + targets[t] + "' is neither an address nor an access switch with a VIP");
                c.targets.push_back(*sw->virtual_ip);
            }
            c.dst_port = o.get<std::uint16_t>("dst_port", c.dst_port);
            Obj p(o.raw("profile"), path + ".profile");
            c.profile = parse_profile(p, path + ".profile");
            p.finish();
            o.finish();
            s.clients.push_back(std::move(c));
        }
    }

    if (top.has("intervals")) {
        const json& iv = top.raw("intervals");
        if (!iv.is_array()) parse_fail("scenario.intervals", "expected an array");
        for (std::size_t i = 0; i < iv.size(); ++i) {
            Obj o(iv[i], "scenario.intervals[" + std::to_string(i) + "]");
            ReportInterval r;
            r.name = o.get<std::string>("name");
            r.from_h = o.get<double>("from_h");
            r.to_h = o.get<double>("to_h");
            o.finish();
            s.intervals.push_back(std::move(r));
        }
    }

    if (top.has("energy_model")) {
        Obj o(top.raw("energy_model"), "scenario.energy_model");
        s.energy_model.aggregation_switches = o.get<int>("aggregation_switches", s.energy_model.aggregation_switches);
        s.energy_model.watt_hours_per_switch =
            o.get<double>("watt_hours_per_switch", s.energy_model.watt_hours_per_switch);
        o.finish();
    }
    top.finish();

    validate_scenario(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileError(path.string() + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

namespace {
// Identifiers end up in CSV cells and summary keys.
void check_identifier(const std::string& where, const std::string& id) {
    if (id.empty()) invalid(where, "must not be empty");
    for (char c : id)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
            invalid(where, "'" + id + "' may only contain letters, digits, '_', '-' and '.'");
}
}  // namespace

void validate_scenario(const Scenario& s) {
    if (!s.name.empty()) check_identifier("scenario.name", s.name);
    for (std::size_t i = 0; i < s.switches.size(); ++i)
        check_identifier("scenario.switches[" + std::to_string(i) + "].id", s.switches[i].id);
    for (std::size_t i = 0; i < s.hosts.size(); ++i)
        check_identifier("scenario.hosts[" + std::to_string(i) + "].id", s.hosts[i].id);
    for (std::size_t i = 0; i < s.intervals.size(); ++i)
        check_identifier("scenario.intervals[" + std::to_string(i) + "].name", s.intervals[i].name);
    if (s.schema_version != kScenarioSchemaVersion) invalid("scenario.schema_version", "unsupported version");
    if (!(s.day_seconds > 0)) invalid("scenario.day_seconds", "must be positive");
    if (s.duration_s < 0) invalid("scenario.duration_s", "must not be negative");
    if (s.link_delay.count() < 0) invalid("scenario.link_delay_us", "must not be negative");
    if (s.server_window_minutes <= 0 || 1440 % s.server_window_minutes != 0)
        invalid("scenario.server_window_minutes", "must divide one day");

    const Topology topo = build_topology(s);

    std::set<std::uint32_t> vips;
    for (std::size_t i = 0; i < s.switches.size(); ++i) {
        const auto& sw = s.switches[i];
        const std::string where = "scenario.switches[" + std::to_string(i) + "] (" + sw.id + ")";
        const auto& node = topo.nodes[i];
        int uplinks = 0, servers = 0, externals = 0;
        for (const auto& [port, att] : node.ports) {
            const auto& peer = topo.nodes[static_cast<std::size_t>(att.peer)];
            if (peer.is_switch && s.switches[static_cast<std::size_t>(peer.spec_index)].type == SwitchType::aggregation)
                ++uplinks;
            else if (!peer.is_switch && s.hosts[static_cast<std::size_t>(peer.spec_index)].role == HostRole::server)
                ++servers;
            else
                ++externals;
        }

        if (sw.type == SwitchType::access) {
            if (!sw.virtual_ip) invalid(where, "access switch needs a virtual_ip");
            if (!sw.subnet) invalid(where, "access switch needs a subnet");
            if (!vips.insert(sw.virtual_ip->value).second)
                invalid(where + ".virtual_ip", sw.virtual_ip->to_string() + " is already used by another switch");
            if (servers > kMaxServersPerSwitch)
                invalid(where, "3-bit server ID overflow: " + std::to_string(servers) +
                                   " servers behind one VIP (at most 8)");
        } else {
            if (sw.virtual_ip) invalid(where + ".virtual_ip", "only access switches carry a virtual IP");
        }
        if (sw.type == SwitchType::core && externals == 0) invalid(where, "core switch has no external port");
        if (sw.type != SwitchType::aggregation) {
            if (uplinks == 0) invalid(where, "no uplink towards the aggregation layer");
            if (sw.epoch_length.count() <= 0) invalid(where + ".epoch_length_ms", "must be positive");
            for (std::size_t t = 1; t < sw.thresholds.size(); ++t)
                if (sw.thresholds[t] <= sw.thresholds[t - 1])
                    invalid(where + ".thresholds", "not ascending");
            if (sw.thresholds.size() != static_cast<std::size_t>(uplinks - 1))
                invalid(where + ".thresholds", "expected " + std::to_string(uplinks - 1) +
                                                   " thresholds (one per uplink beyond the first), got " +
                                                   std::to_string(sw.thresholds.size()));
        }
    }

    for (std::size_t i = 0; i < s.hosts.size(); ++i) {
        const auto& h = s.hosts[i];
        const std::string where = "scenario.hosts[" + std::to_string(i) + "] (" + h.id + ")";
        const auto& node = topo.nodes[static_cast<std::size_t>(topo.switch_count) + i];
        const auto& peer = topo.nodes[static_cast<std::size_t>(node.ports.begin()->second.peer)];
        if (h.role == HostRole::server) {
            if (!peer.is_switch || s.switches[static_cast<std::size_t>(peer.spec_index)].type != SwitchType::access)
                invalid(where, "server must attach to an access switch");
            const auto& acc = s.switches[static_cast<std::size_t>(peer.spec_index)];
            if (!acc.subnet->contains(h.ip))
                invalid(where + ".ip", h.ip.to_string() + " is outside subnet " + acc.subnet->to_string());
        }
        double prev = -1;
        for (std::size_t k = 0; k < h.energy.samples().size(); ++k) {
            const auto& smp = h.energy.samples()[k];
            const std::string at = where + ".energy.samples[" + std::to_string(k) + "]";
            if (smp.hour < 0 || smp.hour > 24) invalid(at, "hour outside 0-24");
            if (smp.hour <= prev) invalid(at, "hours not ascending");
            if (smp.index < 0 || smp.index > 255) invalid(at, "index outside 0-255");
            prev = smp.hour;
        }
        if (!h.energy.empty() && h.role != HostRole::server) invalid(where, "only servers report energy");
        if (h.report_period_s < 0) invalid(where + ".energy.report_period_s", "must not be negative");
    }

    for (std::size_t i = 0; i < s.routes.size(); ++i) {
        const auto& r = s.routes[i];
        const std::string where = "scenario.routes[" + std::to_string(i) + "]";
        auto sw = topo.find(r.switch_id);
        if (!sw || !topo.nodes[static_cast<std::size_t>(*sw)].is_switch) invalid(where, "unknown switch '" + r.switch_id + "'");
        auto via = topo.find(r.via);
        if (!via || !topo.port_towards(*sw, *via)) invalid(where, "'" + r.via + "' is not a neighbor of " + r.switch_id);
        if (r.length < 0 || r.length > 32) invalid(where, "prefix length outside 0-32");
    }

    for (std::size_t i = 0; i < s.clients.size(); ++i) {
        const auto& c = s.clients[i];
        const std::string where = "scenario.clients[" + std::to_string(i) + "]";
        auto node = topo.find(c.host);
        if (!node || topo.nodes[static_cast<std::size_t>(*node)].is_switch ||
            s.hosts[static_cast<std::size_t>(topo.nodes[static_cast<std::size_t>(*node)].spec_index)].role != HostRole::client)
            invalid(where + ".host", "'" + c.host + "' is not a client host");
        if (c.targets.empty()) invalid(where + ".targets", "at least one VIP required");
        for (auto t : c.targets)
            if (!vips.count(t.value)) invalid(where + ".targets", t.to_string() + " is not a configured VIP");
        const auto& p = c.profile;
        double prev = -1;
        for (std::size_t k = 0; k < p.rate.size(); ++k) {
            const std::string at = where + ".profile.rate[" + std::to_string(k) + "]";
            if (p.rate[k].hour < 0 || p.rate[k].hour > 24) invalid(at, "hour outside 0-24");
            if (p.rate[k].hour < prev) invalid(at, "hours not ascending");
            if (p.rate[k].rate < 0) invalid(at, "negative rate");
            prev = p.rate[k].hour;
        }
        auto check_range = [&](IntRange r, int lo, const char* name) {
            if (r.min < lo || r.max < r.min) invalid(where + ".profile." + name, "bad range");
        };
        check_range(p.request_packets, 0, "request_packets");
        check_range(p.response_packets, 1, "response_packets");
        check_range(p.think_time_ms, 0, "think_time_ms");
        if (p.request_bytes < 0 || p.request_bytes > 1400) invalid(where + ".profile.request_bytes", "must be 0-1400");
        if (p.response_bytes < 0 || p.response_bytes > 1400) invalid(where + ".profile.response_bytes", "must be 0-1400");
    }

    const double bin_h = s.server_window_minutes / 60.0;
    for (std::size_t i = 0; i < s.intervals.size(); ++i) {
        const auto& r = s.intervals[i];
        const std::string where = "scenario.intervals[" + std::to_string(i) + "] (" + r.name + ")";
        if (r.from_h < 0 || r.to_h > 24 || r.from_h >= r.to_h) invalid(where, "need 0 <= from_h < to_h <= 24");
        auto aligned = [&](double h) { return std::abs(h / bin_h - std::round(h / bin_h)) < 1e-9; };
        if (!aligned(r.from_h) || !aligned(r.to_h)) invalid(where, "bounds must align to server_window_minutes");
    }
}

}  // namespace p4green
