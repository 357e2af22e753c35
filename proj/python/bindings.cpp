#include "p4green/consolidation.hpp"
#include "p4green/errors.hpp"
#include "p4green/harness.hpp"
#include "p4green/packet.hpp"
#include "p4green/pipeline.hpp"
#include "p4green/sim.hpp"

#include <cmath>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace p4green;

namespace {

std::optional<SimTime> to_until(std::optional<double> seconds) {
    if (!seconds) return std::nullopt;
    return SimTime(static_cast<std::int64_t>(std::llround(*seconds * 1e6)));
}

Policy policy_from(const std::string& name) {
    if (name == "p4green") return Policy::p4green;
    if (name == "pinned_ecmp" || name == "ecmp") return Policy::pinned_ecmp;
    throw py::value_error("unknown policy '" + name + "'");
}

FiveTuple tuple_of(const std::string& src, const std::string& dst, int proto, int sport, int dport) {
    auto s = Ipv4Addr::parse(src), d = Ipv4Addr::parse(dst);
    if (!s || !d) throw py::value_error("bad IPv4 address");
    return {*s, *d, static_cast<std::uint8_t>(proto), static_cast<std::uint16_t>(sport),
            static_cast<std::uint16_t>(dport)};
}

py::bytes as_bytes(const std::vector<std::uint8_t>& v) {
    return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

std::vector<std::uint8_t> from_bytes(const py::bytes& b) {
    const std::string s = b;
    return {s.begin(), s.end()};
}

}  // namespace

PYBIND11_MODULE(_p4green, m) {
    m.doc() = "Deterministic three-tier data-center simulator with in-switch consolidation and green load balancing";

    auto error = py::register_exception<Error>(m, "Error");
    py::register_exception<MalformedPacket>(m, "MalformedPacket", error);
    py::register_exception<FileError>(m, "FileError", error);
    py::register_exception<ParseError>(m, "ParseError", error);
    py::register_exception<ValidationError>(m, "ValidationError", error);
    py::register_exception<WidthOutOfRange>(m, "WidthOutOfRange", error);
    py::register_exception<ClockRegression>(m, "ClockRegression", error);
    py::register_exception<ServerIdOverflow>(m, "ServerIdOverflow", error);

    py::class_<Scenario>(m, "Scenario")
        .def_readonly("name", &Scenario::name)
        .def_readonly("seed", &Scenario::seed)
        .def_readonly("day_seconds", &Scenario::day_seconds)
        .def_property_readonly("duration_s", [](const Scenario& s) { return s.duration().count() / 1e6; })
        .def_property_readonly("switches", [](const Scenario& s) {
            std::vector<std::string> ids;
            for (const auto& sw : s.switches) ids.push_back(sw.id);
            return ids;
        })
        .def_property_readonly("servers", [](const Scenario& s) {
            std::vector<std::string> ids;
            for (const auto& h : s.hosts)
                if (h.role == HostRole::server) ids.push_back(h.id);
            return ids;
        });

    m.def("load_scenario", [](const std::filesystem::path& p) { return load_scenario(p); }, py::arg("path"));
    m.def("parse_scenario", &parse_scenario, py::arg("text"));

    py::class_<FlowRecord>(m, "FlowRecord")
        .def_readonly("flow_id", &FlowRecord::flow_id)
        .def_readonly("start_us", &FlowRecord::start_us)
        .def_property_readonly("vip", [](const FlowRecord& f) { return f.vip.to_string(); })
        .def_readonly("server_index", &FlowRecord::server_index)
        .def_readonly("selected_id", &FlowRecord::selected_id)
        .def_readonly("indices", &FlowRecord::indices)
        .def_readonly("bytes", &FlowRecord::bytes);

    py::class_<WidthChange>(m, "WidthChange")
        .def_readonly("time_us", &WidthChange::time_us)
        .def_readonly("switch_index", &WidthChange::switch_index)
        .def_readonly("traffic", &WidthChange::traffic)
        .def_readonly("previous_width", &WidthChange::previous_width)
        .def_readonly("width", &WidthChange::width);

    py::class_<MetricsReport>(m, "MetricsReport")
        .def_readonly("scenario", &MetricsReport::scenario)
        .def_readonly("policy", &MetricsReport::policy)
        .def_readonly("seed", &MetricsReport::seed)
        .def_readonly("until_us", &MetricsReport::until_us)
        .def_readonly("switch_ids", &MetricsReport::switch_ids)
        .def_readonly("server_ids", &MetricsReport::server_ids)
        .def_readonly("flows", &MetricsReport::flows)
        .def_readonly("width_log", &MetricsReport::width_log)
        .def_readonly("injected_bytes", &MetricsReport::injected_bytes)
        .def_readonly("delivered_bytes", &MetricsReport::delivered_bytes)
        .def_readonly("consumed_bytes", &MetricsReport::consumed_bytes)
        .def_readonly("in_flight_bytes", &MetricsReport::in_flight_bytes)
        .def_property_readonly("dropped_bytes", &MetricsReport::dropped_bytes)
        .def_property_readonly("drops", [](const MetricsReport& r) {
            py::dict d;
            for (std::size_t c = 0; c < kDropCauseCount; ++c)
                d[py::str(std::string(to_string(static_cast<DropCause>(c))))] = r.drops[c].packets;
            return d;
        })
        .def_readonly("affinity_checked", &MetricsReport::affinity_checked)
        .def_readonly("affinity_violations", &MetricsReport::affinity_violations)
        .def_readonly("ecmp_checked", &MetricsReport::ecmp_checked)
        .def_readonly("ecmp_out_of_width", &MetricsReport::ecmp_out_of_width)
        .def_readonly("control_plane_calls", &MetricsReport::control_plane_calls)
        .def_property_readonly("conserved", &MetricsReport::conserved);

    py::class_<RunOutput>(m, "RunOutput")
        .def_readonly("p4green", &RunOutput::p4green)
        .def_readonly("baseline", &RunOutput::baseline)
        .def_property_readonly("summary", &render_summary)
        .def("write", [](const RunOutput& r, const std::filesystem::path& dir) { write_run(dir, r); }, py::arg("dir"));

    m.def(
        "simulate",
        [](const Scenario& s, const std::string& policy, std::optional<double> until_s) {
            py::gil_scoped_release release;
            return simulate(s, policy_from(policy), to_until(until_s));
        },
        py::arg("scenario"), py::arg("policy") = "p4green", py::arg("until_s") = py::none());
    m.def(
        "run_with_baseline",
        [](const Scenario& s, std::optional<double> until_s) {
            py::gil_scoped_release release;
            return run_with_baseline(s, to_until(until_s));
        },
        py::arg("scenario"), py::arg("until_s") = py::none());
    m.def("read_run", [](const std::filesystem::path& dir) { return read_run(dir); }, py::arg("dir"));

    py::class_<Reduction>(m, "Reduction")
        .def_readonly("fraction", &Reduction::fraction)
        .def_readonly("no_traffic", &Reduction::no_traffic)
        .def_readonly("active_windows", &Reduction::active_windows)
        .def_readonly("baseline_active_windows", &Reduction::baseline_active_windows);
    m.def("switch_hour_reduction", &switch_hour_reduction, py::arg("report"), py::arg("baseline"));
    m.def("energy_saving_estimate", &energy_saving_estimate, py::arg("reduction"), py::arg("n_switches"),
          py::arg("per_switch_wh"));
    m.def("green_share", [](const MetricsReport& r) { return green_share(r).fraction; }, py::arg("report"));
    m.def(
        "interval_shares",
        [](const RunOutput& run) {
            py::dict out;
            for (const auto& iv : interval_shares(run.p4green, run.params.intervals))
                out[py::make_tuple(iv.interval, iv.server)] = iv.share();
            return out;
        },
        py::arg("run"));

    m.def(
        "recompute_width",
        [](std::uint64_t traffic, const std::vector<std::uint64_t>& thresholds, int max_width) {
            return recompute_width(traffic, thresholds, max_width);
        },
        py::arg("traffic"), py::arg("thresholds"), py::arg("max_width"));
    m.def(
        "ecmp_bucket",
        [](const std::string& src, const std::string& dst, int proto, int sport, int dport, int width) {
            return ecmp_bucket(tuple_of(src, dst, proto, sport, dport), width);
        },
        py::arg("src"), py::arg("dst"), py::arg("proto"), py::arg("sport"), py::arg("dport"), py::arg("width"));
    m.def("encode_server_id_tsval", &encode_server_id_tsval, py::arg("tsval"), py::arg("server_id"));
    m.def("decode_server_id_tsecr", py::overload_cast<std::uint32_t>(&decode_server_id_tsecr), py::arg("tsecr"));
    m.def(
        "reserialize", [](const py::bytes& frame) { return as_bytes(serialize_packet(parse_packet(from_bytes(frame)))); },
        py::arg("frame"));
    m.def(
        "make_tcp_frame",
        [](const std::string& src, const std::string& dst, int sport, int dport, int flags, std::uint32_t tsval,
           std::uint32_t tsecr, std::size_t payload_len) {
            return as_bytes(serialize_packet(make_tcp_packet({}, {}, tuple_of(src, dst, kProtoTcp, sport, dport),
                                                             static_cast<std::uint8_t>(flags), {tsval, tsecr},
                                                             payload_len)));
        },
        py::arg("src"), py::arg("dst"), py::arg("sport"), py::arg("dport"), py::arg("flags") = 0x02,
        py::arg("tsval") = 0, py::arg("tsecr") = 0, py::arg("payload_len") = 0);
}
