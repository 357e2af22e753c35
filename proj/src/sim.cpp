#include "p4green/sim.hpp"

#include "p4green/errors.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace p4green {

void EventQueue::push(SimTime time, std::variant<PacketArrival, HostTimer> kind) {
    heap_.push(Event{time, next_seq_++, std::move(kind)});
}

Event EventQueue::pop() {
    // Ordering only reads time and seq, which survive the move.
    Event e = std::move(const_cast<Event&>(heap_.top()));
    heap_.pop();
    return e;
}

std::uint64_t EventQueue::queued_packet_bytes() const {
    auto copy = heap_;
    std::uint64_t total = 0;
    while (!copy.empty()) {
        if (auto* p = std::get_if<PacketArrival>(&copy.top().kind)) total += p->bytes.size();
        copy.pop();
    }
    return total;
}

namespace {

std::uint64_t flow_key(Ipv4Addr client, std::uint16_t port) {
    return (std::uint64_t{client.value} << 16) | port;
}

int draw(std::mt19937_64& rng, IntRange r) {
    return std::uniform_int_distribution<int>(r.min, r.max)(rng);
}

}  // namespace

struct Engine::Impl {
    struct Client {
        int node = -1;
        const ClientSpec* spec = nullptr;
        std::mt19937_64 rng;
        std::uint64_t started = 0;
        std::uint16_t next_port = 10000;
        std::unordered_map<std::uint16_t, std::uint64_t> active;  // port -> flow key
    };

    struct Session {
        std::uint32_t last_client_tsval = 0;
        std::uint32_t last_tsval = 0;
        int round = 0;
    };

    struct Server {
        int node = -1;
        int index = -1;  // into MetricsReport::server_ids
        int access = -1; // switch node index
        const HostSpec* spec = nullptr;
        EnergyTrace trace;  // scenario clock
        int last_reported = 0;
        std::uint32_t clock_offset = 0;
        std::unordered_map<std::uint64_t, Session> sessions;
    };

    Scenario sc;
    Installation inst;
    EventQueue queue;
    MetricsReport m;
    SimTime now{0};
    SimTime until{0};
    std::mt19937_64 rng;
    std::vector<Client> clients;
    std::vector<Server> servers;
    std::unordered_map<int, int> client_of_node;
    std::unordered_map<int, int> server_of_node;
    std::unordered_map<std::uint64_t, FlowModel> flows;          // live flows by (client ip, port)
    std::unordered_map<std::uint64_t, std::size_t> record_of;    // flow key -> index into m.flows
    std::uint64_t next_flow_id = 0;
    DecisionObserver observer;

    Impl(const Scenario& s, Installation i) : sc(s), inst(std::move(i)), rng(s.seed) {
        const Topology& t = inst.topology;
        for (int n = 0; n < t.switch_count; ++n) {
            m.switch_ids.push_back(t.nodes[static_cast<std::size_t>(n)].id);
            m.switch_types.emplace_back(to_string(inst.switches[static_cast<std::size_t>(n)].config.switch_type));
        }
        for (std::size_t n = static_cast<std::size_t>(t.switch_count); n < t.nodes.size(); ++n) {
            const HostSpec& h = sc.hosts[static_cast<std::size_t>(t.nodes[n].spec_index)];
            if (h.role == HostRole::server) {
                Server srv;
                srv.node = static_cast<int>(n);
                srv.index = static_cast<int>(servers.size());
                srv.access = t.nodes[n].ports.at(1).peer;
                srv.spec = &h;
                srv.trace = h.energy.shifted(h.energy_lag_hours);
                srv.clock_offset = static_cast<std::uint32_t>(rng());
                server_of_node[srv.node] = srv.index;
                m.server_ids.push_back(h.id);
                m.server_pools.push_back(t.nodes[static_cast<std::size_t>(srv.access)].id);
                servers.push_back(std::move(srv));
            }
        }
        for (const auto& c : sc.clients) {
            Client cl;
            cl.node = *t.find(c.host);
            cl.spec = &c;
            cl.rng.seed(rng());
            client_of_node[cl.node] = static_cast<int>(clients.size());
            clients.push_back(std::move(cl));
        }
    }

    // --- plumbing -----------------------------------------------------------

    void transmit(int node, Port port, std::vector<std::uint8_t> bytes) {
        const auto& att = inst.topology.nodes[static_cast<std::size_t>(node)].ports.at(port);
        queue.push(now + att.delay, PacketArrival{att.peer, att.peer_port, std::move(bytes)});
    }

    void inject(int host, const ParsedPacket& p) {
        auto bytes = serialize_packet(p);
        m.injected_bytes += bytes.size();
        m.injected_packets += 1;
        transmit(host, 1, std::move(bytes));
    }

    std::size_t window_of(SimTime t) const { return static_cast<std::size_t>(t.count() / m.window_us); }
    std::size_t bin_of(SimTime t) const { return static_cast<std::size_t>(t.count() / m.server_bin_us); }

    std::uint32_t clock_ms(std::uint32_t offset) const {
        return offset + static_cast<std::uint32_t>(now.count() / 1000);
    }

    const TopoNode& node(int n) const { return inst.topology.nodes[static_cast<std::size_t>(n)]; }
    MacAddr peer_mac(int host) const { return node(node(host).ports.at(1).peer).mac; }

    // --- switches -----------------------------------------------------------

    void on_switch(int sw, Port port, std::vector<std::uint8_t>& bytes) {
        ParsedPacket p;
        try {
            p = parse_packet(bytes);
        } catch (const MalformedPacket&) {
            count_drop(DropCause::malformed, bytes.size());
            return;
        }
        const std::size_t len = bytes.size();
        ForwardingDecision d = ingress(inst.switches[static_cast<std::size_t>(sw)], std::move(p), port, now);
        if (observer) observer(sw, now, d);

        if (d.ecmp) {
            ++m.ecmp_checked;
            if (d.ecmp->uplink_index >= d.ecmp->width) ++m.ecmp_out_of_width;
            if (d.ecmp->rotated)
                m.width_log.push_back({now.count(), sw, d.ecmp->evaluated_traffic, d.ecmp->previous_width, d.ecmp->width});
        }
        if (d.selection) {
            auto it = record_of.find(flow_key(d.packet.ip_src, d.packet.tcp ? d.packet.tcp->src_port : 0));
            if (it != record_of.end()) {
                auto& rec = m.flows[it->second];
                rec.selected_id = d.selection->server_id;
                rec.indices = d.selection->indices;
            }
        }

        switch (d.action) {
            case Action::forward: {
                auto out = serialize_packet(d.packet);
                auto& w = m.switch_windows[static_cast<std::size_t>(sw)][window_of(now)];
                w.bytes += out.size();
                w.packets += 1;
                transmit(sw, d.egress_port, std::move(out));
                break;
            }
            case Action::drop:
                count_drop(*d.cause, len);
                break;
            case Action::consume:
                m.consumed_bytes += len;
                break;
        }
    }

    void count_drop(DropCause c, std::size_t bytes) {
        auto& d = m.drops[static_cast<std::size_t>(c)];
        d.packets += 1;
        d.bytes += bytes;
    }

    // --- hosts --------------------------------------------------------------

    void on_host(int host, std::vector<std::uint8_t>& bytes) {
        m.delivered_bytes += bytes.size();
        m.delivered_packets += 1;
        ParsedPacket p;
        try {
            p = parse_packet(bytes);
        } catch (const MalformedPacket&) {
            return;
        }
        if (!p.tcp) return;
        if (auto it = server_of_node.find(host); it != server_of_node.end())
            on_server_segment(servers[static_cast<std::size_t>(it->second)], p, bytes.size());
        else if (auto c = client_of_node.find(host); c != client_of_node.end())
            on_client_segment(clients[static_cast<std::size_t>(c->second)], p);
    }

    void schedule_next_arrival(Client& c, SimTime from) {
        const auto& prof = c.spec->profile;
        const double lambda = prof.max_rate();
        if (lambda <= 0) return;
        if (prof.max_flows && c.started >= *prof.max_flows) return;
        const double gap_s = std::exponential_distribution<double>(lambda)(c.rng);
        const SimTime t = from + SimTime(static_cast<std::int64_t>(std::ceil(gap_s * 1e6)));
        if (t >= std::min(until, sc.duration())) return;
        queue.push(t, HostTimer{c.node, TimerTag::next_flow, 0});
    }

    void on_next_flow(Client& c) {
        const auto& prof = c.spec->profile;
        const double hour = std::fmod(sc.hour_of(now), 24.0);
        const double accept = prof.rate_at(hour) / prof.max_rate();
        if (std::uniform_real_distribution<double>(0.0, 1.0)(c.rng) < accept) start_flow(c);
        schedule_next_arrival(c, now);
    }

    std::uint16_t allocate_port(Client& c) {
        for (;;) {
            std::uint16_t p = c.next_port;
            c.next_port = c.next_port == 65535 ? 1024 : static_cast<std::uint16_t>(c.next_port + 1);
            if (!c.active.count(p)) return p;
        }
    }

    void start_flow(Client& c) {
        const auto& spec = *c.spec;
        const auto& prof = spec.profile;
        ++c.started;
        const Ipv4Addr client_ip = *node(c.node).ip;
        const Ipv4Addr vip =
            spec.targets[std::uniform_int_distribution<std::size_t>(0, spec.targets.size() - 1)(c.rng)];

        FlowModel f;
        f.id = next_flow_id++;
        f.tuple = {client_ip, vip, kProtoTcp, allocate_port(c), spec.dst_port};
        f.start = now;
        const int rounds = draw(c.rng, prof.request_packets);
        f.response_packets.push_back(1);
        for (int r = 0; r < rounds; ++r) f.response_packets.push_back(draw(c.rng, prof.response_packets));
        f.request_bytes = prof.request_bytes;
        f.response_bytes = prof.response_bytes;
        f.think_time_ms = prof.think_time_ms;
        f.client_clock_offset = static_cast<std::uint32_t>(c.rng());
        f.last_client_tsval = clock_ms(f.client_clock_offset);

        const auto key = flow_key(client_ip, f.tuple.src_port);
        c.active[f.tuple.src_port] = key;
        FlowRecord rec;
        rec.flow_id = f.id;
        rec.start_us = now.count();
        rec.vip = vip;
        record_of[key] = m.flows.size();
        m.flows.push_back(std::move(rec));

        auto syn = make_tcp_packet(node(c.node).mac, peer_mac(c.node), f.tuple, tcp_flags::syn,
                                   {f.last_client_tsval, 0}, 0);
        flows[key] = std::move(f);
        inject(c.node, syn);
    }

    void on_client_segment(Client& c, const ParsedPacket& p) {
        const auto key = flow_key(p.ip_dst, p.tcp->dst_port);
        auto it = flows.find(key);
        if (it == flows.end() || !p.has_timestamp()) return;
        FlowModel& f = it->second;
        f.last_server_tsval = p.tcp->timestamp.tsval;
        if (!(p.tcp->flags & tcp_flags::psh)) return;  // round continues
        ++f.rounds_done;
        if (f.rounds_done >= static_cast<int>(f.response_packets.size())) {
            c.active.erase(f.tuple.src_port);
            flows.erase(it);
            return;
        }
        const int think = draw(c.rng, f.think_time_ms);
        queue.push(now + SimTime(std::int64_t{think} * 1000), HostTimer{c.node, TimerTag::send_request, key});
    }

    void on_send_request(Client& c, std::uint64_t key) {
        auto it = flows.find(key);
        if (it == flows.end()) return;
        FlowModel& f = it->second;
        f.last_client_tsval = clock_ms(f.client_clock_offset);
        auto seg = make_tcp_packet(node(c.node).mac, peer_mac(c.node), f.tuple, tcp_flags::ack | tcp_flags::psh,
                                   {f.last_client_tsval, f.last_server_tsval},
                                   static_cast<std::size_t>(f.request_bytes));
        inject(c.node, seg);
    }

    void on_server_segment(Server& s, const ParsedPacket& p, std::size_t wire) {
        const auto key = flow_key(p.ip_src, p.tcp->src_port);
        m.server_bins[static_cast<std::size_t>(s.index)][bin_of(now)].bytes += wire;
        FlowRecord* rec = nullptr;
        if (auto r = record_of.find(key); r != record_of.end()) rec = &m.flows[r->second];
        if (rec) rec->bytes += wire;

        const TcpTimestamp ts = p.has_timestamp() ? p.tcp->timestamp : TcpTimestamp{};
        Session* sess = nullptr;
        if (p.tcp->syn()) {
            m.server_bins[static_cast<std::size_t>(s.index)][bin_of(now)].packets += 1;
            if (rec) rec->server_index = s.index;
            sess = &s.sessions[key];
            *sess = Session{ts.tsval, 0, 0};
        } else {
            ++m.affinity_checked;
            if (!rec || rec->server_index != s.index) ++m.affinity_violations;
            auto it = s.sessions.find(key);
            if (it == s.sessions.end()) return;
            sess = &it->second;
            sess->last_client_tsval = ts.tsval;
            ++sess->round;
        }

        int count = 1;
        int payload = 0;
        if (auto f = flows.find(key); f != flows.end() && !p.tcp->syn()) {
            const auto& plan = f->second.response_packets;
            count = plan[static_cast<std::size_t>(std::min<int>(sess->round, static_cast<int>(plan.size()) - 1))];
            payload = f->second.response_bytes;
        }
        const FiveTuple back{p.ip_dst, p.ip_src, kProtoTcp, p.tcp->dst_port, p.tcp->src_port};
        for (int i = 0; i < count; ++i) {
            std::uint8_t flags = tcp_flags::ack;
            if (p.tcp->syn()) flags |= tcp_flags::syn;
            if (i == count - 1) flags |= tcp_flags::psh;
            sess->last_tsval = std::max(clock_ms(s.clock_offset), sess->last_tsval + 1);
            auto seg = make_tcp_packet(node(s.node).mac, peer_mac(s.node), back, flags,
                                       {sess->last_tsval, sess->last_client_tsval}, static_cast<std::size_t>(payload));
            inject(s.node, seg);
        }
        const bool last_round = [&] {
            auto f = flows.find(key);
            return f == flows.end() || sess->round + 1 >= static_cast<int>(f->second.response_packets.size());
        }();
        if (last_round) s.sessions.erase(key);
    }

    void report(Server& s, bool force) {
        const int v = s.trace.value_at(std::fmod(sc.hour_of(now), 24.0));
        if (!force && v == s.last_reported) return;
        s.last_reported = v;
        const auto& acc = inst.switches[static_cast<std::size_t>(s.access)].config;
        auto pkt = encode_info_packet(*acc.subnet_prefix, v, *node(s.node).ip, node(s.node).mac, acc.mac);
        m.info_log.push_back({now.count(), s.index, v});
        inject(s.node, pkt);
    }

    void on_timer(const HostTimer& t) {
        switch (t.tag) {
            case TimerTag::next_flow:
                on_next_flow(clients[static_cast<std::size_t>(client_of_node.at(t.node))]);
                break;
            case TimerTag::send_request:
                on_send_request(clients[static_cast<std::size_t>(client_of_node.at(t.node))], t.arg);
                break;
            case TimerTag::report_change:
                report(servers[static_cast<std::size_t>(server_of_node.at(t.node))], false);
                break;
            case TimerTag::report_periodic: {
                auto& s = servers[static_cast<std::size_t>(server_of_node.at(t.node))];
                report(s, true);
                const auto period = SimTime(static_cast<std::int64_t>(std::llround(s.spec->report_period_s * 1e6)));
                queue.push(now + period, HostTimer{s.node, TimerTag::report_periodic, 0});
                break;
            }
        }
    }

    void arm_hosts() {
        const SimTime day = sc.at_hour(24.0);
        const auto days = static_cast<int>(until.count() / std::max<std::int64_t>(day.count(), 1)) + 1;
        for (auto& s : servers) {
            if (s.trace.empty()) continue;
            queue.push(SimTime(0), HostTimer{s.node, TimerTag::report_change, 0});
            for (int d = 0; d < days; ++d) {
                // The day boundary can be a change even when no sample sits at 0.
                if (d > 0 && sc.at_hour(24.0 * d) < until)
                    queue.push(sc.at_hour(24.0 * d), HostTimer{s.node, TimerTag::report_change, 0});
                for (double h : s.trace.change_points()) {
                    const SimTime t = sc.at_hour(24.0 * d + h);
                    if (t > SimTime(0) && t < until) queue.push(t, HostTimer{s.node, TimerTag::report_change, 0});
                }
            }
            if (s.spec->report_period_s > 0)
                queue.push(SimTime(static_cast<std::int64_t>(std::llround(s.spec->report_period_s * 1e6))),
                           HostTimer{s.node, TimerTag::report_periodic, 0});
        }
        for (auto& c : clients) schedule_next_arrival(c, SimTime(0));
    }

    MetricsReport run(SimTime stop) {
        until = stop;
        m.scenario = sc.name;
        m.policy = inst.policy == Policy::p4green ? "p4green" : "pinned_ecmp";
        m.seed = static_cast<std::int64_t>(sc.seed);
        m.until_us = until.count();
        m.window_us = sc.window().count();
        m.day_seconds = sc.day_seconds;
        m.server_bin_us = sc.at_hour(sc.server_window_minutes / 60.0).count();
        const auto n_windows = static_cast<std::size_t>((until.count() + m.window_us - 1) / m.window_us);
        const auto n_bins = static_cast<std::size_t>((until.count() + m.server_bin_us - 1) / m.server_bin_us);
        m.switch_windows.assign(m.switch_ids.size(), std::vector<WindowCount>(n_windows));
        m.server_bins.assign(m.server_ids.size(), std::vector<WindowCount>(n_bins));

        const std::uint64_t installs_before = installer_invocations();
        arm_hosts();
        while (!queue.empty() && queue.next_time() < until) {
            Event e = queue.pop();
            now = e.time;
            if (auto* pa = std::get_if<PacketArrival>(&e.kind)) {
                if (node(pa->node).is_switch) on_switch(pa->node, pa->port, pa->bytes);
                else on_host(pa->node, pa->bytes);
            } else {
                on_timer(std::get<HostTimer>(e.kind));
            }
        }
        m.in_flight_bytes = queue.queued_packet_bytes();
        m.control_plane_calls = installer_invocations() - installs_before;
        return std::move(m);
    }
};

Engine::Engine(const Scenario& scenario, Installation installation)
    : impl_(std::make_unique<Impl>(scenario, std::move(installation))) {}

Engine::~Engine() = default;

MetricsReport Engine::run(SimTime until) { return impl_->run(until); }

const std::vector<SwitchState>& Engine::switches() const { return impl_->inst.switches; }

void Engine::observe(DecisionObserver obs) { impl_->observer = std::move(obs); }

MetricsReport simulate(const Scenario& scenario, Policy policy, std::optional<SimTime> until) {
    Engine engine(scenario, install(scenario, policy));
    return engine.run(until.value_or(scenario.duration()));
}

}  // namespace p4green
