#include "pedemu/run/emulation.hpp"

#include "pedemu/bridge/ws_gateway.hpp"
#include "pedemu/channel/broadcast.hpp"
#include "pedemu/geo/offset.hpp"
#include "pedemu/mobility/crowd.hpp"
#include "pedemu/mobility/spawn.hpp"
#include "pedemu/sim/rng.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <sstream>

namespace pedemu::run
{
    namespace
    {
        void check_zone(const geo::OffsetTransform &xf, const mobility::Scenario &s)
        {
            for (const geo::SimPoint corner : {geo::SimPoint{0, 0}, geo::SimPoint{s.width, 0},
                                               geo::SimPoint{0, s.height}, geo::SimPoint{s.width, s.height}})
            {
                const auto u = xf.sim_to_utm(corner);
                const auto g = geo::utm_to_wgs84(u);
                const auto back = geo::wgs84_to_utm(g, u.zone, u.hemisphere);
                if (!xf.in_zone(back))
                {
                    throw ConfigError("geo.origin_easting",
                                      fmt::format("scenario corner ({}, {}) lies outside UTM zone {}", corner.x,
                                                  corner.y, u.zone));
                }
            }
        }
    } // namespace

    struct Emulation::Impl
    {
        RunConfig cfg;
        sim::Scheduler sched;
        std::vector<std::function<void(Emulation &)>> setup_hooks;

        std::optional<geo::OffsetTransform> xf;
        std::unique_ptr<mobility::Crowd> crowd;
        std::unique_ptr<channel::BroadcastChannel> chan;
        std::map<sim::NodeId, std::unique_ptr<apps::NodeApps>> nodes;
        std::unique_ptr<bridge::UdpDeviceLink> udp;
        std::unique_ptr<bridge::WsDeviceLink> ws;
        std::unique_ptr<bridge::FanoutDeviceLink> fanout;
        std::unique_ptr<bridge::Bridge> bridge;
        std::mt19937_64 apps_rng;
        std::ofstream map_csv;
        std::uint64_t map_rows = 0;

        std::optional<geo::SimPoint> locate(sim::NodeId id) const
        {
            if (const auto *p = crowd->find(id))
            {
                return p->position;
            }
            if (bridge && id == bridge::kPlaceholderNode)
            {
                return bridge->node0_position();
            }
            return std::nullopt;
        }

        void add_node(sim::NodeId id)
        {
            auto app = std::make_unique<apps::NodeApps>(sched, *chan, id, cfg.apps,
                                                        [this, id]() -> std::optional<geo::UtmPoint> {
                                                            const auto p = locate(id);
                                                            if (!p)
                                                            {
                                                                return std::nullopt;
                                                            }
                                                            return xf->sim_to_utm(*p);
                                                        });
            if (map_csv.is_open())
            {
                app->on_map_tick([this](sim::NodeId n, sim::SimTime t, const dpd::DensityMap &m) {
                    for (const auto &[k, e] : m.entries)
                    {
                        map_csv << fmt::format("{:.6f},{},{},{},{},{:.6f}\n", t.seconds(), n, k.x, k.y, e.count,
                                               sim::to_seconds(t - e.last_update));
                        ++map_rows;
                    }
                });
            }
            app->start(apps_rng);
            nodes[id] = std::move(app);
        }

        void setup_bridge(const mobility::Scenario &scenario, const sim::RngStreams &rng)
        {
            std::vector<bridge::DeviceLink *> links;
            if (!cfg.bridge_listen.empty())
            {
                udp = std::make_unique<bridge::UdpDeviceLink>(bridge::parse_endpoint(cfg.bridge_listen),
                                                              bridge::parse_endpoint(cfg.bridge_device));
                links.push_back(udp.get());
                spdlog::info("bridge: UDP listening on port {}, device at {}", udp->local_port(), cfg.bridge_device);
            }
            if (!cfg.ws_listen.empty())
            {
                ws = std::make_unique<bridge::WsDeviceLink>(bridge::parse_endpoint(cfg.ws_listen), *xf);
                links.push_back(ws.get());
                spdlog::info("bridge: WebSocket gateway on port {}", ws->port());
            }
            bridge::DeviceLink *link = links.front();
            if (links.size() > 1)
            {
                fanout = std::make_unique<bridge::FanoutDeviceLink>(links);
                link = fanout.get();
            }

            auto node0_rng = rng.stream("bridge");
            const auto start = mobility::draw_point_in(scenario.source.region, node0_rng);
            bridge::BridgeSettings s;
            s.mode = cfg.bridge_mode;
            s.width = scenario.width;
            s.height = scenario.height;
            s.initial_position = start;
            s.beacon_payload = cfg.apps.beacon_payload;
            s.liveness_timeout = std::chrono::milliseconds(static_cast<std::int64_t>(cfg.liveness_timeout_ms));
            bridge = std::make_unique<bridge::Bridge>(sched, *chan, *xf, s, link);

            if (cfg.bridge_mode == bridge::BridgeMode::Export)
            {
                crowd->add_pedestrian(bridge::kPlaceholderNode, start, mobility::draw_free_speed(node0_rng));
                crowd->on_step([this](const mobility::Pedestrian &p, geo::SimPoint) {
                    if (p.id == bridge::kPlaceholderNode)
                    {
                        bridge->export_location(p.position);
                    }
                });
            }
            else
            {
                crowd->set_external_agent(bridge::kPlaceholderNode, start);
                bridge->on_node0_moved(
                    [this](geo::SimPoint p) { crowd->set_external_agent(bridge::kPlaceholderNode, p); });
            }
            bridge->start();
            spdlog::info("bridge: node[0] in {} mode, starting at ({:.2f}, {:.2f})", bridge::to_string(cfg.bridge_mode),
                         start.x, start.y);
        }

        void setup()
        {
            mobility::Scenario scenario;
            try
            {
                scenario = cfg.scenario.empty() ? mobility::default_scenario() : mobility::load_scenario(cfg.scenario);
            }
            catch (const mobility::ScenarioError &e)
            {
                throw ConfigError("run.scenario", e.what());
            }
            xf.emplace(cfg.origin);
            check_zone(*xf, scenario);

            const sim::RngStreams rng(cfg.seed);
            apps_rng = rng.stream("apps");

            mobility::CrowdConfig cc;
            cc.params = cfg.osm;
            cc.max_peds = static_cast<std::size_t>(cfg.nodes);
            cc.inter_arrival = sim::seconds_to_duration(cfg.inter_arrival_s);
            cc.field_resolution = cfg.field_resolution_m;
            crowd = std::make_unique<mobility::Crowd>(sched, scenario, cc, rng.stream("mobility"), rng.stream("spawn"));

            chan = std::make_unique<channel::BroadcastChannel>(
                sched, cfg.radio, [this](sim::NodeId id) { return locate(id); });
            spdlog::info("radio: {} dBm at {} GHz, sensitivity {} dBm -> range {:.0f} m", cfg.radio.tx_power_dbm,
                         cfg.radio.carrier_ghz, cfg.radio.rx_sensitivity_dbm, cfg.radio.max_range_m());

            if (!cfg.map_out.empty())
            {
                map_csv.open(cfg.map_out, std::ios::binary | std::ios::trunc);
                if (!map_csv)
                {
                    throw ConfigError("run.map_out", "cannot open '" + cfg.map_out + "' for writing");
                }
                map_csv << "t_sim_s,node_id,cell_x,cell_y,count,age_s\n";
            }

            crowd->on_spawn([this](const mobility::Pedestrian &p) {
                if (p.id != bridge::kPlaceholderNode)
                {
                    add_node(p.id);
                }
            });
            if (cfg.bridge_enabled())
            {
                setup_bridge(scenario, rng);
            }
            crowd->start();
        }
    };

    Emulation::Emulation(RunConfig cfg) : impl_(std::make_unique<Impl>())
    {
        impl_->cfg = std::move(cfg);
        impl_->sched.set_lag_interval(
            sim::Duration(static_cast<std::int64_t>(std::llround(impl_->cfg.lag_interval_ms * 1000.0))));
    }

    Emulation::~Emulation()
    {
        if (impl_->bridge)
        {
            impl_->bridge->stop();
        }
    }

    sim::Scheduler &Emulation::scheduler()
    {
        return impl_->sched;
    }

    const RunConfig &Emulation::config() const
    {
        return impl_->cfg;
    }

    std::optional<std::uint16_t> Emulation::udp_port() const
    {
        return impl_->udp ? std::optional<std::uint16_t>(impl_->udp->local_port()) : std::nullopt;
    }

    std::optional<std::uint16_t> Emulation::ws_port() const
    {
        return impl_->ws ? std::optional<std::uint16_t>(impl_->ws->port()) : std::nullopt;
    }

    void Emulation::on_setup(std::function<void(Emulation &)> fn)
    {
        impl_->setup_hooks.push_back(std::move(fn));
    }

    void Emulation::request_stop()
    {
        impl_->sched.request_stop();
    }

    RunResult Emulation::run()
    {
        auto &d = *impl_;
        const auto wall_start = std::chrono::steady_clock::now();
        const bool realtime = d.cfg.mode == RunMode::RealTime;
        if (realtime)
        {
            d.sched.start_realtime_clock();
        }
        d.setup();
        for (const auto &fn : d.setup_hooks)
        {
            fn(*this);
        }
        if (realtime)
        {
            d.sched.schedule_at(sim::SimTime{}, 0, 1, [&d] { d.sched.sync_to_wallclock(); });
            if (d.ws)
            {
                d.sched.set_lag_observer([&d](const sim::LagSample &s) { d.ws->publish_lag(s); });
            }
        }

        RunResult r;
        r.sched = d.sched.run_until(sim::SimTime::from_seconds(d.cfg.duration_s),
                                    realtime ? sim::ClockMode::RealTime : sim::ClockMode::Virtual);
        d.sched.set_lag_observer(nullptr);
        if (d.bridge)
        {
            d.bridge->stop();
            r.bridge = d.bridge->counters();
        }
        r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();

        r.radio_range_m = d.cfg.radio.max_range_m();
        for (const auto &[id, p] : d.crowd->pedestrians())
        {
            if (id == bridge::kPlaceholderNode && d.bridge)
            {
                continue;
            }
            ++r.pedestrians;
            r.arrived += p.state == mobility::PedState::Arrived ? 1 : 0;
        }
        r.mobility_steps = d.crowd->total_steps();
        r.map_rows = d.map_rows;
        for (const auto &[id, app] : d.nodes)
        {
            r.nodes[id] = app->counters();
        }
        std::vector<sim::NodeId> senders;
        for (const auto &[id, app] : d.nodes)
        {
            senders.push_back(id);
        }
        if (d.bridge)
        {
            senders.push_back(bridge::kPlaceholderNode);
        }
        for (const auto id : senders)
        {
            const auto s = d.chan->sender_stats(id);
            r.channel.packets_offered += s.packets_offered;
            r.channel.packets_transmitted += s.packets_transmitted;
            r.channel.dropped_rlc += s.dropped_rlc;
            r.channel.dropped_mac += s.dropped_mac;
            r.channel.max_mac_bytes = std::max(r.channel.max_mac_bytes, s.max_mac_bytes);
            r.channel.max_rlc_bytes = std::max(r.channel.max_rlc_bytes, s.max_rlc_bytes);
        }

        if (d.map_csv.is_open())
        {
            d.map_csv.close();
        }
        if (realtime)
        {
            r.lag = sim::summarize(r.sched.lag_samples);
            if (!d.cfg.lag_out.empty())
            {
                sim::write_lag_csv(d.cfg.lag_out, r.sched.lag_samples);
            }
        }
        if (!d.cfg.report_out.empty())
        {
            std::ofstream out(d.cfg.report_out, std::ios::binary | std::ios::trunc);
            if (!out)
            {
                throw ConfigError("run.report_out", "cannot open '" + d.cfg.report_out + "' for writing");
            }
            out << format_report(d.cfg, r);
        }
        return r;
    }

    std::string format_report(const RunConfig &cfg, const RunResult &r)
    {
        std::string out;
        auto line = [&out](const std::string &k, const auto &v) { out += fmt::format("{} = {}\n", k, v); };
        line("mode", to_string(cfg.mode));
        line("seed", cfg.seed);
        line("nodes", cfg.nodes);
        line("duration_s", cfg.duration_s);
        line("stopped", r.sched.stopped ? "true" : "false");
        line("radio.range_m", fmt::format("{:.1f}", r.radio_range_m));
        line("mobility.pedestrians", r.pedestrians);
        line("mobility.arrived", r.arrived);
        line("mobility.steps", r.mobility_steps);
        line("map.rows", r.map_rows);
        line("channel.packets_offered", r.channel.packets_offered);
        line("channel.packets_transmitted", r.channel.packets_transmitted);
        line("channel.dropped_rlc", r.channel.dropped_rlc);
        line("channel.dropped_mac", r.channel.dropped_mac);
        line("channel.max_mac_bytes", r.channel.max_mac_bytes);
        line("channel.max_rlc_bytes", r.channel.max_rlc_bytes);
        for (const auto &[id, c] : r.nodes)
        {
            const auto p = fmt::format("node.{}.", id);
            line(p + "beacons_sent", c.beacons_sent);
            line(p + "beacons_dropped", c.beacons_dropped);
            line(p + "beacons_received", c.beacons_received);
            line(p + "maps_sent", c.maps_sent);
            line(p + "maps_dropped", c.maps_dropped);
            line(p + "maps_received", c.maps_received);
            line(p + "maps_rejected", c.maps_rejected);
            line(p + "undecodable", c.undecodable);
            line(p + "map_cells_truncated", c.map_cells_truncated);
        }
        if (r.bridge)
        {
            const auto &b = *r.bridge;
            line("bridge.mode", bridge::to_string(cfg.bridge_mode));
            line("bridge.frames_forwarded", b.frames_forwarded);
            line("bridge.beacons_forwarded", b.beacons_forwarded);
            line("bridge.maps_forwarded", b.maps_forwarded);
            line("bridge.locations_sent", b.locations_sent);
            line("bridge.send_failures", b.send_failures);
            line("bridge.inbound_beacons", b.inbound_beacons);
            line("bridge.inbound_rejected", b.inbound_rejected);
            line("bridge.inbound_ignored", b.inbound_ignored);
            line("bridge.clamped", b.clamped);
            line("bridge.liveness_timeouts", b.liveness_timeouts);
        }
        line("events.executed", r.sched.events_executed);
        line("events.injected", r.sched.external_injected);
        line("events.trace_hash", fmt::format("{:016x}", r.sched.trace_hash));
        line("sim.end_s", fmt::format("{:.6f}", r.sched.end_time.seconds()));
        if (r.lag)
        {
            line("wall.lag_samples", r.lag->count);
            line("wall.lag_max_s", fmt::format("{:.6f}", r.lag->max_offset));
            line("wall.lag_max_abs_s", fmt::format("{:.6f}", r.lag->max_abs_offset));
            line("wall.lag_mean_s", fmt::format("{:.6f}", r.lag->mean_offset));
        }
        line("wall.seconds", fmt::format("{:.3f}", r.wall_seconds));
        return out;
    }

    std::map<std::string, std::string> parse_report(const std::string &text)
    {
        std::map<std::string, std::string> out;
        std::istringstream in(text);
        std::string l;
        while (std::getline(in, l))
        {
            const auto eq = l.find(" = ");
            if (eq == std::string::npos || l.rfind("wall.", 0) == 0)
            {
                continue;
            }
            out[l.substr(0, eq)] = l.substr(eq + 3);
        }
        return out;
    }
} // namespace pedemu::run
