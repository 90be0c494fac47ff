#include "pedemu/apps/node_apps.hpp"
#include "pedemu/bridge/wire.hpp"
#include "pedemu/channel/broadcast.hpp"
#include "pedemu/dpd/neighbor_table.hpp"
#include "pedemu/geo/utm.hpp"
#include "pedemu/mobility/crowd.hpp"
#include "pedemu/run/emulation.hpp"
#include "pedemu/sim/rng.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

using namespace pedemu;
namespace fs = std::filesystem;
using sim::NodeId;

namespace
{
    struct Outcome
    {
        bool pass = false;
        std::string detail;
    };

    struct Criterion
    {
        std::string name;
        std::function<Outcome()> check;
    };

    using Clock = std::chrono::steady_clock;

    double seconds_since(Clock::time_point t0)
    {
        return std::chrono::duration<double>(Clock::now() - t0).count();
    }

    std::string slurp(const fs::path &p)
    {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path scratch(const std::string &name)
    {
        const auto dir = fs::temp_directory_path() / fmt::format("pedemu-accept-{}", ::getpid());
        fs::create_directories(dir);
        return dir / name;
    }

    int exec(const std::string &args, const fs::path &out)
    {
        const auto cmd = fmt::format("'{}' --log-level warn {} > '{}'", PEDEMU_BIN, args, out.string());
        const int rc = std::system(cmd.c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    }

    std::map<std::string, std::string> key_values(const std::string &text)
    {
        std::map<std::string, std::string> kv;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line))
        {
            std::istringstream ls(line);
            std::string k, v;
            if (ls >> k)
            {
                std::getline(ls, v);
                const auto b = v.find_first_not_of(" =");
                kv[k] = b == std::string::npos ? "" : v.substr(b);
            }
        }
        return kv;
    }

    struct LagRow
    {
        double t_real, t_sim, offset;
    };

    std::vector<LagRow> read_lag(const fs::path &p)
    {
        std::ifstream in(p);
        std::string line;
        std::getline(in, line);
        std::vector<LagRow> rows;
        while (std::getline(in, line))
        {
            LagRow r{};
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &r.t_real, &r.t_sim, &r.offset) == 3)
            {
                rows.push_back(r);
            }
        }
        return rows;
    }

    // Real-time lag harness ---------------------------------------------------

    Outcome realtime_lag_harness()
    {
        const auto lag = scratch("lag.csv");
        const auto report = scratch("lag-report.txt");
        const auto t0 = Clock::now();
        const int rc =
            exec(fmt::format("run --mode realtime --nodes 6 --duration 120 --lag-out '{}'", lag.string()),
                 scratch("rt-run.txt"));
        const double wall = seconds_since(t0);
        if (rc != 0)
        {
            return {false, fmt::format("run exited {}", rc)};
        }
        const auto rows = read_lag(lag);
        if (rows.size() < 2)
        {
            return {false, "lag CSV has no samples"};
        }
        const double span = rows.back().t_real - rows.front().t_real;
        const double rate = static_cast<double>(rows.size() - 1) / span;
        std::size_t below = 0, over5 = 0;
        for (const auto &r : rows)
        {
            below += std::abs(r.offset) < 0.5 ? 1 : 0;
            over5 += r.offset > 5.0 ? 1 : 0;
        }
        const double frac = static_cast<double>(below) / static_cast<double>(rows.size());
        const double frac5 = static_cast<double>(over5) / static_cast<double>(rows.size());

        if (exec(fmt::format("lag-report '{}'", lag.string()), report) != 0)
        {
            return {false, "lag-report failed"};
        }
        const auto kv = key_values(slurp(report));
        const bool has_criterion = kv.count("frac_over_5s") == 1 && kv.count("feasible") == 1;
        const bool tool_agrees = has_criterion && std::abs(std::stod(kv.at("frac_over_5s")) - frac5) < 1e-6 &&
                                 kv.at("feasible") == (frac5 == 0.0 ? "yes" : "no");
        const bool pass = std::abs(rate - 100.0) <= 2.0 && frac >= 0.95 && tool_agrees;
        return {pass, fmt::format("{} samples, {:.2f} samples/s, {:.4f} with |offset| < 0.5 s, max {:.6f} s, "
                                  "frac_over_5s {:.6f} (tool {}), wall {:.1f} s",
                                  rows.size(), rate, frac,
                                  std::max_element(rows.begin(), rows.end(),
                                                   [](auto &a, auto &b) { return a.offset < b.offset; })
                                      ->offset,
                                  frac5, has_criterion ? kv.at("frac_over_5s") : "missing", wall)};
    }

    // Real-time contract --------------------------------------------------------

    Outcome realtime_contract()
    {
        run::RunConfig cfg;
        cfg.mode = run::RunMode::RealTime;
        cfg.nodes = 6;
        cfg.duration_s = 4.0;

        std::mutex mu;
        std::vector<sim::LagSample> samples;
        std::atomic<bool> synced{false};
        std::optional<sim::LagSample> after_sync;
        sim::LagSample at_stall_end{};

        run::Emulation emu(cfg);
        emu.on_setup([&](run::Emulation &e) {
            auto &sched = e.scheduler();
            sched.set_lag_observer([&](const sim::LagSample &s) {
                std::lock_guard lk(mu);
                samples.push_back(s);
                if (synced && !after_sync)
                {
                    after_sync = s;
                }
            });
            const auto at = sim::SimTime::from_seconds(2.0);
            sched.schedule_at(at, 0, 9000, [&sched, &at_stall_end] {
                const auto until = Clock::now() + std::chrono::seconds(1);
                while (Clock::now() < until)
                {
                }
                at_stall_end = sched.sample_lag();
            });
            sched.schedule_at(at, 0, 9001, [&sched, &synced] {
                sched.sync_to_wallclock();
                synced = true;
            });
        });
        const auto t0 = Clock::now();
        const auto r = emu.run();
        const double wall = seconds_since(t0);

        std::lock_guard lk(mu);
        double sampled_max = -1e9;
        for (const auto &s : samples)
        {
            sampled_max = std::max(sampled_max, s.offset);
        }
        const double peak = std::max(sampled_max, at_stall_end.offset);
        const bool restored = after_sync && std::abs(after_sync->offset) < 0.010;
        const bool pass = peak >= 1.0 && restored && wall < 10.0 && !r.sched.stopped;
        return {pass, fmt::format("peak offset {:.6f} s (periodic max {:.6f} s), next sample after sync {} s, "
                                  "{} samples, wall {:.2f} s",
                                  peak, sampled_max,
                                  after_sync ? fmt::format("{:.6f}", after_sync->offset) : std::string("none"),
                                  samples.size(), wall)};
    }

    // Determinism ---------------------------------------------------------------

    Outcome determinism()
    {
        std::string maps[2];
        std::string events[2];
        double walls[2];
        for (int i = 0; i < 2; ++i)
        {
            const auto map = scratch(fmt::format("map{}.csv", i));
            const auto out = scratch(fmt::format("report{}.txt", i));
            const auto t0 = Clock::now();
            const int rc = exec(fmt::format("run --mode virtual --nodes 6 --duration 120 --seed 1 --map-out '{}'",
                                            map.string()),
                                out);
            walls[i] = seconds_since(t0);
            if (rc != 0)
            {
                return {false, fmt::format("run {} exited {}", i, rc)};
            }
            maps[i] = slurp(map);
            const auto kv = key_values(slurp(out));
            events[i] = kv.count("events.executed") ? kv.at("events.executed") : "";
        }
        const bool pass = !maps[0].empty() && maps[0] == maps[1] && !events[0].empty() && events[0] == events[1] &&
                          walls[0] < 5.0 && walls[1] < 5.0;
        return {pass, fmt::format("map CSV {} bytes, identical {}, events {} / {}, wall {:.2f} s / {:.2f} s",
                                  maps[0].size(), maps[0] == maps[1], events[0], events[1], walls[0], walls[1])};
    }

    // Shared static-node world --------------------------------------------------

    const geo::UtmPoint kOrigin{32, geo::Hemisphere::North, 691000.0, 5336000.0};

    struct StaticWorld
    {
        sim::Scheduler sched;
        std::map<NodeId, geo::SimPoint> pos;
        channel::RadioConfig radio;
        channel::BroadcastChannel chan;
        geo::OffsetTransform xf{kOrigin};
        std::map<NodeId, std::unique_ptr<apps::NodeApps>> nodes;
        std::mt19937_64 jitter;

        StaticWorld(channel::RadioConfig r, std::uint64_t seed)
            : radio(r), chan(sched, r,
                             [this](NodeId id) -> std::optional<geo::SimPoint> {
                                 const auto it = pos.find(id);
                                 return it == pos.end() ? std::nullopt : std::optional<geo::SimPoint>(it->second);
                             }),
              jitter(seed)
        {
        }

        apps::NodeApps &add(NodeId id, geo::SimPoint p)
        {
            pos[id] = p;
            auto app = std::make_unique<apps::NodeApps>(sched, chan, id, apps::AppConfig{},
                                                        [this, id]() -> std::optional<geo::UtmPoint> {
                                                            return xf.sim_to_utm(pos.at(id));
                                                        });
            auto &ref = *app;
            nodes[id] = std::move(app);
            return ref;
        }

        void start()
        {
            for (auto &[id, n] : nodes)
            {
                n->start(jitter);
            }
        }

        void run(double s) { (void)sched.run_until(sim::SimTime::from_seconds(s), sim::ClockMode::Virtual); }
    };

    // Protocol timing -----------------------------------------------------------

    Outcome protocol_timing()
    {
        StaticWorld w({}, 5);
        std::map<NodeId, std::vector<sim::SimTime>> beacon_t, map_t;
        for (int i = 0; i < 80; ++i)
        {
            auto &n = w.add(static_cast<NodeId>(i + 1), {20.0 + 4.0 * (i % 10), 20.0 + 4.0 * (i / 10)});
            n.on_send([&](NodeId id, const bridge::WireMessage &m) {
                (std::holds_alternative<bridge::BeaconMsg>(m) ? beacon_t : map_t)[id].push_back(w.sched.now());
            });
        }
        std::size_t beacon_frames = 0, map_frames = 0, bad_beacon = 0, bad_map = 0, undecodable = 0,
                    max_cells = 0, max_map_bytes = 0;
        w.chan.on_transmit([&](const channel::Transmission &tx) {
            const auto r = bridge::decode_padded(*tx.payload);
            if (!r.ok())
            {
                ++undecodable;
                return;
            }
            if (std::holds_alternative<bridge::BeaconMsg>(*r.message))
            {
                ++beacon_frames;
                bad_beacon += tx.bytes != 224 ? 1 : 0;
            }
            else if (const auto *m = std::get_if<bridge::DensityMapMsg>(&*r.message))
            {
                ++map_frames;
                max_cells = std::max(max_cells, m->cells.size());
                max_map_bytes = std::max(max_map_bytes, tx.bytes);
                bad_map += (tx.bytes > 1000 || m->cells.size() > 61) ? 1 : 0;
            }
        });
        w.start();
        w.run(30.0);

        std::size_t bad_beacon_gap = 0, bad_map_gap = 0, gaps = 0;
        for (const auto &[id, ts] : beacon_t)
        {
            for (std::size_t i = 1; i < ts.size(); ++i, ++gaps)
            {
                bad_beacon_gap += (ts[i] - ts[i - 1]).count() != 1'000'000 ? 1 : 0;
            }
        }
        for (const auto &[id, ts] : map_t)
        {
            for (std::size_t i = 1; i < ts.size(); ++i, ++gaps)
            {
                bad_map_gap += (ts[i] - ts[i - 1]).count() != 2'000'000 ? 1 : 0;
            }
        }
        const bool all_nodes = beacon_t.size() == 80 && map_t.size() == 80;
        const bool pass = all_nodes && bad_beacon_gap == 0 && bad_map_gap == 0 && bad_beacon == 0 && bad_map == 0 &&
                          undecodable == 0 && beacon_frames > 0 && map_frames > 0 && max_cells == 61;
        return {pass, fmt::format("80 nodes, {} intervals checked, off-period beacon/map {}/{}, {} beacon frames "
                                  "({} not 224 B), {} map frames ({} over limit, largest {} B / {} cells)",
                                  gaps, bad_beacon_gap, bad_map_gap, beacon_frames, bad_beacon, map_frames, bad_map,
                                  max_map_bytes, max_cells)};
    }

    // DPD correctness oracle ----------------------------------------------------

    Outcome dpd_oracle()
    {
        channel::RadioConfig radio;
        radio.rx_sensitivity_dbm = -70.0;
        const std::vector<geo::SimPoint> where{{10, 10}, {210, 10}, {410, 10}};
        const double cell = apps::AppConfig{}.cell_size;
        std::size_t local_mismatch = 0, chain_missing = 0;
        const int seeds = 20;
        for (int seed = 1; seed <= seeds; ++seed)
        {
            StaticWorld w(radio, static_cast<std::uint64_t>(seed));
            for (std::size_t i = 0; i < where.size(); ++i)
            {
                w.add(static_cast<NodeId>(i + 1), where[i]);
            }
            w.start();
            w.run(3.0);
            const auto now = w.sched.now();
            for (const auto &[id, n] : w.nodes)
            {
                // Recount from ground truth: self plus every node whose beacons can reach this one.
                std::map<std::pair<std::int64_t, std::int64_t>, double> truth;
                for (const auto &[other, p] : w.pos)
                {
                    if (other == id || channel::can_receive(radio, p, w.pos.at(id)))
                    {
                        const double e = kOrigin.easting + p.x;
                        const double nn = kOrigin.northing + p.y;
                        truth[{static_cast<std::int64_t>(std::floor(e / cell)),
                               static_cast<std::int64_t>(std::floor(nn / cell))}] += 1.0;
                    }
                }
                const auto local = dpd::local_map(n->neighbors(), w.xf.sim_to_utm(w.pos.at(id)), cell, now);
                std::map<std::pair<std::int64_t, std::int64_t>, double> got;
                for (const auto &[k, e] : local.entries)
                {
                    got[{k.x, k.y}] = e.count;
                }
                local_mismatch += got != truth ? 1 : 0;
            }
            w.run(5.0);
            const auto first = dpd::cell_of(kOrigin.easting + where[0].x, kOrigin.northing + where[0].y, cell);
            chain_missing += w.nodes.at(3)->current_map(w.sched.now()).entries.count(first) == 1 ? 0 : 1;
        }
        const bool pass = local_mismatch == 0 && chain_missing == 0;
        return {pass, fmt::format("{} seeds, range {:.1f} m, local map mismatches {}, far node missing first cell "
                                  "at 5 s in {} runs",
                                  seeds, radio.max_range_m(), local_mismatch, chain_missing)};
    }

    // Merge algebra -------------------------------------------------------------

    dpd::DensityMap random_map(std::mt19937_64 &rng)
    {
        dpd::DensityMap m;
        const int n = static_cast<int>(rng() % 12);
        for (int i = 0; i < n; ++i)
        {
            const dpd::CellKey k{static_cast<std::int32_t>(rng() % 5), static_cast<std::int32_t>(rng() % 5)};
            dpd::CellEntry e;
            e.count = static_cast<double>(rng() % 4);
            e.last_update = sim::SimTime::from_us(static_cast<std::int64_t>(rng() % 4) * 1'000'000);
            e.source_id = static_cast<NodeId>(rng() % 3);
            m.entries[k] = e;
        }
        return m;
    }

    Outcome merge_algebra()
    {
        std::mt19937_64 rng(99);
        const auto now = sim::SimTime::from_seconds(5);
        const int n = 10000;
        int idem = 0, comm = 0, assoc = 0;
        for (int i = 0; i < n; ++i)
        {
            const auto a = random_map(rng);
            const auto b = random_map(rng);
            const auto c = random_map(rng);
            idem += dpd::merge(a, a, now) == a ? 0 : 1;
            comm += dpd::merge(a, b, now) == dpd::merge(b, a, now) ? 0 : 1;
            assoc += dpd::merge(dpd::merge(a, b, now), c, now) == dpd::merge(a, dpd::merge(b, c, now), now) ? 0 : 1;
        }
        return {idem + comm + assoc == 0,
                fmt::format("{} triples, violations: idempotence {}, commutativity {}, associativity {}", n, idem,
                            comm, assoc)};
    }

    // Geodesy -------------------------------------------------------------------

    Outcome geodesy()
    {
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> lat(-79.999, 83.999);
        std::uniform_real_distribution<double> lon(-180.0, 180.0);
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i)
        {
            const geo::GeoPoint p{lat(rng), lon(rng)};
            const auto q = geo::utm_to_wgs84(geo::wgs84_to_utm(p));
            double dlon = std::abs(q.lon - p.lon);
            dlon = std::min(dlon, 360.0 - dlon);
            worst = std::max({worst, std::abs(q.lat - p.lat), dlon});
        }
        const auto cm = geo::wgs84_to_utm({0.0, 9.0});
        const bool cm_exact = cm.zone == 32 && cm.easting == 500000.0 && cm.northing == 0.0;

        std::ifstream in(PEDEMU_TEST_DATA_DIR "/utm_reference.csv");
        std::string line;
        std::getline(in, line);
        double munich_err = 1e9;
        while (std::getline(in, line))
        {
            double la = 0, lo = 0, e = 0, n = 0;
            int zone = 0;
            char hemi = 0;
            if (std::sscanf(line.c_str(), "%lf,%lf,%d,%c,%lf,%lf", &la, &lo, &zone, &hemi, &e, &n) == 6 &&
                la == 48.15 && lo == 11.57)
            {
                const auto u = geo::wgs84_to_utm({la, lo});
                munich_err = u.zone == zone ? std::max(std::abs(u.easting - e), std::abs(u.northing - n)) : 1e9;
            }
        }
        const bool pass = worst < 1e-9 && cm_exact && munich_err < 0.01;
        return {pass, fmt::format("round trip worst {:.3e} deg, CM/equator ({:.6f}, {:.6f}), Munich error {:.6f} m",
                                  worst, cm.easting, cm.northing, munich_err)};
    }

    // Channel -------------------------------------------------------------------

    Outcome channel_model()
    {
        // 22 log10(100) + 28 + 20 log10(2.6), evaluated by hand: 44 + 28 + 8.29947
        const double hand = 80.29947;
        const double pl = channel::pathloss_db(100.0, 2.6);
        bool increasing = true;
        double prev = channel::pathloss_db(1.0, 2.6);
        for (double d = 1.001; d < 5000.0; d *= 1.001)
        {
            const double v = channel::pathloss_db(d, 2.6);
            increasing = increasing && v > prev;
            prev = v;
        }

        sim::Scheduler sched;
        std::map<NodeId, geo::SimPoint> pos{{1, {0, 0}}, {2, {10, 0}}};
        const channel::RadioConfig radio;
        channel::BroadcastChannel chan(sched, radio, [&](NodeId id) -> std::optional<geo::SimPoint> {
            return pos.at(id);
        });
        chan.attach(1, [](const channel::Reception &) {});
        chan.attach(2, [](const channel::Reception &) {});
        std::size_t peak_mac = 0, peak_rlc = 0;
        std::mt19937_64 rng(4);
        // Offered load far above the PHY rate for 5 s of simulated time.
        for (int ms = 0; ms < 5000; ++ms)
        {
            sched.schedule_at(sim::SimTime::from_us(ms * 1000LL), 1, 9100, [&] {
                for (int k = 0; k < 20; ++k)
                {
                    (void)chan.broadcast(1, std::vector<std::uint8_t>(1 + rng() % 1500, 0));
                    const auto st = chan.sender_stats(1);
                    peak_mac = std::max(peak_mac, st.mac_bytes);
                    peak_rlc = std::max(peak_rlc, st.rlc_bytes);
                }
            });
        }
        (void)sched.run_until(sim::SimTime::from_seconds(10), sim::ClockMode::Virtual);
        const auto st = chan.sender_stats(1);
        peak_mac = std::max(peak_mac, st.max_mac_bytes);
        peak_rlc = std::max(peak_rlc, st.max_rlc_bytes);
        const bool bounded = peak_mac <= 10000 && peak_rlc <= 5'000'000;
        const bool flooded = st.dropped_mac + st.dropped_rlc > 0;
        const bool pass = std::abs(pl - 80.30) <= 0.005 && std::abs(pl - hand) < 1e-5 && increasing && bounded &&
                          flooded;
        return {pass, fmt::format("PL(100 m) {:.5f} dB, monotone {}, flood {} packets offered, {} dropped, "
                                  "peak MAC {} B, peak RLC {} B",
                                  pl, increasing, st.packets_offered, st.dropped_mac + st.dropped_rlc, peak_mac,
                                  peak_rlc)};
    }

    // Mobility ------------------------------------------------------------------

    Outcome mobility_model()
    {
        mobility::Scenario field;
        field.width = 120;
        field.height = 100;
        field.targets = {mobility::rectangle(100, 80, 110, 90)};
        field.source = mobility::Source{mobility::rectangle(5, 5, 10, 10), 0};
        double speed_err = 1.0;
        {
            sim::Scheduler sched;
            mobility::CrowdConfig cfg;
            cfg.max_peds = 1;
            sim::RngStreams streams(42);
            mobility::Crowd crowd(sched, field, cfg, streams.stream("mobility"), streams.stream("spawn"));
            crowd.start();
            (void)sched.run_until(sim::SimTime::from_seconds(600), sim::ClockMode::Virtual);
            const auto *p = crowd.find(1);
            if (p != nullptr && p->state == mobility::PedState::Arrived)
            {
                const double travel = (p->arrived_at - p->spawned_at).count() * 1e-6;
                speed_err = std::abs(p->path_length / travel / p->free_speed - 1.0);
            }
        }

        std::mt19937_64 rng(8);
        const int n = 10000;
        double sum = 0, sq = 0;
        for (int i = 0; i < n; ++i)
        {
            const double v = mobility::draw_free_speed(rng);
            sum += v;
            sq += v * v;
        }
        const double mean = sum / n;
        const double sd = std::sqrt((sq - n * mean * mean) / (n - 1));

        const auto scn = mobility::default_scenario();
        std::uint64_t inside = 0, checks = 0;
        std::size_t peds = 0;
        {
            sim::Scheduler sched;
            mobility::CrowdConfig cfg;
            cfg.max_peds = 10;
            sim::RngStreams streams(1);
            mobility::Crowd crowd(sched, scn, cfg, streams.stream("mobility"), streams.stream("spawn"));
            crowd.on_step([&](const mobility::Pedestrian &p, geo::SimPoint) {
                ++checks;
                inside += scn.inside_obstacle(p.position) ? 1 : 0;
            });
            crowd.start();
            (void)sched.run_until(sim::SimTime::from_seconds(600), sim::ClockMode::Virtual);
            peds = crowd.pedestrians().size();
        }
        const bool pass = speed_err <= 0.02 && std::abs(mean - 1.34) <= 0.01 && std::abs(sd - 0.26) <= 0.01 &&
                          peds == 10 && inside == 0 && checks > 0;
        return {pass, fmt::format("lone speed error {:.4f}, draws mean {:.4f} sd {:.4f}, {} pedestrians, "
                                  "{} positions checked, {} inside obstacles",
                                  speed_err, mean, sd, peds, checks, inside)};
    }

    // Codec robustness ----------------------------------------------------------

    Outcome codec()
    {
        std::mt19937_64 rng(2718);
        std::size_t accepted = 0, rejected = 0, malformed_ok = 0;
        for (int i = 0; i < 100000; ++i)
        {
            std::vector<std::uint8_t> buf(rng() % 1200);
            for (auto &b : buf)
            {
                b = static_cast<std::uint8_t>(rng());
            }
            if (i % 4 == 0 && buf.size() >= 4)
            {
                std::copy(std::begin(bridge::kMagic), std::end(bridge::kMagic), buf.begin());
            }
            const auto r = (i % 2 == 0) ? bridge::decode(buf) : bridge::decode_padded(buf);
            if (r.ok())
            {
                ++accepted;
                malformed_ok += r.message.has_value() ? 0 : 1;
            }
            else
            {
                ++rejected;
                malformed_ok += r.message.has_value() ? 1 : 0;
            }
        }

        const auto f64 = [&] { return std::bit_cast<double>(rng()); };
        const auto f32 = [&] { return std::bit_cast<float>(static_cast<std::uint32_t>(rng())); };
        std::size_t roundtrip_fail = 0;
        const int valid = 30000;
        for (int i = 0; i < valid; ++i)
        {
            bridge::WireMessage m;
            switch (i % 3)
            {
            case 0:
                m = bridge::BeaconMsg{static_cast<std::uint32_t>(rng()), static_cast<std::uint8_t>(rng()),
                                      static_cast<geo::Hemisphere>(rng() % 2), f64(), f64(), rng()};
                break;
            case 1: {
                bridge::DensityMapMsg d;
                d.node_id = static_cast<std::uint32_t>(rng());
                d.cell_size_m = f32();
                d.zone = static_cast<std::uint8_t>(rng());
                d.hemisphere = static_cast<geo::Hemisphere>(rng() % 2);
                d.cells.resize(rng() % (bridge::kMaxMapCells + 1));
                for (auto &c : d.cells)
                {
                    c = {static_cast<std::int32_t>(rng()), static_cast<std::int32_t>(rng()), f32(),
                         static_cast<std::uint32_t>(rng())};
                }
                m = d;
                break;
            }
            default:
                m = bridge::NodeLocationMsg{static_cast<std::uint32_t>(rng()), f64(), f64(), rng()};
            }
            const auto bytes = bridge::encode(m);
            const auto r = bridge::decode(bytes);
            roundtrip_fail += (r.ok() && r.message->index() == m.index() && bridge::encode(*r.message) == bytes) ? 0 : 1;
        }
        const bool pass = malformed_ok == 0 && roundtrip_fail == 0;
        return {pass, fmt::format("100000 random inputs ({} accepted, {} rejected, {} inconsistent results), "
                                  "{} valid messages, {} round-trip failures",
                                  accepted, rejected, malformed_ok, valid, roundtrip_fail)};
    }
} // namespace

int main(int argc, char **argv)
{
    spdlog::set_level(spdlog::level::warn);
    const std::vector<Criterion> all{
        {"realtime-lag-harness", realtime_lag_harness},
        {"realtime-contract", realtime_contract},
        {"determinism", determinism},
        {"protocol-timing", protocol_timing},
        {"dpd-oracle", dpd_oracle},
        {"merge-algebra", merge_algebra},
        {"geodesy", geodesy},
        {"channel", channel_model},
        {"mobility", mobility_model},
        {"codec-robustness", codec},
    };
    const std::vector<std::string> only(argv + 1, argv + argc);
    int failed = 0, ran = 0;
    for (const auto &c : all)
    {
        if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end())
        {
            continue;
        }
        ++ran;
        Outcome o;
        try
        {
            o = c.check();
        }
        catch (const std::exception &e)
        {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << o.detail << std::endl;
    }
    std::error_code ec;
    fs::remove_all(fs::temp_directory_path() / fmt::format("pedemu-accept-{}", ::getpid()), ec);
    std::cout << fmt::format("{}/{} criteria passed", ran - failed, ran) << std::endl;
    return failed == 0 ? 0 : 1;
}
