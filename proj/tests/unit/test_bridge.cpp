#include "pedemu/apps/node_apps.hpp"
#include "pedemu/bridge/bridge.hpp"
#include "pedemu/bridge/json_mirror.hpp"
#include "pedemu/bridge/ws_gateway.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <doctest.h>
#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <random>
#include <thread>

using namespace pedemu;
using namespace pedemu::bridge;

namespace
{
    const geo::UtmPoint kOrigin{32, geo::Hemisphere::North, 691000.0, 5336000.0};

    struct World
    {
        sim::Scheduler sched;
        std::map<NodeId, geo::SimPoint> pos;
        channel::BroadcastChannel chan;
        geo::OffsetTransform xf{kOrigin};
        std::map<NodeId, std::unique_ptr<apps::NodeApps>> nodes;
        std::mt19937_64 jitter{5};

        explicit World(channel::RadioConfig radio = {})
            : chan(sched, radio, [this](NodeId id) -> std::optional<geo::SimPoint> {
                  const auto it = pos.find(id);
                  return it == pos.end() ? std::nullopt : std::optional<geo::SimPoint>(it->second);
              })
        {
        }

        void add(NodeId id, geo::SimPoint p)
        {
            pos[id] = p;
            auto app = std::make_unique<apps::NodeApps>(sched, chan, id, apps::AppConfig{},
                                                        [this, id]() -> std::optional<geo::UtmPoint> {
                                                            return xf.sim_to_utm(pos.at(id));
                                                        });
            app->start(jitter);
            nodes[id] = std::move(app);
        }

        std::unique_ptr<Bridge> bridge(BridgeMode mode, DeviceLink *link, geo::SimPoint node0 = {0, 0})
        {
            pos[kPlaceholderNode] = node0;
            BridgeSettings s;
            s.mode = mode;
            s.width = 100;
            s.height = 80;
            s.initial_position = node0;
            auto b = std::make_unique<Bridge>(sched, chan, xf, s, link);
            b->on_node0_moved([this](geo::SimPoint p) { pos[kPlaceholderNode] = p; });
            b->start();
            return b;
        }

        void run(double s) { (void)sched.run_until(sim::SimTime::from_seconds(s), sim::ClockMode::Virtual); }
    };

    Datagram device_beacon(double e, double n, std::uint64_t ts = 0)
    {
        return encode(BeaconMsg{42, 32, geo::Hemisphere::North, e, n, ts});
    }
} // namespace

TEST_CASE("bridge: every frame node[0] receives is forwarded exactly once")
{
    World w;
    MemoryDeviceLink link;
    w.add(1, {10, 0});
    w.add(2, {0, 20});
    w.add(3, {5000, 0}); // beyond radio range of node[0]
    auto b = w.bridge(BridgeMode::Export, &link);
    w.run(30);

    std::uint64_t bytes_at_node0 = 0;
    for (const auto &[key, st] : w.chan.links())
    {
        if (key.second == kPlaceholderNode)
        {
            bytes_at_node0 += st.bytes_delivered;
        }
    }
    CHECK(w.chan.link_stats(3, kPlaceholderNode).bytes_delivered == 0);
    CHECK(w.chan.link_stats(3, kPlaceholderNode).bytes_dropped_range > 0);

    // Channel beacons are padded to 224 B; maps travel at their encoded size.
    std::uint64_t bytes_forwarded = 0;
    for (const auto &d : link.sent())
    {
        const auto r = decode(d);
        REQUIRE(r.ok());
        bytes_forwarded += std::holds_alternative<BeaconMsg>(*r.message) ? 224 : d.size();
    }
    CHECK(bytes_at_node0 > 0);
    CHECK(bytes_forwarded == bytes_at_node0);
    CHECK(link.sent().size() == b->counters().frames_forwarded);
    CHECK(b->counters().beacons_forwarded + b->counters().maps_forwarded == b->counters().frames_forwarded);

    for (const auto &d : link.sent())
    {
        const auto r = decode(d);
        REQUIRE(r.ok());
        if (const auto *bm = std::get_if<BeaconMsg>(&*r.message))
        {
            CHECK(bm->node_id != 3);
            const auto p = w.xf.utm_to_sim({bm->zone, bm->hemisphere, bm->easting, bm->northing});
            CHECK(p == w.pos.at(bm->node_id));
        }
        // Forwarded frames are re-encoded without the channel padding.
        CHECK(d.size() < 224);
    }
}

TEST_CASE("bridge: no link means nothing is forwarded and node[0] stays silent")
{
    World w;
    w.add(1, {10, 0});
    auto b = w.bridge(BridgeMode::Inbound, nullptr, {3, 4});
    w.run(20);
    CHECK(b->counters().frames_forwarded == 0);
    CHECK(w.chan.sender_stats(kPlaceholderNode).packets_offered == 0);
    CHECK(b->node0_position() == geo::SimPoint{3, 4});
}

TEST_CASE("bridge: export sends NODE_LOCATION that inverts to the sim position")
{
    World w;
    MemoryDeviceLink link;
    auto b = w.bridge(BridgeMode::Export, &link);

    b->export_location({0, 0});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 400.0);
    std::vector<geo::SimPoint> points;
    for (int i = 0; i < 200; ++i)
    {
        points.push_back({u(rng), u(rng)});
        b->export_location(points.back());
    }
    const auto sent = link.sent();
    REQUIRE(sent.size() == 201);
    CHECK(b->counters().locations_sent == 201);

    const auto first = std::get<NodeLocationMsg>(*decode(sent[0]).message);
    const auto origin = geo::utm_to_wgs84(kOrigin);
    CHECK(first.node_id == kPlaceholderNode);
    CHECK(first.lat == doctest::Approx(origin.lat).epsilon(1e-12));
    CHECK(first.lon == doctest::Approx(origin.lon).epsilon(1e-12));

    double worst = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
    {
        const auto m = std::get<NodeLocationMsg>(*decode(sent[i + 1]).message);
        const auto back = w.xf.wgs84_to_sim({m.lat, m.lon});
        worst = std::max(worst, std::hypot(back.x - points[i].x, back.y - points[i].y));
    }
    CHECK(worst < 0.01);
}

TEST_CASE("bridge: inbound beacon at the origin puts node[0] at (0,0)")
{
    World w;
    MemoryDeviceLink link;
    w.add(1, {10, 0});
    auto b = w.bridge(BridgeMode::Inbound, &link, {50, 50});
    w.sched.schedule_at(sim::SimTime::from_seconds(0.5), 99, 1, [&] { link.deliver(device_beacon(691000.0, 5336000.0)); });
    w.run(3);
    REQUIRE(b->node0_trace().size() == 1);
    CHECK(b->node0_trace()[0].first == sim::SimTime::from_seconds(0.5));
    CHECK(b->node0_position() == geo::SimPoint{0, 0});
    // The device is perceived on the simulated channel: node 1 hears node[0].
    CHECK(w.chan.link_stats(kPlaceholderNode, 1).bytes_delivered == 224);
    CHECK(w.nodes.at(1)->counters().beacons_received >= 1);
}

TEST_CASE("bridge: 5 Hz device stream yields 5 position events per second")
{
    World w;
    MemoryDeviceLink link;
    auto b = w.bridge(BridgeMode::Inbound, &link);
    for (int k = 0; k < 50; ++k)
    {
        const double x = 1.0 + 0.1 * k;
        w.sched.schedule_at(sim::SimTime::from_us(200'000LL * k), 99, 1,
                            [&, x] { link.deliver(device_beacon(691000.0 + x, 5336000.0 + 2.0)); });
    }
    w.run(10);
    const auto &trace = b->node0_trace();
    REQUIRE(trace.size() == 50);
    std::map<std::int64_t, int> per_second;
    for (const auto &[t, p] : trace)
    {
        ++per_second[t.us() / 1'000'000];
    }
    for (std::int64_t s = 0; s < 10; ++s)
    {
        CHECK(per_second[s] == 5);
    }
    CHECK(b->counters().inbound_beacons == 50);
    CHECK(w.chan.sender_stats(kPlaceholderNode).packets_offered == 50);
}

TEST_CASE("bridge: device to sim to device coordinates are a pure translation")
{
    World w;
    MemoryDeviceLink link;
    auto b = w.bridge(BridgeMode::Inbound, &link);
    std::vector<BeaconMsg> seen;
    w.chan.attach(7, [&](const channel::Reception &r) {
        seen.push_back(std::get<BeaconMsg>(*decode_padded(*r.payload).message));
    });
    w.pos[7] = {1, 1};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(0.0, 100.0);
    std::uniform_real_distribution<double> uy(0.0, 80.0);
    std::vector<std::pair<double, double>> sent;
    for (int k = 0; k < 100; ++k)
    {
        const double e = 691000.0 + ux(rng);
        const double n = 5336000.0 + uy(rng);
        sent.emplace_back(e, n);
        w.sched.schedule_at(sim::SimTime::from_seconds(k * 0.5), 99, 1, [&, e, n] { link.deliver(device_beacon(e, n)); });
    }
    w.run(60);
    REQUIRE(seen.size() == sent.size());
    for (std::size_t i = 0; i < sent.size(); ++i)
    {
        CHECK(std::abs(seen[i].easting - sent[i].first) < 1e-6);
        CHECK(std::abs(seen[i].northing - sent[i].second) < 1e-6);
        CHECK(seen[i].node_id == kPlaceholderNode);
    }
}

TEST_CASE("bridge: malformed and out-of-bounds inbound datagrams")
{
    World w;
    MemoryDeviceLink link;
    auto b = w.bridge(BridgeMode::Inbound, &link, {5, 5});

    auto bad = device_beacon(691000.0, 5336000.0);
    bad[0] = 'X';
    w.sched.schedule_at(sim::SimTime::from_seconds(1), 99, 1, [&] { link.deliver(bad); });
    w.sched.schedule_at(sim::SimTime::from_seconds(2), 99, 1, [&] { link.deliver({1, 2, 3}); });
    w.sched.schedule_at(sim::SimTime::from_seconds(3), 99, 1,
                        [&] { link.deliver(encode(NodeLocationMsg{1, 48.0, 11.0, 0})); });
    w.run(4);
    CHECK(b->counters().inbound_rejected == 3);
    CHECK(b->node0_trace().empty());
    CHECK(b->node0_position() == geo::SimPoint{5, 5});

    w.sched.schedule_at(sim::SimTime::from_seconds(5), 99, 1,
                        [&] { link.deliver(device_beacon(691000.0 + 500.0, 5336000.0 - 20.0)); });
    w.sched.schedule_at(sim::SimTime::from_seconds(6), 99, 1,
                        [&] { link.deliver(device_beacon(691000.0 - 3.0, 5336000.0 + 30.0)); });
    w.run(7);
    CHECK(b->counters().clamped == 2);
    REQUIRE(b->node0_trace().size() == 2);
    CHECK(b->node0_trace()[0].second == geo::SimPoint{100, 0});
    CHECK(b->node0_trace()[1].second == geo::SimPoint{0, 30});
}

TEST_CASE("bridge: export mode ignores device datagrams")
{
    World w;
    MemoryDeviceLink link;
    auto b = w.bridge(BridgeMode::Export, &link, {5, 5});
    w.sched.schedule_at(sim::SimTime::from_seconds(1), 99, 1, [&] { link.deliver(device_beacon(691010.0, 5336010.0)); });
    w.run(2);
    CHECK(b->counters().inbound_ignored == 1);
    CHECK(b->node0_position() == geo::SimPoint{5, 5});
}

TEST_CASE("bridge: without a session the virtual run is deterministic")
{
    const auto once = [] {
        World w;
        w.add(1, {10, 0});
        w.add(2, {30, 10});
        auto b = w.bridge(BridgeMode::Inbound, nullptr, {20, 20});
        const auto r = w.sched.run_until(sim::SimTime::from_seconds(40), sim::ClockMode::Virtual);
        return std::make_pair(r.trace_hash, r.events_executed);
    };
    CHECK(once() == once());
}

TEST_CASE("bridge: endpoint parsing")
{
    const auto ep = parse_endpoint("127.0.0.1:9000");
    CHECK(ep.host == "127.0.0.1");
    CHECK(ep.port == 9000);
    CHECK_THROWS_AS((void)parse_endpoint("localhost"), LinkError);
    CHECK_THROWS_AS((void)parse_endpoint("h:70000"), LinkError);
    CHECK_THROWS_AS((void)parse_endpoint("h:12x"), LinkError);
    CHECK_THROWS_AS((void)parse_bridge_mode("both"), std::invalid_argument);
}

TEST_CASE("bridge: UDP loopback in both directions")
{
    UdpDeviceLink device({"127.0.0.1", 0}, {"127.0.0.1", 9}); // stands in for the phone
    UdpDeviceLink sim_side({"127.0.0.1", 0}, {"127.0.0.1", device.local_port()});

    std::mutex m;
    std::condition_variable cv;
    std::vector<Datagram> at_device;
    std::vector<Datagram> at_sim;
    device.set_receiver([&](Datagram d) {
        std::lock_guard lk(m);
        at_device.push_back(std::move(d));
        cv.notify_all();
    });
    sim_side.set_receiver([&](Datagram d) {
        std::lock_guard lk(m);
        at_sim.push_back(std::move(d));
        cv.notify_all();
    });
    device.start();
    sim_side.start();

    const auto msg = device_beacon(691001.5, 5336002.25, 77);
    CHECK(sim_side.send(msg));
    {
        std::unique_lock lk(m);
        REQUIRE(cv.wait_for(lk, std::chrono::seconds(2), [&] { return !at_device.empty(); }));
        CHECK(at_device[0] == msg);
    }

    UdpDeviceLink reply({"127.0.0.1", 0}, {"127.0.0.1", sim_side.local_port()});
    CHECK(reply.send(msg));
    {
        std::unique_lock lk(m);
        REQUIRE(cv.wait_for(lk, std::chrono::seconds(2), [&] { return !at_sim.empty(); }));
        CHECK(at_sim[0] == msg);
    }
    device.stop();
    sim_side.stop();
}

TEST_CASE("json: message mirror field names")
{
    const geo::OffsetTransform xf(kOrigin);
    auto j = nlohmann::json::parse(to_json(BeaconMsg{7, 32, geo::Hemisphere::North, 691000.0, 5336000.0, 1000}, &xf));
    CHECK(j["type"] == "beacon");
    CHECK(j["nodeId"] == 7);
    CHECK(j["hemisphere"] == "N");
    CHECK(j["easting"] == 691000.0);
    CHECK(j["timestampMs"] == 1000);
    CHECK(j.contains("lat"));

    DensityMapMsg d{3, 3.0F, 32, geo::Hemisphere::North, {}};
    for (int i = 0; i < 61; ++i)
    {
        d.cells.push_back({i, -i, 1.0F, static_cast<std::uint32_t>(i)});
    }
    j = nlohmann::json::parse(to_json(d));
    CHECK(j["type"] == "map");
    CHECK(j["cellSize"] == 3.0);
    REQUIRE(j["cells"].size() == 61);
    CHECK(j["cells"][5]["x"] == 5);
    CHECK(j["cells"][5]["y"] == -5);
    CHECK(j["cells"][5]["ageMs"] == 5);

    j = nlohmann::json::parse(to_json(NodeLocationMsg{0, 48.1, 11.5, 123}));
    CHECK(j["type"] == "nodeLocation");
    CHECK(j["simTimeUs"] == 123);

    j = nlohmann::json::parse(lag_json({1.5, 1.25, 0.25}));
    CHECK(j["type"] == "lag");
    CHECK(j["offset"] == 0.25);
}

TEST_CASE("json: setPosition parsing and errors")
{
    std::string err;
    const auto p = parse_ui_message(R"({"type":"setPosition","lat":48.13,"lon":11.58})", &err);
    REQUIRE(p);
    CHECK(p->lat == 48.13);
    CHECK_FALSE(parse_ui_message("{nope", &err));
    CHECK(err == "not a JSON object");
    CHECK_FALSE(parse_ui_message(R"({"type":"zoom"})", &err));
    CHECK(err.find("unknown type") != std::string::npos);
    CHECK_FALSE(parse_ui_message(R"({"type":"setPosition","lat":"48"})", &err));
    CHECK_FALSE(parse_ui_message(R"({"type":"setPosition","lat":91,"lon":0})", &err));

    const geo::OffsetTransform xf(kOrigin);
    const auto g = xf.sim_to_wgs84({12.0, 7.0});
    const auto dg = beacon_for_position({g.lat, g.lon}, xf, 5);
    const auto b = std::get<BeaconMsg>(*decode(dg).message);
    const auto s = xf.utm_to_sim({b.zone, b.hemisphere, b.easting, b.northing});
    CHECK(s.x == doctest::Approx(12.0).epsilon(1e-9));
    CHECK(s.y == doctest::Approx(7.0).epsilon(1e-9));
    CHECK_THROWS_AS((void)beacon_for_position({48.0, -60.0}, xf, 0), geo::GeoError);
}

TEST_CASE("ws gateway: publish to a client and receive setPosition")
{
    namespace asio = boost::asio;
    namespace websocket = boost::beast::websocket;

    std::mutex m;
    std::condition_variable cv;
    std::vector<std::string> inbound;
    WsGateway gw("127.0.0.1", 0, [&](const std::string &text) {
        std::lock_guard lk(m);
        inbound.push_back(text);
        cv.notify_all();
    });
    REQUIRE(gw.port() != 0);
    gw.publish("dropped: nobody listening");

    asio::io_context io;
    asio::ip::tcp::socket sock(io);
    sock.connect({asio::ip::make_address("127.0.0.1"), gw.port()});
    websocket::stream<asio::ip::tcp::socket> ws(std::move(sock));
    ws.handshake("127.0.0.1", "/");

    for (int i = 0; i < 200 && gw.client_count() == 0; ++i)
    {
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    REQUIRE(gw.client_count() == 1);

    const auto text = to_json(NodeLocationMsg{0, 48.1, 11.5, 9});
    gw.publish(text);
    boost::beast::flat_buffer buf;
    ws.read(buf);
    CHECK(boost::beast::buffers_to_string(buf.data()) == text);

    ws.text(true);
    ws.write(asio::buffer(std::string(R"({"type":"setPosition","lat":48.0,"lon":11.0})")));
    {
        std::unique_lock lk(m);
        REQUIRE(cv.wait_for(lk, std::chrono::seconds(2), [&] { return !inbound.empty(); }));
        CHECK(parse_ui_message(inbound[0]).has_value());
    }

    ws.close(websocket::close_code::normal);
    for (int i = 0; i < 200 && gw.client_count() != 0; ++i)
    {
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    CHECK(gw.client_count() == 0);
    gw.publish("after disconnect");
    gw.stop();
}
