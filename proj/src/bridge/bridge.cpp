#include "pedemu/bridge/bridge.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pedemu::bridge
{
    namespace
    {
        std::int64_t steady_ns()
        {
            return std::chrono::duration_cast<std::chrono::nanoseconds>(
                       std::chrono::steady_clock::now().time_since_epoch())
                .count();
        }
    } // namespace

    BridgeMode parse_bridge_mode(const std::string &s)
    {
        if (s == "export")
        {
            return BridgeMode::Export;
        }
        if (s == "inbound")
        {
            return BridgeMode::Inbound;
        }
        throw std::invalid_argument("bridge.mode must be 'export' or 'inbound', got '" + s + "'");
    }

    const char *to_string(BridgeMode m)
    {
        return m == BridgeMode::Export ? "export" : "inbound";
    }

    Bridge::Bridge(sim::Scheduler &sched, channel::BroadcastChannel &chan, geo::OffsetTransform xf,
                   BridgeSettings settings, DeviceLink *link)
        : sched_(sched), chan_(chan), xf_(xf), settings_(settings), link_(link), node0_(settings.initial_position)
    {
    }

    Bridge::~Bridge()
    {
        stop();
    }

    void Bridge::start()
    {
        started_ = true;
        chan_.attach(kPlaceholderNode, [this](const channel::Reception &r) { on_reception(r); });
        if (link_ == nullptr)
        {
            return;
        }
        link_->set_receiver([this](Datagram d) { inject_device_datagram(std::move(d)); });
        link_->start();
        if (settings_.mode == BridgeMode::Inbound)
        {
            sched_.schedule_in(sim::Duration(1'000'000), kPlaceholderNode, kEventLiveness, [this] { liveness_tick(); });
        }
    }

    void Bridge::stop()
    {
        if (!started_)
        {
            return;
        }
        started_ = false;
        if (link_ != nullptr)
        {
            link_->set_receiver(nullptr);
            link_->stop();
        }
    }

    void Bridge::send_to_device(const WireMessage &m)
    {
        if (!link_->send(encode(m)))
        {
            ++counters_.send_failures;
        }
        for (const auto &fn : out_observers_)
        {
            fn(m);
        }
    }

    void Bridge::on_reception(const channel::Reception &r)
    {
        if (link_ == nullptr)
        {
            return;
        }
        const auto res = decode_padded(*r.payload);
        if (!res.ok())
        {
            return;
        }
        ++counters_.frames_forwarded;
        if (std::holds_alternative<BeaconMsg>(*res.message))
        {
            ++counters_.beacons_forwarded;
        }
        else if (std::holds_alternative<DensityMapMsg>(*res.message))
        {
            ++counters_.maps_forwarded;
        }
        send_to_device(*res.message);
    }

    void Bridge::export_location(geo::SimPoint p)
    {
        if (link_ == nullptr || settings_.mode != BridgeMode::Export)
        {
            return;
        }
        const auto g = xf_.sim_to_wgs84(p);
        ++counters_.locations_sent;
        send_to_device(NodeLocationMsg{kPlaceholderNode, g.lat, g.lon, static_cast<std::uint64_t>(sched_.now().us())});
    }

    void Bridge::inject_device_datagram(Datagram d)
    {
        last_seen_ns_.store(steady_ns());
        sched_.post(kPlaceholderNode, kEventInbound, [this, d = std::move(d)] { handle_device_datagram(d); });
    }

    bool Bridge::device_alive() const
    {
        const auto seen = last_seen_ns_.load();
        return seen != 0 &&
               steady_ns() - seen < std::chrono::duration_cast<std::chrono::nanoseconds>(settings_.liveness_timeout).count();
    }

    void Bridge::liveness_tick()
    {
        if (!started_)
        {
            return;
        }
        const bool alive = device_alive();
        if (was_alive_ && !alive)
        {
            ++counters_.liveness_timeouts;
            spdlog::warn("bridge: no datagram from the device for {} ms; node[0] stays at ({:.2f}, {:.2f})",
                         settings_.liveness_timeout.count(), node0_.x, node0_.y);
        }
        was_alive_ = alive;
        sched_.schedule_in(sim::Duration(1'000'000), kPlaceholderNode, kEventLiveness, [this] { liveness_tick(); });
    }

    void Bridge::handle_device_datagram(const Datagram &d)
    {
        if (settings_.mode != BridgeMode::Inbound)
        {
            ++counters_.inbound_ignored;
            return;
        }
        const auto res = decode(d);
        const auto *b = res.ok() ? std::get_if<BeaconMsg>(&*res.message) : nullptr;
        if (b == nullptr)
        {
            ++counters_.inbound_rejected;
            return;
        }
        geo::SimPoint p;
        try
        {
            p = xf_.utm_to_sim(geo::UtmPoint{b->zone, b->hemisphere, b->easting, b->northing});
        }
        catch (const std::exception &e)
        {
            ++counters_.inbound_rejected;
            spdlog::warn("bridge: device beacon rejected: {}", e.what());
            return;
        }
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
        {
            ++counters_.inbound_rejected;
            return;
        }
        const geo::SimPoint clamped{std::clamp(p.x, 0.0, settings_.width), std::clamp(p.y, 0.0, settings_.height)};
        if (clamped.x != p.x || clamped.y != p.y)
        {
            if (counters_.clamped++ == 0)
            {
                spdlog::warn("bridge: device position ({:.2f}, {:.2f}) outside the scenario; clamped to ({:.2f}, {:.2f})",
                             p.x, p.y, clamped.x, clamped.y);
            }
        }
        ++counters_.inbound_beacons;
        node0_ = clamped;
        trace_.emplace_back(sched_.now(), clamped);
        for (const auto &fn : move_observers_)
        {
            fn(clamped);
        }

        const auto utm = xf_.sim_to_utm(clamped);
        const BeaconMsg sim_beacon{kPlaceholderNode,
                                   static_cast<std::uint8_t>(utm.zone),
                                   utm.hemisphere,
                                   utm.easting,
                                   utm.northing,
                                   static_cast<std::uint64_t>(sched_.now().us() / 1000)};
        (void)chan_.broadcast(kPlaceholderNode, pad_to(encode(sim_beacon), settings_.beacon_payload));
    }
} // namespace pedemu::bridge
