#include "pedemu/apps/node_apps.hpp"

#include <stdexcept>

namespace pedemu::apps
{
    void AppConfig::validate() const
    {
        if (beacon_period.count() <= 0 || map_period.count() <= 0)
        {
            throw std::invalid_argument("app periods must be positive");
        }
        if (beacon_payload < bridge::kHeaderSize + bridge::kBeaconPayload)
        {
            throw std::invalid_argument("apps.beacon_payload is smaller than a beacon frame (39 B)");
        }
        if (map_payload_max < bridge::kHeaderSize + bridge::kMapHeader)
        {
            throw std::invalid_argument("apps.map_payload_max is smaller than an empty map frame (21 B)");
        }
        if (!(cell_size > 0.0))
        {
            throw std::invalid_argument("dpd.cell_size must be positive");
        }
        if (neighbor_ttl.count() <= 0 || map_ttl.count() <= 0)
        {
            throw std::invalid_argument("dpd TTLs must be positive");
        }
    }

    std::size_t AppConfig::max_map_cells() const
    {
        const std::size_t room = map_payload_max - bridge::kHeaderSize - bridge::kMapHeader;
        return std::min(room / bridge::kMapCellSize, bridge::kMaxMapCells);
    }

    AppCounters &AppCounters::operator+=(const AppCounters &o)
    {
        beacons_sent += o.beacons_sent;
        beacons_dropped += o.beacons_dropped;
        beacons_received += o.beacons_received;
        maps_sent += o.maps_sent;
        maps_dropped += o.maps_dropped;
        maps_received += o.maps_received;
        maps_rejected += o.maps_rejected;
        undecodable += o.undecodable;
        map_cells_truncated += o.map_cells_truncated;
        return *this;
    }

    NodeApps::NodeApps(sim::Scheduler &sched, channel::BroadcastChannel &chan, NodeId id, AppConfig cfg,
                       PositionFn position)
        : sched_(sched), chan_(chan), id_(id), cfg_(cfg), position_(std::move(position)),
          table_(id, cfg.neighbor_ttl)
    {
        cfg_.validate();
        received_.cell_size = cfg_.cell_size;
    }

    void NodeApps::start(std::mt19937_64 &jitter_rng)
    {
        running_ = true;
        chan_.attach(id_, [this](const channel::Reception &r) { on_packet(r); });
        sim::Duration beacon_offset{0}, map_offset{0};
        if (cfg_.start_jitter)
        {
            std::uniform_int_distribution<std::int64_t> jb(0, cfg_.beacon_period.count() - 1);
            std::uniform_int_distribution<std::int64_t> jm(0, cfg_.map_period.count() - 1);
            beacon_offset = sim::Duration(jb(jitter_rng));
            map_offset = sim::Duration(jm(jitter_rng));
        }
        sched_.schedule_in(beacon_offset, id_, kEventBeacon, [this] { beacon_tick(); });
        sched_.schedule_in(map_offset, id_, kEventMap, [this] { map_tick(); });
    }

    void NodeApps::stop()
    {
        running_ = false;
        chan_.detach(id_);
    }

    void NodeApps::beacon_tick()
    {
        if (!running_)
        {
            return;
        }
        sched_.schedule_in(cfg_.beacon_period, id_, kEventBeacon, [this] { beacon_tick(); });
        const auto pos = position_();
        if (!pos)
        {
            return;
        }
        const bridge::BeaconMsg msg{id_,
                                    static_cast<std::uint8_t>(pos->zone),
                                    pos->hemisphere,
                                    pos->easting,
                                    pos->northing,
                                    static_cast<std::uint64_t>(sched_.now().us() / 1000)};
        const auto r = chan_.broadcast(id_, bridge::pad_to(bridge::encode(msg), cfg_.beacon_payload));
        if (r == channel::SendResult::Queued)
        {
            ++counters_.beacons_sent;
        }
        else
        {
            ++counters_.beacons_dropped;
        }
        for (const auto &fn : send_observers_)
        {
            fn(id_, msg);
        }
    }

    dpd::DensityMap NodeApps::current_map(sim::SimTime now) const
    {
        const auto pos = position_();
        if (!pos)
        {
            auto m = received_;
            m.expire(now, cfg_.map_ttl);
            return m;
        }
        auto local = dpd::local_map(table_, *pos, cfg_.cell_size, now);
        if (received_.entries.empty() || received_.zone != local.zone ||
            received_.hemisphere != local.hemisphere)
        {
            return local;
        }
        return dpd::merge(local, received_, now, cfg_.map_ttl);
    }

    void NodeApps::map_tick()
    {
        if (!running_)
        {
            return;
        }
        sched_.schedule_in(cfg_.map_period, id_, kEventMap, [this] { map_tick(); });
        const auto now = sched_.now();
        table_.expire(now);
        received_.expire(now, cfg_.map_ttl);
        if (!position_())
        {
            return;
        }
        const auto map = current_map(now);
        for (const auto &fn : map_observers_)
        {
            fn(id_, now, map);
        }
        auto enc = dpd::encode_map(map, id_, now, cfg_.max_map_cells());
        counters_.map_cells_truncated += enc.truncated;
        const auto r = chan_.broadcast(id_, bridge::encode(enc.message));
        if (r == channel::SendResult::Queued)
        {
            ++counters_.maps_sent;
        }
        else
        {
            ++counters_.maps_dropped;
        }
        const bridge::WireMessage wm{std::move(enc.message)};
        for (const auto &fn : send_observers_)
        {
            fn(id_, wm);
        }
    }

    void NodeApps::on_packet(const channel::Reception &r)
    {
        const auto res = bridge::decode_padded(*r.payload);
        if (!res.ok())
        {
            ++counters_.undecodable;
            return;
        }
        const auto now = sched_.now();
        if (const auto *b = std::get_if<bridge::BeaconMsg>(&*res.message))
        {
            const dpd::Beacon beacon{b->node_id, geo::UtmPoint{b->zone, b->hemisphere, b->easting, b->northing},
                                     sim::SimTime::from_us(static_cast<std::int64_t>(b->timestamp_ms) * 1000)};
            ++counters_.beacons_received;
            (void)table_.on_beacon(beacon, now);
        }
        else if (const auto *m = std::get_if<bridge::DensityMapMsg>(&*res.message))
        {
            auto decoded = dpd::decode_map(*m, now);
            if (decoded.cell_size != cfg_.cell_size)
            {
                ++counters_.maps_rejected;
                return;
            }
            if (received_.entries.empty())
            {
                received_.zone = decoded.zone;
                received_.hemisphere = decoded.hemisphere;
            }
            try
            {
                received_ = dpd::merge(received_, decoded, now, cfg_.map_ttl);
                ++counters_.maps_received;
            }
            catch (const dpd::MapMismatch &)
            {
                ++counters_.maps_rejected;
            }
        }
        else
        {
            ++counters_.undecodable;
        }
    }
} // namespace pedemu::apps
