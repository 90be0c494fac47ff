#include "pedemu/channel/broadcast.hpp"

#include <algorithm>
#include <cmath>

namespace pedemu::channel
{
    BroadcastChannel::BroadcastChannel(sim::Scheduler &sched, RadioConfig cfg, Locator locate)
        : sched_(sched), cfg_(std::move(cfg)), locate_(std::move(locate))
    {
        cfg_.validate();
    }

    void BroadcastChannel::attach(NodeId node, Handler on_receive)
    {
        receivers_[node] = std::move(on_receive);
    }

    void BroadcastChannel::detach(NodeId node)
    {
        receivers_.erase(node);
    }

    SendResult BroadcastChannel::broadcast(NodeId src, std::vector<std::uint8_t> payload)
    {
        auto &s = senders_[src];
        const std::size_t bytes = payload.size();
        ++s.stats.packets_offered;
        s.stats.bytes_offered += bytes;

        std::vector<NodeId> audience;
        for (const auto &[id, h] : receivers_)
        {
            if (id != src)
            {
                audience.push_back(id);
                links_[{src, id}].bytes_sent += bytes;
            }
        }

        const auto drop = [&](SendResult why) {
            for (auto id : audience)
            {
                links_[{src, id}].bytes_dropped_queue += bytes;
            }
            ++(why == SendResult::DroppedRlc ? s.stats.dropped_rlc : s.stats.dropped_mac);
            return why;
        };
        if (s.stats.rlc_bytes + bytes > cfg_.rlc_queue_bytes)
        {
            return drop(SendResult::DroppedRlc);
        }
        if (s.stats.mac_bytes + bytes > cfg_.mac_queue_bytes)
        {
            return drop(SendResult::DroppedMac);
        }

        for (auto id : audience)
        {
            links_[{src, id}].bytes_in_flight += bytes;
        }
        s.stats.rlc_bytes += bytes;
        s.stats.mac_bytes += bytes;
        s.stats.max_rlc_bytes = std::max(s.stats.max_rlc_bytes, s.stats.rlc_bytes);
        s.stats.max_mac_bytes = std::max(s.stats.max_mac_bytes, s.stats.mac_bytes);
        s.queue.push_back({std::make_shared<const std::vector<std::uint8_t>>(std::move(payload)), std::move(audience)});
        if (!s.busy)
        {
            start_next(src);
        }
        return SendResult::Queued;
    }

    void BroadcastChannel::start_next(NodeId src)
    {
        auto &s = senders_.at(src);
        if (s.queue.empty())
        {
            s.busy = false;
            return;
        }
        s.busy = true;
        Pending p = std::move(s.queue.front());
        s.queue.pop_front();
        s.stats.mac_bytes -= p.payload->size();

        Transmission tx;
        tx.id = next_tx_id_++;
        tx.src = src;
        tx.bytes = p.payload->size();
        tx.t_start = sched_.now();
        tx.airtime = airtime(cfg_, tx.bytes);
        tx.payload = p.payload;
        const auto src_pos = locate_(src);
        tx.src_position = src_pos.value_or(SimPoint{});
        ++s.stats.packets_transmitted;
        for (const auto &fn : tx_observers_)
        {
            fn(tx);
        }

        for (auto rx : p.audience)
        {
            auto &link = links_[{src, rx}];
            const auto rx_pos = receivers_.count(rx) ? locate_(rx) : std::nullopt;
            if (!rx_pos)
            {
                link.bytes_in_flight -= tx.bytes;
                link.bytes_dropped_detached += tx.bytes;
                continue;
            }
            if (!src_pos || !can_receive(cfg_, *src_pos, *rx_pos))
            {
                link.bytes_in_flight -= tx.bytes;
                link.bytes_dropped_range += tx.bytes;
                continue;
            }
            Reception r;
            r.src = src;
            r.rx = rx;
            r.tx_id = tx.id;
            r.t_start = tx.t_start;
            r.distance_m = std::hypot(src_pos->x - rx_pos->x, src_pos->y - rx_pos->y);
            r.rx_power_dbm = rx_power_dbm(cfg_, r.distance_m);
            r.payload = tx.payload;
            sched_.schedule_in(tx.airtime, rx, kEventDelivery, [this, r] {
                auto &l = links_[{r.src, r.rx}];
                l.bytes_in_flight -= r.payload->size();
                const auto it = receivers_.find(r.rx);
                if (it == receivers_.end())
                {
                    l.bytes_dropped_detached += r.payload->size();
                    return;
                }
                l.bytes_delivered += r.payload->size();
                it->second(r);
            });
        }
        const auto bytes = tx.bytes;
        sched_.schedule_in(tx.airtime, src, kEventTxDone, [this, src, bytes] { finish(src, bytes); });
    }

    void BroadcastChannel::finish(NodeId src, std::size_t bytes)
    {
        auto &s = senders_.at(src);
        s.stats.rlc_bytes -= bytes;
        start_next(src);
    }

    SenderStats BroadcastChannel::sender_stats(NodeId src) const
    {
        const auto it = senders_.find(src);
        return it == senders_.end() ? SenderStats{} : it->second.stats;
    }

    LinkStats BroadcastChannel::link_stats(NodeId src, NodeId rx) const
    {
        const auto it = links_.find({src, rx});
        return it == links_.end() ? LinkStats{} : it->second;
    }
} // namespace pedemu::channel
