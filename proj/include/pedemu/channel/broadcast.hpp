#pragma once

#include "pedemu/channel/radio.hpp"
#include "pedemu/sim/scheduler.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace pedemu::channel
{
    using sim::NodeId;
    using Payload = std::shared_ptr<const std::vector<std::uint8_t>>;

    inline constexpr std::uint32_t kEventDelivery = 200;
    inline constexpr std::uint32_t kEventTxDone = 201;

    struct Transmission
    {
        std::uint64_t id = 0;
        NodeId src = 0;
        SimPoint src_position;
        std::size_t bytes = 0;
        sim::SimTime t_start;
        sim::Duration airtime{0};
        Payload payload;
    };

    struct Reception
    {
        NodeId src = 0;
        NodeId rx = 0;
        std::uint64_t tx_id = 0;
        sim::SimTime t_start;
        double distance_m = 0.0;
        double rx_power_dbm = 0.0;
        Payload payload;
    };

    enum class SendResult
    {
        Queued,
        DroppedRlc,
        DroppedMac,
    };

    struct SenderStats
    {
        std::uint64_t packets_offered = 0;
        std::uint64_t bytes_offered = 0;
        std::uint64_t packets_transmitted = 0;
        std::uint64_t dropped_rlc = 0;
        std::uint64_t dropped_mac = 0;
        std::size_t rlc_bytes = 0;     // accepted, transmission not finished
        std::size_t mac_bytes = 0;     // accepted, waiting for the air
        std::size_t max_rlc_bytes = 0;
        std::size_t max_mac_bytes = 0;
    };

    /// Byte accounting for one (sender, receiver) pair. Only receivers attached
    /// when a packet is offered take part in that packet's accounting.
    struct LinkStats
    {
        std::uint64_t bytes_sent = 0;
        std::uint64_t bytes_delivered = 0;
        std::uint64_t bytes_dropped_queue = 0;
        std::uint64_t bytes_dropped_range = 0;
        std::uint64_t bytes_dropped_detached = 0;
        std::uint64_t bytes_in_flight = 0;

        [[nodiscard]] std::uint64_t bytes_dropped() const
        {
            return bytes_dropped_queue + bytes_dropped_range + bytes_dropped_detached;
        }
        [[nodiscard]] bool conserved() const { return bytes_sent == bytes_delivered + bytes_dropped() + bytes_in_flight; }
    };

    /// Shared broadcast medium. Each sender owns a serialized transmit queue
    /// (RLC stage, then MAC drop-tail); transmissions of different senders may
    /// overlap and do not interfere. Receivers in range at the start of a
    /// transmission get it when the airtime ends.
    class BroadcastChannel
    {
    public:
        using Locator = std::function<std::optional<SimPoint>(NodeId)>;
        using Handler = std::function<void(const Reception &)>;

        BroadcastChannel(sim::Scheduler &sched, RadioConfig cfg, Locator locate);

        void attach(NodeId node, Handler on_receive);
        void detach(NodeId node);
        [[nodiscard]] bool attached(NodeId node) const { return receivers_.count(node) != 0; }

        SendResult broadcast(NodeId src, std::vector<std::uint8_t> payload);

        void on_transmit(std::function<void(const Transmission &)> fn) { tx_observers_.push_back(std::move(fn)); }

        [[nodiscard]] const RadioConfig &config() const noexcept { return cfg_; }
        [[nodiscard]] SenderStats sender_stats(NodeId src) const;
        [[nodiscard]] LinkStats link_stats(NodeId src, NodeId rx) const;
        [[nodiscard]] const std::map<std::pair<NodeId, NodeId>, LinkStats> &links() const noexcept { return links_; }

    private:
        struct Pending
        {
            Payload payload;
            std::vector<NodeId> audience;
        };

        struct Sender
        {
            SenderStats stats;
            std::deque<Pending> queue;
            bool busy = false;
        };

        void start_next(NodeId src);
        void finish(NodeId src, std::size_t bytes);

        sim::Scheduler &sched_;
        RadioConfig cfg_;
        Locator locate_;
        std::map<NodeId, Handler> receivers_;
        std::map<NodeId, Sender> senders_;
        std::map<std::pair<NodeId, NodeId>, LinkStats> links_;
        std::uint64_t next_tx_id_ = 1;
        std::vector<std::function<void(const Transmission &)>> tx_observers_;
    };
} // namespace pedemu::channel
