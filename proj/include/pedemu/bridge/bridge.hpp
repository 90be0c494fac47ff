#pragma once

#include "pedemu/bridge/device_link.hpp"
#include "pedemu/bridge/wire.hpp"
#include "pedemu/channel/broadcast.hpp"
#include "pedemu/geo/offset.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <string>
#include <vector>

namespace pedemu::bridge
{
    using sim::NodeId;

    inline constexpr NodeId kPlaceholderNode = 0;
    inline constexpr std::uint32_t kEventInbound = 400;
    inline constexpr std::uint32_t kEventLiveness = 401;

    enum class BridgeMode
    {
        Export,  // node[0] walks in the simulation; its position is sent to the device
        Inbound, // the device's reported position drives node[0]
    };

    /// Accepts "export" or "inbound"; throws std::invalid_argument.
    BridgeMode parse_bridge_mode(const std::string &s);
    const char *to_string(BridgeMode m);

    struct BridgeCounters
    {
        std::uint64_t frames_forwarded = 0;
        std::uint64_t beacons_forwarded = 0;
        std::uint64_t maps_forwarded = 0;
        std::uint64_t locations_sent = 0;
        std::uint64_t send_failures = 0;
        std::uint64_t inbound_beacons = 0;
        std::uint64_t inbound_rejected = 0;
        std::uint64_t inbound_ignored = 0;
        std::uint64_t clamped = 0;
        std::uint64_t liveness_timeouts = 0;
    };

    struct BridgeSettings
    {
        BridgeMode mode = BridgeMode::Inbound;
        double width = 0.0;  // scenario bounds for clamping
        double height = 0.0;
        geo::SimPoint initial_position;
        std::size_t beacon_payload = 224;
        std::chrono::milliseconds liveness_timeout{5000};
    };

    /// Couples the placeholder node[0] to an external device.
    ///
    /// Outbound: every frame node[0] receives over the simulated channel is
    /// re-encoded and sent to the device. Export mode: each completed step of
    /// node[0] is sent as NODE_LOCATION. Inbound mode: device beacons move
    /// node[0] and are re-broadcast on the simulated channel as node[0]'s beacon.
    /// Without a link, node[0] is a stationary node that never transmits.
    class Bridge
    {
    public:
        Bridge(sim::Scheduler &sched, channel::BroadcastChannel &chan, geo::OffsetTransform xf,
               BridgeSettings settings, DeviceLink *link);
        ~Bridge();
        Bridge(const Bridge &) = delete;
        Bridge &operator=(const Bridge &) = delete;

        void start();
        void stop();

        [[nodiscard]] BridgeMode mode() const noexcept { return settings_.mode; }
        [[nodiscard]] bool has_session() const noexcept { return link_ != nullptr; }
        [[nodiscard]] const geo::OffsetTransform &transform() const noexcept { return xf_; }

        /// node[0]'s position when the bridge owns it (inbound mode or no session).
        [[nodiscard]] geo::SimPoint node0_position() const noexcept { return node0_; }

        /// Export mode: called by the runner whenever node[0] completes a step.
        void export_location(geo::SimPoint p);

        /// Thread-safe: queues a datagram as if it came from the device.
        void inject_device_datagram(Datagram d);

        /// Wall-clock liveness of the device (inbound traffic within the timeout).
        [[nodiscard]] bool device_alive() const;

        [[nodiscard]] const BridgeCounters &counters() const noexcept { return counters_; }
        [[nodiscard]] const std::vector<std::pair<sim::SimTime, geo::SimPoint>> &node0_trace() const noexcept
        {
            return trace_;
        }

        /// Every message sent to the device (event-loop thread).
        void on_device_message(std::function<void(const WireMessage &)> fn) { out_observers_.push_back(std::move(fn)); }
        /// node[0] moved by inbound traffic (event-loop thread).
        void on_node0_moved(std::function<void(geo::SimPoint)> fn) { move_observers_.push_back(std::move(fn)); }

    private:
        void on_reception(const channel::Reception &r);
        void handle_device_datagram(const Datagram &d);
        void send_to_device(const WireMessage &m);
        void liveness_tick();

        sim::Scheduler &sched_;
        channel::BroadcastChannel &chan_;
        geo::OffsetTransform xf_;
        BridgeSettings settings_;
        DeviceLink *link_;
        geo::SimPoint node0_;
        BridgeCounters counters_;
        std::vector<std::pair<sim::SimTime, geo::SimPoint>> trace_;
        std::atomic<std::int64_t> last_seen_ns_{0};
        bool was_alive_ = false;
        bool started_ = false;
        std::vector<std::function<void(const WireMessage &)>> out_observers_;
        std::vector<std::function<void(geo::SimPoint)>> move_observers_;
    };
} // namespace pedemu::bridge
