#pragma once

#include "pedemu/channel/broadcast.hpp"
#include "pedemu/dpd/neighbor_table.hpp"

#include <functional>
#include <optional>
#include <random>

namespace pedemu::apps
{
    using sim::NodeId;

    inline constexpr std::uint32_t kEventBeacon = 300;
    inline constexpr std::uint32_t kEventMap = 301;

    struct AppConfig
    {
        sim::Duration beacon_period{1'000'000};
        std::size_t beacon_payload = 224;
        sim::Duration map_period{2'000'000};
        std::size_t map_payload_max = 1000;
        bool start_jitter = true;
        double cell_size = dpd::kDefaultCellSize;
        sim::Duration neighbor_ttl = dpd::kDefaultNeighborTtl;
        sim::Duration map_ttl = dpd::kDefaultMapTtl;

        /// Throws std::invalid_argument.
        void validate() const;
        /// Cells that fit in map_payload_max (capped by the wire format).
        [[nodiscard]] std::size_t max_map_cells() const;
    };

    struct AppCounters
    {
        std::uint64_t beacons_sent = 0;
        std::uint64_t beacons_dropped = 0;
        std::uint64_t beacons_received = 0;
        std::uint64_t maps_sent = 0;
        std::uint64_t maps_dropped = 0;
        std::uint64_t maps_received = 0;
        std::uint64_t maps_rejected = 0;
        std::uint64_t undecodable = 0;
        std::uint64_t map_cells_truncated = 0;

        AppCounters &operator+=(const AppCounters &o);
    };

    /// BeaconApp and DensityMapApp of one simulated node, sharing its neighbor
    /// table and received-map accumulator.
    class NodeApps
    {
    public:
        using PositionFn = std::function<std::optional<geo::UtmPoint>()>;
        using SendObserver = std::function<void(NodeId, const bridge::WireMessage &)>;

        NodeApps(sim::Scheduler &sched, channel::BroadcastChannel &chan, NodeId id, AppConfig cfg,
                 PositionFn position);

        /// Attaches to the channel and schedules the first ticks; the start
        /// offsets are uniform in [0, period) when jitter is enabled.
        void start(std::mt19937_64 &jitter_rng);
        /// Detaches from the channel; pending ticks become no-ops.
        void stop();
        [[nodiscard]] bool running() const noexcept { return running_; }

        void on_packet(const channel::Reception &r);

        /// local_map merged with every map received and not yet expired.
        [[nodiscard]] dpd::DensityMap current_map(sim::SimTime now) const;

        [[nodiscard]] NodeId id() const noexcept { return id_; }
        [[nodiscard]] const dpd::NeighborTable &neighbors() const noexcept { return table_; }
        [[nodiscard]] const AppCounters &counters() const noexcept { return counters_; }
        [[nodiscard]] const AppConfig &config() const noexcept { return cfg_; }

        void on_send(SendObserver fn) { send_observers_.push_back(std::move(fn)); }
        /// Called with the full (untruncated) map at every map tick.
        void on_map_tick(std::function<void(NodeId, sim::SimTime, const dpd::DensityMap &)> fn)
        {
            map_observers_.push_back(std::move(fn));
        }

    private:
        void beacon_tick();
        void map_tick();

        sim::Scheduler &sched_;
        channel::BroadcastChannel &chan_;
        NodeId id_;
        AppConfig cfg_;
        PositionFn position_;
        dpd::NeighborTable table_;
        dpd::DensityMap received_;
        AppCounters counters_;
        bool running_ = false;
        std::vector<SendObserver> send_observers_;
        std::vector<std::function<void(NodeId, sim::SimTime, const dpd::DensityMap &)>> map_observers_;
    };
} // namespace pedemu::apps
