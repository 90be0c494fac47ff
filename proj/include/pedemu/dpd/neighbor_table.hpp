#pragma once

#include "pedemu/dpd/density_map.hpp"

#include <vector>

namespace pedemu::dpd
{
    inline constexpr sim::Duration kDefaultNeighborTtl{3'000'000};

    struct Beacon
    {
        NodeId node_id = 0;
        geo::UtmPoint position;
        SimTime timestamp;
    };

    struct Neighbor
    {
        NodeId id = 0;
        geo::UtmPoint position;
        SimTime timestamp;
        SimTime last_heard;
    };

    /// Latest beacon per neighbor. Entries older than the TTL are invisible to
    /// queries and removed by expire().
    class NeighborTable
    {
    public:
        explicit NeighborTable(NodeId own, sim::Duration ttl = kDefaultNeighborTtl) : own_(own), ttl_(ttl) {}

        /// Returns false for the node's own beacons and for stale ones.
        bool on_beacon(const Beacon &b, SimTime now);
        void expire(SimTime now);

        [[nodiscard]] std::vector<Neighbor> live(SimTime now) const;
        [[nodiscard]] std::size_t size(SimTime now) const { return live(now).size(); }
        [[nodiscard]] NodeId own_id() const noexcept { return own_; }
        [[nodiscard]] sim::Duration ttl() const noexcept { return ttl_; }

    private:
        NodeId own_;
        sim::Duration ttl_;
        std::map<NodeId, Neighbor> entries_;
    };

    /// Counts live neighbors per cell plus one for the observer's own cell.
    /// Every cell gets last_update = now and source = own id.
    DensityMap local_map(const NeighborTable &table, const geo::UtmPoint &own_position, double cell_size,
                         SimTime now);
} // namespace pedemu::dpd
