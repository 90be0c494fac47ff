#pragma once

#include "pedemu/bridge/wire.hpp"
#include "pedemu/geo/utm.hpp"
#include "pedemu/sim/scheduler.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>

namespace pedemu::dpd
{
    using sim::NodeId;
    using sim::SimTime;

    inline constexpr double kDefaultCellSize = 3.0;
    inline constexpr sim::Duration kDefaultMapTtl{10'000'000};

    class MapMismatch : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    /// cell_x = floor(easting / size), cell_y = floor(northing / size).
    struct CellKey
    {
        std::int32_t x = 0;
        std::int32_t y = 0;

        auto operator<=>(const CellKey &) const = default;
    };

    CellKey cell_of(double easting, double northing, double cell_size);
    /// UTM (easting, northing) of the cell's top-left corner.
    std::pair<double, double> top_left(CellKey k, double cell_size);
    CellKey from_top_left(double easting, double northing, double cell_size);

    struct CellEntry
    {
        double count = 0.0;
        SimTime last_update;
        NodeId source_id = 0;

        bool operator==(const CellEntry &) const = default;
    };

    /// True when a should replace b: younger, then larger count, then smaller source.
    bool wins(const CellEntry &a, const CellEntry &b);

    struct DensityMap
    {
        double cell_size = kDefaultCellSize;
        std::uint8_t zone = 32;
        geo::Hemisphere hemisphere = geo::Hemisphere::North;
        std::map<CellKey, CellEntry> entries;

        /// Drops entries whose age now - last_update exceeds ttl.
        void expire(SimTime now, sim::Duration ttl);
        [[nodiscard]] double total_count() const;

        bool operator==(const DensityMap &) const = default;
    };

    /// Per-cell youngest-wins union, then expiry against ttl. Throws MapMismatch
    /// on different cell sizes or UTM zones.
    DensityMap merge(const DensityMap &own, const DensityMap &received, SimTime now,
                     sim::Duration ttl = kDefaultMapTtl);

    struct EncodedMap
    {
        bridge::DensityMapMsg message;
        std::size_t truncated = 0; // cells left out to respect the frame capacity
    };

    /// Selects up to max_cells cells by last_update descending, then (x, y) ascending.
    EncodedMap encode_map(const DensityMap &m, NodeId sender, SimTime now,
                          std::size_t max_cells = bridge::kMaxMapCells);

    /// Rebuilds a map from a received frame: last_update = now - age, source = sender.
    DensityMap decode_map(const bridge::DensityMapMsg &msg, SimTime now);
} // namespace pedemu::dpd
