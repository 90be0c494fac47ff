#include "pedemu/dpd/density_map.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pedemu::dpd
{
    CellKey cell_of(double easting, double northing, double cell_size)
    {
        return {static_cast<std::int32_t>(std::floor(easting / cell_size)),
                static_cast<std::int32_t>(std::floor(northing / cell_size))};
    }

    std::pair<double, double> top_left(CellKey k, double cell_size)
    {
        return {static_cast<double>(k.x) * cell_size, static_cast<double>(k.y + 1) * cell_size};
    }

    CellKey from_top_left(double easting, double northing, double cell_size)
    {
        return {static_cast<std::int32_t>(std::lround(easting / cell_size)),
                static_cast<std::int32_t>(std::lround(northing / cell_size)) - 1};
    }

    bool wins(const CellEntry &a, const CellEntry &b)
    {
        if (a.last_update != b.last_update)
        {
            return a.last_update > b.last_update;
        }
        if (a.count != b.count)
        {
            return a.count > b.count;
        }
        return a.source_id < b.source_id;
    }

    void DensityMap::expire(SimTime now, sim::Duration ttl)
    {
        std::erase_if(entries, [&](const auto &kv) { return now - kv.second.last_update > ttl; });
    }

    double DensityMap::total_count() const
    {
        double sum = 0.0;
        for (const auto &[k, e] : entries)
        {
            sum += e.count;
        }
        return sum;
    }

    DensityMap merge(const DensityMap &own, const DensityMap &received, SimTime now, sim::Duration ttl)
    {
        if (own.cell_size != received.cell_size)
        {
            throw MapMismatch(fmt::format("cell size {} != {}", own.cell_size, received.cell_size));
        }
        if (own.zone != received.zone || own.hemisphere != received.hemisphere)
        {
            throw MapMismatch("maps come from different UTM zones");
        }
        DensityMap out = own;
        for (const auto &[k, e] : received.entries)
        {
            auto [it, inserted] = out.entries.emplace(k, e);
            if (!inserted && wins(e, it->second))
            {
                it->second = e;
            }
        }
        out.expire(now, ttl);
        return out;
    }

    EncodedMap encode_map(const DensityMap &m, NodeId sender, SimTime now, std::size_t max_cells)
    {
        std::vector<std::pair<CellKey, CellEntry>> cells(m.entries.begin(), m.entries.end());
        std::stable_sort(cells.begin(), cells.end(), [](const auto &a, const auto &b) {
            if (a.second.last_update != b.second.last_update)
            {
                return a.second.last_update > b.second.last_update;
            }
            return a.first < b.first;
        });
        EncodedMap out;
        max_cells = std::min(max_cells, bridge::kMaxMapCells);
        out.truncated = cells.size() > max_cells ? cells.size() - max_cells : 0;
        cells.resize(std::min(cells.size(), max_cells));

        auto &msg = out.message;
        msg.node_id = sender;
        msg.cell_size_m = static_cast<float>(m.cell_size);
        msg.zone = m.zone;
        msg.hemisphere = m.hemisphere;
        for (const auto &[k, e] : cells)
        {
            const auto age_us = std::max<std::int64_t>(0, (now - e.last_update).count());
            const auto age_ms = std::min<std::int64_t>((age_us + 500) / 1000, std::numeric_limits<std::uint32_t>::max());
            msg.cells.push_back({k.x, k.y, static_cast<float>(e.count), static_cast<std::uint32_t>(age_ms)});
        }
        return out;
    }

    DensityMap decode_map(const bridge::DensityMapMsg &msg, SimTime now)
    {
        DensityMap m;
        m.cell_size = static_cast<double>(msg.cell_size_m);
        m.zone = msg.zone;
        m.hemisphere = msg.hemisphere;
        for (const auto &c : msg.cells)
        {
            CellEntry e;
            e.count = std::isfinite(c.count) ? std::max(0.0, static_cast<double>(c.count)) : 0.0;
            const std::int64_t t = now.us() - static_cast<std::int64_t>(c.age_ms) * 1000;
            e.last_update = SimTime::from_us(std::max<std::int64_t>(0, t));
            e.source_id = msg.node_id;
            const CellKey k{c.cell_x, c.cell_y};
            auto [it, inserted] = m.entries.emplace(k, e);
            if (!inserted && wins(e, it->second))
            {
                it->second = e;
            }
        }
        return m;
    }
} // namespace pedemu::dpd
