#include "pedemu/dpd/neighbor_table.hpp"

namespace pedemu::dpd
{
    bool NeighborTable::on_beacon(const Beacon &b, SimTime now)
    {
        if (b.node_id == own_)
        {
            return false;
        }
        auto it = entries_.find(b.node_id);
        if (it != entries_.end() && b.timestamp < it->second.timestamp)
        {
            return false;
        }
        entries_[b.node_id] = Neighbor{b.node_id, b.position, b.timestamp, now};
        return true;
    }

    void NeighborTable::expire(SimTime now)
    {
        std::erase_if(entries_, [&](const auto &kv) { return now - kv.second.last_heard > ttl_; });
    }

    std::vector<Neighbor> NeighborTable::live(SimTime now) const
    {
        std::vector<Neighbor> out;
        for (const auto &[id, n] : entries_)
        {
            if (now - n.last_heard <= ttl_)
            {
                out.push_back(n);
            }
        }
        return out;
    }

    DensityMap local_map(const NeighborTable &table, const geo::UtmPoint &own_position, double cell_size,
                         SimTime now)
    {
        DensityMap m;
        m.cell_size = cell_size;
        m.zone = static_cast<std::uint8_t>(own_position.zone);
        m.hemisphere = own_position.hemisphere;
        const auto bump = [&](const geo::UtmPoint &p) {
            auto &e = m.entries[cell_of(p.easting, p.northing, cell_size)];
            e.count += 1.0;
            e.last_update = now;
            e.source_id = table.own_id();
        };
        bump(own_position);
        for (const auto &n : table.live(now))
        {
            if (n.position.zone == own_position.zone && n.position.hemisphere == own_position.hemisphere)
            {
                bump(n.position);
            }
        }
        return m;
    }
} // namespace pedemu::dpd
