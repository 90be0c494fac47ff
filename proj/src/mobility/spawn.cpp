#include "pedemu/mobility/spawn.hpp"

namespace pedemu::mobility
{
    double draw_free_speed(std::mt19937_64 &rng)
    {
        std::normal_distribution<double> speed(kSpeedMean, kSpeedStdDev);
        for (;;)
        {
            const double v = speed(rng);
            if (v >= kSpeedFloor)
            {
                return v;
            }
        }
    }

    SimPoint draw_point_in(const Polygon &region, std::mt19937_64 &rng)
    {
        const auto box = bounding_box(region);
        std::uniform_real_distribution<double> ux(box.min.x, box.max.x);
        std::uniform_real_distribution<double> uy(box.min.y, box.max.y);
        for (int attempt = 0; attempt < 10000; ++attempt)
        {
            const SimPoint p{ux(rng), uy(rng)};
            if (contains(region, p))
            {
                return p;
            }
        }
        return centroid(region);
    }

    std::optional<Pedestrian> spawn_tick(SpawnProcess &proc, sim::SimTime now, const Source &source,
                                         std::mt19937_64 &rng)
    {
        if (proc.exhausted() || now < proc.next_due)
        {
            return std::nullopt;
        }
        Pedestrian ped;
        ped.id = proc.first_id + static_cast<sim::NodeId>(proc.spawned);
        ped.free_speed = draw_free_speed(rng);
        ped.position = draw_point_in(source.region, rng);
        ped.target = source.target;
        ped.spawned_at = now;
        ++proc.spawned;
        proc.next_due = proc.next_due + proc.inter_arrival;
        return ped;
    }
} // namespace pedemu::mobility
