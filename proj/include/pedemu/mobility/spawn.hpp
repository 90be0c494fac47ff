#pragma once

#include "pedemu/mobility/osm.hpp"

#include <optional>
#include <random>

namespace pedemu::mobility
{
    inline constexpr double kSpeedMean = 1.34;
    inline constexpr double kSpeedStdDev = 0.26;
    inline constexpr double kSpeedFloor = 0.3;

    /// Normal(1.34, 0.26), redrawn while below 0.3 m/s.
    double draw_free_speed(std::mt19937_64 &rng);

    /// Uniform point inside the polygon (rejection sampling on its bounding box).
    SimPoint draw_point_in(const Polygon &region, std::mt19937_64 &rng);

    struct SpawnProcess
    {
        sim::Duration inter_arrival{60'000'000};
        std::size_t max_peds = 1;
        sim::NodeId first_id = 1;

        std::size_t spawned = 0;
        sim::SimTime next_due; // first spawn at t = 0

        [[nodiscard]] bool exhausted() const noexcept { return spawned >= max_peds; }
    };

    /// Emits the next pedestrian when `now` has reached next_due and the
    /// budget is not exhausted; advances next_due by inter_arrival.
    std::optional<Pedestrian> spawn_tick(SpawnProcess &proc, sim::SimTime now, const Source &source,
                                         std::mt19937_64 &rng);
} // namespace pedemu::mobility
