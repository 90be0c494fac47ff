#pragma once

#include "pedemu/mobility/navigation_field.hpp"
#include "pedemu/sim/scheduler.hpp"

#include <array>
#include <random>
#include <span>
#include <vector>

namespace pedemu::mobility
{
    struct OsmParams
    {
        double ped_radius = 0.195;
        double intimate_width = 0.45;
        double personal_width = 1.2;
        double ped_height = 50.0;
        double obstacle_width = 0.8;
        double obstacle_height = 6.0;
        double intimate_factor = 1.2;
        double personal_power = 1.0;
        double intimate_power = 1.0;

        /// Throws std::invalid_argument on non-positive widths/heights or powers below 1.
        void validate() const;
        /// Center distance beyond which another pedestrian contributes nothing.
        [[nodiscard]] double agent_cutoff() const;
    };

    enum class PedState
    {
        Moving,
        Arrived,
    };

    struct Pedestrian
    {
        sim::NodeId id = 0;
        SimPoint position;
        double free_speed = 1.34;
        PedState state = PedState::Moving;
        std::size_t target = 0;
        sim::SimTime spawned_at;
        sim::SimTime arrived_at;
        double path_length = 0.0;
        std::uint64_t steps = 0;
    };

    /// Stride length in meters for a walking speed in m/s.
    double step_length(double speed);

    /// Potential of one other pedestrian whose center is center_distance away.
    double agent_potential(double center_distance, const OsmParams &p);
    /// Potential at boundary_distance outside an obstacle.
    double obstacle_potential(double boundary_distance, const OsmParams &p);
    /// Sum over all obstacles; +infinity inside any of them.
    double obstacle_term(SimPoint x, const Scenario &s, const OsmParams &p);

    /// field(x) + agent terms + obstacle terms, summed in the order given.
    double total_potential(SimPoint x, std::span<const SimPoint> others, const NavigationField &field,
                           const Scenario &s, const OsmParams &p);

    inline constexpr std::size_t kCandidateCount = 25;

    /// Index 0 is the center, 1..16 lie on the circle of the given radius and
    /// 17..24 on the half-radius circle, all rotated by `rotation` radians.
    std::array<SimPoint, kCandidateCount> candidate_points(SimPoint center, double radius, double rotation);

    struct StepResult
    {
        SimPoint position;
        double duration = 0.0; // seconds
        std::size_t candidate = 0;
        double rotation = 0.0;
        double potential = 0.0;
    };

    /// One optimal step. Neighbors are sorted before evaluation so the result
    /// does not depend on their order; ties go to the smallest candidate index.
    StepResult next_step(const Pedestrian &ped, std::vector<SimPoint> neighbors, const NavigationField &field,
                         const Scenario &s, const OsmParams &p, std::mt19937_64 &rng);
} // namespace pedemu::mobility
