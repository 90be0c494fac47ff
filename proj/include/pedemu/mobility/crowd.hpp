#pragma once

#include "pedemu/mobility/spawn.hpp"

#include <functional>
#include <map>
#include <optional>

namespace pedemu::mobility
{
    inline constexpr std::uint32_t kEventSpawn = 100;
    inline constexpr std::uint32_t kEventStep = 101;

    struct CrowdConfig
    {
        OsmParams params;
        std::size_t max_peds = 1;
        sim::Duration inter_arrival{60'000'000};
        sim::NodeId first_id = 1;
        double field_resolution = kDefaultFieldResolution;
    };

    /// Event-driven OSM crowd: each pedestrian owns its next-step event.
    /// A step completes at its event time; the next one is scheduled one step
    /// duration later. Pedestrians entering their target are marked arrived
    /// and stop stepping.
    class Crowd
    {
    public:
        using StepObserver = std::function<void(const Pedestrian &, SimPoint from)>;
        using PedObserver = std::function<void(const Pedestrian &)>;

        Crowd(sim::Scheduler &sched, Scenario scenario, CrowdConfig config, std::mt19937_64 step_rng,
              std::mt19937_64 spawn_rng);

        /// Schedules the spawn process starting at the current simulation time.
        void start();

        /// Adds a pedestrian outside the spawn budget (e.g. a device placeholder);
        /// its first step completes one step duration from now.
        const Pedestrian &add_pedestrian(sim::NodeId id, SimPoint position, double free_speed);

        /// Externally positioned agents that others avoid but which do not step.
        void set_external_agent(sim::NodeId id, SimPoint position);
        void remove_external_agent(sim::NodeId id);

        void on_spawn(PedObserver fn) { spawn_observers_.push_back(std::move(fn)); }
        void on_step(StepObserver fn) { step_observers_.push_back(std::move(fn)); }
        void on_arrive(PedObserver fn) { arrive_observers_.push_back(std::move(fn)); }

        [[nodiscard]] const Scenario &scenario() const noexcept { return scenario_; }
        [[nodiscard]] const NavigationField &field(std::size_t target) const { return fields_.at(target); }
        [[nodiscard]] const OsmParams &params() const noexcept { return config_.params; }

        /// Every pedestrian ever created, including arrived ones.
        [[nodiscard]] const std::map<sim::NodeId, Pedestrian> &pedestrians() const noexcept { return peds_; }
        [[nodiscard]] const Pedestrian *find(sim::NodeId id) const;
        [[nodiscard]] std::size_t active_count() const;
        [[nodiscard]] std::uint64_t total_steps() const noexcept { return total_steps_; }

    private:
        void spawn_event();
        void step_event(sim::NodeId id);
        void schedule_step(const Pedestrian &ped);
        [[nodiscard]] std::vector<SimPoint> neighbors_of(const Pedestrian &ped) const;

        sim::Scheduler &sched_;
        Scenario scenario_;
        CrowdConfig config_;
        std::vector<NavigationField> fields_;
        std::mt19937_64 step_rng_;
        std::mt19937_64 spawn_rng_;
        SpawnProcess spawn_;
        std::map<sim::NodeId, Pedestrian> peds_;
        std::map<sim::NodeId, SimPoint> external_;
        std::uint64_t total_steps_ = 0;

        std::vector<PedObserver> spawn_observers_;
        std::vector<StepObserver> step_observers_;
        std::vector<PedObserver> arrive_observers_;
    };
} // namespace pedemu::mobility
