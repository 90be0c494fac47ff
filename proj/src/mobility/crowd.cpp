#include "pedemu/mobility/crowd.hpp"

#include <fmt/format.h>

#include <stdexcept>

namespace pedemu::mobility
{
    Crowd::Crowd(sim::Scheduler &sched, Scenario scenario, CrowdConfig config, std::mt19937_64 step_rng,
                 std::mt19937_64 spawn_rng)
        : sched_(sched), scenario_(std::move(scenario)), config_(config), step_rng_(step_rng),
          spawn_rng_(spawn_rng)
    {
        validate(scenario_);
        config_.params.validate();
        fields_.reserve(scenario_.targets.size());
        for (std::size_t t = 0; t < scenario_.targets.size(); ++t)
        {
            fields_.push_back(build_navigation_field(scenario_, t, config_.field_resolution));
        }
        spawn_.inter_arrival = config_.inter_arrival;
        spawn_.max_peds = config_.max_peds;
        spawn_.first_id = config_.first_id;
    }

    void Crowd::start()
    {
        spawn_.next_due = sched_.now();
        if (!spawn_.exhausted())
        {
            sched_.schedule_at(spawn_.next_due, 0, kEventSpawn, [this] { spawn_event(); });
        }
    }

    const Pedestrian &Crowd::add_pedestrian(sim::NodeId id, SimPoint position, double free_speed)
    {
        if (peds_.count(id) != 0)
        {
            throw std::invalid_argument(fmt::format("pedestrian {} already exists", id));
        }
        if (!scenario_.in_bounds(position) || scenario_.inside_obstacle(position))
        {
            throw std::invalid_argument(fmt::format("pedestrian {} placed outside the walkable area", id));
        }
        Pedestrian ped;
        ped.id = id;
        ped.position = position;
        ped.free_speed = free_speed;
        ped.target = scenario_.source.target;
        ped.spawned_at = sched_.now();
        const auto &stored = peds_.emplace(id, ped).first->second;
        for (const auto &fn : spawn_observers_)
        {
            fn(stored);
        }
        schedule_step(stored);
        return stored;
    }

    void Crowd::set_external_agent(sim::NodeId id, SimPoint position)
    {
        external_[id] = position;
    }

    void Crowd::remove_external_agent(sim::NodeId id)
    {
        external_.erase(id);
    }

    const Pedestrian *Crowd::find(sim::NodeId id) const
    {
        const auto it = peds_.find(id);
        return it == peds_.end() ? nullptr : &it->second;
    }

    std::size_t Crowd::active_count() const
    {
        std::size_t n = 0;
        for (const auto &[id, p] : peds_)
        {
            n += p.state == PedState::Moving ? 1 : 0;
        }
        return n;
    }

    void Crowd::spawn_event()
    {
        auto ped = spawn_tick(spawn_, sched_.now(), scenario_.source, spawn_rng_);
        if (ped)
        {
            // Keep spawns from overlapping pedestrians already in the source region.
            const double clearance = 2.0 * config_.params.ped_radius;
            for (int attempt = 0; attempt < 100; ++attempt)
            {
                bool free = true;
                for (const auto &[id, other] : peds_)
                {
                    if (other.state == PedState::Moving && distance(other.position, ped->position) <= clearance)
                    {
                        free = false;
                        break;
                    }
                }
                if (free)
                {
                    break;
                }
                ped->position = draw_point_in(scenario_.source.region, spawn_rng_);
            }
            const auto &stored = peds_.emplace(ped->id, *ped).first->second;
            for (const auto &fn : spawn_observers_)
            {
                fn(stored);
            }
            schedule_step(stored);
        }
        if (!spawn_.exhausted())
        {
            sched_.schedule_at(spawn_.next_due, 0, kEventSpawn, [this] { spawn_event(); });
        }
    }

    void Crowd::schedule_step(const Pedestrian &ped)
    {
        const double duration = step_length(ped.free_speed) / ped.free_speed;
        const auto id = ped.id;
        sched_.schedule_in(sim::seconds_to_duration(duration), id, kEventStep, [this, id] { step_event(id); });
    }

    std::vector<SimPoint> Crowd::neighbors_of(const Pedestrian &ped) const
    {
        const double reach = config_.params.agent_cutoff() + step_length(ped.free_speed);
        std::vector<SimPoint> out;
        for (const auto &[id, other] : peds_)
        {
            if (id != ped.id && other.state == PedState::Moving && distance(other.position, ped.position) < reach)
            {
                out.push_back(other.position);
            }
        }
        for (const auto &[id, pos] : external_)
        {
            if (id != ped.id && distance(pos, ped.position) < reach)
            {
                out.push_back(pos);
            }
        }
        return out;
    }

    void Crowd::step_event(sim::NodeId id)
    {
        auto &ped = peds_.at(id);
        if (ped.state != PedState::Moving)
        {
            return;
        }
        const auto r = next_step(ped, neighbors_of(ped), fields_.at(ped.target), scenario_, config_.params,
                                 step_rng_);
        const SimPoint from = ped.position;
        if (scenario_.inside_obstacle(r.position) || !scenario_.in_bounds(r.position))
        {
            throw std::logic_error(fmt::format("pedestrian {} stepped into an obstacle at ({}, {})", id,
                                               r.position.x, r.position.y));
        }
        ped.position = r.position;
        ped.path_length += distance(from, r.position);
        ++ped.steps;
        ++total_steps_;
        if (contains(scenario_.targets.at(ped.target), ped.position))
        {
            ped.state = PedState::Arrived;
            ped.arrived_at = sched_.now();
        }
        for (const auto &fn : step_observers_)
        {
            fn(ped, from);
        }
        if (ped.state == PedState::Arrived)
        {
            for (const auto &fn : arrive_observers_)
            {
                fn(ped);
            }
            return;
        }
        schedule_step(ped);
    }
} // namespace pedemu::mobility
