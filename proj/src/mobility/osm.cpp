#include "pedemu/mobility/osm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pedemu::mobility
{
    namespace
    {
        constexpr double kInf = std::numeric_limits<double>::infinity();

        double bump(double d, double width, double power, double numerator)
        {
            return std::exp(numerator / (std::pow(d / width, 2.0 * power) - 1.0));
        }
    } // namespace

    void OsmParams::validate() const
    {
        for (double v : {ped_radius, intimate_width, personal_width, ped_height, obstacle_width, obstacle_height,
                         intimate_factor})
        {
            if (!(v > 0.0))
            {
                throw std::invalid_argument("OSM widths, heights and factors must be positive");
            }
        }
        if (!(personal_power >= 1.0) || !(intimate_power >= 1.0))
        {
            throw std::invalid_argument("OSM powers must be >= 1");
        }
    }

    double OsmParams::agent_cutoff() const
    {
        return 2.0 * ped_radius + std::max(personal_width, intimate_width * intimate_factor);
    }

    double step_length(double speed)
    {
        return 0.4625 + 0.2345 * speed;
    }

    double agent_potential(double center_distance, const OsmParams &p)
    {
        const double d = center_distance - 2.0 * p.ped_radius;
        if (d <= 0.0)
        {
            return kInf;
        }
        double v = 0.0;
        if (d < p.personal_width)
        {
            v += p.ped_height * bump(d, p.personal_width, p.personal_power, 4.0);
        }
        const double intimate = p.intimate_width * p.intimate_factor;
        if (d < intimate)
        {
            v += p.ped_height * p.intimate_factor * bump(d, intimate, p.intimate_power, 4.0);
        }
        return v;
    }

    double obstacle_potential(double boundary_distance, const OsmParams &p)
    {
        if (boundary_distance >= p.obstacle_width)
        {
            return 0.0;
        }
        return p.obstacle_height * bump(boundary_distance, p.obstacle_width, 1.0, 2.0);
    }

    double obstacle_term(SimPoint x, const Scenario &s, const OsmParams &p)
    {
        double v = 0.0;
        for (const auto &o : s.obstacles)
        {
            const auto box = bounding_box(o);
            if (x.x < box.min.x - p.obstacle_width || x.x > box.max.x + p.obstacle_width ||
                x.y < box.min.y - p.obstacle_width || x.y > box.max.y + p.obstacle_width)
            {
                continue;
            }
            if (contains(o, x))
            {
                return kInf;
            }
            v += obstacle_potential(distance_to_boundary(o, x), p);
        }
        return v;
    }

    double total_potential(SimPoint x, std::span<const SimPoint> others, const NavigationField &field,
                           const Scenario &s, const OsmParams &p)
    {
        double v = field.value_at(x);
        if (!std::isfinite(v))
        {
            return kInf;
        }
        for (const auto &o : others)
        {
            v += agent_potential(distance(x, o), p);
        }
        return v + obstacle_term(x, s, p);
    }

    std::array<SimPoint, kCandidateCount> candidate_points(SimPoint center, double radius, double rotation)
    {
        std::array<SimPoint, kCandidateCount> out;
        out[0] = center;
        for (std::size_t k = 0; k < 16; ++k)
        {
            const double a = rotation + 2.0 * std::numbers::pi * static_cast<double>(k) / 16.0;
            out[1 + k] = {center.x + radius * std::cos(a), center.y + radius * std::sin(a)};
        }
        for (std::size_t k = 0; k < 8; ++k)
        {
            const double a = rotation + 2.0 * std::numbers::pi * static_cast<double>(k) / 8.0;
            out[17 + k] = {center.x + 0.5 * radius * std::cos(a), center.y + 0.5 * radius * std::sin(a)};
        }
        return out;
    }

    StepResult next_step(const Pedestrian &ped, std::vector<SimPoint> neighbors, const NavigationField &field,
                         const Scenario &s, const OsmParams &p, std::mt19937_64 &rng)
    {
        std::sort(neighbors.begin(), neighbors.end(),
                  [](SimPoint a, SimPoint b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });

        const double length = step_length(ped.free_speed);
        std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
        StepResult r;
        r.rotation = angle(rng);
        r.duration = length / ped.free_speed;

        const auto cands = candidate_points(ped.position, length, r.rotation);
        r.potential = kInf;
        for (std::size_t k = 0; k < cands.size(); ++k)
        {
            const double v = total_potential(cands[k], neighbors, field, s, p);
            if (v < r.potential)
            {
                r.potential = v;
                r.candidate = k;
            }
        }
        r.position = cands[r.candidate];
        return r;
    }
} // namespace pedemu::mobility
