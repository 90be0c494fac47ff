#pragma once

#include "pedemu/mobility/geometry.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pedemu::mobility
{
    class ScenarioError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    struct Source
    {
        Polygon region;
        std::size_t target = 0;
    };

    /// Walkable area [0, width] x [0, height] with polygonal obstacles and targets.
    struct Scenario
    {
        double width = 0.0;
        double height = 0.0;
        std::vector<Polygon> obstacles;
        Source source;
        std::vector<Polygon> targets;

        [[nodiscard]] bool in_bounds(SimPoint p) const
        {
            return p.x >= 0.0 && p.y >= 0.0 && p.x <= width && p.y <= height;
        }
        [[nodiscard]] bool inside_obstacle(SimPoint p) const;
        [[nodiscard]] SimPoint clamp_to_bounds(SimPoint p) const;
    };

    /// Throws ScenarioError describing the first violated constraint.
    void validate(const Scenario &s);

    /// Parses the key-value scenario format (see docs/scenario-format.md).
    /// Errors carry the offending line number.
    Scenario parse_scenario(std::string_view text);
    Scenario load_scenario(const std::string &path);

    /// Serializes in the same format parse_scenario reads.
    std::string format_scenario(const Scenario &s);

    /// 415 m x 394 m urban block layout.
    Scenario default_scenario();
} // namespace pedemu::mobility
