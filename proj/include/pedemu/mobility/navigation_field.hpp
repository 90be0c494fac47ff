#pragma once

#include "pedemu/mobility/scenario.hpp"

#include <cstddef>
#include <vector>

namespace pedemu::mobility
{
    /// Grid of geodesic distances (meters) to one target. Cell (i, j) covers
    /// [i*res, (i+1)*res) x [j*res, (j+1)*res); its value belongs to the cell center.
    /// Obstacle cells hold +infinity, target cells 0.
    class NavigationField
    {
    public:
        NavigationField() = default;

        [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
        [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
        [[nodiscard]] double resolution() const noexcept { return resolution_; }

        [[nodiscard]] double cell(std::size_t i, std::size_t j) const { return values_[j * cols_ + i]; }
        [[nodiscard]] SimPoint cell_center(std::size_t i, std::size_t j) const;

        /// Bilinear interpolation over finite neighboring cell centers;
        /// +infinity outside the bounds or when all neighbors are obstacles.
        [[nodiscard]] double value_at(SimPoint p) const;

    private:
        friend NavigationField build_navigation_field(const Scenario &, std::size_t, double);

        std::size_t cols_ = 0;
        std::size_t rows_ = 0;
        double resolution_ = 0.5;
        double width_ = 0.0;
        double height_ = 0.0;
        std::vector<double> values_;
    };

    inline constexpr double kDefaultFieldResolution = 0.5;

    /// Dijkstra on the 8-connected grid (edge costs res and res*sqrt(2)), obstacle
    /// cells impassable. Throws ScenarioError if the source region cannot reach the target.
    NavigationField build_navigation_field(const Scenario &s, std::size_t target,
                                           double resolution = kDefaultFieldResolution);
} // namespace pedemu::mobility
