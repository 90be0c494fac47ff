#pragma once

#include "pedemu/geo/offset.hpp"

#include <vector>

namespace pedemu::mobility
{
    using geo::SimPoint;
    using Polygon = std::vector<SimPoint>;

    inline SimPoint operator+(SimPoint a, SimPoint b) { return {a.x + b.x, a.y + b.y}; }
    inline SimPoint operator-(SimPoint a, SimPoint b) { return {a.x - b.x, a.y - b.y}; }
    inline SimPoint operator*(double k, SimPoint a) { return {k * a.x, k * a.y}; }

    double distance(SimPoint a, SimPoint b);

    /// Even-odd rule; points exactly on an edge count as inside.
    bool contains(const Polygon &poly, SimPoint p);

    double distance_to_segment(SimPoint p, SimPoint a, SimPoint b);
    double distance_to_boundary(const Polygon &poly, SimPoint p);

    bool segments_intersect(SimPoint a, SimPoint b, SimPoint c, SimPoint d);
    bool polygons_overlap(const Polygon &a, const Polygon &b);

    SimPoint centroid(const Polygon &poly);

    struct Box
    {
        SimPoint min;
        SimPoint max;
    };
    Box bounding_box(const Polygon &poly);

    Polygon rectangle(double x0, double y0, double x1, double y1);
} // namespace pedemu::mobility
