#include "pedemu/mobility/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pedemu::mobility
{
    double distance(SimPoint a, SimPoint b)
    {
        return std::hypot(a.x - b.x, a.y - b.y);
    }

    double distance_to_segment(SimPoint p, SimPoint a, SimPoint b)
    {
        const SimPoint ab = b - a;
        const double len2 = ab.x * ab.x + ab.y * ab.y;
        if (len2 == 0.0)
        {
            return distance(p, a);
        }
        const double t = std::clamp(((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2, 0.0, 1.0);
        return distance(p, a + t * ab);
    }

    double distance_to_boundary(const Polygon &poly, SimPoint p)
    {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < poly.size(); ++i)
        {
            best = std::min(best, distance_to_segment(p, poly[i], poly[(i + 1) % poly.size()]));
        }
        return best;
    }

    bool contains(const Polygon &poly, SimPoint p)
    {
        if (poly.size() < 3)
        {
            return false;
        }
        bool inside = false;
        for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
        {
            const SimPoint a = poly[i];
            const SimPoint b = poly[j];
            if (distance_to_segment(p, a, b) == 0.0)
            {
                return true;
            }
            if ((a.y > p.y) != (b.y > p.y))
            {
                const double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
                if (p.x < x_cross)
                {
                    inside = !inside;
                }
            }
        }
        return inside;
    }

    namespace
    {
        double cross(SimPoint o, SimPoint a, SimPoint b)
        {
            return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
        }

        bool on_segment(SimPoint a, SimPoint b, SimPoint p)
        {
            return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
                   p.y <= std::max(a.y, b.y);
        }
    } // namespace

    bool segments_intersect(SimPoint a, SimPoint b, SimPoint c, SimPoint d)
    {
        const double d1 = cross(c, d, a);
        const double d2 = cross(c, d, b);
        const double d3 = cross(a, b, c);
        const double d4 = cross(a, b, d);
        if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        {
            return true;
        }
        return (d1 == 0 && on_segment(c, d, a)) || (d2 == 0 && on_segment(c, d, b)) ||
               (d3 == 0 && on_segment(a, b, c)) || (d4 == 0 && on_segment(a, b, d));
    }

    bool polygons_overlap(const Polygon &a, const Polygon &b)
    {
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            for (std::size_t j = 0; j < b.size(); ++j)
            {
                if (segments_intersect(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()]))
                {
                    return true;
                }
            }
        }
        return (!a.empty() && contains(b, a.front())) || (!b.empty() && contains(a, b.front()));
    }

    SimPoint centroid(const Polygon &poly)
    {
        SimPoint c;
        for (const auto &p : poly)
        {
            c = c + p;
        }
        return poly.empty() ? c : (1.0 / static_cast<double>(poly.size())) * c;
    }

    Box bounding_box(const Polygon &poly)
    {
        Box b{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
              {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
        for (const auto &p : poly)
        {
            b.min = {std::min(b.min.x, p.x), std::min(b.min.y, p.y)};
            b.max = {std::max(b.max.x, p.x), std::max(b.max.y, p.y)};
        }
        return b;
    }

    Polygon rectangle(double x0, double y0, double x1, double y1)
    {
        return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    }
} // namespace pedemu::mobility
