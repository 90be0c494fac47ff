#pragma once

// Reference Transverse Mercator forward projection (USGS series, Snyder 1987),
// used only as an independent check on the Krüger implementation.

#include "pedemu/geo/utm.hpp"

#include <cmath>
#include <numbers>

namespace pedemu::test
{
    inline geo::UtmPoint snyder_forward(const geo::GeoPoint &p, int zone, geo::Hemisphere h)
    {
        constexpr double a = 6378137.0;
        constexpr double f = 1.0 / 298.257223563;
        constexpr double e2 = f * (2.0 - f);
        constexpr double e4 = e2 * e2;
        constexpr double e6 = e4 * e2;
        constexpr double ep2 = e2 / (1.0 - e2);
        constexpr double k0 = 0.9996;
        constexpr double deg = std::numbers::pi / 180.0;

        const double phi = p.lat * deg;
        const double lam0 = (-183.0 + 6.0 * zone) * deg;
        const double n = a / std::sqrt(1.0 - e2 * std::sin(phi) * std::sin(phi));
        const double t = std::tan(phi) * std::tan(phi);
        const double c = ep2 * std::cos(phi) * std::cos(phi);
        const double aa = (p.lon * deg - lam0) * std::cos(phi);
        const double m =
            a * ((1 - e2 / 4 - 3 * e4 / 64 - 5 * e6 / 256) * phi -
                 (3 * e2 / 8 + 3 * e4 / 32 + 45 * e6 / 1024) * std::sin(2 * phi) +
                 (15 * e4 / 256 + 45 * e6 / 1024) * std::sin(4 * phi) - (35 * e6 / 3072) * std::sin(6 * phi));
        const double x = k0 * n *
                         (aa + (1 - t + c) * std::pow(aa, 3) / 6 +
                          (5 - 18 * t + t * t + 72 * c - 58 * ep2) * std::pow(aa, 5) / 120);
        const double y =
            k0 * (m + n * std::tan(phi) *
                          (aa * aa / 2 + (5 - t + 9 * c + 4 * c * c) * std::pow(aa, 4) / 24 +
                           (61 - 58 * t + t * t + 600 * c - 330 * ep2) * std::pow(aa, 6) / 720));
        return {zone, h, 500000.0 + x, y + (h == geo::Hemisphere::South ? 10000000.0 : 0.0)};
    }
} // namespace pedemu::test
