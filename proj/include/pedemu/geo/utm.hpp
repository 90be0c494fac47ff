#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>

namespace pedemu::geo
{
    class GeoError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    /// WGS84 geographic coordinate in degrees.
    struct GeoPoint
    {
        double lat = 0.0;
        double lon = 0.0;

        bool operator==(const GeoPoint &) const = default;
    };

    enum class Hemisphere : std::uint8_t
    {
        North = 0,
        South = 1,
    };

    struct UtmPoint
    {
        int zone = 0; // 1..60
        Hemisphere hemisphere = Hemisphere::North;
        double easting = 0.0;  // meters
        double northing = 0.0; // meters

        bool operator==(const UtmPoint &) const = default;
    };

    inline constexpr double kScaleFactor = 0.9996;
    inline constexpr double kFalseEasting = 500000.0;
    inline constexpr double kFalseNorthingSouth = 10000000.0;
    inline constexpr double kMinLatitude = -80.0;
    inline constexpr double kMaxLatitude = 84.0;

    /// zone = floor((lon + 180) / 6) + 1, lon normalized to [-180, 180).
    int utm_zone(double lon_deg);
    double central_meridian(int zone);

    /// Transverse Mercator (Krüger series to sixth order in the third flattening).
    /// Throws GeoError for latitudes outside (-80, 84) or non-finite input.
    UtmPoint wgs84_to_utm(const GeoPoint &p);

    /// Projects into a caller-chosen zone (used to keep a scenario in one zone).
    UtmPoint wgs84_to_utm(const GeoPoint &p, int zone, Hemisphere hemisphere);

    /// Inverse projection. Throws GeoError on invalid zone or coordinates outside
    /// easting (100000, 900000) / northing [0, 10000000).
    GeoPoint utm_to_wgs84(const UtmPoint &p);
} // namespace pedemu::geo
