#include "pedemu/geo/offset.hpp"

#include <cmath>
#include <string>

namespace pedemu::geo
{
    namespace
    {
        // Slack for points sitting exactly on a zone boundary.
        constexpr double kZoneEdgeSlackDeg = 1e-9;
    } // namespace

    OffsetTransform::OffsetTransform(UtmPoint origin) : origin_(origin)
    {
        // Validates zone, hemisphere and coordinate ranges.
        (void)utm_to_wgs84(origin_);
    }

    bool OffsetTransform::in_zone(const UtmPoint &p) const
    {
        if (p.zone != origin_.zone || p.hemisphere != origin_.hemisphere)
        {
            return false;
        }
        GeoPoint g;
        try
        {
            g = utm_to_wgs84(p);
        }
        catch (const GeoError &)
        {
            return false;
        }
        const double cm = central_meridian(p.zone);
        double dlon = g.lon - cm;
        if (dlon > 180.0)
        {
            dlon -= 360.0;
        }
        if (dlon < -180.0)
        {
            dlon += 360.0;
        }
        if (std::abs(dlon) > 3.0 + kZoneEdgeSlackDeg)
        {
            return false;
        }
        return g.lat > kMinLatitude && g.lat < kMaxLatitude;
    }

    UtmPoint OffsetTransform::sim_to_utm(const SimPoint &p) const
    {
        UtmPoint u = origin_;
        u.easting = origin_.easting + p.x;
        u.northing = origin_.northing + p.y;
        if (!in_zone(u))
        {
            throw GeoError("sim point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                           ") leaves UTM zone " + std::to_string(origin_.zone));
        }
        return u;
    }

    SimPoint OffsetTransform::utm_to_sim(const UtmPoint &p) const
    {
        if (p.zone != origin_.zone || p.hemisphere != origin_.hemisphere)
        {
            throw GeoError("UTM point in zone " + std::to_string(p.zone) + " does not match scenario zone " +
                           std::to_string(origin_.zone));
        }
        return SimPoint{p.easting - origin_.easting, p.northing - origin_.northing};
    }

    GeoPoint OffsetTransform::sim_to_wgs84(const SimPoint &p) const
    {
        return utm_to_wgs84(sim_to_utm(p));
    }

    SimPoint OffsetTransform::wgs84_to_sim(const GeoPoint &p) const
    {
        if (utm_zone(p.lon) != origin_.zone && std::abs(p.lon - central_meridian(origin_.zone)) > 3.0 + kZoneEdgeSlackDeg)
        {
            throw GeoError("position outside scenario UTM zone " + std::to_string(origin_.zone));
        }
        return utm_to_sim(wgs84_to_utm(p, origin_.zone, origin_.hemisphere));
    }
} // namespace pedemu::geo
