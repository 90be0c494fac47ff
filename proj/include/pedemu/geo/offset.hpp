#pragma once

#include "pedemu/geo/utm.hpp"

namespace pedemu::geo
{
    /// Point in the local scenario frame, meters, y increasing north.
    struct SimPoint
    {
        double x = 0.0;
        double y = 0.0;

        bool operator==(const SimPoint &) const = default;
    };

    /// Maps the local scenario frame onto UTM by translating with a fixed origin.
    /// All results stay in the origin's zone; anything that would leave it is rejected.
    class OffsetTransform
    {
    public:
        explicit OffsetTransform(UtmPoint origin);

        [[nodiscard]] const UtmPoint &origin() const noexcept { return origin_; }

        /// Throws GeoError if the translated point leaves the origin's zone.
        [[nodiscard]] UtmPoint sim_to_utm(const SimPoint &p) const;
        /// Throws GeoError if p is in a different zone or hemisphere.
        [[nodiscard]] SimPoint utm_to_sim(const UtmPoint &p) const;

        [[nodiscard]] GeoPoint sim_to_wgs84(const SimPoint &p) const;
        /// Projects into the origin's zone; throws if the point belongs to another zone.
        [[nodiscard]] SimPoint wgs84_to_sim(const GeoPoint &p) const;

        /// True if p lies within the longitude band of the origin zone.
        [[nodiscard]] bool in_zone(const UtmPoint &p) const;

    private:
        UtmPoint origin_;
    };
} // namespace pedemu::geo
