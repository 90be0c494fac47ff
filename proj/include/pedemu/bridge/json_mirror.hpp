#pragma once

#include "pedemu/bridge/device_link.hpp"
#include "pedemu/bridge/wire.hpp"
#include "pedemu/geo/offset.hpp"
#include "pedemu/sim/scheduler.hpp"

#include <optional>
#include <string>

namespace pedemu::bridge
{
    /// JSON text for a device-bound message. Beacons and maps carry WGS84
    /// coordinates as well when the transform is given.
    std::string to_json(const WireMessage &m, const geo::OffsetTransform *xf = nullptr);
    std::string lag_json(const sim::LagSample &s);

    struct SetPosition
    {
        double lat = 0.0;
        double lon = 0.0;
    };

    /// Parses a UI message. Returns nullopt (with `error` filled in) for
    /// malformed JSON, unknown types, or missing/non-numeric fields.
    std::optional<SetPosition> parse_ui_message(const std::string &text, std::string *error = nullptr);

    /// Device-equivalent BEACON datagram for a UI position, projected into the
    /// transform's zone. Throws geo::GeoError if the point is outside that zone.
    Datagram beacon_for_position(const SetPosition &p, const geo::OffsetTransform &xf, std::uint64_t timestamp_ms);
} // namespace pedemu::bridge
