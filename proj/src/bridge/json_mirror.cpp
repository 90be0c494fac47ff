#include "pedemu/bridge/json_mirror.hpp"
#include "pedemu/bridge/device_link.hpp"

#include <json.hpp>

#include <cmath>

namespace pedemu::bridge
{
    using nlohmann::json;

    namespace
    {
        const char *hemi(geo::Hemisphere h)
        {
            return h == geo::Hemisphere::North ? "N" : "S";
        }

        json number(double v)
        {
            return std::isfinite(v) ? json(v) : json(nullptr);
        }
    } // namespace

    std::string to_json(const WireMessage &m, const geo::OffsetTransform *xf)
    {
        json j;
        if (const auto *b = std::get_if<BeaconMsg>(&m))
        {
            j = {{"type", "beacon"},           {"nodeId", b->node_id},          {"zone", b->zone},
                 {"hemisphere", hemi(b->hemisphere)}, {"easting", number(b->easting)}, {"northing", number(b->northing)},
                 {"timestampMs", b->timestamp_ms}};
            if (xf != nullptr)
            {
                try
                {
                    const auto g = geo::utm_to_wgs84({b->zone, b->hemisphere, b->easting, b->northing});
                    j["lat"] = g.lat;
                    j["lon"] = g.lon;
                }
                catch (const std::exception &)
                {
                }
            }
        }
        else if (const auto *d = std::get_if<DensityMapMsg>(&m))
        {
            j = {{"type", "map"},
                 {"nodeId", d->node_id},
                 {"cellSize", number(d->cell_size_m)},
                 {"zone", d->zone},
                 {"hemisphere", hemi(d->hemisphere)}};
            auto cells = json::array();
            for (const auto &c : d->cells)
            {
                cells.push_back({{"x", c.cell_x}, {"y", c.cell_y}, {"count", number(c.count)}, {"ageMs", c.age_ms}});
            }
            j["cells"] = std::move(cells);
        }
        else
        {
            const auto &n = std::get<NodeLocationMsg>(m);
            j = {{"type", "nodeLocation"},
                 {"nodeId", n.node_id},
                 {"lat", number(n.lat)},
                 {"lon", number(n.lon)},
                 {"simTimeUs", n.sim_time_us}};
        }
        return j.dump();
    }

    std::string lag_json(const sim::LagSample &s)
    {
        return json{{"type", "lag"}, {"tReal", s.t_real}, {"tSim", s.t_sim}, {"offset", s.offset}}.dump();
    }

    std::optional<SetPosition> parse_ui_message(const std::string &text, std::string *error)
    {
        const auto fail = [&](const std::string &why) -> std::optional<SetPosition> {
            if (error != nullptr)
            {
                *error = why;
            }
            return std::nullopt;
        };
        const auto j = json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.is_object())
        {
            return fail("not a JSON object");
        }
        const auto type = j.find("type");
        if (type == j.end() || !type->is_string())
        {
            return fail("missing \"type\"");
        }
        if (*type != "setPosition")
        {
            return fail("unknown type '" + type->get<std::string>() + "'");
        }
        const auto lat = j.find("lat");
        const auto lon = j.find("lon");
        if (lat == j.end() || lon == j.end() || !lat->is_number() || !lon->is_number())
        {
            return fail("setPosition needs numeric \"lat\" and \"lon\"");
        }
        SetPosition p{lat->get<double>(), lon->get<double>()};
        if (!(std::abs(p.lat) <= 90.0) || !(std::abs(p.lon) <= 180.0))
        {
            return fail("lat/lon out of range");
        }
        return p;
    }

    Datagram beacon_for_position(const SetPosition &p, const geo::OffsetTransform &xf, std::uint64_t timestamp_ms)
    {
        const auto &o = xf.origin();
        const auto u = geo::wgs84_to_utm({p.lat, p.lon}, o.zone, o.hemisphere);
        if (!xf.in_zone(u))
        {
            throw geo::GeoError("position lies outside the scenario's UTM zone");
        }
        return encode(BeaconMsg{0, static_cast<std::uint8_t>(u.zone), u.hemisphere, u.easting, u.northing,
                                timestamp_ms});
    }
} // namespace pedemu::bridge
