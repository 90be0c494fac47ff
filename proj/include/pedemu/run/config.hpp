#pragma once

#include "pedemu/apps/node_apps.hpp"
#include "pedemu/bridge/bridge.hpp"
#include "pedemu/channel/radio.hpp"
#include "pedemu/geo/utm.hpp"
#include "pedemu/mobility/osm.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace pedemu::run
{
    /// A configuration problem tied to one key.
    class ConfigError : public std::runtime_error
    {
    public:
        ConfigError(std::string key, const std::string &message);
        [[nodiscard]] const std::string &key() const noexcept { return key_; }

    private:
        std::string key_;
    };

    enum class RunMode
    {
        Virtual,
        RealTime,
    };

    const char *to_string(RunMode m);

    /// Flat "section.key" -> value view of an INI file.
    using Settings = std::map<std::string, std::string>;

    /// Reads an INI file. A relative run.scenario is taken relative to the
    /// file's directory. Throws ConfigError (key "config") with the line
    /// number on syntax errors.
    Settings load_ini(const std::string &path);
    Settings parse_ini(const std::string &text);

    /// `overrides` wins over `base` key by key.
    Settings merge(Settings base, const Settings &overrides);

    struct RunConfig
    {
        std::string scenario; // empty: built-in default scenario
        RunMode mode = RunMode::Virtual;
        int nodes = 6;
        double duration_s = 120.0;
        std::uint64_t seed = 1;
        std::string lag_out;
        std::string map_out;
        std::string report_out;
        double lag_interval_ms = 10.0;

        geo::UtmPoint origin{32, geo::Hemisphere::North, 691000.0, 5336000.0};
        channel::RadioConfig radio;
        apps::AppConfig apps;
        mobility::OsmParams osm;
        double inter_arrival_s = 60.0;
        double field_resolution_m = 0.5;

        std::string bridge_listen;
        std::string bridge_device;
        bridge::BridgeMode bridge_mode = bridge::BridgeMode::Inbound;
        std::string ws_listen;
        double liveness_timeout_ms = 5000.0;

        [[nodiscard]] bool bridge_enabled() const { return !bridge_listen.empty() || !ws_listen.empty(); }
    };

    /// Builds and validates a RunConfig. Unknown keys, unparsable values and
    /// out-of-range values throw ConfigError naming the key.
    RunConfig build_config(const Settings &s);

    /// Every key build_config accepts, in documentation order.
    const std::vector<std::string> &known_keys();
} // namespace pedemu::run
