#include "pedemu/run/config.hpp"

#include "pedemu/bridge/device_link.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace pedemu::run
{
    namespace pt = boost::property_tree;

    ConfigError::ConfigError(std::string key, const std::string &message)
        : std::runtime_error(key + ": " + message), key_(std::move(key))
    {
    }

    const char *to_string(RunMode m)
    {
        return m == RunMode::Virtual ? "virtual" : "realtime";
    }

    namespace
    {
        Settings flatten(const pt::ptree &tree)
        {
            Settings out;
            for (const auto &[section, node] : tree)
            {
                if (node.empty())
                {
                    out[section] = node.data();
                    continue;
                }
                for (const auto &[key, leaf] : node)
                {
                    out[section + "." + key] = leaf.data();
                }
            }
            return out;
        }

        std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos)
            {
                return {};
            }
            const auto e = s.find_last_not_of(" \t\r\n");
            return s.substr(b, e - b + 1);
        }

        double to_double(const std::string &key, const std::string &raw)
        {
            const auto v = trim(raw);
            double out = 0.0;
            const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
            if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
            {
                throw ConfigError(key, fmt::format("expected a number, got '{}'", raw));
            }
            return out;
        }

        std::int64_t to_int(const std::string &key, const std::string &raw)
        {
            const auto v = trim(raw);
            std::int64_t out = 0;
            const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
            if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
            {
                throw ConfigError(key, fmt::format("expected an integer, got '{}'", raw));
            }
            return out;
        }

        bool to_bool(const std::string &key, const std::string &raw)
        {
            const auto v = trim(raw);
            if (v == "true" || v == "1" || v == "yes" || v == "on")
            {
                return true;
            }
            if (v == "false" || v == "0" || v == "no" || v == "off")
            {
                return false;
            }
            throw ConfigError(key, fmt::format("expected true/false, got '{}'", raw));
        }

        double positive(const std::string &key, const std::string &raw)
        {
            const double v = to_double(key, raw);
            if (!(v > 0.0))
            {
                throw ConfigError(key, fmt::format("must be > 0, got {}", v));
            }
            return v;
        }

        sim::Duration seconds(const std::string &key, const std::string &raw)
        {
            return sim::seconds_to_duration(positive(key, raw));
        }

        std::size_t bytes(const std::string &key, const std::string &raw)
        {
            const auto v = to_int(key, raw);
            if (v <= 0)
            {
                throw ConfigError(key, fmt::format("must be > 0, got {}", v));
            }
            return static_cast<std::size_t>(v);
        }

        std::string endpoint(const std::string &key, const std::string &raw)
        {
            const auto v = trim(raw);
            if (v.empty())
            {
                return v;
            }
            try
            {
                (void)bridge::parse_endpoint(v);
            }
            catch (const std::exception &e)
            {
                throw ConfigError(key, e.what());
            }
            return v;
        }

        using Setter = std::function<void(RunConfig &, const std::string &key, const std::string &value)>;

        const std::vector<std::pair<std::string, Setter>> &setters()
        {
            static const std::vector<std::pair<std::string, Setter>> table = {
                {"run.scenario", [](RunConfig &c, const auto &, const auto &v) { c.scenario = trim(v); }},
                {"run.mode",
                 [](RunConfig &c, const auto &k, const auto &v) {
                     const auto m = trim(v);
                     if (m == "virtual")
                     {
                         c.mode = RunMode::Virtual;
                     }
                     else if (m == "realtime")
                     {
                         c.mode = RunMode::RealTime;
                     }
                     else
                     {
                         throw ConfigError(k, fmt::format("must be 'virtual' or 'realtime', got '{}'", v));
                     }
                 }},
                {"run.nodes",
                 [](RunConfig &c, const auto &k, const auto &v) {
                     const auto n = to_int(k, v);
                     if (n < 1 || n > 100000)
                     {
                         throw ConfigError(k, fmt::format("must be >= 1, got {}", n));
                     }
                     c.nodes = static_cast<int>(n);
                 }},
                {"run.duration", [](RunConfig &c, const auto &k, const auto &v) { c.duration_s = positive(k, v); }},
                {"run.seed",
                 [](RunConfig &c, const auto &k, const auto &v) {
                     const auto s = trim(v);
                     std::uint64_t out = 0;
                     const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
                     if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
                     {
                         throw ConfigError(k, fmt::format("expected an unsigned integer, got '{}'", v));
                     }
                     c.seed = out;
                 }},
                {"run.lag_out", [](RunConfig &c, const auto &, const auto &v) { c.lag_out = trim(v); }},
                {"run.map_out", [](RunConfig &c, const auto &, const auto &v) { c.map_out = trim(v); }},
                {"run.report_out", [](RunConfig &c, const auto &, const auto &v) { c.report_out = trim(v); }},
                {"run.lag_interval_ms",
                 [](RunConfig &c, const auto &k, const auto &v) { c.lag_interval_ms = positive(k, v); }},

                {"geo.origin_zone",
                 [](RunConfig &c, const auto &k, const auto &v) {
                     const auto z = to_int(k, v);
                     if (z < 1 || z > 60)
                     {
                         throw ConfigError(k, fmt::format("must be in 1..60, got {}", z));
                     }
                     c.origin.zone = static_cast<int>(z);
                 }},
                {"geo.origin_hemisphere",
                 [](RunConfig &c, const auto &k, const auto &v) {
                     const auto h = trim(v);
                     if (h == "N" || h == "n")
                     {
                         c.origin.hemisphere = geo::Hemisphere::North;
                     }
                     else if (h == "S" || h == "s")
                     {
                         c.origin.hemisphere = geo::Hemisphere::South;
                     }
                     else
                     {
                         throw ConfigError(k, fmt::format("must be N or S, got '{}'", v));
                     }
                 }},
                {"geo.origin_easting",
                 [](RunConfig &c, const auto &k, const auto &v) { c.origin.easting = to_double(k, v); }},
                {"geo.origin_northing",
                 [](RunConfig &c, const auto &k, const auto &v) { c.origin.northing = to_double(k, v); }},

                {"radio.carrier_ghz",
                 [](RunConfig &c, const auto &k, const auto &v) { c.radio.carrier_ghz = to_double(k, v); }},
                {"radio.n_rb",
                 [](RunConfig &c, const auto &k, const auto &v) { c.radio.n_rb = static_cast<int>(to_int(k, v)); }},
                {"radio.ue_tx_power_dbm",
                 [](RunConfig &c, const auto &k, const auto &v) { c.radio.tx_power_dbm = to_double(k, v); }},
                {"radio.enb_tx_power_dbm",
                 [](RunConfig &c, const auto &k, const auto &v) { c.radio.enb_tx_power_dbm = to_double(k, v); }},
                {"radio.h_ue_m", [](RunConfig &c, const auto &k, const auto &v) { c.radio.h_ue = to_double(k, v); }},
                {"radio.h_enb_m", [](RunConfig &c, const auto &k, const auto &v) { c.radio.h_enb = to_double(k, v); }},
                {"radio.rx_sensitivity_dbm",
                 [](RunConfig &c, const auto &k, const auto &v) { c.radio.rx_sensitivity_dbm = to_double(k, v); }},
                {"radio.phy_rate_bps",
                 [](RunConfig &c, const auto &k, const auto &v) { c.radio.phy_rate_bps = to_double(k, v); }},
                {"radio.mac_queue_bytes",
                 [](RunConfig &c, const auto &k, const auto &v) { c.radio.mac_queue_bytes = bytes(k, v); }},
                {"radio.rlc_queue_bytes",
                 [](RunConfig &c, const auto &k, const auto &v) { c.radio.rlc_queue_bytes = bytes(k, v); }},
                {"radio.rlc_mode", [](RunConfig &c, const auto &, const auto &v) { c.radio.rlc_mode = trim(v); }},
                {"radio.min_distance_m",
                 [](RunConfig &c, const auto &k, const auto &v) { c.radio.d_min = to_double(k, v); }},

                {"apps.beacon_period_s",
                 [](RunConfig &c, const auto &k, const auto &v) { c.apps.beacon_period = seconds(k, v); }},
                {"apps.beacon_payload_bytes",
                 [](RunConfig &c, const auto &k, const auto &v) { c.apps.beacon_payload = bytes(k, v); }},
                {"apps.map_period_s",
                 [](RunConfig &c, const auto &k, const auto &v) { c.apps.map_period = seconds(k, v); }},
                {"apps.map_payload_bytes",
                 [](RunConfig &c, const auto &k, const auto &v) { c.apps.map_payload_max = bytes(k, v); }},
                {"apps.start_jitter",
                 [](RunConfig &c, const auto &k, const auto &v) { c.apps.start_jitter = to_bool(k, v); }},
                {"apps.cell_size_m",
                 [](RunConfig &c, const auto &k, const auto &v) { c.apps.cell_size = positive(k, v); }},
                {"apps.neighbor_ttl_s",
                 [](RunConfig &c, const auto &k, const auto &v) { c.apps.neighbor_ttl = seconds(k, v); }},
                {"apps.map_ttl_s", [](RunConfig &c, const auto &k, const auto &v) { c.apps.map_ttl = seconds(k, v); }},

                {"mobility.inter_arrival_s",
                 [](RunConfig &c, const auto &k, const auto &v) { c.inter_arrival_s = positive(k, v); }},
                {"mobility.field_resolution_m",
                 [](RunConfig &c, const auto &k, const auto &v) { c.field_resolution_m = positive(k, v); }},
                {"mobility.ped_radius",
                 [](RunConfig &c, const auto &k, const auto &v) { c.osm.ped_radius = to_double(k, v); }},
                {"mobility.intimate_width",
                 [](RunConfig &c, const auto &k, const auto &v) { c.osm.intimate_width = to_double(k, v); }},
                {"mobility.personal_width",
                 [](RunConfig &c, const auto &k, const auto &v) { c.osm.personal_width = to_double(k, v); }},
                {"mobility.ped_height",
                 [](RunConfig &c, const auto &k, const auto &v) { c.osm.ped_height = to_double(k, v); }},
                {"mobility.obstacle_width",
                 [](RunConfig &c, const auto &k, const auto &v) { c.osm.obstacle_width = to_double(k, v); }},
                {"mobility.obstacle_height",
                 [](RunConfig &c, const auto &k, const auto &v) { c.osm.obstacle_height = to_double(k, v); }},
                {"mobility.intimate_factor",
                 [](RunConfig &c, const auto &k, const auto &v) { c.osm.intimate_factor = to_double(k, v); }},
                {"mobility.personal_power",
                 [](RunConfig &c, const auto &k, const auto &v) { c.osm.personal_power = to_double(k, v); }},
                {"mobility.intimate_power",
                 [](RunConfig &c, const auto &k, const auto &v) { c.osm.intimate_power = to_double(k, v); }},

                {"bridge.listen", [](RunConfig &c, const auto &k, const auto &v) { c.bridge_listen = endpoint(k, v); }},
                {"bridge.device", [](RunConfig &c, const auto &k, const auto &v) { c.bridge_device = endpoint(k, v); }},
                {"bridge.mode",
                 [](RunConfig &c, const auto &k, const auto &v) {
                     try
                     {
                         c.bridge_mode = bridge::parse_bridge_mode(trim(v));
                     }
                     catch (const std::invalid_argument &)
                     {
                         throw ConfigError(k, fmt::format("must be 'export' or 'inbound', got '{}'", v));
                     }
                 }},
                {"bridge.ws_listen", [](RunConfig &c, const auto &k, const auto &v) { c.ws_listen = endpoint(k, v); }},
                {"bridge.liveness_timeout_ms",
                 [](RunConfig &c, const auto &k, const auto &v) { c.liveness_timeout_ms = positive(k, v); }},
            };
            return table;
        }

        template <typename Fn>
        void module_check(const std::string &prefix, Fn &&fn)
        {
            try
            {
                fn();
            }
            catch (const std::invalid_argument &e)
            {
                throw ConfigError(prefix, e.what());
            }
        }
    } // namespace

    Settings parse_ini(const std::string &text)
    {
        std::istringstream in(text);
        pt::ptree tree;
        try
        {
            pt::ini_parser::read_ini(in, tree);
        }
        catch (const pt::ini_parser_error &e)
        {
            throw ConfigError("config", fmt::format("line {}: {}", e.line(), e.message()));
        }
        return flatten(tree);
    }

    Settings load_ini(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw ConfigError("config", "cannot open '" + path + "'");
        }
        std::ostringstream text;
        text << in.rdbuf();
        auto settings = parse_ini(text.str());
        const auto it = settings.find("run.scenario");
        if (it != settings.end())
        {
            const std::filesystem::path scn(trim(it->second));
            if (!scn.empty() && scn.is_relative())
            {
                it->second = (std::filesystem::path(path).parent_path() / scn).lexically_normal().string();
            }
        }
        return settings;
    }

    Settings merge(Settings base, const Settings &overrides)
    {
        for (const auto &[k, v] : overrides)
        {
            base[k] = v;
        }
        return base;
    }

    const std::vector<std::string> &known_keys()
    {
        static const std::vector<std::string> keys = [] {
            std::vector<std::string> out;
            for (const auto &[k, fn] : setters())
            {
                out.push_back(k);
            }
            return out;
        }();
        return keys;
    }

    RunConfig build_config(const Settings &s)
    {
        RunConfig c;
        for (const auto &[key, value] : s)
        {
            const auto &table = setters();
            const auto it = std::find_if(table.begin(), table.end(), [&](const auto &e) { return e.first == key; });
            if (it == table.end())
            {
                throw ConfigError(key, "unknown configuration key");
            }
            it->second(c, key, value);
        }

        module_check("radio", [&] { c.radio.validate(); });
        module_check("apps", [&] { c.apps.validate(); });
        module_check("mobility", [&] { c.osm.validate(); });

        if (!c.bridge_listen.empty() && c.bridge_device.empty())
        {
            throw ConfigError("bridge.device", "required when bridge.listen is set");
        }
        if (c.bridge_listen.empty() && !c.bridge_device.empty())
        {
            throw ConfigError("bridge.listen", "required when bridge.device is set");
        }
        return c;
    }
} // namespace pedemu::run
