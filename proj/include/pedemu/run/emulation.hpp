#pragma once

#include "pedemu/apps/node_apps.hpp"
#include "pedemu/bridge/bridge.hpp"
#include "pedemu/run/config.hpp"
#include "pedemu/sim/scheduler.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace pedemu::run
{
    struct ChannelTotals
    {
        std::uint64_t packets_offered = 0;
        std::uint64_t packets_transmitted = 0;
        std::uint64_t dropped_rlc = 0;
        std::uint64_t dropped_mac = 0;
        std::size_t max_mac_bytes = 0;
        std::size_t max_rlc_bytes = 0;
    };

    struct RunResult
    {
        sim::RunReport sched;
        double radio_range_m = 0.0;
        std::size_t pedestrians = 0;
        std::size_t arrived = 0;
        std::uint64_t mobility_steps = 0;
        std::uint64_t map_rows = 0;
        std::map<sim::NodeId, apps::AppCounters> nodes;
        ChannelTotals channel;
        std::optional<bridge::BridgeCounters> bridge;
        std::optional<sim::LagStats> lag;
        double wall_seconds = 0.0;
    };

    /// Wires scenario, crowd, channel, per-node apps and the optional bridge
    /// for one run.
    class Emulation
    {
    public:
        explicit Emulation(RunConfig cfg);
        ~Emulation();
        Emulation(const Emulation &) = delete;
        Emulation &operator=(const Emulation &) = delete;

        /// Runs to the configured duration (or until request_stop) and writes
        /// the configured output files.
        RunResult run();

        /// Thread-safe.
        void request_stop();

        [[nodiscard]] sim::Scheduler &scheduler();
        [[nodiscard]] const RunConfig &config() const;

        /// Bound ports of the bridge links, available once setup has run.
        [[nodiscard]] std::optional<std::uint16_t> udp_port() const;
        [[nodiscard]] std::optional<std::uint16_t> ws_port() const;

        /// Called on the event-loop thread after setup, before the first event.
        void on_setup(std::function<void(Emulation &)> fn);

    private:
        struct Impl;
        std::unique_ptr<Impl> impl_;
    };

    /// "key = value" lines. Wall-clock dependent lines come last and are
    /// prefixed with "wall.".
    std::string format_report(const RunConfig &cfg, const RunResult &r);

    /// Parses the deterministic part of a report back into key/value pairs.
    std::map<std::string, std::string> parse_report(const std::string &text);
} // namespace pedemu::run
