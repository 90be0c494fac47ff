#include "cli.hpp"

#include "pedemu/mobility/scenario.hpp"
#include "pedemu/run/config.hpp"
#include "pedemu/run/emulation.hpp"
#include "pedemu/run/lag_report.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <thread>

namespace pedemu::cli
{
    namespace
    {
        struct RunFlags
        {
            std::string config;
            bool print_config = false;
            std::vector<std::string> set;
            std::optional<std::string> mode;
            std::optional<std::string> nodes;
            std::optional<std::string> duration;
            std::optional<std::string> seed;
            std::optional<std::string> scenario;
            std::optional<std::string> lag_out;
            std::optional<std::string> map_out;
            std::optional<std::string> report_out;
            std::optional<std::string> listen_udp;
            std::optional<std::string> device;
            std::optional<std::string> bridge_mode;
            std::optional<std::string> ws;
        };

        run::Settings overrides_from(const RunFlags &f)
        {
            run::Settings s;
            for (const auto &kv : f.set)
            {
                const auto eq = kv.find('=');
                if (eq == std::string::npos || eq == 0)
                {
                    throw run::ConfigError(kv, "--set expects key=value");
                }
                s[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
            const std::pair<const std::optional<std::string> *, const char *> flags[] = {
                {&f.mode, "run.mode"},
                {&f.nodes, "run.nodes"},
                {&f.duration, "run.duration"},
                {&f.seed, "run.seed"},
                {&f.scenario, "run.scenario"},
                {&f.lag_out, "run.lag_out"},
                {&f.map_out, "run.map_out"},
                {&f.report_out, "run.report_out"},
                {&f.listen_udp, "bridge.listen"},
                {&f.device, "bridge.device"},
                {&f.bridge_mode, "bridge.mode"},
                {&f.ws, "bridge.ws_listen"},
            };
            for (const auto &[value, key] : flags)
            {
                if (*value)
                {
                    s[key] = **value;
                }
            }
            return s;
        }

        /// Blocks SIGINT/SIGTERM for the calling thread (and threads it
        /// spawns) and turns them into a stop request.
        class SignalStop
        {
        public:
            explicit SignalStop(run::Emulation &emu)
            {
                sigemptyset(&set_);
                sigaddset(&set_, SIGINT);
                sigaddset(&set_, SIGTERM);
                pthread_sigmask(SIG_BLOCK, &set_, &old_);
                waiter_ = std::jthread([this, &emu](const std::stop_token &st) {
                    const timespec tick{0, 100'000'000};
                    while (!st.stop_requested())
                    {
                        if (sigtimedwait(&set_, nullptr, &tick) > 0)
                        {
                            spdlog::warn("signal received, stopping");
                            emu.request_stop();
                        }
                    }
                });
            }

            ~SignalStop()
            {
                waiter_.request_stop();
                waiter_.join();
                pthread_sigmask(SIG_SETMASK, &old_, nullptr);
            }

            SignalStop(const SignalStop &) = delete;
            SignalStop &operator=(const SignalStop &) = delete;

        private:
            sigset_t set_{};
            sigset_t old_{};
            std::jthread waiter_;
        };

        int do_run(const RunFlags &flags)
        {
            run::Settings file;
            if (!flags.config.empty())
            {
                file = run::load_ini(flags.config);
            }
            const auto merged = run::merge(file, overrides_from(flags));
            const auto cfg = run::build_config(merged);
            if (flags.print_config)
            {
                for (const auto &[k, v] : merged)
                {
                    std::cout << k << " = " << v << '\n';
                }
                return 0;
            }
            spdlog::info("run: mode {}, {} nodes, {} s, seed {}", run::to_string(cfg.mode), cfg.nodes, cfg.duration_s,
                         cfg.seed);

            run::Emulation emu(cfg);
            const SignalStop guard(emu);
            const auto result = emu.run();
            std::cout << run::format_report(cfg, result) << std::flush;
            return 0;
        }

        int do_lag_report(const std::string &path)
        {
            const auto s = run::summarize_lag_csv(path);
            std::cout << run::format_lag_summary(s) << std::flush;
            return 0;
        }
    } // namespace

    int main(int argc, char **argv)
    {
        CLI::App app{"Pedestrian communication emulation testbed"};
        app.require_subcommand(1);
        std::string log_level = "info";
        app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")->capture_default_str();

        RunFlags rf;
        auto *run_cmd = app.add_subcommand("run", "Run a scenario in virtual or real-time mode");
        run_cmd->add_option("--config", rf.config, "INI configuration file");
        run_cmd->add_flag("--print-config", rf.print_config, "Print the effective settings and exit");
        run_cmd->add_option("--set", rf.set, "Override any config key (key=value), repeatable");
        run_cmd->add_option("--mode", rf.mode, "virtual | realtime (run.mode)");
        run_cmd->add_option("--nodes", rf.nodes, "Number of simulated pedestrian nodes (run.nodes)");
        run_cmd->add_option("--duration", rf.duration, "Simulated seconds (run.duration)");
        run_cmd->add_option("--seed", rf.seed, "Run seed (run.seed)");
        run_cmd->add_option("--scenario", rf.scenario, "Scenario file (run.scenario)");
        run_cmd->add_option("--lag-out", rf.lag_out, "Lag CSV path, real-time mode (run.lag_out)");
        run_cmd->add_option("--map-out", rf.map_out, "Density map CSV path (run.map_out)");
        run_cmd->add_option("--report-out", rf.report_out, "Run report path (run.report_out)");
        run_cmd->add_option("--listen-udp", rf.listen_udp, "Bridge UDP listen host:port (bridge.listen)");
        run_cmd->add_option("--device", rf.device, "Device UDP host:port (bridge.device)");
        run_cmd->add_option("--bridge-mode", rf.bridge_mode, "export | inbound (bridge.mode)");
        run_cmd->add_option("--ws", rf.ws, "WebSocket gateway host:port (bridge.ws_listen)");

        std::string lag_path;
        auto *lag_cmd = app.add_subcommand("lag-report", "Summarize a lag CSV");
        lag_cmd->add_option("csv", lag_path, "Lag CSV written by run --lag-out")->required();

        auto *scn_cmd = app.add_subcommand("default-scenario", "Print the built-in scenario");
        auto *keys_cmd = app.add_subcommand("config-keys", "List every configuration key");

        try
        {
            app.parse(argc, argv);
        }
        catch (const CLI::ParseError &e)
        {
            return app.exit(e);
        }

        if (!spdlog::get("pedemu"))
        {
            spdlog::set_default_logger(spdlog::stderr_color_mt("pedemu"));
        }
        spdlog::set_level(spdlog::level::from_str(log_level));
        try
        {
            if (*run_cmd)
            {
                return do_run(rf);
            }
            if (*lag_cmd)
            {
                return do_lag_report(lag_path);
            }
            if (*scn_cmd)
            {
                std::cout << mobility::format_scenario(mobility::default_scenario());
                return 0;
            }
            if (*keys_cmd)
            {
                for (const auto &k : run::known_keys())
                {
                    std::cout << k << '\n';
                }
                return 0;
            }
        }
        catch (const run::ConfigError &e)
        {
            spdlog::error("config error: {}", e.what());
            return 2;
        }
        catch (const run::LagReportError &e)
        {
            spdlog::error("lag-report: {}", e.what());
            return 2;
        }
        catch (const std::exception &e)
        {
            spdlog::error("{}", e.what());
            return 1;
        }
        return 0;
    }
} // namespace pedemu::cli
