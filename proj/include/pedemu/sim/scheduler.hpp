#pragma once

#include "pedemu/sim/time.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace pedemu::sim
{
    using NodeId = std::uint32_t;

    struct Event
    {
        SimTime due;
        std::uint64_t seq = 0; // assigned by the scheduler on insertion
        NodeId target = 0;
        std::uint32_t kind = 0;
        std::function<void()> action;
    };

    enum class ClockMode
    {
        Virtual,
        RealTime,
    };

    /// One observation of wall-clock vs. simulation time.
    struct LagSample
    {
        double t_real = 0.0; // seconds since the wall-clock base
        double t_sim = 0.0;  // seconds
        double offset = 0.0; // t_real - t_sim
    };

    struct LagStats
    {
        std::size_t count = 0;
        double max_offset = 0.0;
        double max_abs_offset = 0.0;
        double mean_offset = 0.0;
    };

    LagStats summarize(const std::vector<LagSample> &samples);

    struct RunReport
    {
        std::uint64_t events_executed = 0;
        std::uint64_t external_injected = 0;
        std::uint64_t trace_hash = 0;
        SimTime end_time;
        double wall_seconds = 0.0;
        bool stopped = false;
        std::vector<LagSample> lag_samples; // RealTime mode only
        LagStats lag;
    };

    class CausalityError : public std::logic_error
    {
    public:
        using std::logic_error::logic_error;
    };

    /// Raised when an event handler throws; identifies the offending event.
    class EventFailure : public std::runtime_error
    {
    public:
        EventFailure(const Event &ev, const std::string &what);

        SimTime due;
        std::uint64_t seq;
        NodeId target;
        std::uint32_t kind;
    };

    /// Single-threaded discrete-event dispatcher with an optional wall-clock lock.
    ///
    /// Events run in (due, seq) order. In RealTime mode an event due at t_sim is
    /// held until base + t_sim on the steady clock; it may run later than that
    /// but never earlier. Other threads interact only through post(),
    /// request_stop() and sample_lag().
    class Scheduler
    {
    public:
        Scheduler() = default;
        Scheduler(const Scheduler &) = delete;
        Scheduler &operator=(const Scheduler &) = delete;

        [[nodiscard]] SimTime now() const noexcept { return now_; }

        /// Enqueue ev; returns its insertion sequence number.
        std::uint64_t schedule(Event ev);
        std::uint64_t schedule_at(SimTime due, NodeId target, std::uint32_t kind, std::function<void()> action);
        std::uint64_t schedule_in(Duration delay, NodeId target, std::uint32_t kind, std::function<void()> action);

        [[nodiscard]] std::size_t pending() const noexcept { return queue_.size(); }

        /// Fixes the wall-clock base now (t_sim = now() maps to this instant) and
        /// switches the clock to RealTime. run_until(RealTime) calls this itself if
        /// the clock was not started beforehand.
        void start_realtime_clock();

        RunReport run_until(SimTime t_end, ClockMode mode);

        /// Rebases the wall clock so the current offset becomes zero. Returns false
        /// (and logs a warning) when the clock is not in RealTime mode.
        bool sync_to_wallclock();

        /// Thread-safe injection of external input. The action runs as an event
        /// stamped with the simulation time current at drain.
        void post(NodeId target, std::uint32_t kind, std::function<void()> action);

        void request_stop();

        /// Thread-safe snapshot of t_real / t_sim.
        [[nodiscard]] LagSample sample_lag() const;

        [[nodiscard]] ClockMode clock_mode() const;
        /// Steady-clock instant that corresponds to t_sim = 0.
        [[nodiscard]] std::chrono::steady_clock::time_point wallclock_base() const;

        void set_lag_interval(Duration interval) { lag_interval_ = interval; }
        /// Called from the sampler thread for every sample.
        void set_lag_observer(std::function<void(const LagSample &)> fn) { lag_observer_ = std::move(fn); }
        void set_trace_sink(std::function<void(const Event &)> fn) { trace_sink_ = std::move(fn); }

    private:
        struct Later
        {
            bool operator()(const Event &a, const Event &b) const noexcept
            {
                if (a.due != b.due)
                {
                    return a.due > b.due;
                }
                return a.seq > b.seq;
            }
        };

        struct Posted
        {
            NodeId target;
            std::uint32_t kind;
            std::function<void()> action;
        };

        void drain_inbox(SimTime stamp);
        void dispatch(Event ev);
        void publish_now(std::int64_t now_us, std::int64_t idle_limit_us);
        [[nodiscard]] std::int64_t wall_elapsed_us() const;

        std::priority_queue<Event, std::vector<Event>, Later> queue_;
        std::uint64_t next_seq_ = 1;
        SimTime now_;
        std::uint64_t trace_hash_ = 0xcbf29ce484222325ULL;
        std::uint64_t executed_ = 0;
        std::uint64_t injected_ = 0;

        // Inbox, shared with producer threads.
        mutable std::mutex inbox_mutex_;
        std::condition_variable inbox_cv_;
        std::vector<Posted> inbox_;
        std::atomic<bool> stop_{false};

        // Clock state, shared with the lag sampler.
        mutable std::mutex clock_mutex_;
        ClockMode mode_ = ClockMode::Virtual;
        std::int64_t base_ns_ = 0;
        std::int64_t published_now_us_ = 0;
        std::int64_t idle_limit_us_ = -1; // >= 0 while waiting for an event due at this time

        Duration lag_interval_{10000};
        std::function<void(const LagSample &)> lag_observer_;
        std::function<void(const Event &)> trace_sink_;
    };

    /// Writes `t_real_s,t_sim_s,offset_s` rows with 6 decimal places.
    void write_lag_csv(const std::string &path, const std::vector<LagSample> &samples);
} // namespace pedemu::sim
