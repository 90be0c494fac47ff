#include "pedemu/sim/scheduler.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <thread>

namespace pedemu::sim
{
    namespace
    {
        std::int64_t steady_ns()
        {
            return std::chrono::duration_cast<std::chrono::nanoseconds>(
                       std::chrono::steady_clock::now().time_since_epoch())
                .count();
        }

        std::uint64_t mix(std::uint64_t h, std::uint64_t v)
        {
            for (int i = 0; i < 8; ++i)
            {
                h ^= (v >> (8 * i)) & 0xffU;
                h *= 0x100000001b3ULL;
            }
            return h;
        }
    } // namespace

    EventFailure::EventFailure(const Event &ev, const std::string &what)
        : std::runtime_error(fmt::format("event seq={} due={}us target={} kind={} failed: {}", ev.seq, ev.due.us(),
                                         ev.target, ev.kind, what)),
          due(ev.due), seq(ev.seq), target(ev.target), kind(ev.kind)
    {
    }

    LagStats summarize(const std::vector<LagSample> &samples)
    {
        LagStats s;
        s.count = samples.size();
        if (samples.empty())
        {
            return s;
        }
        s.max_offset = samples.front().offset;
        double sum = 0.0;
        for (const auto &x : samples)
        {
            s.max_offset = std::max(s.max_offset, x.offset);
            s.max_abs_offset = std::max(s.max_abs_offset, std::abs(x.offset));
            sum += x.offset;
        }
        s.mean_offset = sum / static_cast<double>(samples.size());
        return s;
    }

    std::uint64_t Scheduler::schedule(Event ev)
    {
        if (ev.due < now_)
        {
            throw CausalityError(
                fmt::format("event due at {}us is before current time {}us", ev.due.us(), now_.us()));
        }
        if (!ev.action)
        {
            throw std::invalid_argument("event without action");
        }
        ev.seq = next_seq_++;
        const auto seq = ev.seq;
        queue_.push(std::move(ev));
        return seq;
    }

    std::uint64_t Scheduler::schedule_at(SimTime due, NodeId target, std::uint32_t kind, std::function<void()> action)
    {
        return schedule(Event{due, 0, target, kind, std::move(action)});
    }

    std::uint64_t Scheduler::schedule_in(Duration delay, NodeId target, std::uint32_t kind,
                                         std::function<void()> action)
    {
        if (delay.count() < 0)
        {
            throw CausalityError("negative delay");
        }
        return schedule_at(now_ + delay, target, kind, std::move(action));
    }

    void Scheduler::start_realtime_clock()
    {
        std::lock_guard lk(clock_mutex_);
        base_ns_ = steady_ns() - now_.us() * 1000;
        published_now_us_ = now_.us();
        idle_limit_us_ = -1;
        mode_ = ClockMode::RealTime;
    }

    ClockMode Scheduler::clock_mode() const
    {
        std::lock_guard lk(clock_mutex_);
        return mode_;
    }

    std::chrono::steady_clock::time_point Scheduler::wallclock_base() const
    {
        std::lock_guard lk(clock_mutex_);
        return std::chrono::steady_clock::time_point{std::chrono::nanoseconds(base_ns_)};
    }

    void Scheduler::publish_now(std::int64_t now_us, std::int64_t idle_limit_us)
    {
        std::lock_guard lk(clock_mutex_);
        published_now_us_ = now_us;
        idle_limit_us_ = idle_limit_us;
    }

    std::int64_t Scheduler::wall_elapsed_us() const
    {
        std::lock_guard lk(clock_mutex_);
        return (steady_ns() - base_ns_) / 1000;
    }

    LagSample Scheduler::sample_lag() const
    {
        std::lock_guard lk(clock_mutex_);
        const std::int64_t real_ns = steady_ns() - base_ns_;
        std::int64_t sim_us = published_now_us_;
        if (idle_limit_us_ >= 0)
        {
            // Idle in RealTime mode: simulation time follows the wall clock up to the next due event.
            sim_us = std::clamp(real_ns / 1000, published_now_us_, std::max(published_now_us_, idle_limit_us_));
        }
        LagSample s;
        s.t_real = static_cast<double>(real_ns) / 1e9;
        s.t_sim = static_cast<double>(sim_us) / 1e6;
        s.offset = s.t_real - s.t_sim;
        return s;
    }

    bool Scheduler::sync_to_wallclock()
    {
        {
            std::lock_guard lk(clock_mutex_);
            if (mode_ != ClockMode::RealTime)
            {
                spdlog::warn("sync_to_wallclock ignored: clock is in virtual mode");
                return false;
            }
            const std::int64_t wall = steady_ns();
            std::int64_t sim_us = published_now_us_;
            if (idle_limit_us_ >= 0)
            {
                sim_us = std::clamp((wall - base_ns_) / 1000, published_now_us_,
                                    std::max(published_now_us_, idle_limit_us_));
            }
            base_ns_ = wall - sim_us * 1000;
        }
        inbox_cv_.notify_all();
        return true;
    }

    void Scheduler::post(NodeId target, std::uint32_t kind, std::function<void()> action)
    {
        {
            std::lock_guard lk(inbox_mutex_);
            inbox_.push_back(Posted{target, kind, std::move(action)});
        }
        inbox_cv_.notify_all();
    }

    void Scheduler::request_stop()
    {
        {
            std::lock_guard lk(inbox_mutex_);
            stop_ = true;
        }
        inbox_cv_.notify_all();
    }

    void Scheduler::drain_inbox(SimTime stamp)
    {
        std::vector<Posted> items;
        {
            std::lock_guard lk(inbox_mutex_);
            items.swap(inbox_);
        }
        if (items.empty())
        {
            return;
        }
        if (stamp > now_)
        {
            now_ = stamp;
            publish_now(now_.us(), -1);
        }
        for (auto &p : items)
        {
            schedule_at(now_, p.target, p.kind, std::move(p.action));
            ++injected_;
        }
    }

    void Scheduler::dispatch(Event ev)
    {
        now_ = ev.due;
        publish_now(now_.us(), -1);
        trace_hash_ = mix(trace_hash_, static_cast<std::uint64_t>(ev.due.us()));
        trace_hash_ = mix(trace_hash_, ev.seq);
        trace_hash_ = mix(trace_hash_, ev.target);
        trace_hash_ = mix(trace_hash_, ev.kind);
        if (trace_sink_)
        {
            trace_sink_(ev);
        }
        try
        {
            ev.action();
        }
        catch (const std::exception &e)
        {
            throw EventFailure(ev, e.what());
        }
        catch (...)
        {
            throw EventFailure(ev, "unknown exception");
        }
        ++executed_;
    }

    RunReport Scheduler::run_until(SimTime t_end, ClockMode mode)
    {
        if (t_end < now_)
        {
            throw std::invalid_argument("t_end lies in the past");
        }
        const auto wall_start = std::chrono::steady_clock::now();
        const auto executed_before = executed_;
        const auto injected_before = injected_;

        std::vector<LagSample> samples;
        std::mutex samples_mutex;
        std::jthread sampler;

        if (mode == ClockMode::RealTime)
        {
            if (clock_mode() != ClockMode::RealTime)
            {
                start_realtime_clock();
            }
            sampler = std::jthread([this, &samples, &samples_mutex](const std::stop_token &st) {
                const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(lag_interval_);
                auto next = std::chrono::steady_clock::now() + interval;
                while (!st.stop_requested())
                {
                    std::this_thread::sleep_until(next);
                    if (st.stop_requested())
                    {
                        break;
                    }
                    const LagSample s = sample_lag();
                    {
                        std::lock_guard lk(samples_mutex);
                        samples.push_back(s);
                    }
                    if (lag_observer_)
                    {
                        lag_observer_(s);
                    }
                    next += interval;
                    const auto n = std::chrono::steady_clock::now();
                    if (n > next + interval)
                    {
                        next = n + interval;
                    }
                }
            });
        }
        else
        {
            std::lock_guard lk(clock_mutex_);
            mode_ = ClockMode::Virtual;
            published_now_us_ = now_.us();
            idle_limit_us_ = -1;
        }

        bool stopped = false;
        while (true)
        {
            if (stop_)
            {
                stopped = true;
                break;
            }
            if (mode == ClockMode::Virtual)
            {
                drain_inbox(now_);
                if (queue_.empty() || queue_.top().due > t_end)
                {
                    now_ = t_end;
                    publish_now(now_.us(), -1);
                    break;
                }
                Event ev = std::move(const_cast<Event &>(queue_.top()));
                queue_.pop();
                dispatch(std::move(ev));
                continue;
            }

            const bool have_due = !queue_.empty() && queue_.top().due <= t_end;
            const SimTime limit = have_due ? queue_.top().due : t_end;
            bool has_input = false;
            {
                std::unique_lock lk(inbox_mutex_);
                if (inbox_.empty() && !stop_)
                {
                    std::int64_t target_ns = 0;
                    {
                        std::lock_guard ck(clock_mutex_);
                        idle_limit_us_ = limit.us();
                        target_ns = base_ns_ + limit.us() * 1000;
                    }
                    const std::chrono::steady_clock::time_point wake{std::chrono::nanoseconds(target_ns)};
                    inbox_cv_.wait_until(lk, wake, [this] { return !inbox_.empty() || stop_; });
                }
                has_input = !inbox_.empty();
            }
            if (stop_)
            {
                continue;
            }
            const std::int64_t elapsed = wall_elapsed_us();
            if (has_input)
            {
                drain_inbox(SimTime::from_us(std::clamp(elapsed, now_.us(), limit.us())));
                continue;
            }
            if (elapsed < limit.us())
            {
                // Spurious wakeup or the base moved.
                continue;
            }
            if (!have_due)
            {
                now_ = t_end;
                publish_now(now_.us(), -1);
                break;
            }
            Event ev = std::move(const_cast<Event &>(queue_.top()));
            queue_.pop();
            dispatch(std::move(ev));
        }

        if (sampler.joinable())
        {
            sampler.request_stop();
            sampler.join();
        }

        RunReport report;
        report.events_executed = executed_ - executed_before;
        report.external_injected = injected_ - injected_before;
        report.trace_hash = trace_hash_;
        report.end_time = now_;
        report.stopped = stopped;
        report.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
        report.lag_samples = std::move(samples);
        report.lag = summarize(report.lag_samples);
        return report;
    }

    void write_lag_csv(const std::string &path, const std::vector<LagSample> &samples)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
        {
            throw std::runtime_error("cannot open lag CSV for writing: " + path);
        }
        out << "t_real_s,t_sim_s,offset_s\n";
        for (const auto &s : samples)
        {
            out << fmt::format("{:.6f},{:.6f},{:.6f}\n", s.t_real, s.t_sim, s.offset);
        }
    }
} // namespace pedemu::sim
