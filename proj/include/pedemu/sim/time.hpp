#pragma once

#include <chrono>
#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>

namespace pedemu::sim
{
    using Duration = std::chrono::microseconds;

    /// Simulation time in integer microseconds since simulation start.
    /// Seconds only appear at I/O boundaries.
    class SimTime
    {
    public:
        constexpr SimTime() = default;

        static constexpr SimTime from_us(std::int64_t us)
        {
            if (us < 0)
            {
                throw std::invalid_argument("SimTime cannot be negative");
            }
            SimTime t;
            t.us_ = us;
            return t;
        }

        static SimTime from_seconds(double s)
        {
            if (!std::isfinite(s) || s < 0.0)
            {
                throw std::invalid_argument("SimTime must be finite and non-negative");
            }
            return from_us(std::llround(s * 1e6));
        }

        [[nodiscard]] constexpr std::int64_t us() const noexcept { return us_; }
        [[nodiscard]] constexpr double seconds() const noexcept { return static_cast<double>(us_) / 1e6; }

        constexpr auto operator<=>(const SimTime &) const = default;

        friend constexpr SimTime operator+(SimTime t, Duration d) { return from_us(t.us_ + d.count()); }
        friend constexpr Duration operator-(SimTime a, SimTime b) { return Duration{a.us_ - b.us_}; }

    private:
        std::int64_t us_ = 0;
    };

    inline Duration seconds_to_duration(double s)
    {
        return Duration{std::llround(s * 1e6)};
    }

    inline double to_seconds(Duration d)
    {
        return static_cast<double>(d.count()) / 1e6;
    }
} // namespace pedemu::sim
