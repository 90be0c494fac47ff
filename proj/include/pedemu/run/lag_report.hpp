#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pedemu::run
{
    class LagReportError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    struct LagSummary
    {
        std::size_t samples = 0;
        double span_s = 0.0; // last t_real - first t_real
        double rate_hz = 0.0;
        double max_offset = 0.0;
        double min_offset = 0.0;
        double median_offset = 0.0;
        double mean_offset = 0.0;
        double frac_abs_below_half = 0.0; // |offset| < 0.5 s
        double frac_over_1s = 0.0;        // offset > 1 s
        double frac_over_5s = 0.0;        // offset > 5 s, the feasibility criterion
    };

    /// Reads a "t_real_s,t_sim_s,offset_s" CSV (header required). Throws
    /// LagReportError naming the line for malformed rows and for empty files.
    LagSummary summarize_lag_csv(const std::string &path);
    LagSummary summarize_lag_text(const std::string &text);

    std::string format_lag_summary(const LagSummary &s);
} // namespace pedemu::run
