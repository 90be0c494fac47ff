#include "pedemu/run/lag_report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace pedemu::run
{
    namespace
    {
        bool parse_field(std::string_view f, double &out)
        {
            while (!f.empty() && (f.front() == ' ' || f.front() == '\t'))
            {
                f.remove_prefix(1);
            }
            while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r'))
            {
                f.remove_suffix(1);
            }
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), out);
            return !f.empty() && ec == std::errc() && ptr == f.data() + f.size() && std::isfinite(out);
        }
    } // namespace

    LagSummary summarize_lag_text(const std::string &text)
    {
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        std::vector<double> t_real;
        std::vector<double> offsets;
        bool header = false;
        while (std::getline(in, line))
        {
            ++lineno;
            if (!line.empty() && line.back() == '\r')
            {
                line.pop_back();
            }
            if (line.empty())
            {
                continue;
            }
            if (!header)
            {
                if (line != "t_real_s,t_sim_s,offset_s")
                {
                    throw LagReportError(
                        fmt::format("line {}: expected header 't_real_s,t_sim_s,offset_s', got '{}'", lineno, line));
                }
                header = true;
                continue;
            }
            double v[3] = {};
            std::string_view rest(line);
            for (int i = 0; i < 3; ++i)
            {
                const auto comma = rest.find(',');
                const bool last = i == 2;
                if (last != (comma == std::string_view::npos))
                {
                    throw LagReportError(fmt::format("line {}: expected 3 comma-separated fields", lineno));
                }
                const auto field = last ? rest : rest.substr(0, comma);
                if (!parse_field(field, v[i]))
                {
                    throw LagReportError(fmt::format("line {}: field {} is not a number: '{}'", lineno, i + 1,
                                                     std::string(field)));
                }
                if (!last)
                {
                    rest.remove_prefix(comma + 1);
                }
            }
            if (std::abs((v[0] - v[1]) - v[2]) > 1e-3)
            {
                throw LagReportError(fmt::format("line {}: offset_s does not equal t_real_s - t_sim_s", lineno));
            }
            t_real.push_back(v[0]);
            offsets.push_back(v[2]);
        }
        if (!header)
        {
            throw LagReportError("empty lag file");
        }
        if (offsets.empty())
        {
            throw LagReportError("lag file has a header but no samples");
        }

        LagSummary s;
        s.samples = offsets.size();
        s.span_s = t_real.back() - t_real.front();
        s.rate_hz = s.span_s > 0.0 ? static_cast<double>(s.samples - 1) / s.span_s : 0.0;
        double sum = 0.0;
        std::size_t below_half = 0;
        std::size_t over1 = 0;
        std::size_t over5 = 0;
        for (const double o : offsets)
        {
            sum += o;
            below_half += std::abs(o) < 0.5 ? 1 : 0;
            over1 += o > 1.0 ? 1 : 0;
            over5 += o > 5.0 ? 1 : 0;
        }
        const auto n = static_cast<double>(s.samples);
        s.mean_offset = sum / n;
        s.frac_abs_below_half = static_cast<double>(below_half) / n;
        s.frac_over_1s = static_cast<double>(over1) / n;
        s.frac_over_5s = static_cast<double>(over5) / n;

        std::vector<double> sorted = offsets;
        std::sort(sorted.begin(), sorted.end());
        s.min_offset = sorted.front();
        s.max_offset = sorted.back();
        const std::size_t mid = sorted.size() / 2;
        s.median_offset = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
        return s;
    }

    LagSummary summarize_lag_csv(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
        {
            throw LagReportError("cannot open '" + path + "'");
        }
        std::ostringstream text;
        text << in.rdbuf();
        return summarize_lag_text(text.str());
    }

    std::string format_lag_summary(const LagSummary &s)
    {
        return fmt::format("samples            {}\n"
                           "span_s             {:.3f}\n"
                           "rate_hz            {:.2f}\n"
                           "max_offset_s       {:.6f}\n"
                           "min_offset_s       {:.6f}\n"
                           "median_offset_s    {:.6f}\n"
                           "mean_offset_s      {:.6f}\n"
                           "frac_abs_below_0.5 {:.6f}\n"
                           "frac_over_1s       {:.6f}\n"
                           "frac_over_5s       {:.6f}\n"
                           "feasible           {}\n",
                           s.samples, s.span_s, s.rate_hz, s.max_offset, s.min_offset, s.median_offset, s.mean_offset,
                           s.frac_abs_below_half, s.frac_over_1s, s.frac_over_5s, s.frac_over_5s == 0.0 ? "yes" : "no");
    }
} // namespace pedemu::run
