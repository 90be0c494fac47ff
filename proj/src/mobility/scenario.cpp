#include "pedemu/mobility/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace pedemu::mobility
{
    bool Scenario::inside_obstacle(SimPoint p) const
    {
        return std::any_of(obstacles.begin(), obstacles.end(), [&](const Polygon &o) { return contains(o, p); });
    }

    SimPoint Scenario::clamp_to_bounds(SimPoint p) const
    {
        return {std::clamp(p.x, 0.0, width), std::clamp(p.y, 0.0, height)};
    }

    void validate(const Scenario &s)
    {
        if (!(s.width > 0.0) || !(s.height > 0.0))
        {
            throw ScenarioError("bounds must be positive");
        }
        auto check_poly = [&](const Polygon &p, const std::string &name) {
            if (p.size() < 3)
            {
                throw ScenarioError(name + " needs at least 3 vertices");
            }
            for (const auto &v : p)
            {
                if (!s.in_bounds(v))
                {
                    throw ScenarioError(fmt::format("{} vertex ({}, {}) outside bounds", name, v.x, v.y));
                }
            }
        };
        for (std::size_t i = 0; i < s.obstacles.size(); ++i)
        {
            check_poly(s.obstacles[i], fmt::format("obstacle[{}]", i));
        }
        if (s.targets.empty())
        {
            throw ScenarioError("scenario has no target");
        }
        for (std::size_t i = 0; i < s.targets.size(); ++i)
        {
            check_poly(s.targets[i], fmt::format("target[{}]", i));
        }
        check_poly(s.source.region, "source");
        if (s.source.target >= s.targets.size())
        {
            throw ScenarioError(fmt::format("source refers to missing target[{}]", s.source.target));
        }
        for (std::size_t i = 0; i < s.obstacles.size(); ++i)
        {
            if (polygons_overlap(s.source.region, s.obstacles[i]))
            {
                throw ScenarioError(fmt::format("source region overlaps obstacle[{}]", i));
            }
        }
    }

    namespace
    {
        std::string_view trim(std::string_view v)
        {
            const auto b = v.find_first_not_of(" \t\r");
            if (b == std::string_view::npos)
            {
                return {};
            }
            const auto e = v.find_last_not_of(" \t\r");
            return v.substr(b, e - b + 1);
        }

        std::vector<double> parse_numbers(std::string_view v, int line)
        {
            std::vector<double> out;
            std::istringstream in{std::string(v)};
            std::string tok;
            while (in >> tok)
            {
                double x = 0.0;
                const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
                if (ec != std::errc() || ptr != tok.data() + tok.size())
                {
                    throw ScenarioError(fmt::format("line {}: '{}' is not a number", line, tok));
                }
                out.push_back(x);
            }
            return out;
        }

        Polygon parse_polygon(std::string_view v, int line)
        {
            Polygon poly;
            std::size_t start = 0;
            while (start <= v.size())
            {
                const auto end = std::min(v.find(';', start), v.size());
                const auto part = trim(v.substr(start, end - start));
                if (!part.empty())
                {
                    const auto nums = parse_numbers(part, line);
                    if (nums.size() != 2)
                    {
                        throw ScenarioError(fmt::format("line {}: vertex '{}' needs exactly two numbers", line, part));
                    }
                    poly.push_back({nums[0], nums[1]});
                }
                start = end + 1;
            }
            return poly;
        }

        std::optional<std::size_t> parse_index(std::string_view key, std::string_view prefix)
        {
            if (key.size() < prefix.size() + 3 || key.substr(0, prefix.size()) != prefix || key[prefix.size()] != '[' ||
                key.back() != ']')
            {
                return std::nullopt;
            }
            const auto digits = key.substr(prefix.size() + 1, key.size() - prefix.size() - 2);
            std::size_t idx = 0;
            const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
            if (ec != std::errc() || ptr != digits.data() + digits.size())
            {
                return std::nullopt;
            }
            return idx;
        }

        template <typename Map>
        std::vector<Polygon> collect(const Map &m, const std::string &name)
        {
            std::vector<Polygon> out;
            std::size_t expected = 0;
            for (const auto &[idx, poly] : m)
            {
                if (idx != expected++)
                {
                    throw ScenarioError(fmt::format("{} indices must be contiguous from 0 (missing {}[{}])", name, name,
                                                    expected - 1));
                }
                out.push_back(poly);
            }
            return out;
        }
    } // namespace

    Scenario parse_scenario(std::string_view text)
    {
        Scenario s;
        std::map<std::size_t, Polygon> obstacles, targets;
        bool have_bounds = false, have_source = false;
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size())
        {
            const auto nl = std::min(text.find('\n', pos), text.size());
            auto line = text.substr(pos, nl - pos);
            pos = nl + 1;
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string_view::npos)
            {
                line = line.substr(0, hash);
            }
            line = trim(line);
            if (line.empty())
            {
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos)
            {
                throw ScenarioError(fmt::format("line {}: expected 'key = value'", line_no));
            }
            const auto key = trim(line.substr(0, eq));
            const auto value = trim(line.substr(eq + 1));

            if (key == "bounds")
            {
                const auto nums = parse_numbers(value, line_no);
                if (nums.size() != 2)
                {
                    throw ScenarioError(fmt::format("line {}: bounds needs width and height", line_no));
                }
                s.width = nums[0];
                s.height = nums[1];
                have_bounds = true;
            }
            else if (key == "source")
            {
                const auto arrow = value.find("->");
                if (arrow == std::string_view::npos)
                {
                    throw ScenarioError(fmt::format("line {}: source needs '-> <target index>'", line_no));
                }
                s.source.region = parse_polygon(value.substr(0, arrow), line_no);
                const auto idx = parse_numbers(value.substr(arrow + 2), line_no);
                if (idx.size() != 1 || idx[0] < 0 || idx[0] != static_cast<double>(static_cast<std::size_t>(idx[0])))
                {
                    throw ScenarioError(fmt::format("line {}: bad source target index", line_no));
                }
                s.source.target = static_cast<std::size_t>(idx[0]);
                have_source = true;
            }
            else if (auto i = parse_index(key, "obstacle"))
            {
                if (!obstacles.emplace(*i, parse_polygon(value, line_no)).second)
                {
                    throw ScenarioError(fmt::format("line {}: duplicate obstacle[{}]", line_no, *i));
                }
            }
            else if (auto j = parse_index(key, "target"))
            {
                if (!targets.emplace(*j, parse_polygon(value, line_no)).second)
                {
                    throw ScenarioError(fmt::format("line {}: duplicate target[{}]", line_no, *j));
                }
            }
            else
            {
                throw ScenarioError(fmt::format("line {}: unknown key '{}'", line_no, key));
            }
        }
        if (!have_bounds)
        {
            throw ScenarioError("missing key 'bounds'");
        }
        if (!have_source)
        {
            throw ScenarioError("missing key 'source'");
        }
        s.obstacles = collect(obstacles, "obstacle");
        s.targets = collect(targets, "target");
        validate(s);
        return s;
    }

    Scenario load_scenario(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw ScenarioError("cannot open scenario file: " + path);
        }
        std::stringstream ss;
        ss << in.rdbuf();
        try
        {
            return parse_scenario(ss.str());
        }
        catch (const ScenarioError &e)
        {
            throw ScenarioError(path + ": " + e.what());
        }
    }

    std::string format_scenario(const Scenario &s)
    {
        auto poly = [](const Polygon &p) {
            std::string out;
            for (std::size_t i = 0; i < p.size(); ++i)
            {
                out += fmt::format("{}{} {}", i ? "; " : "", p[i].x, p[i].y);
            }
            return out;
        };
        std::string out = fmt::format("bounds = {} {}\n", s.width, s.height);
        for (std::size_t i = 0; i < s.obstacles.size(); ++i)
        {
            out += fmt::format("obstacle[{}] = {}\n", i, poly(s.obstacles[i]));
        }
        for (std::size_t i = 0; i < s.targets.size(); ++i)
        {
            out += fmt::format("target[{}] = {}\n", i, poly(s.targets[i]));
        }
        out += fmt::format("source = {} -> {}\n", poly(s.source.region), s.source.target);
        return out;
    }

    Scenario default_scenario()
    {
        Scenario s;
        s.width = 415.0;
        s.height = 394.0;
        s.obstacles = {
            rectangle(40, 40, 150, 170),  rectangle(190, 40, 300, 170), rectangle(340, 40, 395, 170),
            rectangle(40, 210, 150, 340), rectangle(190, 210, 300, 340),
        };
        s.targets = {rectangle(350, 350, 380, 380)};
        s.source = Source{rectangle(5, 5, 30, 30), 0};
        return s;
    }
} // namespace pedemu::mobility
