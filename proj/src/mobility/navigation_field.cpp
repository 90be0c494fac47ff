#include "pedemu/mobility/navigation_field.hpp"

#include <fmt/format.h>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>

namespace pedemu::mobility
{
    namespace
    {
        constexpr double kInf = std::numeric_limits<double>::infinity();
    }

    SimPoint NavigationField::cell_center(std::size_t i, std::size_t j) const
    {
        return {(static_cast<double>(i) + 0.5) * resolution_, (static_cast<double>(j) + 0.5) * resolution_};
    }

    double NavigationField::value_at(SimPoint p) const
    {
        if (!(p.x >= 0.0 && p.y >= 0.0 && p.x <= width_ && p.y <= height_) || values_.empty())
        {
            return kInf;
        }
        const double u = p.x / resolution_ - 0.5;
        const double v = p.y / resolution_ - 0.5;
        const double fu = std::floor(u);
        const double fv = std::floor(v);
        const double tu = u - fu;
        const double tv = v - fv;
        const auto clamp_i = [](double k, std::size_t n) {
            return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n - 1)));
        };
        const std::size_t i0 = clamp_i(fu, cols_), i1 = clamp_i(fu + 1, cols_);
        const std::size_t j0 = clamp_i(fv, rows_), j1 = clamp_i(fv + 1, rows_);

        const double w[4] = {(1 - tu) * (1 - tv), tu * (1 - tv), (1 - tu) * tv, tu * tv};
        const double c[4] = {cell(i0, j0), cell(i1, j0), cell(i0, j1), cell(i1, j1)};
        double sum = 0.0, weight = 0.0;
        for (int k = 0; k < 4; ++k)
        {
            if (std::isfinite(c[k]) && w[k] > 0.0)
            {
                sum += w[k] * c[k];
                weight += w[k];
            }
        }
        if (weight == 0.0)
        {
            // Sitting exactly on a cell center (or all weight on blocked cells).
            for (int k = 0; k < 4; ++k)
            {
                if (w[k] > 0.0 || (tu == 0.0 && tv == 0.0 && k == 0))
                {
                    return c[k];
                }
            }
            return kInf;
        }
        return sum / weight;
    }

    NavigationField build_navigation_field(const Scenario &s, std::size_t target, double resolution)
    {
        if (target >= s.targets.size())
        {
            throw ScenarioError(fmt::format("no target[{}]", target));
        }
        if (!(resolution > 0.0))
        {
            throw ScenarioError("field resolution must be positive");
        }
        NavigationField f;
        f.resolution_ = resolution;
        f.width_ = s.width;
        f.height_ = s.height;
        f.cols_ = static_cast<std::size_t>(std::ceil(s.width / resolution));
        f.rows_ = static_cast<std::size_t>(std::ceil(s.height / resolution));
        f.values_.assign(f.cols_ * f.rows_, kInf);

        std::vector<char> blocked(f.values_.size(), 0);
        for (std::size_t j = 0; j < f.rows_; ++j)
        {
            for (std::size_t i = 0; i < f.cols_; ++i)
            {
                blocked[j * f.cols_ + i] = s.inside_obstacle(f.cell_center(i, j)) ? 1 : 0;
            }
        }

        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
        const Polygon &goal = s.targets[target];
        const auto cell_of = [&](SimPoint p) {
            const auto i = std::min(static_cast<std::size_t>(std::max(p.x, 0.0) / resolution), f.cols_ - 1);
            const auto j = std::min(static_cast<std::size_t>(std::max(p.y, 0.0) / resolution), f.rows_ - 1);
            return j * f.cols_ + i;
        };

        const auto box = bounding_box(goal);
        for (std::size_t j = cell_of(box.min) / f.cols_; j <= cell_of(box.max) / f.cols_; ++j)
        {
            for (std::size_t i = cell_of(box.min) % f.cols_; i <= cell_of(box.max) % f.cols_; ++i)
            {
                const auto k = j * f.cols_ + i;
                if (!blocked[k] && contains(goal, f.cell_center(i, j)))
                {
                    f.values_[k] = 0.0;
                    open.emplace(0.0, k);
                }
            }
        }
        if (open.empty())
        {
            const auto k = cell_of(centroid(goal));
            if (blocked[k])
            {
                throw ScenarioError(fmt::format("target[{}] lies inside an obstacle", target));
            }
            f.values_[k] = 0.0;
            open.emplace(0.0, k);
        }

        const double diag = resolution * std::numbers::sqrt2;
        while (!open.empty())
        {
            const auto [d, k] = open.top();
            open.pop();
            if (d > f.values_[k])
            {
                continue;
            }
            const auto i = static_cast<std::ptrdiff_t>(k % f.cols_);
            const auto j = static_cast<std::ptrdiff_t>(k / f.cols_);
            for (int dj = -1; dj <= 1; ++dj)
            {
                for (int di = -1; di <= 1; ++di)
                {
                    if (di == 0 && dj == 0)
                    {
                        continue;
                    }
                    const auto ni = i + di;
                    const auto nj = j + dj;
                    if (ni < 0 || nj < 0 || ni >= static_cast<std::ptrdiff_t>(f.cols_) ||
                        nj >= static_cast<std::ptrdiff_t>(f.rows_))
                    {
                        continue;
                    }
                    const auto nk = static_cast<std::size_t>(nj) * f.cols_ + static_cast<std::size_t>(ni);
                    if (blocked[nk])
                    {
                        continue;
                    }
                    const double nd = d + ((di != 0 && dj != 0) ? diag : resolution);
                    if (nd < f.values_[nk])
                    {
                        f.values_[nk] = nd;
                        open.emplace(nd, nk);
                    }
                }
            }
        }

        // Every source cell must reach the target.
        const auto sbox = bounding_box(s.source.region);
        bool any = false;
        for (std::size_t j = cell_of(sbox.min) / f.cols_; j <= cell_of(sbox.max) / f.cols_; ++j)
        {
            for (std::size_t i = cell_of(sbox.min) % f.cols_; i <= cell_of(sbox.max) % f.cols_; ++i)
            {
                if (contains(s.source.region, f.cell_center(i, j)))
                {
                    any = true;
                    if (!std::isfinite(f.values_[j * f.cols_ + i]))
                    {
                        throw ScenarioError(fmt::format("target[{}] is unreachable from the source region", target));
                    }
                }
            }
        }
        if (!any && !std::isfinite(f.values_[cell_of(centroid(s.source.region))]))
        {
            throw ScenarioError(fmt::format("target[{}] is unreachable from the source region", target));
        }
        return f;
    }
} // namespace pedemu::mobility
