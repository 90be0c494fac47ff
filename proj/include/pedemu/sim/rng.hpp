#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pedemu::sim
{
    /// Named, independently seeded random substreams derived from one run seed.
    /// A substream's draw sequence depends only on (seed, name).
    class RngStreams
    {
    public:
        explicit RngStreams(std::uint64_t seed) : seed_(seed) {}

        [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

        [[nodiscard]] std::mt19937_64 stream(std::string_view name) const
        {
            // FNV-1a over the substream name.
            std::uint64_t h = 0xcbf29ce484222325ULL;
            for (char c : name)
            {
                h ^= static_cast<unsigned char>(c);
                h *= 0x100000001b3ULL;
            }
            std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                              static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
            return std::mt19937_64(seq);
        }

    private:
        std::uint64_t seed_;
    };
} // namespace pedemu::sim
