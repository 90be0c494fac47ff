#include "pedemu/bridge/wire.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace pedemu::bridge
{
    namespace
    {
        class Writer
        {
        public:
            void u8(std::uint8_t v) { out_.push_back(v); }
            void u16(std::uint16_t v) { le(v, 2); }
            void u32(std::uint32_t v) { le(v, 4); }
            void u64(std::uint64_t v) { le(v, 8); }
            void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
            void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
            void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

            std::vector<std::uint8_t> &bytes() { return out_; }

        private:
            void le(std::uint64_t v, int n)
            {
                for (int i = 0; i < n; ++i)
                {
                    out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
                }
            }

            std::vector<std::uint8_t> out_;
        };

        class Reader
        {
        public:
            explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

            std::uint8_t u8() { return in_[pos_++]; }
            std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
            std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
            std::uint64_t u64() { return le(8); }
            std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
            float f32() { return std::bit_cast<float>(u32()); }
            double f64() { return std::bit_cast<double>(u64()); }

        private:
            std::uint64_t le(int n)
            {
                std::uint64_t v = 0;
                for (int i = 0; i < n; ++i)
                {
                    v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
                }
                return v;
            }

            std::span<const std::uint8_t> in_;
            std::size_t pos_ = 0;
        };

        void header(Writer &w, MsgType type, std::size_t payload_len)
        {
            for (auto b : kMagic)
            {
                w.u8(b);
            }
            w.u8(kWireVersion);
            w.u8(static_cast<std::uint8_t>(type));
            w.u16(static_cast<std::uint16_t>(payload_len));
            w.u8(0);
        }

        std::optional<geo::Hemisphere> hemisphere(std::uint8_t v)
        {
            if (v > 1)
            {
                return std::nullopt;
            }
            return static_cast<geo::Hemisphere>(v);
        }

        DecodeResult fail(DecodeError e)
        {
            return {std::nullopt, e};
        }

        DecodeResult decode_frame(std::span<const std::uint8_t> in, bool allow_padding)
        {
            if (in.size() < 4 || !std::equal(in.begin(), in.begin() + 4, std::begin(kMagic)))
            {
                return fail(DecodeError::BadMagic);
            }
            if (in.size() < kHeaderSize)
            {
                return fail(DecodeError::LengthMismatch);
            }
            Reader h(in.subspan(4));
            const auto version = h.u8();
            const auto type = h.u8();
            const auto len = h.u16();
            const auto reserved = h.u8();
            if (version != kWireVersion || reserved != 0)
            {
                return fail(DecodeError::BadVersion);
            }
            if (type < 0x01 || type > 0x03)
            {
                return fail(DecodeError::UnknownType);
            }
            const std::size_t end = kHeaderSize + len;
            if (in.size() < end)
            {
                return fail(DecodeError::LengthMismatch);
            }
            if (in.size() > end &&
                (!allow_padding || std::any_of(in.begin() + static_cast<std::ptrdiff_t>(end), in.end(),
                                               [](std::uint8_t b) { return b != 0; })))
            {
                return fail(DecodeError::LengthMismatch);
            }
            Reader r(in.subspan(kHeaderSize, len));

            switch (static_cast<MsgType>(type))
            {
            case MsgType::Beacon: {
                if (len != kBeaconPayload)
                {
                    return fail(DecodeError::LengthMismatch);
                }
                BeaconMsg m;
                m.node_id = r.u32();
                m.zone = r.u8();
                const auto hemi = hemisphere(r.u8());
                if (!hemi)
                {
                    return fail(DecodeError::BadField);
                }
                m.hemisphere = *hemi;
                m.easting = r.f64();
                m.northing = r.f64();
                m.timestamp_ms = r.u64();
                return {WireMessage{m}, DecodeError::None};
            }
            case MsgType::DensityMap: {
                if (len < kMapHeader)
                {
                    return fail(DecodeError::LengthMismatch);
                }
                DensityMapMsg m;
                m.node_id = r.u32();
                m.cell_size_m = r.f32();
                m.zone = r.u8();
                const auto hemi = hemisphere(r.u8());
                const auto count = r.u16();
                if (len != kMapHeader + kMapCellSize * count)
                {
                    return fail(DecodeError::LengthMismatch);
                }
                if (!hemi || count > kMaxMapCells)
                {
                    return fail(DecodeError::BadField);
                }
                m.hemisphere = *hemi;
                m.cells.resize(count);
                for (auto &c : m.cells)
                {
                    c.cell_x = r.i32();
                    c.cell_y = r.i32();
                    c.count = r.f32();
                    c.age_ms = r.u32();
                }
                return {WireMessage{std::move(m)}, DecodeError::None};
            }
            case MsgType::NodeLocation: {
                if (len != kNodeLocationPayload)
                {
                    return fail(DecodeError::LengthMismatch);
                }
                NodeLocationMsg m;
                m.node_id = r.u32();
                m.lat = r.f64();
                m.lon = r.f64();
                m.sim_time_us = r.u64();
                return {WireMessage{m}, DecodeError::None};
            }
            }
            return fail(DecodeError::UnknownType);
        }
    } // namespace

    const char *to_string(DecodeError e)
    {
        switch (e)
        {
        case DecodeError::None:
            return "None";
        case DecodeError::BadMagic:
            return "BadMagic";
        case DecodeError::BadVersion:
            return "BadVersion";
        case DecodeError::LengthMismatch:
            return "LengthMismatch";
        case DecodeError::UnknownType:
            return "UnknownType";
        case DecodeError::BadField:
            return "BadField";
        }
        return "?";
    }

    std::vector<std::uint8_t> encode(const WireMessage &msg)
    {
        Writer w;
        std::visit(
            [&](const auto &m) {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, BeaconMsg>)
                {
                    header(w, MsgType::Beacon, kBeaconPayload);
                    w.u32(m.node_id);
                    w.u8(m.zone);
                    w.u8(static_cast<std::uint8_t>(m.hemisphere));
                    w.f64(m.easting);
                    w.f64(m.northing);
                    w.u64(m.timestamp_ms);
                }
                else if constexpr (std::is_same_v<T, DensityMapMsg>)
                {
                    if (m.cells.size() > kMaxMapCells)
                    {
                        throw std::length_error("density map frame holds at most 61 cells");
                    }
                    header(w, MsgType::DensityMap, kMapHeader + kMapCellSize * m.cells.size());
                    w.u32(m.node_id);
                    w.f32(m.cell_size_m);
                    w.u8(m.zone);
                    w.u8(static_cast<std::uint8_t>(m.hemisphere));
                    w.u16(static_cast<std::uint16_t>(m.cells.size()));
                    for (const auto &c : m.cells)
                    {
                        w.i32(c.cell_x);
                        w.i32(c.cell_y);
                        w.f32(c.count);
                        w.u32(c.age_ms);
                    }
                }
                else
                {
                    header(w, MsgType::NodeLocation, kNodeLocationPayload);
                    w.u32(m.node_id);
                    w.f64(m.lat);
                    w.f64(m.lon);
                    w.u64(m.sim_time_us);
                }
            },
            msg);
        return std::move(w.bytes());
    }

    DecodeResult decode(std::span<const std::uint8_t> bytes)
    {
        return decode_frame(bytes, false);
    }

    DecodeResult decode_padded(std::span<const std::uint8_t> bytes)
    {
        return decode_frame(bytes, true);
    }

    std::vector<std::uint8_t> pad_to(std::vector<std::uint8_t> frame, std::size_t size)
    {
        if (frame.size() < size)
        {
            frame.resize(size, 0);
        }
        return frame;
    }
} // namespace pedemu::bridge
