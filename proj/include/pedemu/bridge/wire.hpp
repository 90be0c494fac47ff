#pragma once

#include "pedemu/geo/utm.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace pedemu::bridge
{
    // Frame: "DPDM" | version u8 | msg_type u8 | payload_len u16 | reserved u8 (0) | payload.
    // Little-endian throughout.
    inline constexpr std::uint8_t kMagic[4] = {0x44, 0x50, 0x44, 0x4D};
    inline constexpr std::uint8_t kWireVersion = 1;
    inline constexpr std::size_t kHeaderSize = 9;
    inline constexpr std::size_t kBeaconPayload = 30;
    inline constexpr std::size_t kNodeLocationPayload = 28;
    inline constexpr std::size_t kMapHeader = 12;
    inline constexpr std::size_t kMapCellSize = 16;
    inline constexpr std::size_t kMaxMapCells = 61;

    enum class MsgType : std::uint8_t
    {
        Beacon = 0x01,
        DensityMap = 0x02,
        NodeLocation = 0x03,
    };

    enum class DecodeError
    {
        None,
        BadMagic,
        BadVersion,
        LengthMismatch,
        UnknownType,
        BadField,
    };

    const char *to_string(DecodeError e);

    struct BeaconMsg
    {
        std::uint32_t node_id = 0;
        std::uint8_t zone = 0;
        geo::Hemisphere hemisphere = geo::Hemisphere::North;
        double easting = 0.0;
        double northing = 0.0;
        std::uint64_t timestamp_ms = 0;

        bool operator==(const BeaconMsg &) const = default;
    };

    struct MapCell
    {
        std::int32_t cell_x = 0;
        std::int32_t cell_y = 0;
        float count = 0.0F;
        std::uint32_t age_ms = 0;

        bool operator==(const MapCell &) const = default;
    };

    struct DensityMapMsg
    {
        std::uint32_t node_id = 0;
        float cell_size_m = 3.0F;
        std::uint8_t zone = 0;
        geo::Hemisphere hemisphere = geo::Hemisphere::North;
        std::vector<MapCell> cells;

        bool operator==(const DensityMapMsg &) const = default;
    };

    struct NodeLocationMsg
    {
        std::uint32_t node_id = 0;
        double lat = 0.0;
        double lon = 0.0;
        std::uint64_t sim_time_us = 0;

        bool operator==(const NodeLocationMsg &) const = default;
    };

    using WireMessage = std::variant<BeaconMsg, DensityMapMsg, NodeLocationMsg>;

    /// Throws std::length_error if a map carries more than kMaxMapCells cells.
    std::vector<std::uint8_t> encode(const WireMessage &msg);

    struct DecodeResult
    {
        std::optional<WireMessage> message;
        DecodeError error = DecodeError::None;

        [[nodiscard]] bool ok() const noexcept { return error == DecodeError::None; }
    };

    /// Total: any input yields either a message or a typed error.
    /// The buffer must hold exactly one frame.
    DecodeResult decode(std::span<const std::uint8_t> bytes);

    /// Like decode, but bytes past the frame are allowed if they are all zero
    /// (frames padded to a fixed packet size).
    DecodeResult decode_padded(std::span<const std::uint8_t> bytes);

    /// Pads a frame with zeros up to `size` bytes (no-op if already longer).
    std::vector<std::uint8_t> pad_to(std::vector<std::uint8_t> frame, std::size_t size);
} // namespace pedemu::bridge
