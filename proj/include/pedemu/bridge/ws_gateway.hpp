#pragma once

#include "pedemu/bridge/device_link.hpp"
#include "pedemu/geo/offset.hpp"
#include "pedemu/sim/scheduler.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

namespace pedemu::bridge
{
    /// WebSocket server for the virtual-device UI. Text frames published here
    /// go to every connected client; text frames from clients are handed to
    /// the message callback on the gateway's I/O thread.
    class WsGateway
    {
    public:
        using MessageFn = std::function<void(const std::string &)>;

        /// Binds host:port (port 0 picks a free port) and starts the I/O thread.
        WsGateway(const std::string &host, std::uint16_t port, MessageFn on_message);
        ~WsGateway();
        WsGateway(const WsGateway &) = delete;
        WsGateway &operator=(const WsGateway &) = delete;

        /// Thread-safe; dropped silently when no client is connected.
        void publish(std::string text);

        [[nodiscard]] std::uint16_t port() const noexcept;
        [[nodiscard]] std::size_t client_count() const noexcept;

        void stop();

    private:
        struct Impl;
        std::unique_ptr<Impl> impl_;
    };

    /// The gateway seen as a device: outbound frames are mirrored as JSON and
    /// UI setPosition messages come back as device BEACON datagrams.
    class WsDeviceLink final : public DeviceLink
    {
    public:
        WsDeviceLink(const Endpoint &listen, geo::OffsetTransform xf);

        bool send(const Datagram &d) override;
        void set_receiver(Receiver fn) override;
        void start() override {}
        void stop() override;

        void publish_lag(const sim::LagSample &s);

        [[nodiscard]] std::uint16_t port() const noexcept { return gateway_.port(); }
        [[nodiscard]] std::uint64_t rejected() const noexcept { return rejected_; }

    private:
        void on_text(const std::string &text);

        geo::OffsetTransform xf_;
        std::mutex mutex_;
        Receiver receiver_;
        std::atomic<std::uint64_t> rejected_{0};
        WsGateway gateway_; // last: its I/O thread calls on_text
    };
} // namespace pedemu::bridge
