#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace pedemu::bridge
{
    using Datagram = std::vector<std::uint8_t>;

    class LinkError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Datagram transport to one external device. The receive callback runs on
    /// the link's own thread.
    class DeviceLink
    {
    public:
        using Receiver = std::function<void(Datagram)>;

        virtual ~DeviceLink() = default;

        /// Fire-and-forget; returns false if the datagram could not be handed off.
        virtual bool send(const Datagram &d) = 0;
        virtual void set_receiver(Receiver fn) = 0;
        virtual void start() = 0;
        virtual void stop() = 0;
    };

    struct Endpoint
    {
        std::string host;
        std::uint16_t port = 0;
    };

    /// Parses "host:port"; throws LinkError.
    Endpoint parse_endpoint(const std::string &text);

    class UdpDeviceLink final : public DeviceLink
    {
    public:
        /// Binds the listen endpoint immediately (port 0 picks a free port).
        UdpDeviceLink(const Endpoint &listen, const Endpoint &device);
        ~UdpDeviceLink() override;

        bool send(const Datagram &d) override;
        void set_receiver(Receiver fn) override;
        void start() override;
        void stop() override;

        [[nodiscard]] std::uint16_t local_port() const noexcept { return local_port_; }
        [[nodiscard]] std::uint64_t send_failures() const noexcept { return send_failures_; }

    private:
        void receive_loop(const std::stop_token &st);

        int fd_ = -1;
        std::uint16_t local_port_ = 0;
        std::vector<std::uint8_t> device_addr_; // sockaddr_in bytes
        std::mutex receiver_mutex_;
        Receiver receiver_;
        std::jthread thread_;
        std::atomic<std::uint64_t> send_failures_{0};
    };

    /// In-process link for tests: records sent datagrams and lets the test
    /// play the device side.
    class MemoryDeviceLink final : public DeviceLink
    {
    public:
        bool send(const Datagram &d) override;
        void set_receiver(Receiver fn) override;
        void start() override {}
        void stop() override {}

        /// Simulates a datagram arriving from the device.
        void deliver(Datagram d);
        [[nodiscard]] std::vector<Datagram> sent() const;

    private:
        mutable std::mutex mutex_;
        std::vector<Datagram> sent_;
        Receiver receiver_;
    };

    /// Sends to every member link and merges their inbound streams. Members
    /// are not owned.
    class FanoutDeviceLink final : public DeviceLink
    {
    public:
        explicit FanoutDeviceLink(std::vector<DeviceLink *> links) : links_(std::move(links)) {}

        bool send(const Datagram &d) override;
        void set_receiver(Receiver fn) override;
        void start() override;
        void stop() override;

    private:
        std::vector<DeviceLink *> links_;
    };
} // namespace pedemu::bridge
