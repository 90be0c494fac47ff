#include "pedemu/bridge/device_link.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <arpa/inet.h>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace pedemu::bridge
{
    namespace
    {
        sockaddr_in resolve(const Endpoint &ep)
        {
            sockaddr_in addr{};
            addr.sin_family = AF_INET;
            addr.sin_port = htons(ep.port);
            if (ep.host.empty() || ep.host == "0.0.0.0" || ep.host == "*")
            {
                addr.sin_addr.s_addr = htonl(INADDR_ANY);
                return addr;
            }
            if (inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1)
            {
                return addr;
            }
            addrinfo hints{};
            hints.ai_family = AF_INET;
            hints.ai_socktype = SOCK_DGRAM;
            addrinfo *res = nullptr;
            if (getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr)
            {
                throw LinkError("cannot resolve host '" + ep.host + "'");
            }
            addr.sin_addr = reinterpret_cast<sockaddr_in *>(res->ai_addr)->sin_addr;
            freeaddrinfo(res);
            return addr;
        }
    } // namespace

    Endpoint parse_endpoint(const std::string &text)
    {
        const auto colon = text.rfind(':');
        if (colon == std::string::npos)
        {
            throw LinkError("endpoint '" + text + "' must be host:port");
        }
        Endpoint ep;
        ep.host = text.substr(0, colon);
        const auto port = text.substr(colon + 1);
        unsigned value = 0;
        const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
        if (ec != std::errc() || ptr != port.data() + port.size() || value > 65535)
        {
            throw LinkError("endpoint '" + text + "' has an invalid port");
        }
        ep.port = static_cast<std::uint16_t>(value);
        return ep;
    }

    UdpDeviceLink::UdpDeviceLink(const Endpoint &listen, const Endpoint &device)
    {
        fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
        if (fd_ < 0)
        {
            throw LinkError(fmt::format("socket: {}", std::strerror(errno)));
        }
        const auto local = resolve(listen);
        if (::bind(fd_, reinterpret_cast<const sockaddr *>(&local), sizeof(local)) != 0)
        {
            const auto err = errno;
            ::close(fd_);
            throw LinkError(fmt::format("bind {}:{}: {}", listen.host, listen.port, std::strerror(err)));
        }
        sockaddr_in bound{};
        socklen_t len = sizeof(bound);
        ::getsockname(fd_, reinterpret_cast<sockaddr *>(&bound), &len);
        local_port_ = ntohs(bound.sin_port);

        const auto dev = resolve(device);
        device_addr_.resize(sizeof(dev));
        std::memcpy(device_addr_.data(), &dev, sizeof(dev));
    }

    UdpDeviceLink::~UdpDeviceLink()
    {
        stop();
        if (fd_ >= 0)
        {
            ::close(fd_);
        }
    }

    bool UdpDeviceLink::send(const Datagram &d)
    {
        const auto n = ::sendto(fd_, d.data(), d.size(), 0, reinterpret_cast<const sockaddr *>(device_addr_.data()),
                                static_cast<socklen_t>(device_addr_.size()));
        if (n != static_cast<ssize_t>(d.size()))
        {
            if (send_failures_.fetch_add(1) == 0)
            {
                spdlog::warn("bridge: sending to device failed: {}", std::strerror(errno));
            }
            return false;
        }
        return true;
    }

    void UdpDeviceLink::set_receiver(Receiver fn)
    {
        std::lock_guard lock(receiver_mutex_);
        receiver_ = std::move(fn);
    }

    void UdpDeviceLink::start()
    {
        if (!thread_.joinable())
        {
            thread_ = std::jthread([this](const std::stop_token &st) { receive_loop(st); });
        }
    }

    void UdpDeviceLink::stop()
    {
        if (thread_.joinable())
        {
            thread_.request_stop();
            thread_.join();
        }
    }

    void UdpDeviceLink::receive_loop(const std::stop_token &st)
    {
        std::vector<std::uint8_t> buf(65536);
        while (!st.stop_requested())
        {
            pollfd p{fd_, POLLIN, 0};
            if (::poll(&p, 1, 50) <= 0 || (p.revents & POLLIN) == 0)
            {
                continue;
            }
            const auto n = ::recv(fd_, buf.data(), buf.size(), 0);
            if (n < 0)
            {
                continue;
            }
            Datagram d(buf.begin(), buf.begin() + n);
            std::lock_guard lock(receiver_mutex_);
            if (receiver_)
            {
                receiver_(std::move(d));
            }
        }
    }

    bool MemoryDeviceLink::send(const Datagram &d)
    {
        std::lock_guard lock(mutex_);
        sent_.push_back(d);
        return true;
    }

    void MemoryDeviceLink::set_receiver(Receiver fn)
    {
        std::lock_guard lock(mutex_);
        receiver_ = std::move(fn);
    }

    void MemoryDeviceLink::deliver(Datagram d)
    {
        Receiver fn;
        {
            std::lock_guard lock(mutex_);
            fn = receiver_;
        }
        if (fn)
        {
            fn(std::move(d));
        }
    }

    std::vector<Datagram> MemoryDeviceLink::sent() const
    {
        std::lock_guard lock(mutex_);
        return sent_;
    }

    bool FanoutDeviceLink::send(const Datagram &d)
    {
        bool ok = true;
        for (auto *l : links_)
        {
            ok = l->send(d) && ok;
        }
        return ok;
    }

    void FanoutDeviceLink::set_receiver(Receiver fn)
    {
        for (auto *l : links_)
        {
            l->set_receiver(fn);
        }
    }

    void FanoutDeviceLink::start()
    {
        for (auto *l : links_)
        {
            l->start();
        }
    }

    void FanoutDeviceLink::stop()
    {
        for (auto *l : links_)
        {
            l->stop();
        }
    }
} // namespace pedemu::bridge
