#include "pedemu/bridge/ws_gateway.hpp"
#include "pedemu/bridge/json_mirror.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include <atomic>
#include <deque>
#include <mutex>
#include <set>
#include <thread>

namespace pedemu::bridge
{
    namespace asio = boost::asio;
    namespace beast = boost::beast;
    namespace websocket = beast::websocket;
    using tcp = asio::ip::tcp;

    namespace
    {
        class Session;

        struct Registry
        {
            std::mutex mutex;
            std::set<std::shared_ptr<Session>> sessions;
            std::atomic<std::size_t> count{0};
        };

        class Session : public std::enable_shared_from_this<Session>
        {
        public:
            Session(tcp::socket socket, Registry &registry, const WsGateway::MessageFn &on_message)
                : ws_(std::move(socket)), registry_(registry), on_message_(on_message)
            {
            }

            void run()
            {
                ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
                ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
                    if (ec)
                    {
                        return;
                    }
                    {
                        std::lock_guard lock(self->registry_.mutex);
                        self->registry_.sessions.insert(self);
                        self->registry_.count = self->registry_.sessions.size();
                    }
                    self->read();
                });
            }

            void send(std::shared_ptr<const std::string> text)
            {
                asio::post(ws_.get_executor(), [self = shared_from_this(), text] {
                    self->queue_.push_back(text);
                    if (self->queue_.size() == 1)
                    {
                        self->write();
                    }
                });
            }

            void close()
            {
                asio::post(ws_.get_executor(), [self = shared_from_this()] {
                    beast::error_code ec;
                    self->ws_.next_layer().close(ec);
                });
            }

        private:
            void read()
            {
                ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
                    if (ec)
                    {
                        self->drop();
                        return;
                    }
                    if (self->ws_.got_text() && self->on_message_)
                    {
                        self->on_message_(beast::buffers_to_string(self->buffer_.data()));
                    }
                    self->buffer_.consume(self->buffer_.size());
                    self->read();
                });
            }

            void write()
            {
                ws_.text(true);
                ws_.async_write(asio::buffer(*queue_.front()),
                                [self = shared_from_this()](beast::error_code ec, std::size_t) {
                                    if (ec)
                                    {
                                        self->drop();
                                        return;
                                    }
                                    self->queue_.pop_front();
                                    if (!self->queue_.empty())
                                    {
                                        self->write();
                                    }
                                });
            }

            void drop()
            {
                std::lock_guard lock(registry_.mutex);
                registry_.sessions.erase(shared_from_this());
                registry_.count = registry_.sessions.size();
            }

            websocket::stream<tcp::socket> ws_;
            beast::flat_buffer buffer_;
            std::deque<std::shared_ptr<const std::string>> queue_;
            Registry &registry_;
            const WsGateway::MessageFn &on_message_;
        };
    } // namespace

    struct WsGateway::Impl
    {
        asio::io_context io{1};
        tcp::acceptor acceptor{io};
        Registry registry;
        MessageFn on_message;
        std::thread thread;
        std::uint16_t port = 0;

        void accept()
        {
            acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
                if (ec)
                {
                    return;
                }
                std::make_shared<Session>(std::move(socket), registry, on_message)->run();
                accept();
            });
        }
    };

    WsGateway::WsGateway(const std::string &host, std::uint16_t port, MessageFn on_message)
        : impl_(std::make_unique<Impl>())
    {
        impl_->on_message = std::move(on_message);
        const auto address = asio::ip::make_address(host.empty() ? "0.0.0.0" : host);
        const tcp::endpoint ep{address, port};
        impl_->acceptor.open(ep.protocol());
        impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
        impl_->acceptor.bind(ep);
        impl_->acceptor.listen();
        impl_->port = impl_->acceptor.local_endpoint().port();
        impl_->accept();
        impl_->thread = std::thread([this] {
            try
            {
                impl_->io.run();
            }
            catch (const std::exception &e)
            {
                spdlog::error("ws gateway: {}", e.what());
            }
        });
    }

    WsGateway::~WsGateway()
    {
        stop();
    }

    void WsGateway::publish(std::string text)
    {
        if (impl_->registry.count == 0)
        {
            return;
        }
        auto shared = std::make_shared<const std::string>(std::move(text));
        std::lock_guard lock(impl_->registry.mutex);
        for (const auto &s : impl_->registry.sessions)
        {
            s->send(shared);
        }
    }

    std::uint16_t WsGateway::port() const noexcept
    {
        return impl_->port;
    }

    std::size_t WsGateway::client_count() const noexcept
    {
        return impl_->registry.count;
    }

    void WsGateway::stop()
    {
        if (!impl_ || !impl_->thread.joinable())
        {
            return;
        }
        asio::post(impl_->io, [this] {
            beast::error_code ec;
            impl_->acceptor.close(ec);
            std::lock_guard lock(impl_->registry.mutex);
            for (const auto &s : impl_->registry.sessions)
            {
                s->close();
            }
        });
        // Give sessions a moment to unwind, then stop the loop regardless.
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        impl_->io.stop();
        impl_->thread.join();
        std::lock_guard lock(impl_->registry.mutex);
        impl_->registry.sessions.clear();
        impl_->registry.count = 0;
    }
} // namespace pedemu::bridge

namespace pedemu::bridge
{
    WsDeviceLink::WsDeviceLink(const Endpoint &listen, geo::OffsetTransform xf)
        : xf_(xf), gateway_(listen.host, listen.port, [this](const std::string &t) { on_text(t); })
    {
    }

    bool WsDeviceLink::send(const Datagram &d)
    {
        const auto r = decode(d);
        if (!r.ok())
        {
            return false;
        }
        gateway_.publish(to_json(*r.message, &xf_));
        return true;
    }

    void WsDeviceLink::set_receiver(Receiver fn)
    {
        std::lock_guard lock(mutex_);
        receiver_ = std::move(fn);
    }

    void WsDeviceLink::stop()
    {
        gateway_.stop();
    }

    void WsDeviceLink::publish_lag(const sim::LagSample &s)
    {
        gateway_.publish(lag_json(s));
    }

    void WsDeviceLink::on_text(const std::string &text)
    {
        std::string error;
        const auto p = parse_ui_message(text, &error);
        Datagram d;
        try
        {
            if (!p)
            {
                throw std::invalid_argument(error);
            }
            const auto now_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                    std::chrono::system_clock::now().time_since_epoch())
                                    .count();
            d = beacon_for_position(*p, xf_, static_cast<std::uint64_t>(now_ms));
        }
        catch (const std::exception &e)
        {
            if (rejected_.fetch_add(1) == 0)
            {
                spdlog::warn("ws gateway: ignoring UI message: {}", e.what());
            }
            return;
        }
        std::lock_guard lock(mutex_);
        if (receiver_)
        {
            receiver_(std::move(d));
        }
    }
} // namespace pedemu::bridge
