#pragma once

#include "httplib.h"
#include "json.hpp"

#include <atomic>
#include <functional>
#include <string>
#include <thread>

namespace commitlink::test_support {

/// Local HTTP server answering POSTs on one path with a JSON handler. The
/// handler returns the status and body; requests are counted.
class MockServer {
public:
    using Handler = std::function<std::pair<int, std::string>(const httplib::Request&)>;

    MockServer(std::string path, Handler handler) {
        server_.Post(path, [this, handler](const httplib::Request& req, httplib::Response& res) {
            ++requests;
            const auto [status, body] = handler(req);
            res.status = status;
            res.set_content(body, "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        path_ = std::move(path);
    }

    ~MockServer() {
        server_.stop();
        thread_.join();
    }

    MockServer(const MockServer&) = delete;
    MockServer& operator=(const MockServer&) = delete;

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + path_; }

    std::atomic<int> requests{0};

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::string path_;
};

} // namespace commitlink::test_support
