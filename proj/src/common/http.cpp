#include "commitlink/common/http.hpp"

#include "commitlink/common/errors.hpp"

#include "httplib.h"
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace commitlink {

JsonEndpoint::JsonEndpoint(EndpointConfig config)
    : config_(std::move(config)),
      target_(split_url(config_.url)),
      inflight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(config_.max_concurrency, 1, 256))) {}

JsonEndpoint::~JsonEndpoint() = default;

JsonEndpoint::Target JsonEndpoint::split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint url must include a scheme: " + url);
    }
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw ConfigError("unsupported endpoint scheme: " + scheme);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

void JsonEndpoint::wait_for_slot() {
    if (config_.min_interval_ms <= 0) {
        return;
    }
    std::chrono::steady_clock::time_point start;
    {
        std::lock_guard lock(rate_mutex_);
        const auto now = std::chrono::steady_clock::now();
        start = std::max(now, next_start_);
        next_start_ = start + std::chrono::milliseconds(config_.min_interval_ms);
    }
    std::this_thread::sleep_until(start);
}

nlohmann::json JsonEndpoint::post_once(const std::string& payload) {
    httplib::Client client(target_.base);
    const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!config_.auth_token.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.auth_token);
    }
    auto res = client.Post(target_.path, headers, payload, "application/json");
    if (!res) {
        throw RemoteError("request to " + config_.url + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw RemoteError("request to " + config_.url + " returned HTTP " + std::to_string(res->status));
    }
    auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) {
        throw RemoteError("response from " + config_.url + " is not valid JSON");
    }
    return parsed;
}

nlohmann::json JsonEndpoint::post(const nlohmann::json& body) {
    const std::string payload = body.dump();
    inflight_.acquire();
    struct Release {
        std::counting_semaphore<256>& sem;
        ~Release() { sem.release(); }
    } release{inflight_};

    int backoff = std::max(config_.backoff_ms, 0);
    for (int attempt = 0;; ++attempt) {
        wait_for_slot();
        try {
            return post_once(payload);
        } catch (const RemoteError& e) {
            if (attempt >= config_.max_retries) {
                throw;
            }
            spdlog::warn("{} (attempt {}/{}), retrying in {} ms", e.what(), attempt + 1,
                         config_.max_retries + 1, backoff);
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
    }
}

std::string env_or_empty(const std::string& name) {
    if (name.empty()) {
        return {};
    }
    const char* value = std::getenv(name.c_str());
    return value ? std::string(value) : std::string();
}

} // namespace commitlink
