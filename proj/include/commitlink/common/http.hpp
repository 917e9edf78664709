#pragma once

#include "json.hpp"

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>

namespace commitlink {

/// Connection settings for a remote JSON endpoint. Credentials are resolved
/// from the environment by the caller and never persisted.
struct EndpointConfig {
    std::string url;              ///< e.g. "http://127.0.0.1:8080/v1/embed"
    std::string auth_token;       ///< sent as "Authorization: Bearer <token>" when non-empty
    int timeout_ms = 60'000;
    int max_retries = 3;          ///< attempts after the first one
    int backoff_ms = 500;         ///< doubled on every retry
    int min_interval_ms = 0;      ///< per-endpoint rate limit between request starts
    std::size_t max_concurrency = 4;
};

/// POSTs JSON bodies to one endpoint. Thread-safe; concurrent callers are
/// throttled by `max_concurrency` and `min_interval_ms`.
class JsonEndpoint {
public:
    explicit JsonEndpoint(EndpointConfig config);
    ~JsonEndpoint();

    JsonEndpoint(const JsonEndpoint&) = delete;
    JsonEndpoint& operator=(const JsonEndpoint&) = delete;

    /// Returns the parsed response body. Transport failures, non-2xx status
    /// codes and unparseable bodies are retried with exponential backoff;
    /// throws RemoteError once retries are exhausted.
    nlohmann::json post(const nlohmann::json& body);

    const EndpointConfig& config() const { return config_; }

private:
    struct Target {
        std::string base;  // scheme://host[:port]
        std::string path;
    };
    static Target split_url(const std::string& url);

    nlohmann::json post_once(const std::string& payload);
    void wait_for_slot();

    EndpointConfig config_;
    Target target_;
    std::counting_semaphore<256> inflight_;
    std::mutex rate_mutex_;
    std::chrono::steady_clock::time_point next_start_{};
};

/// Reads an environment variable; empty string when unset.
std::string env_or_empty(const std::string& name);

} // namespace commitlink
