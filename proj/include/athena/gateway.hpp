#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "athena/engine.hpp"
#include "athena/run.hpp"

namespace httplib {
class Server;
}

namespace athena {

struct GatewayOptions {
    std::string host = "127.0.0.1";
    int port = 0;  // 0 picks a free port
    std::size_t run_workers = 4;
    std::size_t http_threads = 16;
    std::chrono::milliseconds stream_poll{250};
};

/// REST + server-sent-events surface over a RunEngine:
///
///   POST /v1/sessions                  -> 201 {"id"}
///   POST /v1/sessions/{id}/messages    -> 202 {"run_id"}   body {"text"}
///   GET  /v1/runs/{id}                 -> 200 run summary
///   GET  /v1/runs/{id}/events          -> text/event-stream of RunEvents
///   GET  /v1/tools                     -> 200 [tool documents]
///
/// Runs of one session execute one after another in arrival order; runs of
/// different sessions run in parallel.
class Gateway {
public:
    Gateway(const RunEngine& engine, SessionStore& sessions, GatewayOptions options = {});
    ~Gateway();

    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    /// Binds and serves on a background thread; returns the bound port.
    int start();
    /// Blocks serving on the calling thread.
    void serve_forever();
    void stop();

    int port() const noexcept { return port_; }
    std::string base_url() const;

    std::optional<nlohmann::json> run_summary(const std::string& run_id) const;

private:
    struct RunChannel;
    struct SessionLane;

    void install_routes();
    std::shared_ptr<RunChannel> find_run(const std::string& run_id) const;
    std::shared_ptr<SessionLane> lane_for(const std::string& session_id);
    void execute(const std::shared_ptr<RunChannel>& channel, const std::string& text);

    const RunEngine& engine_;
    SessionStore& sessions_;
    GatewayOptions options_;
    std::unique_ptr<httplib::Server> server_;
    std::thread listener_;
    int port_ = 0;
    std::atomic<bool> stopping_{false};

    struct Workers;
    std::unique_ptr<Workers> workers_;

    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<RunChannel>> runs_;
    std::map<std::string, std::shared_ptr<SessionLane>> lanes_;
};

struct SseEvent {
    std::optional<std::uint64_t> id;
    std::string event;
    std::string data;
};

/// Splits a text/event-stream body into events.
std::vector<SseEvent> parse_sse(const std::string& body);

class GatewayError : public std::runtime_error {
public:
    GatewayError(int status, const std::string& detail)
        : std::runtime_error("HTTP " + std::to_string(status) + ": " + detail), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

/// Blocking client for the gateway endpoints.
class GatewayClient {
public:
    explicit GatewayClient(std::string base_url, std::chrono::milliseconds timeout = std::chrono::seconds(30));

    std::string create_session() const;
    std::string post_message(const std::string& session_id, const std::string& text) const;
    nlohmann::json get_run(const std::string& run_id) const;
    /// Reads the event stream until the server closes it.
    std::vector<SseEvent> stream_events(const std::string& run_id,
                                        std::optional<std::uint64_t> last_event_id = std::nullopt) const;
    nlohmann::json list_tools() const;

private:
    std::string base_url_;
    std::chrono::milliseconds timeout_;
};

}  // namespace athena
