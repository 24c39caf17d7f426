#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "athena/net.hpp"
#include "athena/registry.hpp"
#include "athena/timestamp.hpp"
#include "athena/tool_result.hpp"

namespace athena::tools {

class ToolError : public std::runtime_error {
public:
    enum class Code {
        InvalidInput,
        MissingCredential,
        UpstreamError,
        Timeout,
        UnknownLocation,
        InvalidEvent,
        StoreError,
    };

    ToolError(Code code, const std::string& detail, int status = 0);

    Code code() const noexcept { return code_; }
    /// HTTP status for UpstreamError, 0 otherwise.
    int status() const noexcept { return status_; }

private:
    Code code_;
    int status_;
};

std::string_view to_string(ToolError::Code code);

inline constexpr std::chrono::milliseconds kDefaultToolTimeout{10'000};

struct ClientConfig {
    std::shared_ptr<net::HttpTransport> transport;
    std::optional<std::string> api_key;
    std::chrono::milliseconds timeout = kDefaultToolTimeout;
    std::string base_url;  // empty selects the public endpoint
};

// --- calculator -----------------------------------------------------------

/// Evaluates locally; content is {"expression": ..., "result": ...}.
ToolResult calculate(const std::string& expression);

/// Short-answer client for a remote computational engine (Wolfram|Alpha
/// "v1/result"); returns the plaintext primary result.
class RemoteCalculatorClient {
public:
    explicit RemoteCalculatorClient(ClientConfig config);
    std::string query(const std::string& input) const;
    ToolResult calculate(const std::string& input) const;

private:
    ClientConfig config_;
};

// --- web search -----------------------------------------------------------

struct SearchHit {
    std::string title;
    std::string snippet;
    std::string url;
};

class SearchClient {
public:
    explicit SearchClient(ClientConfig config);
    std::vector<SearchHit> search(const std::string& query, int max_results) const;
    /// Content: [{title, snippet, url}, ...].
    ToolResult search_query(const std::string& query, int max_results) const;

private:
    ClientConfig config_;
};

std::vector<SearchHit> parse_search_response(const std::string& body, int max_results);

// --- arXiv ----------------------------------------------------------------

struct Paper {
    std::string title;
    std::vector<std::string> authors;
    std::string abstract;
    std::string identifier;
};

class ArxivClient {
public:
    explicit ArxivClient(ClientConfig config);
    std::vector<Paper> lookup(const std::string& query, int max_results) const;
    /// Content: [{title, authors, abstract, identifier}, ...].
    ToolResult arxiv_lookup(const std::string& query, int max_results) const;

private:
    ClientConfig config_;
};

/// Parses an Atom feed. Throws ToolError(UpstreamError) when the document is
/// not a well-formed feed.
std::vector<Paper> parse_arxiv_feed(const std::string& xml, int max_results);

// --- weather --------------------------------------------------------------

struct WeatherReport {
    std::string location;
    double latitude = 0;
    double longitude = 0;
    double temperature = 0;  // degrees Celsius
    std::string conditions;
    Timestamp timestamp;
};

class WeatherClient {
public:
    explicit WeatherClient(ClientConfig config);
    /// Resolves the place name to coordinates, then fetches current
    /// conditions, or historical ones when `when` is given.
    WeatherReport fetch(const std::string& location, std::optional<Timestamp> when) const;
    /// Content: {location, resolved_coordinates:{lat, lon}, temperature,
    /// conditions, timestamp}.
    ToolResult weather_fetch(const std::string& location, std::optional<Timestamp> when) const;

private:
    ClientConfig config_;
};

// --- calendar -------------------------------------------------------------

struct CalendarEvent {
    std::string id;
    std::string title;
    Timestamp start;
    Timestamp end;
    std::optional<std::string> description;

    friend bool operator==(const CalendarEvent&, const CalendarEvent&) = default;
};

nlohmann::json to_json(const CalendarEvent& event);
CalendarEvent calendar_event_from_json(const nlohmann::json& doc);

/// Event store backed by a JSON-lines file (or memory only when no path is
/// given). Writes are serialized; reads see a consistent snapshot.
class CalendarStore {
public:
    CalendarStore() = default;
    explicit CalendarStore(std::filesystem::path path);

    /// Returns the stored id; an empty id is replaced by a generated one.
    std::string create(CalendarEvent event);
    /// Events overlapping [range_start, range_end), sorted by start then id.
    std::vector<CalendarEvent> list(Timestamp range_start, Timestamp range_end) const;
    std::size_t size() const;

    ToolResult calendar_create(CalendarEvent event);
    ToolResult calendar_list(Timestamp range_start, Timestamp range_end) const;

private:
    std::optional<std::filesystem::path> path_;
    mutable std::mutex mutex_;
    std::vector<CalendarEvent> events_;
    std::size_t next_id_ = 1;
};

// --- toolkit --------------------------------------------------------------

struct ToolkitConfig {
    std::shared_ptr<net::HttpTransport> transport;
    std::optional<std::string> serper_api_key;
    std::optional<std::string> openweather_api_key;
    std::optional<std::string> wolfram_app_id;
    std::chrono::milliseconds timeout = kDefaultToolTimeout;
    /// Route calculator calls to the remote engine instead of evaluating
    /// locally. Requires wolfram_app_id.
    bool remote_calculator = false;
    std::shared_ptr<CalendarStore> calendar;
};

/// Reads ATHENA_SERPER_API_KEY, ATHENA_OPENWEATHER_API_KEY and
/// ATHENA_WOLFRAM_APP_ID. With a fixture directory the transport replays (or
/// records) instead of going to the network.
ToolkitConfig toolkit_config_from_env(const std::optional<std::filesystem::path>& fixture_dir = std::nullopt,
                                      net::FixtureMode mode = net::FixtureMode::Replay);

/// Registers calculator, search, arxiv, weather and calendar in that order.
void register_default_toolkit(ToolRegistry& registry, const ToolkitConfig& config);

}  // namespace athena::tools
