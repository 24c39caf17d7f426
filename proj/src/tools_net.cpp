#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "athena/calc.hpp"
#include "athena/tools.hpp"

namespace athena::tools {

ToolError::ToolError(Code code, const std::string& detail, int status)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), status_(status) {}

std::string_view to_string(ToolError::Code code) {
    switch (code) {
    case ToolError::Code::InvalidInput: return "InvalidInput";
    case ToolError::Code::MissingCredential: return "MissingCredential";
    case ToolError::Code::UpstreamError: return "UpstreamError";
    case ToolError::Code::Timeout: return "Timeout";
    case ToolError::Code::UnknownLocation: return "UnknownLocation";
    case ToolError::Code::InvalidEvent: return "InvalidEvent";
    case ToolError::Code::StoreError: return "StoreError";
    }
    return "ToolError";
}

namespace {

using Clock = std::chrono::steady_clock;

constexpr int kMaxResultsCap = 20;

std::string trim_collapse(const std::string& s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
            space = !out.empty();
        } else {
            if (space) out += ' ';
            out += c;
            space = false;
        }
    }
    return out;
}

void require_nonempty(const std::string& value, const char* what) {
    if (trim_collapse(value).empty()) throw ToolError(ToolError::Code::InvalidInput, std::string(what) + " is empty");
}

void require_count(int max_results) {
    if (max_results < 0 || max_results > kMaxResultsCap)
        throw ToolError(ToolError::Code::InvalidInput,
                        "max_results must be between 0 and " + std::to_string(kMaxResultsCap));
}

const std::string& require_key(const ClientConfig& config, const char* env_name) {
    static const std::string none;
    if (!config.transport->needs_credentials()) return config.api_key ? *config.api_key : none;
    if (!config.api_key || config.api_key->empty())
        throw ToolError(ToolError::Code::MissingCredential, std::string(env_name) + " is not set");
    return *config.api_key;
}

/// Sends with whatever remains of the per-call budget.
net::HttpResponse send(const ClientConfig& config, const net::HttpRequest& request, Clock::time_point deadline) {
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (remaining.count() <= 0) throw ToolError(ToolError::Code::Timeout, "time budget exhausted");
    net::HttpResponse response;
    try {
        response = config.transport->send(request, remaining);
    } catch (const net::NetError& e) {
        if (e.code() == net::NetError::Code::Timeout) throw ToolError(ToolError::Code::Timeout, e.what());
        throw ToolError(ToolError::Code::UpstreamError, e.what());
    }
    if (response.status < 200 || response.status >= 300)
        throw ToolError(ToolError::Code::UpstreamError, "status " + std::to_string(response.status), response.status);
    return response;
}

ToolResult guarded(const std::function<std::string()>& body) {
    try {
        return ToolResult::success(body());
    } catch (const std::exception& e) {
        return ToolResult::failure(e.what());
    }
}

std::string coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

nlohmann::json parse_json_body(const std::string& body, const char* what) {
    auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded()) throw ToolError(ToolError::Code::UpstreamError, std::string(what) + " is not valid JSON");
    return doc;
}

}  // namespace

// --- calculator -----------------------------------------------------------

ToolResult calculate(const std::string& expression) {
    return guarded([&] {
        require_nonempty(expression, "expression");
        const double value = calc::evaluate(calc::parse(expression));
        nlohmann::json out = {{"expression", expression}};
        if (std::trunc(value) == value && std::fabs(value) < 9007199254740992.0) {
            out["result"] = static_cast<std::int64_t>(value);
        } else {
            out["result"] = value;
        }
        return out.dump();
    });
}

RemoteCalculatorClient::RemoteCalculatorClient(ClientConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) config_.base_url = "https://api.wolframalpha.com";
}

std::string RemoteCalculatorClient::query(const std::string& input) const {
    const auto deadline = Clock::now() + config_.timeout;
    require_nonempty(input, "input");
    const auto& key = require_key(config_, "ATHENA_WOLFRAM_APP_ID");
    net::HttpRequest req;
    req.url = config_.base_url + "/v1/result?appid=" + net::url_encode(key) + "&i=" + net::url_encode(input);
    req.fixture_key = config_.base_url + "/v1/result?i=" + net::url_encode(input);
    auto text = trim_collapse(send(config_, req, deadline).body);
    if (text.empty()) throw ToolError(ToolError::Code::UpstreamError, "empty result");
    return text;
}

ToolResult RemoteCalculatorClient::calculate(const std::string& input) const {
    return guarded([&] { return nlohmann::json{{"expression", input}, {"result", query(input)}}.dump(); });
}

// --- web search -----------------------------------------------------------

SearchClient::SearchClient(ClientConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) config_.base_url = "https://google.serper.dev";
}

std::vector<SearchHit> parse_search_response(const std::string& body, int max_results) {
    auto doc = parse_json_body(body, "search response");
    if (!doc.is_object()) throw ToolError(ToolError::Code::UpstreamError, "search response is not an object");
    std::vector<SearchHit> hits;
    auto organic = doc.find("organic");
    if (organic == doc.end() || !organic->is_array()) return hits;
    for (const auto& item : *organic) {
        if (static_cast<int>(hits.size()) >= max_results) break;
        if (!item.is_object()) continue;
        SearchHit hit{item.value("title", ""), item.value("snippet", ""), item.value("link", "")};
        if (hit.title.empty() || hit.url.empty()) continue;
        hits.push_back(std::move(hit));
    }
    return hits;
}

std::vector<SearchHit> SearchClient::search(const std::string& query, int max_results) const {
    const auto deadline = Clock::now() + config_.timeout;
    require_nonempty(query, "query");
    require_count(max_results);
    const auto& key = require_key(config_, "ATHENA_SERPER_API_KEY");
    if (max_results == 0) return {};
    net::HttpRequest req;
    req.method = "POST";
    req.url = config_.base_url + "/search";
    req.headers = {{"X-API-KEY", key}, {"Content-Type", "application/json"}};
    req.body = nlohmann::json{{"q", query}, {"num", max_results}}.dump();
    req.fixture_key = req.url + "\n" + req.body;
    return parse_search_response(send(config_, req, deadline).body, max_results);
}

ToolResult SearchClient::search_query(const std::string& query, int max_results) const {
    return guarded([&] {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& hit : search(query, max_results))
            out.push_back({{"title", hit.title}, {"snippet", hit.snippet}, {"url", hit.url}});
        return out.dump();
    });
}

// --- arXiv ----------------------------------------------------------------

ArxivClient::ArxivClient(ClientConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) config_.base_url = "http://export.arxiv.org";
}

std::vector<Paper> parse_arxiv_feed(const std::string& xml, int max_results) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(xml);
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        throw ToolError(ToolError::Code::UpstreamError, std::string("malformed feed: ") + e.message());
    }
    auto feed = tree.get_child_optional("feed");
    if (!feed) throw ToolError(ToolError::Code::UpstreamError, "malformed feed: no <feed> root");

    std::vector<Paper> papers;
    for (const auto& [tag, node] : *feed) {
        if (tag != "entry") continue;
        if (static_cast<int>(papers.size()) >= max_results) break;
        Paper p;
        p.title = trim_collapse(node.get("title", ""));
        p.abstract = trim_collapse(node.get("summary", ""));
        std::string id = trim_collapse(node.get("id", ""));
        if (auto slash = id.find("/abs/"); slash != std::string::npos) id = id.substr(slash + 5);
        p.identifier = id;
        for (const auto& [child_tag, child] : node) {
            if (child_tag != "author") continue;
            auto name = trim_collapse(child.get("name", ""));
            if (!name.empty()) p.authors.push_back(std::move(name));
        }
        if (p.title.empty() || p.abstract.empty() || p.identifier.empty() || p.authors.empty()) continue;
        papers.push_back(std::move(p));
    }
    return papers;
}

std::vector<Paper> ArxivClient::lookup(const std::string& query, int max_results) const {
    const auto deadline = Clock::now() + config_.timeout;
    require_nonempty(query, "query");
    require_count(max_results);
    if (max_results == 0) return {};
    net::HttpRequest req;
    req.url = config_.base_url + "/api/query?search_query=" + net::url_encode("all:" + query) +
              "&start=0&max_results=" + std::to_string(max_results);
    req.fixture_key = req.url;
    return parse_arxiv_feed(send(config_, req, deadline).body, max_results);
}

ToolResult ArxivClient::arxiv_lookup(const std::string& query, int max_results) const {
    return guarded([&] {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& p : lookup(query, max_results))
            out.push_back({{"title", p.title}, {"authors", p.authors}, {"abstract", p.abstract}, {"identifier", p.identifier}});
        return out.dump();
    });
}

// --- weather --------------------------------------------------------------

WeatherClient::WeatherClient(ClientConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) config_.base_url = "https://api.openweathermap.org";
}

WeatherReport WeatherClient::fetch(const std::string& location, std::optional<Timestamp> when) const {
    const auto deadline = Clock::now() + config_.timeout;
    require_nonempty(location, "location");
    const auto& key = require_key(config_, "ATHENA_OPENWEATHER_API_KEY");
    const std::string appid = "&appid=" + net::url_encode(key);

    net::HttpRequest geo;
    geo.fixture_key = config_.base_url + "/geo/1.0/direct?q=" + net::url_encode(location) + "&limit=1";
    geo.url = geo.fixture_key + appid;
    auto places = parse_json_body(send(config_, geo, deadline).body, "geocoding response");
    if (!places.is_array()) throw ToolError(ToolError::Code::UpstreamError, "geocoding response is not a list");
    if (places.empty()) throw ToolError(ToolError::Code::UnknownLocation, "no place matches '" + location + "'");

    WeatherReport report;
    try {
        const auto& place = places.front();
        report.latitude = place.at("lat").get<double>();
        report.longitude = place.at("lon").get<double>();
        report.location = place.at("name").get<std::string>();
        if (place.contains("country")) report.location += ", " + place.at("country").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ToolError(ToolError::Code::UpstreamError, std::string("geocoding response: ") + e.what());
    }

    const std::string at = "lat=" + coord(report.latitude) + "&lon=" + coord(report.longitude);
    net::HttpRequest wx;
    if (when) {
        auto unix_s = std::chrono::duration_cast<std::chrono::seconds>(when->time_since_epoch()).count();
        wx.fixture_key = config_.base_url + "/data/3.0/onecall/timemachine?" + at + "&dt=" + std::to_string(unix_s) +
                         "&units=metric";
    } else {
        wx.fixture_key = config_.base_url + "/data/2.5/weather?" + at + "&units=metric";
    }
    wx.url = wx.fixture_key + appid;
    auto doc = parse_json_body(send(config_, wx, deadline).body, "weather response");
    try {
        const nlohmann::json& sample = when ? doc.at("data").at(0) : doc;
        report.temperature = when ? sample.at("temp").get<double>() : sample.at("main").at("temp").get<double>();
        report.conditions = sample.at("weather").at(0).at("description").get<std::string>();
        report.timestamp = Timestamp(std::chrono::seconds(sample.at("dt").get<std::int64_t>()));
    } catch (const nlohmann::json::exception& e) {
        throw ToolError(ToolError::Code::UpstreamError, std::string("weather response: ") + e.what());
    }
    return report;
}

ToolResult WeatherClient::weather_fetch(const std::string& location, std::optional<Timestamp> when) const {
    return guarded([&] {
        auto r = fetch(location, when);
        return nlohmann::json{
            {"location", r.location},
            {"resolved_coordinates", {{"lat", r.latitude}, {"lon", r.longitude}}},
            {"temperature", r.temperature},
            {"conditions", r.conditions},
            {"timestamp", format_rfc3339(r.timestamp)},
        }
            .dump();
    });
}

}  // namespace athena::tools
