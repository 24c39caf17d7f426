#include <cstdlib>

#include "athena/tools.hpp"

namespace athena::tools {

namespace {

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

std::string text_arg(const ArgumentMap& args, const char* name, std::string fallback = {}) {
    auto it = args.find(name);
    if (it == args.end()) return fallback;
    return std::get<std::string>(it->second);
}

int count_arg(const ArgumentMap& args, const char* name, int fallback) {
    auto it = args.find(name);
    if (it == args.end()) return fallback;
    auto v = std::get<std::int64_t>(it->second);
    if (v < 0 || v > 1000) throw ToolError(ToolError::Code::InvalidInput, std::string(name) + " out of range");
    return static_cast<int>(v);
}

Timestamp time_arg(const ArgumentMap& args, const char* name) {
    auto it = args.find(name);
    if (it == args.end()) throw ToolError(ToolError::Code::InvalidInput, std::string(name) + " is required");
    auto t = parse_rfc3339(std::get<std::string>(it->second));
    if (!t) throw ToolError(ToolError::Code::InvalidInput, std::string(name) + " is not an RFC 3339 timestamp");
    return *t;
}

ToolParameter param(std::string name, ParamKind kind, std::string description, bool required = true) {
    return ToolParameter{std::move(name), kind, std::move(description), required, {}};
}

ClientConfig client(const ToolkitConfig& config, const std::optional<std::string>& key) {
    return ClientConfig{config.transport, key, config.timeout, {}};
}

}  // namespace

ToolkitConfig toolkit_config_from_env(const std::optional<std::filesystem::path>& fixture_dir, net::FixtureMode mode) {
    ToolkitConfig config;
    if (fixture_dir) {
        config.transport = std::make_shared<net::FixtureTransport>(*fixture_dir, mode);
    } else {
        config.transport = std::make_shared<net::LiveTransport>();
    }
    config.serper_api_key = env("ATHENA_SERPER_API_KEY");
    config.openweather_api_key = env("ATHENA_OPENWEATHER_API_KEY");
    config.wolfram_app_id = env("ATHENA_WOLFRAM_APP_ID");
    return config;
}

void register_default_toolkit(ToolRegistry& registry, const ToolkitConfig& config) {
    auto transport = config.transport ? config.transport : std::make_shared<net::LiveTransport>();
    ToolkitConfig cfg = config;
    cfg.transport = transport;
    auto calendar = cfg.calendar ? cfg.calendar : std::make_shared<CalendarStore>();

    ToolSchema calculator{
        "calculator",
        "Evaluates an arithmetic expression exactly as written. Supports + - * / ^, parentheses, the functions "
        "sqrt, abs, ln, log10, sin, cos, tan, exp, floor, ceil and the constants pi and e.",
        {param("expression", ParamKind::String, "arithmetic expression, e.g. (17*23)^2/3")},
        "JSON object {expression, result}",
    };
    if (cfg.remote_calculator) {
        RemoteCalculatorClient remote(client(cfg, cfg.wolfram_app_id));
        registry.register_tool({calculator, [remote](const ArgumentMap& a) {
                                    return remote.calculate(text_arg(a, "expression"));
                                }, std::nullopt});
    } else {
        registry.register_tool({calculator, [](const ArgumentMap& a) { return calculate(text_arg(a, "expression")); },
                                std::nullopt});
    }

    SearchClient search(client(cfg, cfg.serper_api_key));
    registry.register_tool({
        ToolSchema{
            "search",
            "Searches the web and returns the top results.",
            {param("query", ParamKind::String, "search terms"),
             param("max_results", ParamKind::Integer, "number of results, default 5", false)},
            "JSON list of {title, snippet, url}",
        },
        [search](const ArgumentMap& a) {
            try {
                return search.search_query(text_arg(a, "query"), count_arg(a, "max_results", 5));
            } catch (const std::exception& e) {
                return ToolResult::failure(e.what());
            }
        },
        std::nullopt,
    });

    ArxivClient arxiv(client(cfg, std::nullopt));
    registry.register_tool({
        ToolSchema{
            "arxiv",
            "Looks up scholarly articles on arXiv.",
            {param("query", ParamKind::String, "topic, title words or author"),
             param("max_results", ParamKind::Integer, "number of articles, default 3", false)},
            "JSON list of {title, authors, abstract, identifier}",
        },
        [arxiv](const ArgumentMap& a) {
            try {
                return arxiv.arxiv_lookup(text_arg(a, "query"), count_arg(a, "max_results", 3));
            } catch (const std::exception& e) {
                return ToolResult::failure(e.what());
            }
        },
        std::nullopt,
    });

    WeatherClient weather(client(cfg, cfg.openweather_api_key));
    registry.register_tool({
        ToolSchema{
            "weather",
            "Current weather for a place, or historical conditions for a given date.",
            {param("location", ParamKind::String, "city or place name, e.g. London"),
             param("date", ParamKind::String, "optional date YYYY-MM-DD for historical data", false)},
            "JSON object {location, resolved_coordinates, temperature, conditions, timestamp}",
        },
        [weather](const ArgumentMap& a) {
            std::optional<Timestamp> when;
            if (a.count("date")) {
                when = parse_rfc3339(text_arg(a, "date"));
                if (!when) return ToolResult::failure("InvalidInput: date must be YYYY-MM-DD");
                *when += std::chrono::hours(12);
            }
            return weather.weather_fetch(text_arg(a, "location"), when);
        },
        std::nullopt,
    });

    ToolParameter action{"action", ParamKind::Enum, "create an event or list events in a range", true,
                         {"create", "list"}};
    registry.register_tool({
        ToolSchema{
            "calendar",
            "Creates calendar events or lists the events overlapping a time range.",
            {action,
             param("start", ParamKind::String, "RFC 3339 UTC start of the event or of the listed range"),
             param("end", ParamKind::String, "RFC 3339 UTC end of the event or of the listed range"),
             param("title", ParamKind::String, "event title (create only)", false),
             param("description", ParamKind::String, "event notes (create only)", false)},
            "JSON object {id, event} for create, {events} for list",
        },
        [calendar](const ArgumentMap& a) {
            try {
                const auto start = time_arg(a, "start");
                const auto end = time_arg(a, "end");
                if (text_arg(a, "action") == "list") return calendar->calendar_list(start, end);
                CalendarEvent event{{}, text_arg(a, "title"), start, end, std::nullopt};
                if (a.count("description")) event.description = text_arg(a, "description");
                return calendar->calendar_create(std::move(event));
            } catch (const std::exception& e) {
                return ToolResult::failure(e.what());
            }
        },
        std::nullopt,
    });
}

}  // namespace athena::tools
