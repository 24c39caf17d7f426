#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace athena {

/// Outcome of one tool invocation. Tools never throw past the invocation
/// boundary; failures are reported with is_error set.
struct ToolResult {
    std::string tool_name;
    std::string call_id;
    std::string content;
    bool is_error = false;
    std::optional<std::string> error_message;

    static ToolResult success(std::string content) {
        ToolResult r;
        r.content = std::move(content);
        return r;
    }

    static ToolResult failure(std::string message) {
        ToolResult r;
        r.is_error = true;
        r.content = "error: " + message;
        r.error_message = std::move(message);
        return r;
    }

    friend bool operator==(const ToolResult&, const ToolResult&) = default;
};

inline nlohmann::json to_json(const ToolResult& r) {
    nlohmann::json out = {
        {"tool_name", r.tool_name},
        {"call_id", r.call_id},
        {"content", r.content},
        {"is_error", r.is_error},
    };
    if (r.error_message) out["error_message"] = *r.error_message;
    return out;
}

}  // namespace athena
