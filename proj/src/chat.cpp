#include "athena/chat.hpp"

#include <set>

namespace athena {

std::string_view to_string(Role role) {
    switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    case Role::Tool: return "tool";
    }
    return "user";
}

Role role_from_string(std::string_view text) {
    if (text == "system") return Role::System;
    if (text == "user") return Role::User;
    if (text == "assistant") return Role::Assistant;
    if (text == "tool") return Role::Tool;
    throw std::invalid_argument("unknown role '" + std::string(text) + "'");
}

nlohmann::json to_json(const ToolCallRequest& call) {
    return {{"call_id", call.call_id}, {"tool_name", call.tool_name}, {"arguments", arguments_to_json(call.arguments)}};
}

ToolCallRequest tool_call_from_json(const nlohmann::json& doc) {
    return {doc.at("call_id").get<std::string>(), doc.at("tool_name").get<std::string>(),
            arguments_from_json(doc.value("arguments", nlohmann::json::object()))};
}

nlohmann::json to_json(const ChatMessage& message) {
    nlohmann::json out = {{"role", to_string(message.role)}, {"content", message.content}};
    if (message.tool_call_id) out["tool_call_id"] = *message.tool_call_id;
    if (!message.tool_calls.empty()) {
        out["tool_calls"] = nlohmann::json::array();
        for (const auto& c : message.tool_calls) out["tool_calls"].push_back(to_json(c));
    }
    if (message.is_error) out["is_error"] = true;
    return out;
}

ChatMessage chat_message_from_json(const nlohmann::json& doc) {
    ChatMessage m;
    m.role = role_from_string(doc.at("role").get<std::string>());
    m.content = doc.value("content", "");
    if (doc.contains("tool_call_id")) m.tool_call_id = doc.at("tool_call_id").get<std::string>();
    for (const auto& c : doc.value("tool_calls", nlohmann::json::array())) m.tool_calls.push_back(tool_call_from_json(c));
    m.is_error = doc.value("is_error", false);
    return m;
}

ModelDecision ModelDecision::final_answer(std::string text) { return ModelDecision(std::move(text)); }

ModelDecision ModelDecision::tool_calls(std::vector<ToolCallRequest> calls) {
    if (calls.empty()) throw std::invalid_argument("a tool-call decision needs at least one call");
    std::set<std::string> ids;
    for (const auto& c : calls) {
        if (c.call_id.empty()) throw std::invalid_argument("tool call without call_id");
        if (!ids.insert(c.call_id).second) throw std::invalid_argument("duplicate call_id '" + c.call_id + "'");
    }
    return ModelDecision(std::move(calls));
}

std::string_view to_string(BackendError::Code code) {
    switch (code) {
    case BackendError::Code::BackendUnavailable: return "BackendUnavailable";
    case BackendError::Code::ProtocolError: return "ProtocolError";
    case BackendError::Code::UnknownToolRequested: return "UnknownToolRequested";
    }
    return "BackendError";
}

BackendError::BackendError(Code code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace athena
