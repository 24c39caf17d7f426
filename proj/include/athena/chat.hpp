#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "athena/tool_schema.hpp"

namespace athena {

enum class Role { System, User, Assistant, Tool };

std::string_view to_string(Role role);
Role role_from_string(std::string_view text);

struct ToolCallRequest {
    std::string call_id;
    std::string tool_name;
    ArgumentMap arguments;  // raw, before schema validation

    friend bool operator==(const ToolCallRequest&, const ToolCallRequest&) = default;
};

struct ChatMessage {
    Role role = Role::User;
    std::string content;
    std::optional<std::string> tool_call_id;  // set iff role == Tool
    std::vector<ToolCallRequest> tool_calls;  // assistant messages requesting tools
    bool is_error = false;                    // tool messages carrying a failed result

    static ChatMessage system(std::string text) { return {Role::System, std::move(text), {}, {}, false}; }
    static ChatMessage user(std::string text) { return {Role::User, std::move(text), {}, {}, false}; }
    static ChatMessage assistant(std::string text) { return {Role::Assistant, std::move(text), {}, {}, false}; }

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

nlohmann::json to_json(const ToolCallRequest& call);
ToolCallRequest tool_call_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ChatMessage& message);
ChatMessage chat_message_from_json(const nlohmann::json& doc);

/// A backend's verdict for one step: a final answer or a nonempty batch of
/// tool calls with distinct call ids, never both.
class ModelDecision {
public:
    static ModelDecision final_answer(std::string text);
    /// Throws std::invalid_argument on an empty batch or repeated call ids.
    static ModelDecision tool_calls(std::vector<ToolCallRequest> calls);

    bool is_final() const noexcept { return std::holds_alternative<std::string>(value_); }
    const std::string& final_text() const { return std::get<std::string>(value_); }
    const std::vector<ToolCallRequest>& calls() const { return std::get<std::vector<ToolCallRequest>>(value_); }

    friend bool operator==(const ModelDecision&, const ModelDecision&) = default;

private:
    explicit ModelDecision(std::variant<std::string, std::vector<ToolCallRequest>> v) : value_(std::move(v)) {}
    std::variant<std::string, std::vector<ToolCallRequest>> value_;
};

class BackendError : public std::runtime_error {
public:
    enum class Code { BackendUnavailable, ProtocolError, UnknownToolRequested };

    BackendError(Code code, const std::string& detail);
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

std::string_view to_string(BackendError::Code code);

/// Model-agnostic completion contract. Implementations are safe to share
/// across threads and keep no state between calls.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;

    /// `history` must end with a user or tool message. Any tool named in the
    /// decision is drawn from `schemas`.
    virtual ModelDecision complete(std::span<const ChatMessage> history, std::span<const ToolSchema> schemas) const = 0;
};

}  // namespace athena
