#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "athena/chat.hpp"
#include "athena/net.hpp"

namespace athena {

inline constexpr const char* kDefaultSystemPrompt =
    "You are a helpful assistant with access to external tools. When a question needs calculation, "
    "current data or lookups, call the matching tool with arguments taken from the question, then "
    "answer using the tool results.";

struct HttpBackendConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::string model = "gpt-4o";
    double temperature = 0.0;
    std::chrono::milliseconds timeout{60'000};
    std::shared_ptr<net::HttpTransport> transport;  // defaults to a live transport
};

/// Reads ATHENA_LLM_BASE_URL, ATHENA_LLM_API_KEY and ATHENA_LLM_MODEL.
HttpBackendConfig http_backend_config_from_env();

/// OpenAI-compatible chat-completions client with tool declarations. Tool
/// selection is delegated to the model's native function calling.
class HttpBackend final : public ChatBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    ModelDecision complete(std::span<const ChatMessage> history, std::span<const ToolSchema> schemas) const override;

    nlohmann::json build_request(std::span<const ChatMessage> history, std::span<const ToolSchema> schemas) const;

private:
    HttpBackendConfig config_;
};

/// Decodes a chat-completions response body. Never yields a malformed
/// decision: unusable bodies raise ProtocolError and tool names outside
/// `schemas` raise UnknownToolRequested.
ModelDecision decode_chat_completion(const std::string& body, std::span<const ToolSchema> schemas);

}  // namespace athena
