#include "athena/http_backend.hpp"

#include <algorithm>
#include <cstdlib>

namespace athena {

namespace {

std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

[[noreturn]] void protocol(const std::string& what) { throw BackendError(BackendError::Code::ProtocolError, what); }

nlohmann::json wire_message(const ChatMessage& m) {
    nlohmann::json out = {{"role", to_string(m.role)}};
    if (m.role == Role::Assistant && !m.tool_calls.empty()) {
        out["content"] = m.content.empty() ? nlohmann::json(nullptr) : nlohmann::json(m.content);
        out["tool_calls"] = nlohmann::json::array();
        for (const auto& c : m.tool_calls) {
            out["tool_calls"].push_back({
                {"id", c.call_id},
                {"type", "function"},
                {"function", {{"name", c.tool_name}, {"arguments", arguments_to_json(c.arguments).dump()}}},
            });
        }
        return out;
    }
    out["content"] = m.content;
    if (m.tool_call_id) out["tool_call_id"] = *m.tool_call_id;
    return out;
}

}  // namespace

HttpBackendConfig http_backend_config_from_env() {
    HttpBackendConfig config;
    config.base_url = env_or("ATHENA_LLM_BASE_URL", config.base_url);
    config.api_key = env_or("ATHENA_LLM_API_KEY", "");
    config.model = env_or("ATHENA_LLM_MODEL", config.model);
    return config;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (!config_.transport) config_.transport = std::make_shared<net::LiveTransport>();
    while (!config_.base_url.empty() && config_.base_url.back() == '/') config_.base_url.pop_back();
}

nlohmann::json HttpBackend::build_request(std::span<const ChatMessage> history, std::span<const ToolSchema> schemas) const {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : history) messages.push_back(wire_message(m));
    nlohmann::json body = {{"model", config_.model}, {"temperature", config_.temperature}, {"messages", messages}};
    if (!schemas.empty()) {
        body["tools"] = nlohmann::json::array();
        for (const auto& s : schemas) body["tools"].push_back(schema_to_function_declaration(s));
        body["tool_choice"] = "auto";
    }
    return body;
}

ModelDecision HttpBackend::complete(std::span<const ChatMessage> history, std::span<const ToolSchema> schemas) const {
    if (history.empty() || (history.back().role != Role::User && history.back().role != Role::Tool))
        protocol("history must end with a user or tool message");
    net::HttpRequest req;
    req.method = "POST";
    req.url = config_.base_url + "/chat/completions";
    req.headers = {{"Content-Type", "application/json"}};
    if (!config_.api_key.empty()) req.headers["Authorization"] = "Bearer " + config_.api_key;
    req.body = build_request(history, schemas).dump();
    req.fixture_key = req.url + "\n" + req.body;

    net::HttpResponse res;
    try {
        res = config_.transport->send(req, config_.timeout);
    } catch (const std::exception& e) {
        throw BackendError(BackendError::Code::BackendUnavailable, e.what());
    }
    if (res.status == 429 || res.status >= 500 || res.status == 401 || res.status == 403)
        throw BackendError(BackendError::Code::BackendUnavailable, "status " + std::to_string(res.status));
    if (res.status < 200 || res.status >= 300) protocol("status " + std::to_string(res.status) + ": " + res.body.substr(0, 200));
    return decode_chat_completion(res.body, schemas);
}

ModelDecision decode_chat_completion(const std::string& body, std::span<const ToolSchema> schemas) {
    auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) protocol("response is not a JSON object");
    if (auto err = doc.find("error"); err != doc.end() && !err->is_null()) protocol("upstream error: " + err->dump());
    auto choices = doc.find("choices");
    if (choices == doc.end() || !choices->is_array() || choices->empty()) protocol("response has no choices");
    const auto& choice = (*choices)[0];
    if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) protocol("choice has no message");
    const auto& message = choice["message"];

    auto calls_it = message.find("tool_calls");
    if (calls_it != message.end() && !calls_it->is_null()) {
        if (!calls_it->is_array()) protocol("tool_calls is not a list");
        if (!calls_it->empty()) {
            std::vector<ToolCallRequest> calls;
            for (const auto& c : *calls_it) {
                if (!c.is_object()) protocol("tool call is not an object");
                auto id = c.find("id");
                auto fn = c.find("function");
                if (id == c.end() || !id->is_string() || id->get<std::string>().empty()) protocol("tool call without id");
                if (fn == c.end() || !fn->is_object()) protocol("tool call without function");
                auto name = fn->find("name");
                if (name == fn->end() || !name->is_string()) protocol("tool call without function name");
                ToolCallRequest call{id->get<std::string>(), name->get<std::string>(), {}};
                if (std::none_of(schemas.begin(), schemas.end(), [&](const ToolSchema& s) { return s.name == call.tool_name; }))
                    throw BackendError(BackendError::Code::UnknownToolRequested, "model requested '" + call.tool_name + "'");

                nlohmann::json args = nlohmann::json::object();
                if (auto a = fn->find("arguments"); a != fn->end() && !a->is_null()) {
                    if (a->is_string()) {
                        const auto& text = a->get_ref<const std::string&>();
                        args = text.empty() ? nlohmann::json::object() : nlohmann::json::parse(text, nullptr, false);
                    } else {
                        args = *a;
                    }
                }
                if (args.is_discarded() || !args.is_object()) protocol("arguments of '" + call.tool_name + "' are not a JSON object");
                try {
                    call.arguments = arguments_from_json(args);
                } catch (const std::invalid_argument& e) {
                    protocol(e.what());
                }
                calls.push_back(std::move(call));
            }
            try {
                return ModelDecision::tool_calls(std::move(calls));
            } catch (const std::invalid_argument& e) {
                protocol(e.what());
            }
        }
    }

    auto content = message.find("content");
    if (content == message.end() || !content->is_string() || content->get<std::string>().empty())
        protocol("message has neither content nor tool calls");
    return ModelDecision::final_answer(content->get<std::string>());
}

}  // namespace athena
