#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "athena/chat.hpp"
#include "athena/registry.hpp"
#include "athena/run.hpp"

namespace athena {

class EngineError : public std::runtime_error {
public:
    enum class Code { UnknownSession, InvalidInput, StoreError };

    EngineError(Code code, const std::string& detail);
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

struct Session {
    std::string id;
    Timestamp created_at;
    std::vector<ChatMessage> message_history;
};

/// Sessions and their append-only event logs. Internally synchronized.
/// With a data directory, each session gets "<id>.events.jsonl" there;
/// without one everything stays in memory.
class SessionStore {
public:
    SessionStore() = default;
    explicit SessionStore(std::filesystem::path data_dir);

    std::string create();
    bool exists(const std::string& id) const;
    std::optional<Session> get(const std::string& id) const;
    std::vector<ChatMessage> history(const std::string& id) const;
    void append(const std::string& id, std::span<const ChatMessage> messages);
    void record_events(const std::string& id, std::span<const RunEvent> events);
    std::optional<std::filesystem::path> log_path(const std::string& id) const;

private:
    std::optional<std::filesystem::path> data_dir_;
    mutable std::mutex mutex_;
    std::map<std::string, Session, std::less<>> sessions_;
};

std::string generate_id(std::string_view prefix);

using EventSink = std::function<void(const RunEvent&)>;

struct EngineOptions {
    RunConfig run;
    std::optional<std::string> system_prompt;
};

/// Drives the consult / act / fold-back loop. Step functions take and return
/// runs by value; the engine itself holds only references to the frozen
/// registry, the backend and the session store.
class RunEngine {
public:
    RunEngine(const ToolRegistry& registry, const ChatBackend& backend, SessionStore& sessions, EngineOptions options = {});

    /// Queued run holding the system prompt, the session's earlier turns and
    /// the new user message.
    Run submit_message(const std::string& session_id, const std::string& text,
                       std::optional<std::string> run_id = std::nullopt) const;

    /// One backend consultation. Ends completed, requires_action or failed.
    Run step_run(Run run, const EventSink& sink = {}) const;

    /// Validates and executes the pending tool calls, folds each result back
    /// as a tool message in call order and returns the run to in_progress.
    Run handle_required_action(Run run, const EventSink& sink = {}) const;

    /// Loops until completed or failed, then records the event log and, on
    /// completion, the new messages in the session.
    Run execute_run(Run run, const EventSink& sink = {}) const;

    const EngineOptions& options() const noexcept { return options_; }
    const ToolRegistry& registry() const noexcept { return registry_; }

private:
    const ToolRegistry& registry_;
    const ChatBackend& backend_;
    SessionStore& sessions_;
    EngineOptions options_;
    std::vector<ToolSchema> schemas_;
};

}  // namespace athena
