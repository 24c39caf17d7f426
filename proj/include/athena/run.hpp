#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "athena/chat.hpp"
#include "athena/timestamp.hpp"

namespace athena {

enum class RunStatus { Queued, InProgress, RequiresAction, Completed, Failed };

std::string_view to_string(RunStatus status);
RunStatus run_status_from_string(std::string_view text);
bool is_terminal(RunStatus status);

/// queued→in_progress; in_progress→{requires_action, completed, failed};
/// requires_action→in_progress. Terminal states have no exits.
bool is_legal_transition(RunStatus from, RunStatus to);

enum class EventKind { MessageAdded, StatusChanged, ToolCallIssued, ToolResultReceived, FinalAnswer };

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view text);

struct RunEvent {
    std::uint64_t sequence_no = 0;
    Timestamp timestamp;
    EventKind kind = EventKind::MessageAdded;
    nlohmann::json payload;
};

/// {sequence_no, timestamp, kind, payload}
nlohmann::json to_json(const RunEvent& event);
RunEvent run_event_from_json(const nlohmann::json& doc);

inline constexpr int kDefaultMaxIterations = 8;

struct RunConfig {
    int max_iterations = kDefaultMaxIterations;
    std::chrono::milliseconds tool_timeout{10'000};
};

struct Run {
    std::string id;
    std::string session_id;
    std::vector<ChatMessage> history;
    RunStatus status = RunStatus::Queued;
    std::vector<RunEvent> events;
    int iterations_used = 0;
    RunConfig config;
    /// Messages in `history` that predate this run (system prompt and
    /// earlier session turns).
    std::size_t context_length = 0;
    std::optional<std::string> final_answer;
    std::optional<std::string> failure_reason;

    /// Tool calls of the trailing assistant message awaiting results.
    std::span<const ToolCallRequest> pending_calls() const;
};

class CorruptLog : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rebuilds a run from its event log. Throws CorruptLog on a sequence gap,
/// an illegal status transition, a malformed payload, or a log that does not
/// open with message_added.
Run replay(std::span<const RunEvent> events);

/// Appends one JSON line per event.
void append_event_log(const std::string& path, std::span<const RunEvent> events);
std::vector<RunEvent> read_event_log(const std::string& path);
/// Splits a session log into per-run logs (each run restarts at 0).
std::vector<std::vector<RunEvent>> split_runs(std::span<const RunEvent> events);

}  // namespace athena
