#include "athena/run.hpp"

#include <fstream>
#include <set>

namespace athena {

std::string_view to_string(RunStatus status) {
    switch (status) {
    case RunStatus::Queued: return "queued";
    case RunStatus::InProgress: return "in_progress";
    case RunStatus::RequiresAction: return "requires_action";
    case RunStatus::Completed: return "completed";
    case RunStatus::Failed: return "failed";
    }
    return "queued";
}

RunStatus run_status_from_string(std::string_view text) {
    if (text == "queued") return RunStatus::Queued;
    if (text == "in_progress") return RunStatus::InProgress;
    if (text == "requires_action") return RunStatus::RequiresAction;
    if (text == "completed") return RunStatus::Completed;
    if (text == "failed") return RunStatus::Failed;
    throw std::invalid_argument("unknown run status '" + std::string(text) + "'");
}

bool is_terminal(RunStatus status) { return status == RunStatus::Completed || status == RunStatus::Failed; }

bool is_legal_transition(RunStatus from, RunStatus to) {
    switch (from) {
    case RunStatus::Queued: return to == RunStatus::InProgress;
    case RunStatus::InProgress:
        return to == RunStatus::RequiresAction || to == RunStatus::Completed || to == RunStatus::Failed;
    case RunStatus::RequiresAction: return to == RunStatus::InProgress;
    default: return false;
    }
}

std::string_view to_string(EventKind kind) {
    switch (kind) {
    case EventKind::MessageAdded: return "message_added";
    case EventKind::StatusChanged: return "status_changed";
    case EventKind::ToolCallIssued: return "tool_call_issued";
    case EventKind::ToolResultReceived: return "tool_result_received";
    case EventKind::FinalAnswer: return "final_answer";
    }
    return "message_added";
}

EventKind event_kind_from_string(std::string_view text) {
    if (text == "message_added") return EventKind::MessageAdded;
    if (text == "status_changed") return EventKind::StatusChanged;
    if (text == "tool_call_issued") return EventKind::ToolCallIssued;
    if (text == "tool_result_received") return EventKind::ToolResultReceived;
    if (text == "final_answer") return EventKind::FinalAnswer;
    throw std::invalid_argument("unknown event kind '" + std::string(text) + "'");
}

nlohmann::json to_json(const RunEvent& event) {
    return {
        {"sequence_no", event.sequence_no},
        {"timestamp", format_rfc3339(event.timestamp)},
        {"kind", to_string(event.kind)},
        {"payload", event.payload},
    };
}

RunEvent run_event_from_json(const nlohmann::json& doc) {
    RunEvent e;
    e.sequence_no = doc.at("sequence_no").get<std::uint64_t>();
    auto ts = parse_rfc3339(doc.at("timestamp").get<std::string>());
    if (!ts) throw std::invalid_argument("bad event timestamp");
    e.timestamp = *ts;
    e.kind = event_kind_from_string(doc.at("kind").get<std::string>());
    e.payload = doc.at("payload");
    return e;
}

std::span<const ToolCallRequest> Run::pending_calls() const {
    if (status != RunStatus::RequiresAction || history.empty()) return {};
    const auto& last = history.back();
    if (last.role != Role::Assistant) return {};
    return last.tool_calls;
}

Run replay(std::span<const RunEvent> events) {
    if (events.empty()) throw CorruptLog("empty log: a run starts with message_added");
    if (events.front().kind != EventKind::MessageAdded) throw CorruptLog("log does not start with message_added");

    Run run;
    std::set<std::string> open_calls;
    bool answered = false;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        const std::string where = "event " + std::to_string(i) + ": ";
        if (e.sequence_no != i)
            throw CorruptLog(where + "sequence gap (expected " + std::to_string(i) + ", got " + std::to_string(e.sequence_no) + ")");
        if (is_terminal(run.status) && e.kind != EventKind::FinalAnswer)
            throw CorruptLog(where + std::string(to_string(e.kind)) + " after terminal status");
        try {
            const auto& p = e.payload;
            switch (e.kind) {
            case EventKind::MessageAdded: {
                if (i == 0) {
                    run.id = p.value("run_id", "");
                    run.session_id = p.value("session_id", "");
                    run.config.max_iterations = p.value("max_iterations", kDefaultMaxIterations);
                }
                run.history.push_back(chat_message_from_json(p.at("message")));
                if (p.value("context", false)) {
                    if (run.context_length + 1 != run.history.size()) throw CorruptLog(where + "context message after run messages");
                    ++run.context_length;
                }
                break;
            }
            case EventKind::StatusChanged: {
                auto from = run_status_from_string(p.at("from").get<std::string>());
                auto to = run_status_from_string(p.at("to").get<std::string>());
                if (from != run.status) throw CorruptLog(where + "transition from " + std::string(to_string(from)) +
                                                         " but run is " + std::string(to_string(run.status)));
                if (!is_legal_transition(from, to))
                    throw CorruptLog(where + "illegal transition " + std::string(to_string(from)) + " -> " + std::string(to_string(to)));
                if (from == RunStatus::RequiresAction && !open_calls.empty())
                    throw CorruptLog(where + "status change with unanswered tool calls");
                run.status = to;
                run.iterations_used = p.at("iterations_used").get<int>();
                if (to == RunStatus::Failed) run.failure_reason = p.value("reason", "");
                break;
            }
            case EventKind::ToolCallIssued: {
                if (run.status != RunStatus::RequiresAction) throw CorruptLog(where + "tool call outside requires_action");
                if (!open_calls.insert(p.at("call_id").get<std::string>()).second)
                    throw CorruptLog(where + "duplicate call_id");
                break;
            }
            case EventKind::ToolResultReceived: {
                if (run.status != RunStatus::RequiresAction) throw CorruptLog(where + "tool result outside requires_action");
                if (open_calls.erase(p.at("call_id").get<std::string>()) == 0)
                    throw CorruptLog(where + "result for unknown call_id");
                break;
            }
            case EventKind::FinalAnswer: {
                if (run.status != RunStatus::Completed || answered) throw CorruptLog(where + "unexpected final_answer");
                run.final_answer = p.at("text").get<std::string>();
                answered = true;
                break;
            }
            }
        } catch (const CorruptLog&) {
            throw;
        } catch (const std::exception& ex) {
            throw CorruptLog(where + "malformed payload: " + ex.what());
        }
    }
    if (run.status == RunStatus::Completed && !answered) throw CorruptLog("completed run without final_answer");
    run.events.assign(events.begin(), events.end());
    return run;
}

void append_event_log(const std::string& path, std::span<const RunEvent> events) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open event log " + path);
    for (const auto& e : events) out << to_json(e).dump() << '\n';
    out.flush();
    if (!out) throw std::runtime_error("write to event log " + path + " failed");
}

std::vector<RunEvent> read_event_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open event log " + path);
    std::vector<RunEvent> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(run_event_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw CorruptLog(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<std::vector<RunEvent>> split_runs(std::span<const RunEvent> events) {
    std::vector<std::vector<RunEvent>> runs;
    for (const auto& e : events) {
        if (e.sequence_no == 0 || runs.empty()) runs.emplace_back();
        runs.back().push_back(e);
    }
    return runs;
}

}  // namespace athena
