#include "athena/engine.hpp"

#include <fstream>
#include <future>
#include <random>

namespace athena {

EngineError::EngineError(Code code, const std::string& detail)
    : std::runtime_error([&] {
          switch (code) {
          case Code::UnknownSession: return "UnknownSession: " + detail;
          case Code::InvalidInput: return "InvalidInput: " + detail;
          case Code::StoreError: return "StoreError: " + detail;
          }
          return detail;
      }()),
      code_(code) {}

std::string generate_id(std::string_view prefix) {
    static std::mutex mutex;
    static std::mt19937_64 rng{std::random_device{}()};
    std::uint64_t v = 0;
    {
        std::lock_guard lock(mutex);
        v = rng();
    }
    static const char* hex = "0123456789abcdef";
    std::string out(prefix);
    out += '_';
    for (int shift = 60; shift >= 0; shift -= 4) out += hex[(v >> shift) & 0xF];
    return out;
}

// --- sessions -------------------------------------------------------------

SessionStore::SessionStore(std::filesystem::path data_dir) : data_dir_(std::move(data_dir)) {}

std::optional<std::filesystem::path> SessionStore::log_path(const std::string& id) const {
    if (!data_dir_) return std::nullopt;
    return *data_dir_ / (id + ".events.jsonl");
}

std::string SessionStore::create() {
    Session s{generate_id("sess"), now_utc(), {}};
    if (data_dir_) {
        std::error_code ec;
        std::filesystem::create_directories(*data_dir_, ec);
        auto path = *log_path(s.id);
        std::ofstream out(path, std::ios::app);
        if (ec || !out) throw EngineError(EngineError::Code::StoreError, "cannot create session log " + path.string());
    }
    std::lock_guard lock(mutex_);
    auto id = s.id;
    sessions_.emplace(id, std::move(s));
    return id;
}

bool SessionStore::exists(const std::string& id) const {
    std::lock_guard lock(mutex_);
    return sessions_.count(id) > 0;
}

std::optional<Session> SessionStore::get(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return std::nullopt;
    return it->second;
}

std::vector<ChatMessage> SessionStore::history(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw EngineError(EngineError::Code::UnknownSession, id);
    return it->second.message_history;
}

void SessionStore::append(const std::string& id, std::span<const ChatMessage> messages) {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw EngineError(EngineError::Code::UnknownSession, id);
    it->second.message_history.insert(it->second.message_history.end(), messages.begin(), messages.end());
}

void SessionStore::record_events(const std::string& id, std::span<const RunEvent> events) {
    if (!exists(id)) throw EngineError(EngineError::Code::UnknownSession, id);
    auto path = log_path(id);
    if (!path) return;
    std::lock_guard lock(mutex_);
    try {
        append_event_log(path->string(), events);
    } catch (const std::exception& e) {
        throw EngineError(EngineError::Code::StoreError, e.what());
    }
}

// --- engine ---------------------------------------------------------------

namespace {

void emit(Run& run, EventKind kind, nlohmann::json payload, const EventSink& sink) {
    RunEvent e{run.events.size(), now_utc(), kind, std::move(payload)};
    run.events.push_back(e);
    if (sink) sink(run.events.back());
}

void add_message(Run& run, ChatMessage message, const EventSink& sink, bool context = false) {
    nlohmann::json payload = {{"message", to_json(message)}};
    if (context) payload["context"] = true;
    if (run.events.empty()) {
        payload["run_id"] = run.id;
        payload["session_id"] = run.session_id;
        payload["max_iterations"] = run.config.max_iterations;
    }
    run.history.push_back(std::move(message));
    emit(run, EventKind::MessageAdded, std::move(payload), sink);
}

void transition(Run& run, RunStatus to, const EventSink& sink, std::optional<std::string> reason = std::nullopt) {
    if (!is_legal_transition(run.status, to))
        throw std::logic_error("illegal transition " + std::string(to_string(run.status)) + " -> " + std::string(to_string(to)));
    nlohmann::json payload = {
        {"from", to_string(run.status)},
        {"to", to_string(to)},
        {"iterations_used", run.iterations_used},
    };
    if (reason) {
        payload["reason"] = *reason;
        run.failure_reason = std::move(reason);
    }
    run.status = to;
    emit(run, EventKind::StatusChanged, std::move(payload), sink);
}

}  // namespace

RunEngine::RunEngine(const ToolRegistry& registry, const ChatBackend& backend, SessionStore& sessions, EngineOptions options)
    : registry_(registry), backend_(backend), sessions_(sessions), options_(std::move(options)), schemas_(registry.list_schemas()) {}

Run RunEngine::submit_message(const std::string& session_id, const std::string& text, std::optional<std::string> run_id) const {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw EngineError(EngineError::Code::InvalidInput, "message text is empty");
    auto prior = sessions_.history(session_id);

    Run run;
    run.id = run_id ? *run_id : generate_id("run");
    run.session_id = session_id;
    run.config = options_.run;
    if (options_.system_prompt) add_message(run, ChatMessage::system(*options_.system_prompt), {}, true);
    for (auto& m : prior) add_message(run, std::move(m), {}, true);
    run.context_length = run.history.size();
    add_message(run, ChatMessage::user(text), {});
    return run;
}

Run RunEngine::step_run(Run run, const EventSink& sink) const {
    if (is_terminal(run.status) || run.status == RunStatus::RequiresAction)
        throw std::logic_error("step_run on a run in status " + std::string(to_string(run.status)));
    if (run.status == RunStatus::Queued) transition(run, RunStatus::InProgress, sink);

    if (run.iterations_used >= run.config.max_iterations) {
        transition(run, RunStatus::Failed, sink,
                   "IterationLimit: no final answer after " + std::to_string(run.iterations_used) + " consultations");
        return run;
    }

    ++run.iterations_used;
    std::optional<ModelDecision> decision;
    try {
        decision = backend_.complete(run.history, schemas_);
    } catch (const BackendError& e) {
        transition(run, RunStatus::Failed, sink, e.what());
        return run;
    } catch (const std::exception& e) {
        transition(run, RunStatus::Failed, sink, std::string("BackendUnavailable: ") + e.what());
        return run;
    }

    if (decision->is_final()) {
        add_message(run, ChatMessage::assistant(decision->final_text()), sink);
        transition(run, RunStatus::Completed, sink);
        run.final_answer = decision->final_text();
        emit(run, EventKind::FinalAnswer, {{"text", decision->final_text()}}, sink);
        return run;
    }

    ChatMessage request = ChatMessage::assistant("");
    request.tool_calls = decision->calls();
    add_message(run, request, sink);
    transition(run, RunStatus::RequiresAction, sink);
    for (const auto& call : decision->calls()) emit(run, EventKind::ToolCallIssued, to_json(call), sink);
    return run;
}

Run RunEngine::handle_required_action(Run run, const EventSink& sink) const {
    if (run.status != RunStatus::RequiresAction)
        throw std::logic_error("handle_required_action on a run in status " + std::string(to_string(run.status)));
    const std::vector<ToolCallRequest> calls(run.pending_calls().begin(), run.pending_calls().end());

    std::vector<ToolResult> results;
    if (calls.size() == 1) {
        results.push_back(registry_.invoke(calls[0].tool_name, calls[0].call_id, calls[0].arguments));
    } else {
        std::vector<std::future<ToolResult>> pending;
        for (const auto& c : calls)
            pending.push_back(std::async(std::launch::async, [this, &c] { return registry_.invoke(c.tool_name, c.call_id, c.arguments); }));
        for (auto& f : pending) results.push_back(f.get());
    }

    for (auto& r : results) {
        ChatMessage msg{Role::Tool, r.content, r.call_id, {}, r.is_error};
        add_message(run, std::move(msg), sink);
        emit(run, EventKind::ToolResultReceived, to_json(r), sink);
    }
    transition(run, RunStatus::InProgress, sink);
    return run;
}

Run RunEngine::execute_run(Run run, const EventSink& sink) const {
    if (run.status != RunStatus::Queued)
        throw std::logic_error("execute_run on a run in status " + std::string(to_string(run.status)));
    while (!is_terminal(run.status)) {
        if (run.status == RunStatus::RequiresAction) {
            run = handle_required_action(std::move(run), sink);
        } else {
            run = step_run(std::move(run), sink);
        }
    }
    sessions_.record_events(run.session_id, run.events);
    if (run.status == RunStatus::Completed) {
        std::span<const ChatMessage> fresh(run.history);
        sessions_.append(run.session_id, fresh.subspan(run.context_length));
    }
    return run;
}

}  // namespace athena
