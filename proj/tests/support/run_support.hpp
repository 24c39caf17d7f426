#pragma once

// Shared helpers for run-loop tests: an offline registry, a seeded backend
// that produces arbitrary decision sequences, and an independent checker of
// the event-log properties every run must satisfy.

#include <algorithm>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "athena/engine.hpp"
#include "athena/net.hpp"
#include "athena/tools.hpp"

namespace support {

inline std::unique_ptr<athena::ToolRegistry> offline_registry() {
    athena::tools::ToolkitConfig cfg;
    cfg.transport = std::make_shared<athena::net::FixtureTransport>(std::string(ATHENA_FIXTURE_DIR) + "/net",
                                                                    athena::net::FixtureMode::Replay);
    cfg.calendar = std::make_shared<athena::tools::CalendarStore>();
    auto registry = std::make_unique<athena::ToolRegistry>();
    athena::tools::register_default_toolkit(*registry, cfg);
    registry->freeze();
    return registry;
}

/// Decision depends only on (seed, history length), so the backend is
/// stateless and a run is reproducible from its seed.
class FuzzBackend final : public athena::ChatBackend {
public:
    explicit FuzzBackend(std::uint64_t seed, int final_weight = 3, int fail_weight = 1)
        : seed_(seed), final_weight_(final_weight), fail_weight_(fail_weight) {}

    athena::ModelDecision complete(std::span<const athena::ChatMessage> history,
                                   std::span<const athena::ToolSchema>) const override {
        using athena::Scalar;
        std::mt19937_64 rng(seed_ * 1000003u + history.size());
        std::uniform_int_distribution<int> roll(0, 19);
        int r = roll(rng);
        if (r < fail_weight_)
            throw athena::BackendError(r % 2 ? athena::BackendError::Code::BackendUnavailable
                                             : athena::BackendError::Code::ProtocolError,
                                       "fuzzed failure");
        if (r < fail_weight_ + final_weight_) return athena::ModelDecision::final_answer("answer " + std::to_string(r));

        std::uniform_int_distribution<int> count(1, 3);
        std::uniform_int_distribution<int> kind(0, 5);
        std::vector<athena::ToolCallRequest> calls;
        int n = count(rng);
        for (int k = 0; k < n; ++k) {
            athena::ToolCallRequest c;
            c.call_id = "f" + std::to_string(history.size()) + "_" + std::to_string(k);
            switch (kind(rng)) {
            case 0:
            case 1:
                c.tool_name = "calculator";
                c.arguments["expression"] = std::to_string(k + 2) + "*" + std::to_string(r);
                break;
            case 2:
                c.tool_name = "calculator";
                c.arguments["expression"] = std::string("2+*3");
                break;
            case 3:
                c.tool_name = "calculator";
                break;
            case 4:
                c.tool_name = "no_such_tool";
                c.arguments["x"] = std::int64_t{1};
                break;
            default:
                c.tool_name = "calendar";
                c.arguments["action"] = std::string("list");
                c.arguments["start"] = std::string("2026-01-01T00:00:00Z");
                c.arguments["end"] = std::string("2026-01-02T00:00:00Z");
                break;
            }
            calls.push_back(std::move(c));
        }
        return athena::ModelDecision::tool_calls(std::move(calls));
    }

private:
    std::uint64_t seed_;
    int final_weight_;
    int fail_weight_;
};

/// Every property violation found in a finished run, empty when clean.
inline std::vector<std::string> check_run(const athena::Run& run) {
    using namespace athena;
    std::vector<std::string> bad;
    auto fail = [&](std::string what) { bad.push_back(std::move(what)); };

    if (!is_terminal(run.status)) fail("run is not terminal");
    if (run.iterations_used > run.config.max_iterations) fail("iterations_used exceeds max_iterations");

    static const std::map<std::string, std::vector<std::string>> legal = {
        {"queued", {"in_progress"}},
        {"in_progress", {"requires_action", "completed", "failed"}},
        {"requires_action", {"in_progress"}},
    };
    std::string status = "queued";
    std::vector<std::string> issued, received, open;
    int finals = 0;
    for (std::size_t i = 0; i < run.events.size(); ++i) {
        const auto& e = run.events[i];
        if (e.sequence_no != i) fail("sequence_no not dense at " + std::to_string(i));
        const auto& p = e.payload;
        switch (e.kind) {
        case EventKind::StatusChanged: {
            auto from = p.at("from").get<std::string>();
            auto to = p.at("to").get<std::string>();
            if (from != status) fail("transition from " + from + " while in " + status);
            auto it = legal.find(from);
            if (it == legal.end() || std::find(it->second.begin(), it->second.end(), to) == it->second.end())
                fail("illegal transition " + from + " -> " + to);
            if (!open.empty()) fail("status change with unanswered calls");
            status = to;
            break;
        }
        case EventKind::ToolCallIssued:
            issued.push_back(p.at("call_id").get<std::string>());
            open.push_back(issued.back());
            break;
        case EventKind::ToolResultReceived: {
            auto id = p.at("call_id").get<std::string>();
            received.push_back(id);
            auto it = std::find(open.begin(), open.end(), id);
            if (it == open.end()) fail("result without a pending call: " + id);
            else open.erase(it);
            break;
        }
        case EventKind::FinalAnswer: ++finals; break;
        case EventKind::MessageAdded: break;
        }
    }
    if (status != to_string(run.status)) fail("last logged status differs from run status");
    if (run.status == RunStatus::Completed && finals != 1) fail("completed run with " + std::to_string(finals) + " final_answer events");
    if (run.status != RunStatus::Completed && finals != 0) fail("final_answer in a run that did not complete");
    if (run.status != RunStatus::Failed) {
        std::sort(issued.begin(), issued.end());
        std::sort(received.begin(), received.end());
        if (issued != received) fail("call/result multisets differ");
    }
    if (run.status == RunStatus::Failed) {
        auto reason = run.failure_reason.value_or("");
        if (reason.rfind("IterationLimit", 0) != 0 && reason.rfind("BackendUnavailable", 0) != 0 &&
            reason.rfind("ProtocolError", 0) != 0 && reason.rfind("UnknownToolRequested", 0) != 0)
            fail("failure not caused by the backend or the iteration limit: " + reason);
    }

    try {
        auto again = replay(run.events);
        if (again.history != run.history) fail("replay history differs");
        if (again.status != run.status) fail("replay status differs");
        if (again.iterations_used != run.iterations_used) fail("replay iterations differ");
        if (again.final_answer != run.final_answer) fail("replay final answer differs");
    } catch (const CorruptLog& e) {
        fail(std::string("replay rejected the log: ") + e.what());
    }
    return bad;
}

}  // namespace support
