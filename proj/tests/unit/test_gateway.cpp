#include <doctest.h>

#include <map>
#include <thread>

#include "athena/gateway.hpp"
#include "athena/scripted_backend.hpp"
#include "gateway_contract.hpp"
#include "run_support.hpp"

using namespace athena;

namespace {

const std::string kScripts = std::string(ATHENA_FIXTURE_DIR) + "/scripts";

/// Sleeps on each consultation and records how many runs are inside it at
/// once, overall and per "s<k>" tag in the latest user message.
class SlowBackend final : public ChatBackend {
public:
    ModelDecision complete(std::span<const ChatMessage> history, std::span<const ToolSchema>) const override {
        const auto& text = history.back().content;
        auto tag = text.substr(0, text.find(' '));
        {
            std::lock_guard lock(mutex_);
            int now = ++active_[tag];
            max_per_tag_ = std::max(max_per_tag_, now);
            max_total_ = std::max(max_total_, ++total_);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(40));
        {
            std::lock_guard lock(mutex_);
            --active_[tag];
            --total_;
        }
        return ModelDecision::final_answer("ack " + text);
    }

    int max_per_tag() const {
        std::lock_guard lock(mutex_);
        return max_per_tag_;
    }
    int max_total() const {
        std::lock_guard lock(mutex_);
        return max_total_;
    }

private:
    mutable std::mutex mutex_;
    mutable std::map<std::string, int> active_;
    mutable int total_ = 0;
    mutable int max_per_tag_ = 0;
    mutable int max_total_ = 0;
};

struct Served {
    std::unique_ptr<ToolRegistry> registry = support::offline_registry();
    SessionStore sessions;
    std::unique_ptr<RunEngine> engine;
    std::unique_ptr<Gateway> gateway;

    explicit Served(const ChatBackend& backend) {
        engine = std::make_unique<RunEngine>(*registry, backend, sessions);
        gateway = std::make_unique<Gateway>(*engine, sessions, GatewayOptions{"127.0.0.1", 0, 4, 16, std::chrono::milliseconds(50)});
        gateway->start();
    }
    ~Served() { gateway->stop(); }
};

}  // namespace

TEST_CASE("parse_sse splits frames") {
    auto events = parse_sse("id: 0\nevent: message_added\ndata: {\"a\":1}\n\n: comment\n\nid: 1\r\nevent: final_answer\r\ndata: x\r\n\r\n");
    REQUIRE(events.size() == 2);
    CHECK(events[0].id == 0u);
    CHECK(events[0].event == "message_added");
    CHECK(events[0].data == "{\"a\":1}");
    CHECK(events[1].id == 1u);
    CHECK(events[1].data == "x");
    CHECK(parse_sse("").empty());
}

TEST_CASE("gateway honours the REST and SSE contract") {
    auto backend = ScriptedBackend(load_script(kScripts + "/two_step.json"));
    Served s(backend);
    auto problems = support::check_gateway_contract(s.gateway->base_url());
    for (const auto& p : problems) MESSAGE(p);
    CHECK(problems.empty());
}

TEST_CASE("sessions, runs and streams") {
    auto backend = ScriptedBackend(load_script(kScripts + "/two_step.json"));
    Served s(backend);
    GatewayClient client(s.gateway->base_url());

    auto a = client.create_session();
    auto b = client.create_session();
    CHECK(a != b);

    auto run_id = client.post_message(a, "compute 17*23");
    auto events = client.stream_events(run_id);
    REQUIRE_FALSE(events.empty());
    CHECK(events.back().event == "final_answer");
    CHECK(nlohmann::json::parse(events.back().data)["text"] == "The answer is 391.");

    auto resumed = client.stream_events(run_id, 3);
    REQUIRE_FALSE(resumed.empty());
    CHECK(resumed.front().id == 4u);

    // a late subscriber to a finished run gets the whole log and a closed stream
    CHECK(client.stream_events(run_id).size() == events.size());
    // resuming past the end closes at once
    CHECK(client.stream_events(run_id, events.size() - 1).empty());

    auto summary = client.get_run(run_id);
    CHECK(summary["status"] == "completed");
    CHECK(summary["iterations_used"] == 2);
    CHECK(summary["final_answer"] == "The answer is 391.");
    CHECK(summary["failure_reason"].is_null());

    try {
        client.post_message("sess_missing", "hi");
        FAIL("expected 404");
    } catch (const GatewayError& e) {
        CHECK(e.status() == 404);
    }
    try {
        client.post_message(a, "");
        FAIL("expected 400");
    } catch (const GatewayError& e) {
        CHECK(e.status() == 400);
    }
    try {
        client.stream_events("run_missing");
        FAIL("expected 404");
    } catch (const GatewayError& e) {
        CHECK(e.status() == 404);
    }
}

TEST_CASE("failed runs end the stream with the failure status") {
    auto backend = ScriptedBackend(load_script(kScripts + "/tools_forever.json"));
    Served s(backend);
    GatewayClient client(s.gateway->base_url());
    auto run_id = client.post_message(client.create_session(), "loop");
    auto events = client.stream_events(run_id);
    REQUIRE_FALSE(events.empty());
    CHECK(events.back().event == "status_changed");
    auto last = nlohmann::json::parse(events.back().data);
    CHECK(last["to"] == "failed");
    CHECK(last["reason"].get<std::string>().rfind("IterationLimit", 0) == 0);
    CHECK(client.get_run(run_id)["iterations_used"] == 8);
}

TEST_CASE("tool listing follows registry order and is stable") {
    auto backend = ScriptedBackend(load_script(kScripts + "/two_step.json"));
    Served s(backend);
    GatewayClient client(s.gateway->base_url());
    auto tools = client.list_tools();
    std::vector<std::string> names;
    for (const auto& t : tools) names.push_back(t["name"]);
    CHECK(names == std::vector<std::string>{"calculator", "search", "arxiv", "weather", "calendar"});
    CHECK(client.list_tools() == tools);

    ToolRegistry empty;
    empty.freeze();
    SessionStore sessions;
    RunEngine engine(empty, backend, sessions);
    Gateway bare(engine, sessions);
    bare.start();
    CHECK(GatewayClient(bare.base_url()).list_tools() == nlohmann::json::array());
    bare.stop();
}

TEST_CASE("runs of one session are serialized, sessions run in parallel") {
    SlowBackend backend;
    Served s(backend);
    GatewayClient client(s.gateway->base_url());

    std::vector<std::string> sessions;
    for (int k = 0; k < 4; ++k) sessions.push_back(client.create_session());
    std::vector<std::vector<std::string>> runs(4);
    for (int m = 0; m < 3; ++m)
        for (int k = 0; k < 4; ++k)
            runs[k].push_back(client.post_message(sessions[k], "s" + std::to_string(k) + " m" + std::to_string(m)));

    std::vector<std::thread> readers;
    std::vector<std::vector<SseEvent>> streams(12);
    for (int i = 0; i < 12; ++i)
        readers.emplace_back([&, i] { streams[i] = client.stream_events(runs[i % 4][i / 4]); });
    for (auto& t : readers) t.join();

    CHECK(backend.max_per_tag() == 1);
    CHECK(backend.max_total() > 1);
    for (const auto& st : streams) {
        REQUIRE_FALSE(st.empty());
        CHECK(st.back().event == "final_answer");
        for (std::size_t i = 0; i < st.size(); ++i) CHECK(st[i].id == i);
    }
    // arrival order: each later run sees the earlier exchanges as context
    for (int k = 0; k < 4; ++k) {
        auto history = s.sessions.history(sessions[k]);
        REQUIRE(history.size() == 6);
        for (int m = 0; m < 3; ++m)
            CHECK(history[2 * m].content == "s" + std::to_string(k) + " m" + std::to_string(m));
    }
}
