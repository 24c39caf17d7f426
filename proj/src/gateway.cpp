#include "athena/gateway.hpp"

#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/asio/thread_pool.hpp>
#include <httplib.h>

namespace athena {

struct Gateway::RunChannel {
    std::string id;
    std::string session_id;
    mutable std::mutex mutex;
    std::condition_variable cv;
    std::vector<RunEvent> events;
    RunStatus status = RunStatus::Queued;
    int iterations_used = 0;
    std::optional<std::string> final_answer;
    std::optional<std::string> failure_reason;
    bool done = false;
};

struct Gateway::Workers {
    explicit Workers(std::size_t n) : pool(n) {}
    boost::asio::thread_pool pool;
};

struct Gateway::SessionLane {
    explicit SessionLane(boost::asio::thread_pool& pool) : strand(boost::asio::make_strand(pool)) {}
    boost::asio::strand<boost::asio::thread_pool::executor_type> strand;
};

namespace {

void reply_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
    reply_json(res, status, {{"error", message}});
}

std::string format_sse(const RunEvent& e) {
    std::string out = "id: " + std::to_string(e.sequence_no) + "\n";
    out += "event: " + std::string(to_string(e.kind)) + "\n";
    out += "data: " + e.payload.dump() + "\n\n";
    return out;
}

}  // namespace

Gateway::Gateway(const RunEngine& engine, SessionStore& sessions, GatewayOptions options)
    : engine_(engine),
      sessions_(sessions),
      options_(std::move(options)),
      server_(std::make_unique<httplib::Server>()),
      workers_(std::make_unique<Workers>(std::max<std::size_t>(1, options_.run_workers))) {
    const auto threads = options_.http_threads;
    server_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    install_routes();
}

Gateway::~Gateway() { stop(); }

std::string Gateway::base_url() const { return "http://" + options_.host + ":" + std::to_string(port_); }

int Gateway::start() {
    port_ = options_.port == 0 ? server_->bind_to_any_port(options_.host) : options_.port;
    if (options_.port != 0 && !server_->bind_to_port(options_.host, options_.port)) port_ = -1;
    if (port_ <= 0) throw std::runtime_error("cannot bind " + options_.host + ":" + std::to_string(options_.port));
    listener_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void Gateway::serve_forever() {
    if (!server_->bind_to_port(options_.host, options_.port))
        throw std::runtime_error("cannot bind " + options_.host + ":" + std::to_string(options_.port));
    port_ = options_.port;
    server_->listen_after_bind();
}

void Gateway::stop() {
    if (stopping_.exchange(true)) return;
    {
        std::lock_guard lock(mutex_);
        for (auto& [id, channel] : runs_) channel->cv.notify_all();
    }
    server_->stop();
    if (listener_.joinable()) listener_.join();
    workers_->pool.stop();
    workers_->pool.join();
}

std::shared_ptr<Gateway::RunChannel> Gateway::find_run(const std::string& run_id) const {
    std::lock_guard lock(mutex_);
    auto it = runs_.find(run_id);
    return it == runs_.end() ? nullptr : it->second;
}

std::shared_ptr<Gateway::SessionLane> Gateway::lane_for(const std::string& session_id) {
    std::lock_guard lock(mutex_);
    auto& lane = lanes_[session_id];
    if (!lane) lane = std::make_shared<SessionLane>(workers_->pool);
    return lane;
}

std::optional<nlohmann::json> Gateway::run_summary(const std::string& run_id) const {
    auto channel = find_run(run_id);
    if (!channel) return std::nullopt;
    std::lock_guard lock(channel->mutex);
    nlohmann::json out = {
        {"id", channel->id},
        {"session_id", channel->session_id},
        {"status", to_string(channel->status)},
        {"iterations_used", channel->iterations_used},
        {"event_count", channel->events.size()},
        {"final_answer", channel->final_answer ? nlohmann::json(*channel->final_answer) : nlohmann::json(nullptr)},
        {"failure_reason", channel->failure_reason ? nlohmann::json(*channel->failure_reason) : nlohmann::json(nullptr)},
    };
    return out;
}

void Gateway::execute(const std::shared_ptr<RunChannel>& channel, const std::string& text) {
    auto publish = [channel](const RunEvent& e) {
        std::lock_guard lock(channel->mutex);
        channel->events.push_back(e);
        if (e.kind == EventKind::StatusChanged) {
            channel->status = run_status_from_string(e.payload.at("to").get<std::string>());
            channel->iterations_used = e.payload.at("iterations_used").get<int>();
            if (e.payload.contains("reason")) channel->failure_reason = e.payload.at("reason").get<std::string>();
        } else if (e.kind == EventKind::FinalAnswer) {
            channel->final_answer = e.payload.at("text").get<std::string>();
        }
        channel->cv.notify_all();
    };
    try {
        Run run = engine_.submit_message(channel->session_id, text, channel->id);
        for (const auto& e : run.events) publish(e);
        engine_.execute_run(std::move(run), publish);
    } catch (const std::exception& e) {
        std::lock_guard lock(channel->mutex);
        if (!is_terminal(channel->status)) {
            channel->status = RunStatus::Failed;
            channel->failure_reason = e.what();
        }
    }
    std::lock_guard lock(channel->mutex);
    channel->done = true;
    channel->cv.notify_all();
}

void Gateway::install_routes() {
    auto& svr = *server_;

    svr.Post("/v1/sessions", [this](const httplib::Request&, httplib::Response& res) {
        try {
            reply_json(res, 201, {{"id", sessions_.create()}});
        } catch (const std::exception& e) {
            reply_error(res, 500, e.what());
        }
    });

    svr.Post(R"(/v1/sessions/([^/]+)/messages)", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string session_id = req.matches[1];
        if (!sessions_.exists(session_id)) return reply_error(res, 404, "UnknownSession: " + session_id);
        auto body = nlohmann::json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object() || !body.contains("text") || !body["text"].is_string())
            return reply_error(res, 400, "body must be a JSON object with a string field \"text\"");
        std::string text = body["text"].get<std::string>();
        if (text.find_first_not_of(" \t\r\n") == std::string::npos) return reply_error(res, 400, "text is empty");

        auto channel = std::make_shared<RunChannel>();
        channel->id = generate_id("run");
        channel->session_id = session_id;
        {
            std::lock_guard lock(mutex_);
            runs_[channel->id] = channel;
        }
        boost::asio::post(lane_for(session_id)->strand, [this, channel, text = std::move(text)] { execute(channel, text); });
        reply_json(res, 202, {{"run_id", channel->id}});
    });

    svr.Get(R"(/v1/runs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        auto summary = run_summary(req.matches[1]);
        if (!summary) return reply_error(res, 404, "UnknownRun: " + std::string(req.matches[1]));
        reply_json(res, 200, *summary);
    });

    svr.Get(R"(/v1/runs/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
        auto channel = find_run(req.matches[1]);
        if (!channel) return reply_error(res, 404, "UnknownRun: " + std::string(req.matches[1]));

        std::size_t next = 0;
        std::string resume = req.get_header_value("Last-Event-ID");
        if (resume.empty() && req.has_param("last_event_id")) resume = req.get_param_value("last_event_id");
        if (!resume.empty()) {
            try {
                next = static_cast<std::size_t>(std::stoull(resume)) + 1;
            } catch (const std::exception&) {
                return reply_error(res, 400, "Last-Event-ID must be a sequence number");
            }
        }

        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider("text/event-stream", [this, channel, next](std::size_t, httplib::DataSink& sink) mutable {
            std::vector<RunEvent> batch;
            bool finished = false;
            {
                std::unique_lock lock(channel->mutex);
                channel->cv.wait_for(lock, options_.stream_poll, [&] {
                    return channel->events.size() > next || channel->done || stopping_.load();
                });
                if (channel->events.size() > next)
                    batch.assign(channel->events.begin() + static_cast<std::ptrdiff_t>(next), channel->events.end());
                finished = channel->done && next + batch.size() >= channel->events.size();
            }
            for (const auto& e : batch) {
                auto chunk = format_sse(e);
                if (!sink.write(chunk.data(), chunk.size())) return false;
            }
            next += batch.size();
            if (finished || stopping_.load()) sink.done();
            return true;
        });
    });

    svr.Get("/v1/tools", [this](const httplib::Request&, httplib::Response& res) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& s : engine_.registry().list_schemas()) out.push_back(schema_to_json(s));
        reply_json(res, 200, out);
    });
}

// --- client ---------------------------------------------------------------

std::vector<SseEvent> parse_sse(const std::string& body) {
    std::vector<SseEvent> out;
    SseEvent current;
    bool has_data = false;
    std::size_t pos = 0;
    while (pos <= body.size()) {
        auto eol = body.find('\n', pos);
        std::string line = body.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (has_data || !current.event.empty()) out.push_back(current);
            current = {};
            has_data = false;
        } else if (line[0] != ':') {
            auto colon = line.find(':');
            std::string field = line.substr(0, colon);
            std::string value = colon == std::string::npos ? "" : line.substr(colon + 1);
            if (!value.empty() && value[0] == ' ') value.erase(0, 1);
            if (field == "id") {
                current.id = std::stoull(value);
            } else if (field == "event") {
                current.event = value;
            } else if (field == "data") {
                if (has_data) current.data += '\n';
                current.data += value;
                has_data = true;
            }
        }
        if (eol == std::string::npos) break;
        pos = eol + 1;
    }
    return out;
}

namespace {

httplib::Client make_client(const std::string& base_url, std::chrono::milliseconds timeout) {
    httplib::Client client(base_url);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    return client;
}

nlohmann::json expect_json(const httplib::Result& res, int expected) {
    if (!res) throw GatewayError(0, "request failed: " + httplib::to_string(res.error()));
    auto body = nlohmann::json::parse(res->body, nullptr, false);
    if (res->status != expected) {
        std::string detail = body.is_object() && body.contains("error") ? body["error"].get<std::string>() : res->body;
        throw GatewayError(res->status, detail);
    }
    if (body.is_discarded()) throw GatewayError(res->status, "response is not JSON");
    return body;
}

}  // namespace

GatewayClient::GatewayClient(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {}

std::string GatewayClient::create_session() const {
    auto client = make_client(base_url_, timeout_);
    return expect_json(client.Post("/v1/sessions", "", "application/json"), 201).at("id").get<std::string>();
}

std::string GatewayClient::post_message(const std::string& session_id, const std::string& text) const {
    auto client = make_client(base_url_, timeout_);
    auto res = client.Post("/v1/sessions/" + session_id + "/messages", nlohmann::json{{"text", text}}.dump(), "application/json");
    return expect_json(res, 202).at("run_id").get<std::string>();
}

nlohmann::json GatewayClient::get_run(const std::string& run_id) const {
    auto client = make_client(base_url_, timeout_);
    return expect_json(client.Get("/v1/runs/" + run_id), 200);
}

std::vector<SseEvent> GatewayClient::stream_events(const std::string& run_id, std::optional<std::uint64_t> last_event_id) const {
    auto client = make_client(base_url_, timeout_);
    httplib::Headers headers;
    if (last_event_id) headers.emplace("Last-Event-ID", std::to_string(*last_event_id));
    std::string body;
    int status = 0;
    auto res = client.Get(
        "/v1/runs/" + run_id + "/events", headers,
        [&](const httplib::Response& r) {
            status = r.status;
            return true;
        },
        [&](const char* data, std::size_t len) {
            body.append(data, len);
            return true;
        });
    if (!res) throw GatewayError(0, "stream failed: " + httplib::to_string(res.error()));
    if (status != 200) throw GatewayError(status, body);
    return parse_sse(body);
}

nlohmann::json GatewayClient::list_tools() const {
    auto client = make_client(base_url_, timeout_);
    return expect_json(client.Get("/v1/tools"), 200);
}

}  // namespace athena
