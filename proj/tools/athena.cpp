#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "athena/calc.hpp"
#include "athena/eval.hpp"
#include "athena/gateway.hpp"
#include "athena/http_backend.hpp"
#include "athena/scripted_backend.hpp"
#include "athena/tools.hpp"

namespace {

struct StackOptions {
    std::string backend = "scripted";
    std::string script;
    std::string data_dir;
    std::string fixtures;
    bool record = false;
    int max_iterations = athena::kDefaultMaxIterations;
};

struct Stack {
    athena::ToolRegistry registry;
    std::unique_ptr<athena::ChatBackend> backend;
    std::unique_ptr<athena::SessionStore> sessions;
    std::unique_ptr<athena::RunEngine> engine;
};

std::unique_ptr<Stack> build_stack(const StackOptions& opt) {
    auto stack = std::make_unique<Stack>();

    std::optional<std::filesystem::path> fixtures;
    if (!opt.fixtures.empty()) fixtures = opt.fixtures;
    auto toolkit = athena::tools::toolkit_config_from_env(
        fixtures, opt.record ? athena::net::FixtureMode::Record : athena::net::FixtureMode::Replay);
    if (!opt.data_dir.empty()) {
        std::filesystem::create_directories(opt.data_dir);
        toolkit.calendar = std::make_shared<athena::tools::CalendarStore>(std::filesystem::path(opt.data_dir) / "calendar.jsonl");
    }
    athena::tools::register_default_toolkit(stack->registry, toolkit);
    stack->registry.freeze();

    athena::EngineOptions engine_options;
    engine_options.run.max_iterations = opt.max_iterations;
    engine_options.run.tool_timeout = toolkit.timeout;
    if (opt.backend == "scripted") {
        if (opt.script.empty()) throw CLI::ValidationError("--script", "required with --backend scripted");
        auto script = athena::load_script(opt.script);
        for (const auto& w : script.warnings) std::cerr << "warning: " << w << "\n";
        stack->backend = std::make_unique<athena::ScriptedBackend>(std::move(script));
    } else {
        stack->backend = std::make_unique<athena::HttpBackend>(athena::http_backend_config_from_env());
        engine_options.system_prompt = athena::kDefaultSystemPrompt;
    }

    stack->sessions = opt.data_dir.empty() ? std::make_unique<athena::SessionStore>()
                                           : std::make_unique<athena::SessionStore>(opt.data_dir);
    stack->engine = std::make_unique<athena::RunEngine>(stack->registry, *stack->backend, *stack->sessions, engine_options);
    return stack;
}

void add_stack_options(CLI::App* cmd, StackOptions& opt) {
    cmd->add_option("--backend", opt.backend, "Model backend")->check(CLI::IsMember({"scripted", "http"}));
    cmd->add_option("--script", opt.script, "Backend script for --backend scripted")->check(CLI::ExistingFile);
    cmd->add_option("--data-dir", opt.data_dir, "Directory for session event logs and the calendar store");
    cmd->add_option("--fixtures", opt.fixtures, "Serve tool HTTP traffic from recorded fixtures in this directory");
    cmd->add_flag("--record", opt.record, "Record live tool responses into --fixtures");
    cmd->add_option("--max-iterations", opt.max_iterations, "Consultations allowed per run")->check(CLI::PositiveNumber);
}

std::function<void()> g_stop;

void on_signal(int) {
    if (g_stop) g_stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tool-using chat orchestration runtime"};
    app.require_subcommand(1);

    StackOptions serve_opt;
    athena::GatewayOptions gateway_opt;
    gateway_opt.port = 8080;
    auto* serve = app.add_subcommand("serve", "Run the HTTP gateway");
    add_stack_options(serve, serve_opt);
    serve->add_option("--host", gateway_opt.host, "Bind address");
    serve->add_option("--port", gateway_opt.port, "Listen port");

    StackOptions eval_opt;
    std::string dataset, report_path, baselines_path, gateway_url;
    std::size_t parallelism = 4;
    auto* eval = app.add_subcommand("eval", "Score a multiple-choice dataset");
    add_stack_options(eval, eval_opt);
    eval->add_option("--dataset", dataset, "JSONL dataset")->required()->check(CLI::ExistingFile);
    eval->add_option("--report", report_path, "Write the JSON report here");
    eval->add_option("--baselines", baselines_path, "Baseline accuracies to tabulate")->check(CLI::ExistingFile);
    eval->add_option("--parallelism", parallelism, "Items in flight")->check(CLI::PositiveNumber);
    eval->add_option("--gateway", gateway_url, "Evaluate through a running gateway instead of in process");

    std::string expression;
    auto* calc = app.add_subcommand("calc", "Evaluate an arithmetic expression");
    calc->add_option("expression", expression)->required();

    auto* tools = app.add_subcommand("tools", "Print the tool manifest");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve) {
            auto stack = build_stack(serve_opt);
            athena::Gateway gateway(*stack->engine, *stack->sessions, gateway_opt);
            g_stop = [&gateway] { gateway.stop(); };
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "listening on " << gateway_opt.host << ":" << gateway_opt.port << "\n";
            gateway.serve_forever();
            return 0;
        }

        if (*eval) {
            auto items = athena::eval::load_dataset(dataset);
            athena::eval::EvalReport report;
            if (!gateway_url.empty()) {
                report = athena::eval::run_eval(items, athena::eval::GatewayRuntime(gateway_url), parallelism);
            } else {
                auto stack = build_stack(eval_opt);
                report = athena::eval::run_eval(items, athena::eval::LocalRuntime(*stack->engine, *stack->sessions), parallelism);
            }
            std::string table;
            if (!baselines_path.empty()) {
                auto baselines = athena::eval::load_baselines(baselines_path);
                table = athena::eval::emit_comparison_table(report, baselines);
                report.baselines = std::move(baselines);
            }
            std::printf("accuracy %.2f (%zu items)\n", report.accuracy, report.records.size());
            for (const auto& [subject, acc] : report.per_subject)
                std::printf("  %s %.2f (%zu)\n", subject.c_str(), acc, report.subject_counts[subject]);
            if (!table.empty()) std::cout << "\n" << table;
            if (!report_path.empty()) {
                auto doc = athena::eval::to_json(report);
                doc["table"] = table;
                std::ofstream out(report_path);
                out << doc.dump(2) << "\n";
                if (!out) throw std::runtime_error("cannot write report " + report_path);
            }
            return 0;
        }

        if (*calc) {
            auto parsed = athena::calc::parse(expression);
            std::cout << athena::calc::format_number(athena::calc::evaluate(parsed)) << "\n";
            return 0;
        }

        if (*tools) {
            athena::ToolRegistry registry;
            athena::tools::register_default_toolkit(registry, athena::tools::toolkit_config_from_env());
            nlohmann::json out = nlohmann::json::array();
            for (const auto& s : registry.list_schemas()) out.push_back(athena::schema_to_json(s));
            std::cout << out.dump(2) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
