#include "athena/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/asio/post.hpp>
#include <boost/asio/thread_pool.hpp>

#include "athena/gateway.hpp"

namespace athena::eval {

DatasetError::DatasetError(Code code, std::size_t line, const std::string& detail)
    : std::runtime_error(std::string(code == Code::ParseError ? "ParseError" : "InvariantViolation") + " at line " +
                         std::to_string(line) + ": " + detail),
      code_(code),
      line_(line) {}

namespace {

bool is_letter(char c) { return c >= 'A' && c <= 'D'; }

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

EvalItem item_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("item must be a JSON object");
    for (const char* key : {"id", "question", "options", "answer", "subject"})
        if (!doc.contains(key)) throw std::invalid_argument(std::string("missing key '") + key + "'");
    for (const auto& [key, value] : doc.items()) {
        if (key != "id" && key != "question" && key != "options" && key != "answer" && key != "subject")
            throw std::invalid_argument("unexpected key '" + key + "'");
    }

    EvalItem item;
    const auto& id = doc.at("id");
    if (id.is_string()) {
        item.id = id.get<std::string>();
    } else if (id.is_number_integer()) {
        item.id = std::to_string(id.get<long long>());
    } else {
        throw std::invalid_argument("id must be a string or integer");
    }
    if (item.id.empty()) throw std::invalid_argument("id is empty");

    if (!doc.at("question").is_string()) throw std::invalid_argument("question must be a string");
    item.question = doc.at("question").get<std::string>();
    if (trim(item.question).empty()) throw std::invalid_argument("question is empty");

    const auto& options = doc.at("options");
    if (!options.is_object()) throw std::invalid_argument("options must be an object");
    for (char letter : kLetters) {
        std::string key(1, letter);
        if (!options.contains(key)) throw std::invalid_argument("option " + key + " is missing");
        if (!options.at(key).is_string()) throw std::invalid_argument("option " + key + " must be a string");
        auto text = options.at(key).get<std::string>();
        if (trim(text).empty()) throw std::invalid_argument("option " + key + " is empty");
        item.options[letter] = std::move(text);
    }
    if (options.size() != 4) throw std::invalid_argument("options must have exactly the keys A, B, C, D");

    if (!doc.at("answer").is_string()) throw std::invalid_argument("answer must be a string");
    auto answer = doc.at("answer").get<std::string>();
    if (answer.size() != 1 || !is_letter(answer[0])) throw std::invalid_argument("answer '" + answer + "' is not one of A, B, C, D");
    item.answer = answer[0];

    if (!doc.at("subject").is_string()) throw std::invalid_argument("subject must be a string");
    item.subject = doc.at("subject").get<std::string>();
    return item;
}

nlohmann::json to_json(const EvalItem& item) {
    nlohmann::json options = nlohmann::json::object();
    for (const auto& [letter, text] : item.options) options[std::string(1, letter)] = text;
    return {
        {"id", item.id},
        {"question", item.question},
        {"options", options},
        {"answer", std::string(1, item.answer)},
        {"subject", item.subject},
    };
}

std::vector<EvalItem> parse_dataset(const std::string& text) {
    std::vector<EvalItem> items;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded()) throw DatasetError(DatasetError::Code::ParseError, lineno, "not valid JSON");
        try {
            items.push_back(item_from_json(doc));
        } catch (const std::exception& e) {
            throw DatasetError(DatasetError::Code::InvariantViolation, lineno, e.what());
        }
    }
    return items;
}

std::vector<EvalItem> load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str());
}

std::string format_prompt(const EvalItem& item) {
    std::string out = item.question;
    out += "\nOptions:";
    for (char letter : kLetters) {
        out += ' ';
        out += letter;
        out += ") ";
        out += item.options.at(letter);
    }
    out += "\nI want you to give me the output in the form of json.\n"
           "Example:\n"
           "'''json {\n"
           "    \"answer\": \"<The right option (A, B, C, D)>\",\n"
           "    \"value\": \"<Value of multiple choice answer>\",\n"
           "} '''";
    return out;
}

// --- extraction -----------------------------------------------------------

std::string_view to_string(Failure failure) {
    switch (failure) {
    case Failure::NoJson: return "no_json";
    case Failure::BadLetter: return "bad_letter";
    case Failure::RunFailed: return "run_failed";
    }
    return "no_json";
}

namespace {

// End of the balanced object starting at text[open] (a '{'), or npos.
// Trailing commas before '}' / ']' outside strings are dropped from `out`.
std::size_t scan_object(std::string_view text, std::size_t open, std::string& out) {
    out.clear();
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            out += c;
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{' || c == '[') {
            ++depth;
        } else if (c == '}' || c == ']') {
            auto last = out.find_last_not_of(" \t\r\n");
            if (last != std::string::npos && out[last] == ',') out.erase(last, 1);
            --depth;
        }
        out += c;
        if (depth == 0) return i;
    }
    return std::string_view::npos;
}

Extraction classify(std::string_view raw) {
    std::string value = trim(raw);
    while (!value.empty() && (value.front() == '(' || value.front() == '[' || value.front() == '"' || value.front() == '\''))
        value.erase(0, 1);
    std::string upper;
    for (char c : value) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (upper.rfind("OPTION ", 0) == 0) upper = trim(upper.substr(7));

    if (!upper.empty() && is_letter(upper[0])) {
        if (upper.size() == 1) return {upper[0], std::nullopt, {}};
        char next = upper[1];
        if (next == ')' || next == '.' || next == ':' || next == ']' || next == ',' || next == '"' || next == '\'' ||
            std::isspace(static_cast<unsigned char>(next)))
            return {upper[0], std::nullopt, {}};
    }
    return {std::nullopt, Failure::BadLetter, std::string(raw)};
}

std::optional<Extraction> from_json_value(const nlohmann::json& value) {
    if (value.is_string()) return classify(value.get<std::string>());
    return Extraction{std::nullopt, Failure::BadLetter, value.dump()};
}

// `"answer"` (or 'answer') then ':' then a quoted or bare value.
std::optional<Extraction> pattern_scan(std::string_view text) {
    std::size_t pos = 0;
    while ((pos = text.find("answer", pos)) != std::string_view::npos) {
        std::size_t start = pos;
        pos += 6;
        if (start == 0 || pos >= text.size()) continue;
        char q = text[start - 1];
        if ((q != '"' && q != '\'') || text[pos] != q) continue;
        std::size_t i = pos + 1;
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= text.size() || text[i] != ':') continue;
        ++i;
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= text.size()) continue;
        std::string_view value;
        if (text[i] == '"' || text[i] == '\'') {
            char close = text[i];
            auto end = text.find(close, i + 1);
            if (end == std::string_view::npos) end = text.size();
            value = text.substr(i + 1, end - i - 1);
        } else {
            std::size_t end = i;
            while (end < text.size() && text[end] != ',' && text[end] != '}' && text[end] != '\n') ++end;
            value = text.substr(i, end - i);
        }
        return classify(value);
    }
    return std::nullopt;
}

}  // namespace

Extraction extract_answer(std::string_view completion) {
    std::string candidate;
    for (std::size_t open = completion.find('{'); open != std::string_view::npos; open = completion.find('{', open + 1)) {
        if (scan_object(completion, open, candidate) == std::string_view::npos) continue;
        auto doc = nlohmann::json::parse(candidate, nullptr, false);
        if (doc.is_discarded() || !doc.is_object() || !doc.contains("answer")) continue;
        return *from_json_value(doc.at("answer"));
    }
    if (auto found = pattern_scan(completion)) return *found;
    return {std::nullopt, Failure::NoJson, {}};
}

// --- records and reports --------------------------------------------------

EvalRecord grade(const EvalItem& item, const std::string& completion) {
    EvalRecord r;
    r.item_id = item.id;
    r.raw_completion = completion;
    auto x = extract_answer(completion);
    r.extracted = x.letter;
    r.failure = x.failure;
    r.detail = x.detail;
    r.correct = x.letter && *x.letter == item.answer;
    return r;
}

EvalRecord failed_record(const EvalItem& item, const std::string& reason) {
    EvalRecord r;
    r.item_id = item.id;
    r.failure = Failure::RunFailed;
    r.detail = reason;
    return r;
}

nlohmann::json to_json(const EvalRecord& record) {
    return {
        {"item_id", record.item_id},
        {"raw_completion", record.raw_completion},
        {"extracted", record.extracted ? nlohmann::json(std::string(1, *record.extracted)) : nlohmann::json(nullptr)},
        {"correct", record.correct},
        {"failure", record.failure ? nlohmann::json(std::string(to_string(*record.failure))) : nlohmann::json(nullptr)},
        {"detail", record.detail},
    };
}

CardinalityMismatch::CardinalityMismatch(std::size_t items, std::size_t records)
    : std::invalid_argument("CardinalityMismatch: " + std::to_string(items) + " items but " + std::to_string(records) + " records") {}

EvalReport score(const std::vector<EvalItem>& items, const std::vector<EvalRecord>& records) {
    if (items.size() != records.size()) throw CardinalityMismatch(items.size(), records.size());
    EvalReport report;
    report.records = records;
    std::size_t correct = 0;
    std::map<std::string, std::size_t> subject_correct;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (records[i].item_id != items[i].id)
            throw std::invalid_argument("record " + std::to_string(i) + " is for item '" + records[i].item_id + "', expected '" +
                                        items[i].id + "'");
        if (records[i].correct && records[i].extracted != items[i].answer)
            throw std::invalid_argument("record for item '" + items[i].id + "' is marked correct with a wrong letter");
        ++report.subject_counts[items[i].subject];
        if (records[i].correct) {
            ++correct;
            ++subject_correct[items[i].subject];
        }
    }
    report.accuracy = items.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(items.size());
    for (const auto& [subject, n] : report.subject_counts)
        report.per_subject[subject] = static_cast<double>(subject_correct[subject]) / static_cast<double>(n);
    return report;
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : report.records) records.push_back(to_json(r));
    nlohmann::json out = {
        {"records", records},
        {"accuracy", report.accuracy},
        {"per_subject", report.per_subject},
        {"subject_counts", report.subject_counts},
    };
    if (report.baselines) {
        nlohmann::ordered_json b = nlohmann::ordered_json::object();
        for (const auto& [name, value] : *report.baselines) b[name] = value;
        out["baselines"] = nlohmann::json::parse(b.dump());
    }
    return out;
}

Baselines parse_baselines(const std::string& text) {
    auto doc = nlohmann::ordered_json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw std::invalid_argument("baselines must be a JSON object");
    Baselines out;
    for (const auto& [name, value] : doc.items()) {
        if (!value.is_number()) throw std::invalid_argument("baseline '" + name + "' is not a number");
        double v = value.get<double>();
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("baseline '" + name + "' is outside [0, 1]");
        out.emplace_back(name, v);
    }
    return out;
}

Baselines load_baselines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open baselines " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_baselines(buf.str());
}

std::string emit_comparison_table(double framework_accuracy, const Baselines& baselines, const std::string& framework_label) {
    if (baselines.empty()) throw std::invalid_argument("baselines must be nonempty");
    auto row = [](const std::string& name, double value) {
        char num[32];
        std::snprintf(num, sizeof num, "%.2f", value);
        return "| " + name + " | " + num + " |\n";
    };
    std::string out = "| Model | Accuracy |\n|---|---|\n";
    for (const auto& [name, value] : baselines) out += row(name, value);
    out += row(framework_label, framework_accuracy);
    return out;
}

std::string emit_comparison_table(const EvalReport& report, const Baselines& baselines) {
    return emit_comparison_table(report.accuracy, baselines);
}

// --- runtimes -------------------------------------------------------------

EvalRuntime::Outcome LocalRuntime::ask(const std::string& prompt) const {
    auto session = sessions_.create();
    auto run = engine_.execute_run(engine_.submit_message(session, prompt));
    if (run.status == RunStatus::Completed) return {true, run.final_answer.value_or("")};
    return {false, run.failure_reason.value_or("run failed")};
}

EvalRuntime::Outcome GatewayRuntime::ask(const std::string& prompt) const {
    GatewayClient client(base_url_, std::chrono::seconds(120));
    auto session = client.create_session();
    auto run_id = client.post_message(session, prompt);
    client.stream_events(run_id);
    auto run = client.get_run(run_id);
    if (run.at("status") == "completed") return {true, run.at("final_answer").get<std::string>()};
    auto reason = run.at("failure_reason");
    return {false, reason.is_string() ? reason.get<std::string>() : "run " + run.at("status").get<std::string>()};
}

EvalReport run_eval(const std::vector<EvalItem>& items, const EvalRuntime& runtime, std::size_t parallelism) {
    std::vector<EvalRecord> records(items.size());
    {
        boost::asio::thread_pool pool(std::max<std::size_t>(1, parallelism));
        for (std::size_t i = 0; i < items.size(); ++i) {
            boost::asio::post(pool, [&, i] {
                try {
                    auto outcome = runtime.ask(format_prompt(items[i]));
                    records[i] = outcome.completed ? grade(items[i], outcome.text) : failed_record(items[i], outcome.text);
                } catch (const std::exception& e) {
                    records[i] = failed_record(items[i], e.what());
                }
            });
        }
        pool.join();
    }
    return score(items, records);
}

}  // namespace athena::eval
