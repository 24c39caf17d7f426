#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "athena/engine.hpp"

namespace athena::eval {

inline constexpr char kLetters[] = {'A', 'B', 'C', 'D'};

struct EvalItem {
    std::string id;
    std::string question;
    std::map<char, std::string> options;  // A..D
    char answer = 'A';
    std::string subject;
};

class DatasetError : public std::runtime_error {
public:
    enum class Code { ParseError, InvariantViolation };

    DatasetError(Code code, std::size_t line, const std::string& detail);
    Code code() const noexcept { return code_; }
    std::size_t line() const noexcept { return line_; }

private:
    Code code_;
    std::size_t line_;
};

EvalItem item_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const EvalItem& item);

/// One item per nonblank line, in file order.
std::vector<EvalItem> load_dataset(const std::string& path);
std::vector<EvalItem> parse_dataset(const std::string& text);

std::string format_prompt(const EvalItem& item);

enum class Failure { NoJson, BadLetter, RunFailed };
std::string_view to_string(Failure failure);

struct Extraction {
    std::optional<char> letter;
    std::optional<Failure> failure;  // NoJson or BadLetter when letter is empty
    std::string detail;              // offending value for BadLetter

    bool ok() const noexcept { return letter.has_value(); }
};

/// Finds the first JSON object (fenced or bare) with an "answer" key, falling
/// back to a pattern scan for `"answer"` followed by a letter. Never throws.
Extraction extract_answer(std::string_view completion);

struct EvalRecord {
    std::string item_id;
    std::string raw_completion;
    std::optional<char> extracted;
    bool correct = false;
    std::optional<Failure> failure;
    std::string detail;
};

nlohmann::json to_json(const EvalRecord& record);

/// Record for one completion of `item`, or a run_failed record.
EvalRecord grade(const EvalItem& item, const std::string& completion);
EvalRecord failed_record(const EvalItem& item, const std::string& reason);

using Baselines = std::vector<std::pair<std::string, double>>;

struct EvalReport {
    std::vector<EvalRecord> records;
    double accuracy = 0.0;
    std::map<std::string, double> per_subject;
    std::map<std::string, std::size_t> subject_counts;
    std::optional<Baselines> baselines;
};

nlohmann::json to_json(const EvalReport& report);

class CardinalityMismatch : public std::invalid_argument {
public:
    CardinalityMismatch(std::size_t items, std::size_t records);
};

EvalReport score(const std::vector<EvalItem>& items, const std::vector<EvalRecord>& records);

/// Baselines keep file order. Throws std::invalid_argument on anything but an
/// object of model name -> number in [0,1].
Baselines load_baselines(const std::string& path);
Baselines parse_baselines(const std::string& text);

inline constexpr const char* kFrameworkLabel = "Athena Framework";

/// Pipe table "| Model | Accuracy |", baselines first, framework last, two
/// decimals.
std::string emit_comparison_table(double framework_accuracy, const Baselines& baselines,
                                  const std::string& framework_label = kFrameworkLabel);
std::string emit_comparison_table(const EvalReport& report, const Baselines& baselines);

/// Whatever answers a prompt with a final text. Must be callable from
/// several threads at once.
class EvalRuntime {
public:
    struct Outcome {
        bool completed = false;
        std::string text;  // final answer, or failure reason
    };

    virtual ~EvalRuntime() = default;
    virtual Outcome ask(const std::string& prompt) const = 0;
};

/// Each prompt gets a fresh session on an in-process engine.
class LocalRuntime final : public EvalRuntime {
public:
    LocalRuntime(const RunEngine& engine, SessionStore& sessions) : engine_(engine), sessions_(sessions) {}
    Outcome ask(const std::string& prompt) const override;

private:
    const RunEngine& engine_;
    SessionStore& sessions_;
};

/// Each prompt gets a fresh session on a running gateway.
class GatewayRuntime final : public EvalRuntime {
public:
    explicit GatewayRuntime(std::string base_url) : base_url_(std::move(base_url)) {}
    Outcome ask(const std::string& prompt) const override;

private:
    std::string base_url_;
};

/// At most `parallelism` items in flight; records land by item index.
EvalReport run_eval(const std::vector<EvalItem>& items, const EvalRuntime& runtime, std::size_t parallelism = 4);

}  // namespace athena::eval
