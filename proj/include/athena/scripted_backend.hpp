#pragma once

#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

#include "athena/chat.hpp"

namespace athena {

struct ScriptMatcher {
    enum class Kind { Substring, Regex };
    Kind kind = Kind::Substring;
    std::string pattern;
};

/// Tool call template; string argument values may contain placeholders.
struct ScriptedCall {
    std::string tool_name;
    ArgumentMap arguments;
};

struct ScriptStep {
    ScriptMatcher match;
    std::optional<std::string> final_text;
    std::vector<ScriptedCall> tool_calls;
};

struct BackendScript {
    std::vector<ScriptStep> steps;
    std::string default_final_text;
    /// Steps that can never fire because an earlier step shadows them.
    std::vector<std::string> warnings;
};

class ScriptError : public std::runtime_error {
public:
    ScriptError(std::size_t line, const std::string& detail);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Script document: {"steps": [{"match": {"kind": "substring"|"regex",
/// "pattern": ...}, "decision": {"final_text": ...} | {"tool_calls":
/// [{"tool_name": ..., "arguments": {...}}]}}], "default_final_text": ...}.
BackendScript parse_script(const std::string& text);
BackendScript load_script(const std::string& path);

/// Deterministic test double. Each consultation looks at the latest user or
/// tool message and fires the first step whose matcher hits it; with no hit
/// it answers default_final_text.
///
/// Final texts and string arguments are templates: "{{N}}" expands to capture
/// group N of the match, and "{{choice:N}}" to the letter of the option in
/// the latest user prompt ("A) ... B) ...") equal to group N, compared
/// numerically when both sides parse as numbers.
class ScriptedBackend final : public ChatBackend {
public:
    explicit ScriptedBackend(BackendScript script);

    ModelDecision complete(std::span<const ChatMessage> history, std::span<const ToolSchema> schemas) const override;

    const BackendScript& script() const noexcept { return script_; }

private:
    BackendScript script_;
    std::vector<std::regex> compiled_;  // parallel to steps; unused for substring steps
};

/// Letter of the option whose text equals `value`, parsing options from a
/// prompt rendered as "A) ... B) ... C) ... D) ...". Empty when none match.
std::string find_choice(const std::string& prompt, const std::string& value);

}  // namespace athena
