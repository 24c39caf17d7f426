#include "athena/scripted_backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace athena {

ScriptError::ScriptError(std::size_t line, const std::string& detail)
    : std::runtime_error("ParseError at line " + std::to_string(line) + ": " + detail), line_(line) {}

namespace {

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Best-effort source line for the n-th occurrence of a quoted key.
std::size_t line_of_key(const std::string& text, const std::string& key, std::size_t nth = 0) {
    const std::string needle = "\"" + key + "\"";
    std::size_t pos = 0;
    for (std::size_t i = 0;; ++i) {
        pos = text.find(needle, pos);
        if (pos == std::string::npos) return 1;
        if (i == nth) return line_of_offset(text, pos);
        pos += needle.size();
    }
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::optional<double> as_number(const std::string& s) {
    auto t = trim(s);
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string expand(const std::string& tmpl, const std::vector<std::string>& groups, const std::string& prompt) {
    std::string out;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        auto open = tmpl.find("{{", pos);
        if (open == std::string::npos) break;
        auto close = tmpl.find("}}", open + 2);
        if (close == std::string::npos) break;
        out.append(tmpl, pos, open - pos);
        std::string token = tmpl.substr(open + 2, close - open - 2);
        bool choice = token.rfind("choice:", 0) == 0;
        std::string index_text = choice ? token.substr(7) : token;
        char* end = nullptr;
        long index = std::strtol(index_text.c_str(), &end, 10);
        if (index_text.empty() || *end != '\0' || index < 0) {
            out.append(tmpl, open, close + 2 - open);  // not a placeholder
        } else {
            std::string group = static_cast<std::size_t>(index) < groups.size() ? groups[static_cast<std::size_t>(index)] : "";
            out += choice ? find_choice(prompt, group) : group;
        }
        pos = close + 2;
    }
    out.append(tmpl, pos, std::string::npos);
    return out;
}

ScriptStep parse_step(const nlohmann::json& doc, std::size_t index, const std::string& text) {
    auto fail = [&](const std::string& what, const char* key) {
        throw ScriptError(line_of_key(text, key, index), "step " + std::to_string(index) + ": " + what);
    };
    if (!doc.is_object()) fail("step must be an object", "match");
    ScriptStep step;
    auto m = doc.find("match");
    if (m == doc.end() || !m->is_object()) fail("missing match", "match");
    std::string kind = m->value("kind", "");
    if (kind == "substring") {
        step.match.kind = ScriptMatcher::Kind::Substring;
    } else if (kind == "regex") {
        step.match.kind = ScriptMatcher::Kind::Regex;
    } else {
        fail("match.kind must be \"substring\" or \"regex\"", "match");
    }
    if (!m->contains("pattern") || !(*m)["pattern"].is_string()) fail("match.pattern must be a string", "match");
    step.match.pattern = (*m)["pattern"].get<std::string>();
    if (step.match.kind == ScriptMatcher::Kind::Regex) {
        try {
            std::regex probe(step.match.pattern, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
            fail(std::string("bad regex: ") + e.what(), "match");
        }
    }

    auto d = doc.find("decision");
    if (d == doc.end() || !d->is_object()) fail("missing decision", "decision");
    const bool has_final = d->contains("final_text");
    const bool has_calls = d->contains("tool_calls");
    if (has_final == has_calls) fail("decision must have exactly one of final_text or tool_calls", "decision");
    if (has_final) {
        if (!(*d)["final_text"].is_string()) fail("final_text must be a string", "decision");
        step.final_text = (*d)["final_text"].get<std::string>();
        return step;
    }
    const auto& calls = (*d)["tool_calls"];
    if (!calls.is_array() || calls.empty()) fail("tool_calls must be a nonempty list", "decision");
    for (const auto& c : calls) {
        if (!c.is_object() || !c.contains("tool_name") || !c["tool_name"].is_string())
            fail("each tool call needs a tool_name", "decision");
        ScriptedCall call;
        call.tool_name = c["tool_name"].get<std::string>();
        try {
            call.arguments = arguments_from_json(c.value("arguments", nlohmann::json::object()));
        } catch (const std::invalid_argument& e) {
            fail(e.what(), "decision");
        }
        step.tool_calls.push_back(std::move(call));
    }
    return step;
}

}  // namespace

std::string find_choice(const std::string& prompt, const std::string& value) {
    std::string scope = prompt;
    if (auto at = prompt.find("Options:"); at != std::string::npos) {
        auto eol = prompt.find('\n', at);
        scope = prompt.substr(at, eol == std::string::npos ? std::string::npos : eol - at);
    }
    const char letters[] = {'A', 'B', 'C', 'D'};
    std::vector<std::size_t> starts;
    std::size_t from = 0;
    for (char letter : letters) {
        std::string marker = std::string(1, letter) + ") ";
        auto at = scope.find(marker, from);
        if (at == std::string::npos) break;
        starts.push_back(at);
        from = at + marker.size();
    }
    const auto wanted = as_number(value);
    for (std::size_t i = 0; i < starts.size(); ++i) {
        std::size_t begin = starts[i] + 3;
        std::size_t end = i + 1 < starts.size() ? starts[i + 1] : scope.size();
        std::string option = trim(scope.substr(begin, end - begin));
        auto number = as_number(option);
        bool equal = (wanted && number)
                         ? std::fabs(*wanted - *number) <= 1e-9 * std::max({1.0, std::fabs(*wanted), std::fabs(*number)})
                         : option == trim(value);
        if (equal) return std::string(1, letters[i]);
    }
    return {};
}

BackendScript parse_script(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ScriptError(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
    }
    if (!doc.is_object()) throw ScriptError(1, "script must be a JSON object");
    auto steps = doc.find("steps");
    if (steps == doc.end() || !steps->is_array()) throw ScriptError(line_of_key(text, "steps"), "steps must be a list");
    if (steps->empty()) throw ScriptError(line_of_key(text, "steps"), "steps must be nonempty");

    BackendScript script;
    script.default_final_text = "I cannot answer that.";
    for (std::size_t i = 0; i < steps->size(); ++i) script.steps.push_back(parse_step((*steps)[i], i, text));
    if (doc.contains("default_final_text")) {
        if (!doc["default_final_text"].is_string())
            throw ScriptError(line_of_key(text, "default_final_text"), "default_final_text must be a string");
        script.default_final_text = doc["default_final_text"].get<std::string>();
    }

    for (std::size_t i = 0; i < script.steps.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const auto& a = script.steps[j].match;
            const auto& b = script.steps[i].match;
            bool shadowed = (a.kind == b.kind && a.pattern == b.pattern) ||
                            (a.kind == ScriptMatcher::Kind::Substring && a.pattern.empty()) ||
                            (a.kind == ScriptMatcher::Kind::Substring && b.kind == ScriptMatcher::Kind::Substring &&
                             b.pattern.find(a.pattern) != std::string::npos);
            if (shadowed) {
                script.warnings.push_back("step " + std::to_string(i) + " is unreachable: step " + std::to_string(j) +
                                          " matches first");
                break;
            }
        }
    }
    return script;
}

BackendScript load_script(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScriptError(0, "cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_script(buffer.str());
}

ScriptedBackend::ScriptedBackend(BackendScript script) : script_(std::move(script)) {
    if (script_.steps.empty()) throw ScriptError(0, "steps must be nonempty");
    for (std::size_t i = 0; i < script_.steps.size(); ++i) {
        const auto& m = script_.steps[i].match;
        if (m.kind == ScriptMatcher::Kind::Regex) {
            try {
                compiled_.emplace_back(m.pattern, std::regex::ECMAScript);
            } catch (const std::regex_error& e) {
                throw ScriptError(0, "step " + std::to_string(i) + ": bad regex: " + e.what());
            }
        } else {
            compiled_.emplace_back();
        }
    }
}

ModelDecision ScriptedBackend::complete(std::span<const ChatMessage> history, std::span<const ToolSchema> schemas) const {
    if (history.empty() || (history.back().role != Role::User && history.back().role != Role::Tool))
        throw BackendError(BackendError::Code::ProtocolError, "history must end with a user or tool message");

    const auto latest = std::find_if(history.rbegin(), history.rend(), [](const ChatMessage& m) {
        return m.role == Role::User || m.role == Role::Tool;
    });
    const auto prompt = std::find_if(history.rbegin(), history.rend(), [](const ChatMessage& m) { return m.role == Role::User; });
    const std::string& text = latest->content;
    const std::string& prompt_text = prompt != history.rend() ? prompt->content : text;

    for (std::size_t i = 0; i < script_.steps.size(); ++i) {
        const auto& step = script_.steps[i];
        std::vector<std::string> groups;
        if (step.match.kind == ScriptMatcher::Kind::Substring) {
            if (text.find(step.match.pattern) == std::string::npos) continue;
            groups.push_back(step.match.pattern);
        } else {
            std::smatch m;
            if (!std::regex_search(text, m, compiled_[i])) continue;
            for (const auto& g : m) groups.push_back(g.str());
        }

        if (step.final_text) return ModelDecision::final_answer(expand(*step.final_text, groups, prompt_text));

        std::vector<ToolCallRequest> calls;
        for (std::size_t k = 0; k < step.tool_calls.size(); ++k) {
            const auto& tmpl = step.tool_calls[k];
            bool known = std::any_of(schemas.begin(), schemas.end(), [&](const ToolSchema& s) { return s.name == tmpl.tool_name; });
            if (!known) throw BackendError(BackendError::Code::UnknownToolRequested, "script requests '" + tmpl.tool_name + "'");
            ToolCallRequest call{"call_" + std::to_string(history.size()) + "_" + std::to_string(k + 1), tmpl.tool_name, {}};
            for (const auto& [name, value] : tmpl.arguments) {
                if (auto* s = std::get_if<std::string>(&value)) {
                    call.arguments.emplace(name, expand(*s, groups, prompt_text));
                } else {
                    call.arguments.emplace(name, value);
                }
            }
            calls.push_back(std::move(call));
        }
        return ModelDecision::tool_calls(std::move(calls));
    }
    return ModelDecision::final_answer(script_.default_final_text);
}

}  // namespace athena
