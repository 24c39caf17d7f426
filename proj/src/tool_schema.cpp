#include "athena/tool_schema.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace athena {

namespace {

bool valid_identifier(std::string_view name) {
    if (name.empty() || name.front() < 'a' || name.front() > 'z') return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    });
}

std::string trim(std::string_view s) {
    auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

template <typename T>
bool parse_full(std::string_view text, T& out) {
    auto s = trim(text);
    if (s.empty()) return false;
    const char* begin = s.data();
    if (*begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

bool integral_double(double v) {
    return std::isfinite(v) && std::trunc(v) == v &&
           std::fabs(v) <= static_cast<double>(std::numeric_limits<std::int64_t>::max() / 2);
}

SchemaError mismatch(const ToolParameter& p, const Scalar& got) {
    return SchemaError(SchemaErrc::TypeMismatch, p.name,
                       "expected " + std::string(to_string(p.kind)) + ", got " +
                           describe_scalar_type(got));
}

Scalar coerce(const ToolParameter& p, const Scalar& value) {
    switch (p.kind) {
    case ParamKind::Integer:
        if (auto* i = std::get_if<std::int64_t>(&value)) return *i;
        if (auto* d = std::get_if<double>(&value)) {
            if (integral_double(*d)) return static_cast<std::int64_t>(*d);
            throw mismatch(p, value);
        }
        if (auto* s = std::get_if<std::string>(&value)) {
            std::int64_t i = 0;
            if (parse_full(*s, i)) return i;
            double d = 0;
            if (parse_full(*s, d) && integral_double(d)) return static_cast<std::int64_t>(d);
        }
        throw mismatch(p, value);
    case ParamKind::Number:
        if (auto* d = std::get_if<double>(&value)) {
            if (std::isfinite(*d)) return *d;
            throw mismatch(p, value);
        }
        if (auto* i = std::get_if<std::int64_t>(&value)) return static_cast<double>(*i);
        if (auto* s = std::get_if<std::string>(&value)) {
            double d = 0;
            if (parse_full(*s, d) && std::isfinite(d)) return d;
        }
        throw mismatch(p, value);
    case ParamKind::String:
        if (std::holds_alternative<std::string>(value)) return value;
        throw mismatch(p, value);
    case ParamKind::Boolean:
        if (std::holds_alternative<bool>(value)) return value;
        if (auto* s = std::get_if<std::string>(&value)) {
            auto norm = lower(trim(*s));
            if (norm == "true") return true;
            if (norm == "false") return false;
        }
        throw mismatch(p, value);
    case ParamKind::Enum:
        if (auto* s = std::get_if<std::string>(&value)) {
            if (std::find(p.enum_values.begin(), p.enum_values.end(), *s) != p.enum_values.end())
                return value;
            throw SchemaError(SchemaErrc::EnumViolation, p.name, "value '" + *s + "' not allowed");
        }
        throw mismatch(p, value);
    }
    throw mismatch(p, value);
}

}  // namespace

std::string_view to_string(ParamKind kind) {
    switch (kind) {
    case ParamKind::Integer: return "integer";
    case ParamKind::Number: return "number";
    case ParamKind::String: return "string";
    case ParamKind::Boolean: return "boolean";
    case ParamKind::Enum: return "enum";
    }
    return "string";
}

ParamKind param_kind_from_string(std::string_view text) {
    if (text == "integer") return ParamKind::Integer;
    if (text == "number") return ParamKind::Number;
    if (text == "string") return ParamKind::String;
    if (text == "boolean") return ParamKind::Boolean;
    if (text == "enum") return ParamKind::Enum;
    throw SchemaError(SchemaErrc::InvalidSchema, "", "unknown parameter kind '" + std::string(text) + "'");
}

const ToolParameter* ToolSchema::find_parameter(std::string_view param) const {
    for (const auto& p : parameters)
        if (p.name == param) return &p;
    return nullptr;
}

std::string describe_scalar_type(const Scalar& value) {
    switch (value.index()) {
    case 0: return "boolean";
    case 1: return "integer";
    case 2: return "number";
    default: return "string";
    }
}

std::string scalar_to_text(const Scalar& value) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else if constexpr (std::is_same_v<T, std::string>) {
                return v;
            } else {
                return nlohmann::json(v).dump();
            }
        },
        value);
}

std::string_view to_string(SchemaErrc code) {
    switch (code) {
    case SchemaErrc::InvalidSchema: return "InvalidSchema";
    case SchemaErrc::MissingParameter: return "MissingParameter";
    case SchemaErrc::UnknownParameter: return "UnknownParameter";
    case SchemaErrc::TypeMismatch: return "TypeMismatch";
    case SchemaErrc::EnumViolation: return "EnumViolation";
    }
    return "SchemaError";
}

SchemaError::SchemaError(SchemaErrc code, std::string parameter, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) +
                         (parameter.empty() ? std::string() : "(" + parameter + ")") + ": " + detail),
      code_(code),
      parameter_(std::move(parameter)) {}

void check_schema(const ToolSchema& schema) {
    auto fail = [&](const std::string& what) {
        throw SchemaError(SchemaErrc::InvalidSchema, "", "tool '" + schema.name + "': " + what);
    };
    if (!valid_identifier(schema.name)) fail("name must match [a-z][a-z0-9_]*");
    if (trim(schema.description).empty()) fail("description must be nonempty");
    std::set<std::string, std::less<>> seen;
    for (const auto& p : schema.parameters) {
        if (!valid_identifier(p.name)) fail("parameter name '" + p.name + "' must match [a-z][a-z0-9_]*");
        if (!seen.insert(p.name).second) fail("duplicate parameter '" + p.name + "'");
        if ((p.kind == ParamKind::Enum) != !p.enum_values.empty())
            fail("parameter '" + p.name + "': enum_values must be nonempty iff kind is enum");
    }
}

std::string render_schema_text(const ToolSchema& schema) {
    std::ostringstream out;
    out << schema.name << '\n' << schema.description << '\n';
    if (schema.parameters.empty()) {
        out << "No parameters.\n";
    } else {
        out << "Parameters:\n";
        for (const auto& p : schema.parameters) {
            out << p.name << " (" << to_string(p.kind) << ", " << (p.required ? "required" : "optional")
                << "): " << p.description;
            if (p.kind == ParamKind::Enum) {
                out << " One of:";
                for (const auto& v : p.enum_values) out << ' ' << v;
                out << '.';
            }
            out << '\n';
        }
    }
    out << "Returns: " << (schema.returns.empty() ? "text" : schema.returns) << '\n';
    return out.str();
}

ArgumentMap validate_arguments(const ToolSchema& schema, const ArgumentMap& raw) {
    for (const auto& [name, value] : raw) {
        if (!schema.find_parameter(name))
            throw SchemaError(SchemaErrc::UnknownParameter, name, "not declared by '" + schema.name + "'");
    }
    ArgumentMap out;
    for (const auto& p : schema.parameters) {
        auto it = raw.find(p.name);
        if (it == raw.end()) {
            if (p.required) throw SchemaError(SchemaErrc::MissingParameter, p.name, "required by '" + schema.name + "'");
            continue;
        }
        out.emplace(p.name, coerce(p, it->second));
    }
    return out;
}

nlohmann::json schema_to_json(const ToolSchema& schema) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : schema.parameters) {
        nlohmann::json jp = {
            {"name", p.name},
            {"kind", to_string(p.kind)},
            {"description", p.description},
            {"required", p.required},
        };
        if (p.kind == ParamKind::Enum) jp["enum_values"] = p.enum_values;
        params.push_back(std::move(jp));
    }
    return {
        {"name", schema.name},
        {"description", schema.description},
        {"parameters", std::move(params)},
        {"returns", schema.returns},
    };
}

ToolSchema schema_from_json(const nlohmann::json& doc) {
    try {
        ToolSchema schema;
        schema.name = doc.at("name").get<std::string>();
        schema.description = doc.at("description").get<std::string>();
        schema.returns = doc.value("returns", std::string());
        for (const auto& jp : doc.value("parameters", nlohmann::json::array())) {
            ToolParameter p;
            p.name = jp.at("name").get<std::string>();
            p.kind = param_kind_from_string(jp.at("kind").get<std::string>());
            p.description = jp.value("description", std::string());
            p.required = jp.value("required", true);
            if (jp.contains("enum_values")) p.enum_values = jp.at("enum_values").get<std::vector<std::string>>();
            schema.parameters.push_back(std::move(p));
        }
        check_schema(schema);
        return schema;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(SchemaErrc::InvalidSchema, "", std::string("malformed tool document: ") + e.what());
    }
}

nlohmann::json schema_to_function_declaration(const ToolSchema& schema) {
    nlohmann::json properties = nlohmann::json::object();
    nlohmann::json required = nlohmann::json::array();
    for (const auto& p : schema.parameters) {
        nlohmann::json prop = {{"description", p.description}};
        switch (p.kind) {
        case ParamKind::Integer: prop["type"] = "integer"; break;
        case ParamKind::Number: prop["type"] = "number"; break;
        case ParamKind::String: prop["type"] = "string"; break;
        case ParamKind::Boolean: prop["type"] = "boolean"; break;
        case ParamKind::Enum:
            prop["type"] = "string";
            prop["enum"] = p.enum_values;
            break;
        }
        properties[p.name] = std::move(prop);
        if (p.required) required.push_back(p.name);
    }
    return {
        {"type", "function"},
        {"function",
         {
             {"name", schema.name},
             {"description", schema.description},
             {"parameters", {{"type", "object"}, {"properties", properties}, {"required", required}}},
         }},
    };
}

std::vector<ToolSchema> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(SchemaErrc::InvalidSchema, "", "cannot open manifest " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    std::vector<ToolSchema> out;
    auto whole = nlohmann::json::parse(text, nullptr, false);
    if (!whole.is_discarded()) {
        if (whole.is_array()) {
            for (const auto& doc : whole) out.push_back(schema_from_json(doc));
        } else {
            out.push_back(schema_from_json(whole));
        }
        return out;
    }
    std::istringstream lines(text);
    std::string line;
    int lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded())
            throw SchemaError(SchemaErrc::InvalidSchema, "", path + ":" + std::to_string(lineno) + ": invalid JSON");
        out.push_back(schema_from_json(doc));
    }
    return out;
}

nlohmann::json arguments_to_json(const ArgumentMap& args) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [name, value] : args) {
        std::visit([&](const auto& v) { out[name] = v; }, value);
    }
    return out;
}

ArgumentMap arguments_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("arguments must be a JSON object");
    ArgumentMap out;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const auto& v = it.value();
        if (v.is_null()) continue;
        if (v.is_boolean()) {
            out.emplace(it.key(), v.get<bool>());
        } else if (v.is_number_integer()) {
            out.emplace(it.key(), v.get<std::int64_t>());
        } else if (v.is_number_float()) {
            out.emplace(it.key(), v.get<double>());
        } else if (v.is_string()) {
            out.emplace(it.key(), v.get<std::string>());
        } else {
            throw std::invalid_argument("argument '" + it.key() + "' is not a scalar");
        }
    }
    return out;
}

}  // namespace athena
