#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace athena {

enum class ParamKind { Integer, Number, String, Boolean, Enum };

std::string_view to_string(ParamKind kind);
ParamKind param_kind_from_string(std::string_view text);

struct ToolParameter {
    std::string name;
    ParamKind kind = ParamKind::String;
    std::string description;
    bool required = true;
    std::vector<std::string> enum_values;

    friend bool operator==(const ToolParameter&, const ToolParameter&) = default;
};

/// The machine-readable description a model reasons over when it picks a
/// tool and fills in its arguments.
struct ToolSchema {
    std::string name;
    std::string description;
    std::vector<ToolParameter> parameters;
    std::string returns;

    const ToolParameter* find_parameter(std::string_view param) const;

    friend bool operator==(const ToolSchema&, const ToolSchema&) = default;
};

using Scalar = std::variant<bool, std::int64_t, double, std::string>;
using ArgumentMap = std::map<std::string, Scalar, std::less<>>;

std::string describe_scalar_type(const Scalar& value);
std::string scalar_to_text(const Scalar& value);

enum class SchemaErrc {
    InvalidSchema,
    MissingParameter,
    UnknownParameter,
    TypeMismatch,
    EnumViolation,
};

std::string_view to_string(SchemaErrc code);

class SchemaError : public std::runtime_error {
public:
    SchemaError(SchemaErrc code, std::string parameter, const std::string& detail);

    SchemaErrc code() const noexcept { return code_; }
    const std::string& parameter() const noexcept { return parameter_; }

private:
    SchemaErrc code_;
    std::string parameter_;
};

/// Throws SchemaError(InvalidSchema) naming the first violated invariant.
void check_schema(const ToolSchema& schema);

/// Deterministic prose rendering: name, description, one line per parameter
/// as "name (kind, required|optional): description", then the returns line.
std::string render_schema_text(const ToolSchema& schema);

/// Coerces a raw argument map against a closed schema. Numeric strings become
/// the declared numeric kind and "true"/"false" (any case) become booleans.
ArgumentMap validate_arguments(const ToolSchema& schema, const ArgumentMap& raw);

// Manifest form: {name, description, parameters[{name, kind, description,
// required, enum_values?}], returns}.
nlohmann::json schema_to_json(const ToolSchema& schema);
ToolSchema schema_from_json(const nlohmann::json& doc);

/// OpenAI-style function declaration ({"type":"function","function":{...}}).
nlohmann::json schema_to_function_declaration(const ToolSchema& schema);

/// Accepts a JSON array of tool documents, a single document, or one
/// document per line.
std::vector<ToolSchema> load_manifest(const std::string& path);

nlohmann::json arguments_to_json(const ArgumentMap& args);

/// Scalars map directly and null entries are dropped. Objects and arrays are
/// not representable and raise std::invalid_argument.
ArgumentMap arguments_from_json(const nlohmann::json& doc);

}  // namespace athena
