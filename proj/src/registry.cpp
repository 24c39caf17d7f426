#include "athena/registry.hpp"

#include <algorithm>

namespace athena {

void ToolRegistry::register_tool(ToolDescriptor descriptor) {
    if (frozen_) throw RegistryError(RegistryError::Code::Frozen, "registry is frozen");
    try {
        check_schema(descriptor.schema);
    } catch (const SchemaError& e) {
        throw RegistryError(RegistryError::Code::InvalidSchema, e.what());
    }
    if (!descriptor.invoker)
        throw RegistryError(RegistryError::Code::InvalidSchema,
                            "InvalidSchema: tool '" + descriptor.schema.name + "' has no invoker");
    if (find(descriptor.schema.name))
        throw RegistryError(RegistryError::Code::DuplicateName,
                            "DuplicateName: tool '" + descriptor.schema.name + "' already registered");

    const std::size_t order = entries_.size();
    const int rank = descriptor.priority.value_or(static_cast<int>(order));
    Entry entry{std::move(descriptor), rank, order};
    auto pos = std::upper_bound(entries_.begin(), entries_.end(), entry, [](const Entry& a, const Entry& b) {
        return a.rank != b.rank ? a.rank < b.rank : a.order < b.order;
    });
    entries_.insert(pos, std::move(entry));
}

const ToolDescriptor* ToolRegistry::find(std::string_view name) const {
    for (const auto& e : entries_)
        if (e.descriptor.schema.name == name) return &e.descriptor;
    return nullptr;
}

std::vector<ToolSchema> ToolRegistry::list_schemas() const {
    std::vector<ToolSchema> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.descriptor.schema);
    return out;
}

ToolResult ToolRegistry::invoke(std::string_view tool_name, const std::string& call_id, const ArgumentMap& raw) const {
    ToolResult result;
    const ToolDescriptor* tool = find(tool_name);
    if (!tool) {
        result = ToolResult::failure("UnknownTool: no tool named '" + std::string(tool_name) + "'");
    } else {
        try {
            auto args = validate_arguments(tool->schema, raw);
            result = tool->invoker(args);
            if (!result.is_error && result.content.empty())
                result = ToolResult::failure("tool '" + std::string(tool_name) + "' returned an empty result");
        } catch (const std::exception& e) {
            result = ToolResult::failure(e.what());
        } catch (...) {
            result = ToolResult::failure("tool '" + std::string(tool_name) + "' failed");
        }
    }
    result.tool_name = std::string(tool_name);
    result.call_id = call_id;
    return result;
}

}  // namespace athena
