#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "athena/tool_result.hpp"
#include "athena/tool_schema.hpp"

namespace athena {

/// Receives arguments already validated against the tool's schema.
using ToolInvoker = std::function<ToolResult(const ArgumentMap&)>;

struct ToolDescriptor {
    ToolSchema schema;
    ToolInvoker invoker;
    /// Lower ranks list first. Unset means registration order.
    std::optional<int> priority;
};

class RegistryError : public std::runtime_error {
public:
    enum class Code { DuplicateName, InvalidSchema, Frozen };

    RegistryError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

/// Repository of registered tools. Built single-threaded at startup, then
/// frozen; after freeze() all access is read-only and safe to share.
class ToolRegistry {
public:
    void register_tool(ToolDescriptor descriptor);
    void freeze() noexcept { frozen_ = true; }
    bool frozen() const noexcept { return frozen_; }

    const ToolDescriptor* find(std::string_view name) const;
    std::vector<ToolSchema> list_schemas() const;
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    /// Validates arguments and runs the tool. Unknown tools, validation
    /// failures and exceptions thrown by the invoker all come back as
    /// is_error results.
    ToolResult invoke(std::string_view tool_name, const std::string& call_id, const ArgumentMap& raw) const;

private:
    struct Entry {
        ToolDescriptor descriptor;
        int rank;
        std::size_t order;
    };

    std::vector<Entry> entries_;  // kept sorted by (rank, order)
    bool frozen_ = false;
};

}  // namespace athena
