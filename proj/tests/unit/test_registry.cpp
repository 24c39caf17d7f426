#include <doctest.h>

#include <set>

#include "athena/registry.hpp"

using namespace athena;

namespace {

ToolSchema schema(const std::string& name, std::vector<ToolParameter> params = {}) {
    return {name, "Tool " + name + ".", std::move(params), "text"};
}

ToolDescriptor echo(const std::string& name, std::optional<int> priority = std::nullopt) {
    return {schema(name, {{"text", ParamKind::String, "what to echo", true, {}}}),
            [](const ArgumentMap& a) { return ToolResult::success(std::get<std::string>(a.at("text"))); }, priority};
}

ToolDescriptor add_tool() {
    return {{"add",
             "Adds a and b.",
             {{"a", ParamKind::Integer, "first int", true, {}}, {"b", ParamKind::Integer, "second int", true, {}}},
             "sum"},
            [](const ArgumentMap& a) {
                return ToolResult::success(std::to_string(std::get<std::int64_t>(a.at("a")) + std::get<std::int64_t>(a.at("b"))));
            },
            {}};
}

RegistryError::Code registration_code(ToolRegistry& r, ToolDescriptor d) {
    try {
        r.register_tool(std::move(d));
    } catch (const RegistryError& e) {
        return e.code();
    }
    FAIL("expected RegistryError");
    return RegistryError::Code::Frozen;
}

}  // namespace

TEST_CASE("register add and invoke it with coerced arguments") {
    ToolRegistry r;
    r.register_tool(add_tool());
    REQUIRE(r.find("add") != nullptr);
    CHECK(r.find("add")->schema.parameters.size() == 2);
    CHECK(r.find("add")->schema.parameters[0].kind == ParamKind::Integer);

    auto result = r.invoke("add", "call_1", {{"a", std::string("3")}, {"b", std::int64_t{4}}});
    CHECK_FALSE(result.is_error);
    CHECK(result.content == "7");
    CHECK(result.call_id == "call_1");
    CHECK(result.tool_name == "add");
}

TEST_CASE("registration errors") {
    ToolRegistry r;
    r.register_tool(echo("echo"));
    CHECK(registration_code(r, echo("echo")) == RegistryError::Code::DuplicateName);

    auto bad = echo("bad_enum");
    bad.schema.parameters[0].kind = ParamKind::Enum;
    CHECK(registration_code(r, bad) == RegistryError::Code::InvalidSchema);

    auto no_invoker = echo("silent");
    no_invoker.invoker = nullptr;
    CHECK(registration_code(r, no_invoker) == RegistryError::Code::InvalidSchema);

    r.freeze();
    CHECK(registration_code(r, echo("late")) == RegistryError::Code::Frozen);
    CHECK(r.size() == 1);
}

TEST_CASE("list_schemas follows priority, then registration order") {
    ToolRegistry r;
    r.register_tool(echo("c"));
    r.register_tool(echo("a", 5));
    r.register_tool(echo("b", -1));
    r.register_tool(echo("d"));
    r.register_tool(echo("e", 5));
    std::vector<std::string> names;
    for (const auto& s : r.list_schemas()) names.push_back(s.name);
    // unset priority ranks by registration position (0, 3)
    CHECK(names == std::vector<std::string>{"b", "c", "d", "a", "e"});
    for (const auto& n : names) CHECK(r.find(n)->schema.name == n);
    CHECK(r.find("zzz") == nullptr);
}

TEST_CASE("invoke never throws past the boundary") {
    ToolRegistry r;
    r.register_tool(add_tool());
    r.register_tool({schema("boom"), [](const ArgumentMap&) -> ToolResult { throw std::runtime_error("kaboom"); }, {}});
    r.register_tool({schema("blank"), [](const ArgumentMap&) { return ToolResult::success(""); }, {}});
    r.freeze();

    auto unknown = r.invoke("nope", "c0", {});
    CHECK(unknown.is_error);
    CHECK(unknown.content.find("UnknownTool") != std::string::npos);

    auto missing = r.invoke("add", "c1", {{"a", std::int64_t{1}}});
    CHECK(missing.is_error);
    CHECK(missing.content.find("MissingParameter") != std::string::npos);

    auto thrown = r.invoke("boom", "c2", {});
    CHECK(thrown.is_error);
    CHECK(thrown.content.find("kaboom") != std::string::npos);

    auto empty = r.invoke("blank", "c3", {});
    CHECK(empty.is_error);
    CHECK_FALSE(empty.content.empty());
}

TEST_CASE("rendered texts of registered schemas are distinct") {
    ToolRegistry r;
    for (const char* n : {"alpha", "beta", "gamma", "delta"}) r.register_tool(echo(n));
    std::set<std::string> texts;
    for (const auto& s : r.list_schemas()) texts.insert(render_schema_text(s));
    CHECK(texts.size() == 4);
}
