#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "athena/timestamp.hpp"
#include "athena/tools.hpp"

using namespace athena;
using namespace athena::tools;
using std::chrono::minutes;

namespace {

Timestamp at(const char* text) { return *parse_rfc3339(text); }

std::filesystem::path temp_file(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("athena_" + name + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove(p);
    return p;
}

}  // namespace

TEST_CASE("timestamps parse and format as RFC 3339 UTC") {
    CHECK(format_rfc3339(at("2026-01-05T09:00:00Z")) == "2026-01-05T09:00:00Z");
    CHECK(format_rfc3339(at("2026-01-05T10:00:00+01:00")) == "2026-01-05T09:00:00Z");
    CHECK(format_rfc3339(at("2026-01-05T09:00:00.250Z")) == "2026-01-05T09:00:00.250Z");
    CHECK(format_rfc3339(at("2026-01-05")) == "2026-01-05T00:00:00Z");
    CHECK_FALSE(parse_rfc3339("2026-13-05T09:00:00Z"));
    CHECK_FALSE(parse_rfc3339("tomorrow"));
    CHECK_FALSE(parse_rfc3339(""));
}

TEST_CASE("create then list the enclosing range returns exactly that event") {
    CalendarStore store;
    CalendarEvent e{{}, "Review", at("2026-03-01T10:00:00Z"), at("2026-03-01T11:00:00Z"), std::string("notes")};
    auto id = store.create(e);
    e.id = id;
    auto listed = store.list(at("2026-03-01T00:00:00Z"), at("2026-03-02T00:00:00Z"));
    REQUIRE(listed.size() == 1);
    CHECK(listed[0] == e);
}

TEST_CASE("empty store lists nothing") {
    CalendarStore store;
    CHECK(store.list(at("2026-03-01T00:00:00Z"), at("2026-03-02T00:00:00Z")).empty());
    auto r = store.calendar_list(at("2026-03-01T00:00:00Z"), at("2026-03-02T00:00:00Z"));
    CHECK_FALSE(r.is_error);
    CHECK(r.content == R"({"events":[]})");
}

TEST_CASE("invalid events and ranges") {
    CalendarStore store;
    auto t = at("2026-03-01T10:00:00Z");
    CHECK_THROWS_AS(store.create({{}, "x", t, t, {}}), ToolError);
    CHECK_THROWS_AS(store.create({{}, "x", t + minutes(5), t, {}}), ToolError);
    CHECK_THROWS_AS(store.create({{}, "  ", t, t + minutes(5), {}}), ToolError);
    auto r = store.calendar_create({{}, "x", t, t, {}});
    CHECK(r.is_error);
    CHECK(r.content.find("InvalidEvent") != std::string::npos);
    CHECK(store.size() == 0);
    CHECK(store.calendar_list(t, t).is_error);
}

TEST_CASE("touching intervals do not overlap") {
    CalendarStore store;
    store.create({{}, "a", at("2026-03-01T10:00:00Z"), at("2026-03-01T11:00:00Z"), {}});
    CHECK(store.list(at("2026-03-01T11:00:00Z"), at("2026-03-01T12:00:00Z")).empty());
    CHECK(store.list(at("2026-03-01T09:00:00Z"), at("2026-03-01T10:00:00Z")).empty());
    CHECK(store.list(at("2026-03-01T10:59:00Z"), at("2026-03-01T12:00:00Z")).size() == 1);
}

TEST_CASE("200 generated events agree with a linear scan") {
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<int> offset(0, 60 * 24 * 14);
    std::uniform_int_distribution<int> length(1, 600);
    const auto base = at("2026-05-01T00:00:00Z");

    CalendarStore store;
    std::vector<CalendarEvent> all;
    for (int i = 0; i < 200; ++i) {
        CalendarEvent e{{}, "event " + std::to_string(i), base + minutes(offset(rng)), {}, std::nullopt};
        e.end = e.start + minutes(length(rng));
        if (i % 3 == 0) e.description = "d" + std::to_string(i);
        e.id = store.create(e);
        all.push_back(e);
    }
    // each event comes back from a range equal to itself
    for (const auto& e : all) {
        auto hit = store.list(e.start, e.end);
        CHECK(std::count(hit.begin(), hit.end(), e) == 1);
    }
    for (int q = 0; q < 300; ++q) {
        auto lo = base + minutes(offset(rng));
        auto hi = lo + minutes(length(rng) * 3);
        std::vector<CalendarEvent> expected;
        for (const auto& e : all)
            if (e.start < hi && lo < e.end) expected.push_back(e);
        std::sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) {
            return a.start != b.start ? a.start < b.start : a.id < b.id;
        });
        CHECK(store.list(lo, hi) == expected);
    }
}

TEST_CASE("file-backed store persists and reloads") {
    auto path = temp_file("calendar");
    CalendarEvent e{{}, "Persisted", at("2026-04-01T08:00:00Z"), at("2026-04-01T09:00:00Z"), {}};
    {
        CalendarStore store(path);
        e.id = store.create(e);
    }
    CalendarStore reopened(path);
    CHECK(reopened.size() == 1);
    CHECK(reopened.list(at("2026-04-01T00:00:00Z"), at("2026-04-02T00:00:00Z")).at(0) == e);
    auto second = reopened.create({{}, "Next", at("2026-04-02T08:00:00Z"), at("2026-04-02T09:00:00Z"), {}});
    CHECK(second != e.id);
    std::filesystem::remove(path);
}

TEST_CASE("unwritable store reports StoreError") {
    CalendarStore store(std::filesystem::path("/proc/athena-no-such-dir/calendar.jsonl"));
    auto r = store.calendar_create({{}, "x", at("2026-04-01T08:00:00Z"), at("2026-04-01T09:00:00Z"), {}});
    CHECK(r.is_error);
    CHECK(r.content.find("StoreError") != std::string::npos);
}

TEST_CASE("corrupt store file is rejected on load") {
    auto path = temp_file("corrupt");
    std::ofstream(path) << "{\"id\": \"evt-1\"}\n";
    CHECK_THROWS_AS(CalendarStore{path}, ToolError);
    std::filesystem::remove(path);
}
