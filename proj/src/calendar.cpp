#include <algorithm>
#include <fstream>

#include "athena/tools.hpp"

namespace athena::tools {

nlohmann::json to_json(const CalendarEvent& event) {
    return {
        {"id", event.id},
        {"title", event.title},
        {"start", format_rfc3339(event.start)},
        {"end", format_rfc3339(event.end)},
        {"description", event.description ? nlohmann::json(*event.description) : nlohmann::json(nullptr)},
    };
}

CalendarEvent calendar_event_from_json(const nlohmann::json& doc) {
    auto stamp = [&](const char* key) {
        auto t = parse_rfc3339(doc.at(key).get<std::string>());
        if (!t) throw ToolError(ToolError::Code::InvalidEvent, std::string(key) + " is not an RFC 3339 timestamp");
        return *t;
    };
    try {
        CalendarEvent e;
        e.id = doc.value("id", "");
        e.title = doc.at("title").get<std::string>();
        e.start = stamp("start");
        e.end = stamp("end");
        if (doc.contains("description") && !doc.at("description").is_null())
            e.description = doc.at("description").get<std::string>();
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw ToolError(ToolError::Code::InvalidEvent, ex.what());
    }
}

CalendarStore::CalendarStore(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(*path_);
    if (!in) return;  // created on first write
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            events_.push_back(calendar_event_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw ToolError(ToolError::Code::StoreError,
                            path_->string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    next_id_ = events_.size() + 1;
}

std::string CalendarStore::create(CalendarEvent event) {
    if (event.title.find_first_not_of(" \t\r\n") == std::string::npos)
        throw ToolError(ToolError::Code::InvalidEvent, "title is empty");
    if (!(event.start < event.end)) throw ToolError(ToolError::Code::InvalidEvent, "start must precede end");

    std::lock_guard lock(mutex_);
    auto taken = [&](const std::string& id) {
        return std::any_of(events_.begin(), events_.end(), [&](const CalendarEvent& e) { return e.id == id; });
    };
    if (event.id.empty()) {
        do {
            event.id = "evt-" + std::to_string(next_id_++);
        } while (taken(event.id));
    } else if (taken(event.id)) {
        throw ToolError(ToolError::Code::InvalidEvent, "id '" + event.id + "' already exists");
    }
    if (path_) {
        std::ofstream out(*path_, std::ios::app);
        if (!out) throw ToolError(ToolError::Code::StoreError, "cannot open " + path_->string());
        out << to_json(event).dump() << '\n';
        out.flush();
        if (!out) throw ToolError(ToolError::Code::StoreError, "write to " + path_->string() + " failed");
    }
    events_.push_back(event);
    return event.id;
}

std::vector<CalendarEvent> CalendarStore::list(Timestamp range_start, Timestamp range_end) const {
    if (!(range_start < range_end))
        throw ToolError(ToolError::Code::InvalidInput, "range_start must precede range_end");
    std::vector<CalendarEvent> out;
    {
        std::lock_guard lock(mutex_);
        for (const auto& e : events_)
            if (e.start < range_end && range_start < e.end) out.push_back(e);
    }
    std::sort(out.begin(), out.end(), [](const CalendarEvent& a, const CalendarEvent& b) {
        return a.start != b.start ? a.start < b.start : a.id < b.id;
    });
    return out;
}

std::size_t CalendarStore::size() const {
    std::lock_guard lock(mutex_);
    return events_.size();
}

ToolResult CalendarStore::calendar_create(CalendarEvent event) {
    try {
        auto id = create(event);
        event.id = id;
        return ToolResult::success(nlohmann::json{{"id", id}, {"event", to_json(event)}}.dump());
    } catch (const std::exception& e) {
        return ToolResult::failure(e.what());
    }
}

ToolResult CalendarStore::calendar_list(Timestamp range_start, Timestamp range_end) const {
    try {
        nlohmann::json events = nlohmann::json::array();
        for (const auto& e : list(range_start, range_end)) events.push_back(to_json(e));
        return ToolResult::success(nlohmann::json{{"events", events}}.dump());
    } catch (const std::exception& e) {
        return ToolResult::failure(e.what());
    }
}

}  // namespace athena::tools
