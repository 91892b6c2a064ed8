#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "newsrank/model.hpp"

namespace newsrank {

using Json = nlohmann::ordered_json;

// File names of a log directory: events plus sidecar catalogs.
inline constexpr const char* kEventsFile = "events.ndjson";
inline constexpr const char* kArticlesFile = "articles.json";
inline constexpr const char* kUsersFile = "users.json";
inline constexpr const char* kMetaFile = "meta.json";

Json to_json(const Article& article);
Json to_json(const User& user);
Json to_json(const InteractionEvent& event);

Article article_from_json(const nlohmann::json& j);
User user_from_json(const nlohmann::json& j);
InteractionEvent event_from_json(const nlohmann::json& j);

struct LoadResult {
    EventLog log;
    std::size_t rejected = 0;
    std::map<Verdict, std::size_t> rejected_by_verdict;
};

// Reads an event log and its sidecar catalogs (same directory). Records
// failing validate_event are dropped and counted. Throws IoError when a
// file is missing and ParseError (with line number) on malformed input.
LoadResult load_event_log(const std::filesystem::path& events_path);

// One JSON object per line, in log order.
std::string serialize_events(const std::vector<InteractionEvent>& events);

// Writes events.ndjson, articles.json, users.json and (if the log carries an
// observation period) meta.json into `dir`.
void write_event_log(const EventLog& log, const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);

// Temp file + rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace newsrank
