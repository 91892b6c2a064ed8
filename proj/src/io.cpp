#include "newsrank/io.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "newsrank/error.hpp"

namespace newsrank {

namespace fs = std::filesystem;

Json to_json(const Article& a) {
    Json j;
    j["article_id"] = a.article_id;
    j["section"] = a.section;
    j["published_at"] = a.published_at;
    j["initial_news_value"] = a.initial_news_value;
    j["length_chars"] = a.length_chars;
    j["editorial_pinned"] = a.editorial_pinned;
    j["pinned_position"] = a.pinned_position ? Json(*a.pinned_position) : Json(nullptr);
    return j;
}

Json to_json(const User& u) {
    Json j;
    j["user_id"] = u.user_id;
    j["subscriber"] = u.subscriber;
    j["subscribed_since"] = u.subscribed_since;
    j["arm"] = u.arm ? Json(std::string(to_string(*u.arm))) : Json(nullptr);
    return j;
}

Json to_json(const InteractionEvent& e) {
    Json j;
    j["user_id"] = e.user_id;
    j["article_id"] = e.article_id;
    j["kind"] = std::string(to_string(e.kind));
    j["at"] = e.at;
    if (e.reading_percentage) j["reading_percentage"] = *e.reading_percentage;
    if (e.activity_duration_s) j["activity_duration_s"] = *e.activity_duration_s;
    j["feed_position"] = e.feed_position;
    return j;
}

Article article_from_json(const nlohmann::json& j) {
    Article a;
    a.article_id = j.at("article_id").get<std::string>();
    a.section = j.at("section").get<std::string>();
    a.published_at = j.at("published_at").get<Timestamp>();
    a.initial_news_value = j.at("initial_news_value").get<int>();
    a.length_chars = j.at("length_chars").get<int>();
    a.editorial_pinned = j.value("editorial_pinned", false);
    if (j.contains("pinned_position") && !j["pinned_position"].is_null()) {
        a.pinned_position = j["pinned_position"].get<int>();
    }
    return a;
}

User user_from_json(const nlohmann::json& j) {
    User u;
    u.user_id = j.at("user_id").get<std::string>();
    u.subscriber = j.value("subscriber", true);
    u.subscribed_since = j.value("subscribed_since", Timestamp{0});
    if (j.contains("arm") && !j["arm"].is_null()) {
        const auto text = j["arm"].get<std::string>();
        u.arm = parse_arm(text);
        if (!u.arm) throw std::invalid_argument("unknown arm '" + text + "'");
    }
    return u;
}

InteractionEvent event_from_json(const nlohmann::json& j) {
    InteractionEvent e;
    e.user_id = j.at("user_id").get<std::string>();
    e.article_id = j.at("article_id").get<std::string>();
    const auto kind = j.at("kind").get<std::string>();
    const auto parsed = parse_event_kind(kind);
    if (!parsed) throw std::invalid_argument("unknown kind '" + kind + "'");
    e.kind = *parsed;
    e.at = j.at("at").get<Timestamp>();
    if (j.contains("reading_percentage") && !j["reading_percentage"].is_null()) {
        e.reading_percentage = j["reading_percentage"].get<double>();
    }
    if (j.contains("activity_duration_s") && !j["activity_duration_s"].is_null()) {
        e.activity_duration_s = j["activity_duration_s"].get<double>();
    }
    e.feed_position = j.at("feed_position").get<int>();
    if (e.feed_position < 0) throw std::invalid_argument("feed_position must be non-negative");
    return e;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

namespace {

template <class T, class F>
std::vector<T> load_array(const fs::path& path, F&& parse_item) {
    const std::string text = read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path.string(), 1, ex.what());
    }
    if (!j.is_array()) throw ParseError(path.string(), 1, "expected a JSON array");
    std::vector<T> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        try {
            out.push_back(parse_item(j[i]));
        } catch (const std::exception& ex) {
            throw ParseError(path.string(), 1, "element " + std::to_string(i) + ": " + ex.what());
        }
    }
    return out;
}

} // namespace

LoadResult load_event_log(const fs::path& events_path) {
    if (!fs::exists(events_path)) throw IoError("no such file: " + events_path.string());
    const fs::path dir = events_path.parent_path();
    auto articles = load_array<Article>(dir / kArticlesFile, article_from_json);
    auto users = load_array<User>(dir / kUsersFile, user_from_json);

    LoadResult result;
    try {
        result.log.catalog = std::make_shared<const Catalog>(std::move(articles), std::move(users));
    } catch (const InvalidArgument& ex) {
        throw ParseError((dir / kArticlesFile).string(), 1, ex.what());
    }

    if (fs::exists(dir / kMetaFile)) {
        try {
            const auto meta = nlohmann::json::parse(read_file(dir / kMetaFile));
            result.log.period = ObservationPeriod{meta.at("period_start").get<Timestamp>(),
                                                  meta.at("period_end").get<Timestamp>()};
        } catch (const nlohmann::json::exception& ex) {
            throw ParseError((dir / kMetaFile).string(), 1, ex.what());
        }
    }

    std::ifstream in(events_path);
    if (!in) throw IoError("cannot open " + events_path.string());
    std::string line;
    std::size_t line_no = 0;
    Timestamp last_at = std::numeric_limits<Timestamp>::min();
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        InteractionEvent e;
        try {
            e = event_from_json(nlohmann::json::parse(line));
        } catch (const std::exception& ex) {
            throw ParseError(events_path.string(), line_no, ex.what());
        }
        if (e.at < last_at) {
            throw ParseError(events_path.string(), line_no, "timestamps must be non-decreasing");
        }
        last_at = e.at;
        const Verdict v = validate_event(e, *result.log.catalog);
        if (v != Verdict::Ok) {
            ++result.rejected;
            ++result.rejected_by_verdict[v];
            continue;
        }
        result.log.events.push_back(std::move(e));
    }
    return result;
}

std::string serialize_events(const std::vector<InteractionEvent>& events) {
    std::string out;
    out.reserve(events.size() * 150);
    for (const auto& e : events) {
        out += to_json(e).dump();
        out += '\n';
    }
    return out;
}

void write_event_log(const EventLog& log, const fs::path& dir) {
    fs::create_directories(dir);
    Json articles = Json::array();
    for (const auto& a : log.catalog->articles()) articles.push_back(to_json(a));
    Json users = Json::array();
    for (const auto& u : log.catalog->users()) users.push_back(to_json(u));
    write_file_atomic(dir / kArticlesFile, articles.dump(1) + "\n");
    write_file_atomic(dir / kUsersFile, users.dump(1) + "\n");
    if (log.period) {
        Json meta;
        meta["period_start"] = log.period->start;
        meta["period_end"] = log.period->end;
        write_file_atomic(dir / kMetaFile, meta.dump(2) + "\n");
    } else if (fs::exists(dir / kMetaFile)) {
        fs::remove(dir / kMetaFile);
    }
    write_file_atomic(dir / kEventsFile, serialize_events(log.events));
}

} // namespace newsrank
