#pragma once

#include <atomic>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include "newsrank/model.hpp"

namespace nrtest {

using newsrank::Arm;
using newsrank::Article;
using newsrank::EventKind;
using newsrank::EventLog;
using newsrank::InteractionEvent;
using newsrank::Timestamp;
using newsrank::User;

inline Article article(std::string id, std::string section, Timestamp published = 0, int news_value = 50,
                       int length = 3000) {
    Article a;
    a.article_id = std::move(id);
    a.section = std::move(section);
    a.published_at = published;
    a.initial_news_value = news_value;
    a.length_chars = length;
    return a;
}

inline User user(std::string id, std::optional<Arm> arm = Arm::Control, bool subscriber = true) {
    User u;
    u.user_id = std::move(id);
    u.subscriber = subscriber;
    u.arm = arm;
    return u;
}

inline InteractionEvent impression(std::string u, std::string a, Timestamp at, int position = 0) {
    InteractionEvent e;
    e.user_id = std::move(u);
    e.article_id = std::move(a);
    e.kind = EventKind::Impression;
    e.at = at;
    e.feed_position = position;
    return e;
}

inline InteractionEvent click(std::string u, std::string a, Timestamp at, double reading = 0.5,
                              double duration = 30.0, int position = 0) {
    InteractionEvent e;
    e.user_id = std::move(u);
    e.article_id = std::move(a);
    e.kind = EventKind::Click;
    e.at = at;
    e.reading_percentage = reading;
    e.activity_duration_s = duration;
    e.feed_position = position;
    return e;
}

inline EventLog make_log(std::vector<Article> articles, std::vector<User> users,
                         std::vector<InteractionEvent> events) {
    EventLog log;
    log.catalog = std::make_shared<const newsrank::Catalog>(std::move(articles), std::move(users));
    log.events = std::move(events);
    return log;
}

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "nrtest") {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace nrtest
