#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace newsrank {

// Integer Unix seconds, UTC.
using Timestamp = std::int64_t;

inline constexpr Timestamp kSecondsPerMinute = 60;
inline constexpr Timestamp kSecondsPerHour = 3600;
inline constexpr Timestamp kSecondsPerDay = 86400;

// Calendar day number of `t` after shifting by a timezone offset.
constexpr std::int64_t day_index(Timestamp t, std::int64_t tz_offset_s = 0) noexcept {
    const Timestamp shifted = t + tz_offset_s;
    return shifted >= 0 ? shifted / kSecondsPerDay : -((-shifted + kSecondsPerDay - 1) / kSecondsPerDay);
}

constexpr Timestamp day_start(std::int64_t day, std::int64_t tz_offset_s = 0) noexcept {
    return day * kSecondsPerDay - tz_offset_s;
}

enum class Arm { Control, Personalization };
enum class EventKind { Impression, Click };

std::string_view to_string(Arm arm) noexcept;
std::string_view to_string(EventKind kind) noexcept;
std::optional<Arm> parse_arm(std::string_view text) noexcept;
std::optional<EventKind> parse_event_kind(std::string_view text) noexcept;

struct Article {
    std::string article_id;
    std::string section;
    Timestamp published_at = 0;
    int initial_news_value = 0; // editor-assigned, 0..100
    int length_chars = 1;
    bool editorial_pinned = false;
    std::optional<int> pinned_position;

    bool operator==(const Article&) const = default;
};

struct User {
    std::string user_id;
    bool subscriber = true;
    Timestamp subscribed_since = 0;
    std::optional<Arm> arm;

    bool operator==(const User&) const = default;
};

struct InteractionEvent {
    std::string user_id;
    std::string article_id;
    EventKind kind = EventKind::Impression;
    Timestamp at = 0;
    std::optional<double> reading_percentage;  // fraction in [0,1]; clicks only
    std::optional<double> activity_duration_s; // clicks only
    int feed_position = 0;

    bool is_click() const noexcept { return kind == EventKind::Click; }
    bool operator==(const InteractionEvent&) const = default;
};

// Weights of the composite score. w4 is the personalization weight and is
// zero for the non-personalized ranker.
struct RankingWeights {
    double w1 = 0.50; // popularity
    double w2 = 0.25; // recency
    double w3 = 0.25; // performance
    double w4 = 0.0;  // personalization

    static constexpr RankingWeights non_personalized() noexcept { return {0.50, 0.25, 0.25, 0.0}; }
    static constexpr RankingWeights personalized() noexcept { return {0.40, 0.20, 0.20, 0.20}; }

    // Throws InvalidArgument naming the offending weight.
    void validate() const;
    bool operator==(const RankingWeights&) const = default;
};

// Half-open interval [start, end) covered by a log.
struct ObservationPeriod {
    Timestamp start = 0;
    Timestamp end = 0;

    bool operator==(const ObservationPeriod&) const = default;
};

// Immutable article and user catalogs with id lookup.
class Catalog {
public:
    Catalog() = default;
    // Throws InvalidArgument on duplicate ids or violated type invariants.
    Catalog(std::vector<Article> articles, std::vector<User> users);

    const std::vector<Article>& articles() const noexcept { return articles_; }
    const std::vector<User>& users() const noexcept { return users_; }

    const Article* find_article(const std::string& id) const;
    const User* find_user(const std::string& id) const;
    std::optional<std::size_t> article_index(const std::string& id) const;
    std::optional<std::size_t> user_index(const std::string& id) const;

    // Distinct article sections, sorted.
    const std::vector<std::string>& sections() const noexcept { return sections_; }

private:
    std::vector<Article> articles_;
    std::vector<User> users_;
    std::unordered_map<std::string, std::size_t> article_index_;
    std::unordered_map<std::string, std::size_t> user_index_;
    std::vector<std::string> sections_;
};

struct EventLog {
    std::vector<InteractionEvent> events;
    std::shared_ptr<const Catalog> catalog = std::make_shared<const Catalog>();
    std::optional<ObservationPeriod> period;

    // A log over the same catalog and period holding other events.
    EventLog with_events(std::vector<InteractionEvent> other) const {
        return EventLog{std::move(other), catalog, period};
    }
};

enum class Verdict {
    Ok,
    UnknownUser,
    UnknownArticle,
    IncompleteClick,
    FieldOnWrongKind,
    NegativeDuration,
    ReadingPercentageOutOfRange,
};

std::string_view to_string(Verdict verdict) noexcept;

// Total: every event maps to exactly one verdict; never throws.
Verdict validate_event(const InteractionEvent& event, const Catalog& catalog) noexcept;

struct ArmPartition {
    EventLog control;
    EventLog personalization;
    std::size_t excluded_events = 0;
    std::size_t excluded_users = 0;
};

// Splits events by the arm of their user. Events of users without an arm
// (or unknown users) are excluded and counted.
ArmPartition partition_by_arm(const EventLog& log);

} // namespace newsrank
