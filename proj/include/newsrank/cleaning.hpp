#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "newsrank/io.hpp"
#include "newsrank/model.hpp"

namespace newsrank {

struct CleaningConfig {
    int max_events_per_minute = 13;
    int burst_count = 9;
    double burst_duration_s = 2.0;
    double stale_age_days = 10.0;
    int stale_click_count = 10;
    bool trim_first_last_day = true;
    std::int64_t timezone_offset_s = 0;

    void validate() const;
};

using UserSet = std::set<std::string>;

// Users with more than `threshold` events inside some sliding 60 s window
// (t_last - t_first < 60).
UserSet detect_high_event_rate(const EventLog& log, int threshold);

// Users with more than `count` clicks whose activity duration is below
// `duration_s`.
UserSet detect_short_activity(const EventLog& log, int count, double duration_s);

struct StaleDetection {
    UserSet users;
    std::size_t unknown_article_clicks = 0;
};

// Users with more than `click_count` clicks on articles older than
// `age_days` at click time. Clicks on unknown articles are skipped and counted.
StaleDetection detect_stale_interaction(const EventLog& log, double age_days, int click_count);

struct CleaningReport {
    std::size_t input_events = 0;
    UserSet rate_users;
    UserSet short_activity_users;
    UserSet stale_users;
    std::size_t flagged_users = 0; // union of the three sets
    std::size_t removed_bot_events = 0;
    std::size_t removed_incomplete = 0;
    std::map<std::string, std::size_t> removed_by_verdict;
    std::size_t trimmed_events = 0;
    std::size_t stale_unknown_article_clicks = 0;
    std::size_t surviving_events = 0;
    std::size_t surviving_users = 0;
    std::size_t surviving_articles = 0;
    std::optional<ObservationPeriod> period;

    // Folds records rejected while reading a log file into the totals.
    void add_load_rejections(const std::map<Verdict, std::size_t>& rejected);
    bool reconciles() const noexcept {
        return input_events == surviving_events + removed_bot_events + removed_incomplete + trimmed_events;
    }
};

Json to_json(const CleaningReport& report);

struct CleanResult {
    EventLog log;
    CleaningReport report;
};

// Drops invalid records, every event of users flagged by any heuristic and,
// when enabled, partial first and last calendar days of the observation
// period. The output period is day-aligned, so cleaning twice is a no-op.
CleanResult clean(const EventLog& log, const CleaningConfig& config);

struct ThresholdSuggestion {
    double percentile = 0.999;
    double events_per_minute = 0.0;   // per-user peak 60 s window count
    double short_activity_clicks = 0.0;
    double stale_clicks = 0.0;
    std::size_t users = 0;
};

// Per-user heuristic statistics at the given percentile (nearest rank).
ThresholdSuggestion suggest_thresholds(const EventLog& log, const CleaningConfig& config, double percentile = 0.999);

Json to_json(const ThresholdSuggestion& suggestion);

} // namespace newsrank
