#include "newsrank/cleaning.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "newsrank/error.hpp"

namespace newsrank {

void CleaningConfig::validate() const {
    if (max_events_per_minute <= 0) throw ConfigError("cleaning.max_events_per_minute must be > 0");
    if (burst_count <= 0) throw ConfigError("cleaning.burst_count must be > 0");
    if (!(burst_duration_s > 0.0)) throw ConfigError("cleaning.burst_duration_s must be > 0");
    if (!(stale_age_days > 0.0)) throw ConfigError("cleaning.stale_age_days must be > 0");
    if (stale_click_count <= 0) throw ConfigError("cleaning.stale_click_count must be > 0");
}

namespace {

constexpr Timestamp kWindow = 60;

std::unordered_map<std::string, std::vector<Timestamp>> times_by_user(const EventLog& log) {
    std::unordered_map<std::string, std::vector<Timestamp>> out;
    for (const auto& e : log.events) out[e.user_id].push_back(e.at);
    for (auto& [_, t] : out) std::sort(t.begin(), t.end());
    return out;
}

std::size_t peak_window(const std::vector<Timestamp>& t) {
    std::size_t best = 0;
    std::size_t i = 0;
    for (std::size_t j = 0; j < t.size(); ++j) {
        while (t[j] - t[i] >= kWindow) ++i;
        best = std::max(best, j - i + 1);
    }
    return best;
}

std::unordered_map<std::string, std::size_t> short_clicks_by_user(const EventLog& log, double duration_s) {
    std::unordered_map<std::string, std::size_t> out;
    for (const auto& e : log.events) {
        if (e.is_click() && e.activity_duration_s && *e.activity_duration_s < duration_s) ++out[e.user_id];
    }
    return out;
}

struct StaleCounts {
    std::unordered_map<std::string, std::size_t> by_user;
    std::size_t unknown = 0;
};

StaleCounts stale_clicks_by_user(const EventLog& log, double age_days) {
    StaleCounts out;
    const double limit = age_days * static_cast<double>(kSecondsPerDay);
    for (const auto& e : log.events) {
        if (!e.is_click()) continue;
        const Article* a = log.catalog->find_article(e.article_id);
        if (a == nullptr) {
            ++out.unknown;
            continue;
        }
        if (static_cast<double>(e.at - a->published_at) > limit) ++out.by_user[e.user_id];
    }
    return out;
}

} // namespace

UserSet detect_high_event_rate(const EventLog& log, int threshold) {
    UserSet out;
    for (const auto& [user, t] : times_by_user(log)) {
        if (peak_window(t) > static_cast<std::size_t>(threshold)) out.insert(user);
    }
    return out;
}

UserSet detect_short_activity(const EventLog& log, int count, double duration_s) {
    UserSet out;
    for (const auto& [user, n] : short_clicks_by_user(log, duration_s)) {
        if (n > static_cast<std::size_t>(count)) out.insert(user);
    }
    return out;
}

StaleDetection detect_stale_interaction(const EventLog& log, double age_days, int click_count) {
    StaleDetection out;
    const StaleCounts counts = stale_clicks_by_user(log, age_days);
    out.unknown_article_clicks = counts.unknown;
    for (const auto& [user, n] : counts.by_user) {
        if (n > static_cast<std::size_t>(click_count)) out.users.insert(user);
    }
    return out;
}

void CleaningReport::add_load_rejections(const std::map<Verdict, std::size_t>& rejected) {
    for (const auto& [verdict, n] : rejected) {
        input_events += n;
        removed_incomplete += n;
        removed_by_verdict[std::string(to_string(verdict))] += n;
    }
}

Json to_json(const CleaningReport& r) {
    Json j;
    j["input_events"] = r.input_events;
    Json flagged;
    flagged["high_event_rate"] = r.rate_users;
    flagged["short_activity"] = r.short_activity_users;
    flagged["stale_interaction"] = r.stale_users;
    j["flagged_users"] = flagged;
    j["flagged_user_count"] = r.flagged_users;
    j["removed_bot_events"] = r.removed_bot_events;
    j["removed_incomplete"] = r.removed_incomplete;
    j["removed_by_verdict"] = r.removed_by_verdict;
    j["trimmed_events"] = r.trimmed_events;
    j["stale_unknown_article_clicks"] = r.stale_unknown_article_clicks;
    j["surviving_events"] = r.surviving_events;
    j["surviving_users"] = r.surviving_users;
    j["surviving_articles"] = r.surviving_articles;
    if (r.period) {
        j["period_start"] = r.period->start;
        j["period_end"] = r.period->end;
    } else {
        j["period_start"] = nullptr;
        j["period_end"] = nullptr;
    }
    return j;
}

CleanResult clean(const EventLog& log, const CleaningConfig& config) {
    config.validate();
    CleanResult result{log.with_events({}), {}};
    CleaningReport& report = result.report;
    report.input_events = log.events.size();

    std::vector<InteractionEvent> valid;
    valid.reserve(log.events.size());
    for (const auto& e : log.events) {
        const Verdict v = validate_event(e, *log.catalog);
        if (v == Verdict::Ok) {
            valid.push_back(e);
        } else {
            ++report.removed_incomplete;
            ++report.removed_by_verdict[std::string(to_string(v))];
        }
    }
    const EventLog valid_log = log.with_events(std::move(valid));

    report.rate_users = detect_high_event_rate(valid_log, config.max_events_per_minute);
    report.short_activity_users = detect_short_activity(valid_log, config.burst_count, config.burst_duration_s);
    StaleDetection stale = detect_stale_interaction(valid_log, config.stale_age_days, config.stale_click_count);
    report.stale_users = std::move(stale.users);
    report.stale_unknown_article_clicks = stale.unknown_article_clicks;

    std::unordered_set<std::string> flagged(report.rate_users.begin(), report.rate_users.end());
    flagged.insert(report.short_activity_users.begin(), report.short_activity_users.end());
    flagged.insert(report.stale_users.begin(), report.stale_users.end());
    report.flagged_users = flagged.size();

    std::optional<ObservationPeriod> period = log.period;
    if (!period && !valid_log.events.empty()) {
        Timestamp lo = valid_log.events.front().at;
        Timestamp hi = lo;
        for (const auto& e : valid_log.events) {
            lo = std::min(lo, e.at);
            hi = std::max(hi, e.at);
        }
        period = ObservationPeriod{lo, hi + 1};
    }
    // Partial edge days are dropped; aligned edges are kept.
    std::optional<Timestamp> keep_from;
    std::optional<Timestamp> keep_until;
    if (config.trim_first_last_day && period) {
        const std::int64_t tz = config.timezone_offset_s;
        const std::int64_t first_day = day_index(period->start, tz);
        keep_from = day_start(first_day, tz) == period->start ? period->start : day_start(first_day + 1, tz);
        keep_until = day_start(day_index(period->end, tz), tz);
        if (*keep_until < *keep_from) keep_until = keep_from;
        period = ObservationPeriod{*keep_from, *keep_until};
    }
    report.period = period;

    std::unordered_set<std::string> users;
    std::unordered_set<std::string> articles;
    for (const auto& e : valid_log.events) {
        if (flagged.count(e.user_id) != 0) {
            ++report.removed_bot_events;
            continue;
        }
        if ((keep_from && e.at < *keep_from) || (keep_until && e.at >= *keep_until)) {
            ++report.trimmed_events;
            continue;
        }
        users.insert(e.user_id);
        articles.insert(e.article_id);
        result.log.events.push_back(e);
    }
    result.log.period = period;
    report.surviving_events = result.log.events.size();
    report.surviving_users = users.size();
    report.surviving_articles = articles.size();
    return result;
}

namespace {

double nearest_rank(std::vector<double> values, double percentile) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(std::ceil(percentile * static_cast<double>(values.size())));
    return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

} // namespace

ThresholdSuggestion suggest_thresholds(const EventLog& log, const CleaningConfig& config, double percentile) {
    if (!(percentile > 0.0 && percentile <= 1.0)) throw InvalidArgument("percentile must be in (0, 1]");
    const auto times = times_by_user(log);
    const auto shorts = short_clicks_by_user(log, config.burst_duration_s);
    const auto stale = stale_clicks_by_user(log, config.stale_age_days);

    std::vector<double> peak;
    std::vector<double> short_counts;
    std::vector<double> stale_counts;
    for (const auto& [user, t] : times) {
        peak.push_back(static_cast<double>(peak_window(t)));
        const auto s = shorts.find(user);
        short_counts.push_back(s == shorts.end() ? 0.0 : static_cast<double>(s->second));
        const auto o = stale.by_user.find(user);
        stale_counts.push_back(o == stale.by_user.end() ? 0.0 : static_cast<double>(o->second));
    }
    ThresholdSuggestion out;
    out.percentile = percentile;
    out.users = times.size();
    out.events_per_minute = nearest_rank(std::move(peak), percentile);
    out.short_activity_clicks = nearest_rank(std::move(short_counts), percentile);
    out.stale_clicks = nearest_rank(std::move(stale_counts), percentile);
    return out;
}

Json to_json(const ThresholdSuggestion& s) {
    Json j;
    j["percentile"] = s.percentile;
    j["users"] = s.users;
    j["events_per_minute"] = s.events_per_minute;
    j["short_activity_clicks"] = s.short_activity_clicks;
    j["stale_clicks"] = s.stale_clicks;
    return j;
}

} // namespace newsrank
