#include "newsrank/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "newsrank/error.hpp"

namespace newsrank {

void MetricsConfig::validate() const {
    if (!(cancel_reading_below >= 0.0 && cancel_reading_below <= 1.0)) {
        throw ConfigError("metrics.cancel_reading_below must be in [0, 1]");
    }
    if (!(cancel_duration_at_most_s >= 0.0)) throw ConfigError("metrics.cancel_duration_at_most_s must be >= 0");
    if (!(popular_share > 0.0 && popular_share <= 1.0)) throw ConfigError("metrics.popular_share must be in (0, 1]");
}

namespace {

Metric ratio(double num, double den) {
    if (den == 0.0) return std::nullopt;
    return num / den;
}

} // namespace

EngagementSummary engagement(const EventLog& log, const MetricsConfig& config) {
    EngagementSummary s;
    std::unordered_set<std::string_view> users;
    std::size_t canceled = 0;
    double rp_sum = 0.0;
    double ad_sum = 0.0;
    for (const auto& e : log.events) {
        users.insert(e.user_id);
        if (!e.is_click()) {
            ++s.impressions;
            continue;
        }
        ++s.clicks;
        const double rp = e.reading_percentage.value_or(0.0);
        const double ad = e.activity_duration_s.value_or(0.0);
        rp_sum += rp;
        ad_sum += ad;
        if (rp < config.cancel_reading_below || ad <= config.cancel_duration_at_most_s) ++canceled;
    }
    s.users = users.size();
    const auto n_clicks = static_cast<double>(s.clicks);
    const auto n_users = static_cast<double>(s.users);
    s.ctr = ratio(n_clicks, static_cast<double>(s.impressions));
    s.ccr = ratio(static_cast<double>(canceled), n_clicks);
    s.ipu = ratio(static_cast<double>(s.impressions), n_users);
    s.cpu = ratio(n_clicks, n_users);
    s.avg_reading_percentage = ratio(rp_sum, n_clicks);
    s.avg_activity_duration_s = ratio(ad_sum, n_clicks);
    return s;
}

Metric gini(std::span<const double> counts) {
    if (counts.empty()) throw InvalidArgument("gini needs at least one count");
    double total = 0.0;
    for (double c : counts) {
        if (!(c >= 0.0)) throw InvalidArgument("gini counts must be non-negative");
        total += c;
    }
    if (total == 0.0) return std::nullopt;
    const auto n = static_cast<double>(counts.size());
    const double mean = total / n;
    double pairs = 0.0;
    for (double xi : counts) {
        for (double xj : counts) pairs += std::abs(xi - xj);
    }
    return pairs / (2.0 * n * n * mean);
}

Metric click_coverage(const EventLog& log) {
    std::unordered_set<std::string_view> shown;
    std::unordered_set<std::string_view> clicked;
    for (const auto& e : log.events) {
        (e.is_click() ? clicked : shown).insert(e.article_id);
    }
    return ratio(static_cast<double>(clicked.size()), static_cast<double>(shown.size()));
}

std::vector<std::string> popular_set(const std::map<std::string, std::size_t>& clicks_by_article,
                                     const MetricsConfig& config) {
    std::vector<std::pair<std::string, std::size_t>> ranked;
    std::size_t total = 0;
    for (const auto& [id, n] : clicks_by_article) {
        if (n == 0) continue;
        ranked.emplace_back(id, n);
        total += n;
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    std::size_t take = 0;
    if (config.popular_rule == PopularRule::TopShare) {
        take = static_cast<std::size_t>(std::ceil(config.popular_share * static_cast<double>(ranked.size()) - 1e-9));
    } else {
        const double target = (1.0 - config.popular_share) * static_cast<double>(total);
        double acc = 0.0;
        while (take < ranked.size() && acc < target - 1e-9) acc += static_cast<double>(ranked[take++].second);
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(take, ranked.size()); ++i) out.push_back(ranked[i].first);
    std::sort(out.begin(), out.end());
    return out;
}

PopularityStats popularity(const EventLog& log, const MetricsConfig& config) {
    std::unordered_set<std::string_view> shown;
    std::map<std::string, std::size_t> clicks_by_article;
    std::size_t impressions = 0;
    std::size_t clicks = 0;
    for (const auto& e : log.events) {
        if (e.is_click()) {
            ++clicks;
            ++clicks_by_article[e.article_id];
        } else {
            ++impressions;
            shown.insert(e.article_id);
        }
    }
    PopularityStats out;
    out.arp = ratio(static_cast<double>(impressions), static_cast<double>(shown.size()));
    out.acp = ratio(static_cast<double>(clicks), static_cast<double>(clicks_by_article.size()));
    out.popular_articles = popular_set(clicks_by_article, config);

    const std::unordered_set<std::string_view> popular(out.popular_articles.begin(), out.popular_articles.end());
    std::unordered_map<std::string_view, std::pair<std::size_t, std::size_t>> per_user; // (popular, all)
    for (const auto& e : log.events) {
        if (!e.is_click()) continue;
        auto& [pop, all] = per_user[e.user_id];
        ++all;
        if (popular.count(e.article_id) != 0) ++pop;
    }
    if (!per_user.empty()) {
        // Sum in a fixed order so the result does not depend on hashing.
        std::vector<std::pair<std::string_view, double>> keyed;
        for (const auto& [user, c] : per_user) {
            keyed.emplace_back(user, static_cast<double>(c.first) / static_cast<double>(c.second));
        }
        std::sort(keyed.begin(), keyed.end());
        double sum = 0.0;
        for (const auto& [_, v] : keyed) sum += v;
        out.ppi = sum / static_cast<double>(keyed.size());
    }
    return out;
}

std::map<std::string, double> section_counts(const EventLog& log, EventKind kind) {
    std::map<std::string, double> out;
    for (const auto& e : log.events) {
        if (e.kind != kind) continue;
        const Article* a = log.catalog->find_article(e.article_id);
        if (a != nullptr) out[a->section] += 1.0;
    }
    return out;
}

SectionDistribution section_distribution(const EventLog& log, EventKind kind) {
    const auto counts = section_counts(log, kind);
    double total = 0.0;
    for (const auto& [_, c] : counts) total += c;
    SectionDistribution out;
    if (total == 0.0) return out;
    for (const auto& [section, c] : counts) out.emplace_back(section, c / total);
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

std::vector<double> section_count_vector(const EventLog& log, EventKind kind) {
    const auto counts = section_counts(log, kind);
    const auto& sections = log.catalog->sections();
    std::vector<double> out(sections.size(), 0.0);
    for (std::size_t i = 0; i < sections.size(); ++i) {
        const auto it = counts.find(sections[i]);
        if (it != counts.end()) out[i] = it->second;
    }
    return out;
}

namespace {

Metric section_gini(const EventLog& log, EventKind kind) {
    const auto counts = section_count_vector(log, kind);
    if (counts.empty()) return std::nullopt;
    return gini(counts);
}

} // namespace

JournalisticSummary journalistic(const EventLog& log, const MetricsConfig& config) {
    JournalisticSummary s;
    s.gini_impressions = section_gini(log, EventKind::Impression);
    s.gini_clicks = section_gini(log, EventKind::Click);
    s.click_coverage = click_coverage(log);
    const PopularityStats pop = popularity(log, config);
    s.arp = pop.arp;
    s.acp = pop.acp;
    s.ppi = pop.ppi;
    s.impressions_by_section = section_distribution(log, EventKind::Impression);
    s.clicks_by_section = section_distribution(log, EventKind::Click);
    return s;
}

namespace {

constexpr std::array<DailyMetric, 12> kDailyMetrics{
    DailyMetric::CTR,           DailyMetric::CCR,          DailyMetric::IPU,
    DailyMetric::CPU,           DailyMetric::ReadingPercentage, DailyMetric::ActivityDuration,
    DailyMetric::ClickCoverage, DailyMetric::ARP,          DailyMetric::ACP,
    DailyMetric::PPI,           DailyMetric::GiniImpressions, DailyMetric::GiniClicks,
};

} // namespace

std::string_view to_string(DailyMetric metric) noexcept {
    switch (metric) {
    case DailyMetric::CTR: return "ctr";
    case DailyMetric::CCR: return "ccr";
    case DailyMetric::IPU: return "ipu";
    case DailyMetric::CPU: return "cpu";
    case DailyMetric::ReadingPercentage: return "reading_percentage";
    case DailyMetric::ActivityDuration: return "activity_duration_s";
    case DailyMetric::ClickCoverage: return "click_coverage";
    case DailyMetric::ARP: return "arp";
    case DailyMetric::ACP: return "acp";
    case DailyMetric::PPI: return "ppi";
    case DailyMetric::GiniImpressions: return "gini_impressions";
    case DailyMetric::GiniClicks: return "gini_clicks";
    }
    return "unknown";
}

std::span<const DailyMetric> all_daily_metrics() noexcept { return kDailyMetrics; }

Metric evaluate(const EventLog& log, DailyMetric metric, const MetricsConfig& config) {
    switch (metric) {
    case DailyMetric::CTR: return engagement(log, config).ctr;
    case DailyMetric::CCR: return engagement(log, config).ccr;
    case DailyMetric::IPU: return engagement(log, config).ipu;
    case DailyMetric::CPU: return engagement(log, config).cpu;
    case DailyMetric::ReadingPercentage: return engagement(log, config).avg_reading_percentage;
    case DailyMetric::ActivityDuration: return engagement(log, config).avg_activity_duration_s;
    case DailyMetric::ClickCoverage: return click_coverage(log);
    case DailyMetric::ARP: return popularity(log, config).arp;
    case DailyMetric::ACP: return popularity(log, config).acp;
    case DailyMetric::PPI: return popularity(log, config).ppi;
    case DailyMetric::GiniImpressions: return section_gini(log, EventKind::Impression);
    case DailyMetric::GiniClicks: return section_gini(log, EventKind::Click);
    }
    return std::nullopt;
}

std::vector<EventLog> split_by_day(const EventLog& log, std::int64_t timezone_offset_s,
                                   std::vector<std::int64_t>* days) {
    std::map<std::int64_t, std::vector<InteractionEvent>> by_day;
    for (const auto& e : log.events) by_day[day_index(e.at, timezone_offset_s)].push_back(e);
    std::vector<EventLog> out;
    out.reserve(by_day.size());
    if (days != nullptr) days->clear();
    for (auto& [day, events] : by_day) {
        if (days != nullptr) days->push_back(day);
        out.push_back(log.with_events(std::move(events)));
    }
    return out;
}

std::vector<DailyPoint> daily_series(const EventLog& log, DailyMetric metric, const MetricsConfig& config) {
    std::vector<std::int64_t> days;
    const auto logs = split_by_day(log, config.timezone_offset_s, &days);
    std::vector<DailyPoint> out;
    for (std::size_t i = 0; i < logs.size(); ++i) {
        const Metric v = evaluate(logs[i], metric, config);
        if (v) out.push_back({days[i], *v});
    }
    return out;
}

std::string day_label(std::int64_t day) {
    // Civil date from a day count (proleptic Gregorian).
    const std::int64_t z = day + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const std::int64_t doe = z - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    const std::int64_t d = doy - (153 * mp + 2) / 5 + 1;
    const std::int64_t m = mp < 10 ? mp + 3 : mp - 9;
    const std::int64_t y = yoe + era * 400 + (m <= 2 ? 1 : 0);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04lld-%02lld-%02lld", static_cast<long long>(y), static_cast<long long>(m),
                  static_cast<long long>(d));
    return buf;
}

std::map<int, EventLog> segment_by_activity(const EventLog& log, const std::map<std::string, int>& labels) {
    std::map<int, EventLog> out;
    for (const auto& [_, label] : labels) {
        if (out.count(label) == 0) out.emplace(label, log.with_events({}));
    }
    for (const auto& e : log.events) {
        const auto it = labels.find(e.user_id);
        if (it == labels.end()) throw InvalidArgument("user " + e.user_id + " has no activity label");
        out.at(it->second).events.push_back(e);
    }
    return out;
}

Json to_json(const Metric& value) { return value ? Json(*value) : Json(nullptr); }

Json to_json(const EngagementSummary& s) {
    Json j;
    j["impressions"] = s.impressions;
    j["clicks"] = s.clicks;
    j["users"] = s.users;
    j["ctr"] = to_json(s.ctr);
    j["ccr"] = to_json(s.ccr);
    j["ipu"] = to_json(s.ipu);
    j["cpu"] = to_json(s.cpu);
    j["avg_reading_percentage"] = to_json(s.avg_reading_percentage);
    j["avg_activity_duration_s"] = to_json(s.avg_activity_duration_s);
    return j;
}

namespace {

Json distribution_json(const SectionDistribution& d) {
    Json j = Json::array();
    for (const auto& [section, share] : d) j.push_back(Json{{"section", section}, {"share", share}});
    return j;
}

} // namespace

Json to_json(const JournalisticSummary& s) {
    Json j;
    j["gini_impressions"] = to_json(s.gini_impressions);
    j["gini_clicks"] = to_json(s.gini_clicks);
    j["click_coverage"] = to_json(s.click_coverage);
    j["arp"] = to_json(s.arp);
    j["acp"] = to_json(s.acp);
    j["ppi"] = to_json(s.ppi);
    j["impressions_by_section"] = distribution_json(s.impressions_by_section);
    j["clicks_by_section"] = distribution_json(s.clicks_by_section);
    return j;
}

} // namespace newsrank
