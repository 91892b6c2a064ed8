#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "newsrank/io.hpp"
#include "newsrank/model.hpp"

namespace newsrank {

// Missing values (zero denominators) are nullopt, never 0.
using Metric = std::optional<double>;

enum class PopularRule {
    TopShare,  // top ceil(share * m) clicked articles by click count
    ClickMass, // smallest top set holding at least (1 - share) of clicks
};

struct MetricsConfig {
    double cancel_reading_below = 0.10;
    double cancel_duration_at_most_s = 5.0;
    PopularRule popular_rule = PopularRule::TopShare;
    double popular_share = 0.20;
    std::int64_t timezone_offset_s = 0;

    void validate() const;
};

struct EngagementSummary {
    std::size_t impressions = 0;
    std::size_t clicks = 0;
    std::size_t users = 0; // users with at least one event
    Metric ctr;
    Metric ccr;
    Metric ipu;
    Metric cpu;
    Metric avg_reading_percentage;
    Metric avg_activity_duration_s;
};

EngagementSummary engagement(const EventLog& log, const MetricsConfig& config = {});

// Gini over per-section counts by the pairwise definition. nullopt when all
// counts are zero; throws InvalidArgument for an empty or negative input.
Metric gini(std::span<const double> counts);

// Unique clicked articles over unique impressed articles.
Metric click_coverage(const EventLog& log);

struct PopularityStats {
    Metric arp;
    Metric acp;
    Metric ppi;
    std::vector<std::string> popular_articles; // sorted
};

PopularityStats popularity(const EventLog& log, const MetricsConfig& config = {});

// Articles counted as popular under the configured rule.
std::vector<std::string> popular_set(const std::map<std::string, std::size_t>& clicks_by_article,
                                     const MetricsConfig& config);

using SectionDistribution = std::vector<std::pair<std::string, double>>;

// Event counts of `kind` per section, keyed by section name.
std::map<std::string, double> section_counts(const EventLog& log, EventKind kind);

// Normalized counts ordered by descending count, ties by name.
SectionDistribution section_distribution(const EventLog& log, EventKind kind);

// Counts over every catalog section (zeros included), in catalog order.
std::vector<double> section_count_vector(const EventLog& log, EventKind kind);

struct JournalisticSummary {
    Metric gini_impressions;
    Metric gini_clicks;
    Metric click_coverage;
    Metric arp;
    Metric acp;
    Metric ppi;
    SectionDistribution impressions_by_section;
    SectionDistribution clicks_by_section;
};

JournalisticSummary journalistic(const EventLog& log, const MetricsConfig& config = {});

enum class DailyMetric {
    CTR,
    CCR,
    IPU,
    CPU,
    ReadingPercentage,
    ActivityDuration,
    ClickCoverage,
    ARP,
    ACP,
    PPI,
    GiniImpressions,
    GiniClicks,
};

std::string_view to_string(DailyMetric metric) noexcept;
std::span<const DailyMetric> all_daily_metrics() noexcept;

Metric evaluate(const EventLog& log, DailyMetric metric, const MetricsConfig& config = {});

struct DailyPoint {
    std::int64_t day = 0; // days since the epoch in the configured zone
    double value = 0.0;
};

// Metric per calendar day. Days without events, or where the metric is
// missing, are omitted.
std::vector<DailyPoint> daily_series(const EventLog& log, DailyMetric metric, const MetricsConfig& config = {});

std::vector<EventLog> split_by_day(const EventLog& log, std::int64_t timezone_offset_s,
                                   std::vector<std::int64_t>* days = nullptr);

// "YYYY-MM-DD" of a day index.
std::string day_label(std::int64_t day);

// Sub-log per label. Throws InvalidArgument for a user without a label.
std::map<int, EventLog> segment_by_activity(const EventLog& log, const std::map<std::string, int>& labels);

Json to_json(const Metric& value);
Json to_json(const EngagementSummary& summary);
Json to_json(const JournalisticSummary& summary);

} // namespace newsrank
