#include "newsrank/ranker.hpp"

#include <algorithm>
#include <cmath>

#include "newsrank/error.hpp"
#include "newsrank/personalize.hpp"

namespace newsrank {

std::vector<double> min_max_scale(std::span<const double> raw) {
    std::vector<double> out(raw.size(), 50.0);
    if (raw.empty()) return out;
    const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    const double range = *hi - *lo;
    if (!(range > 0.0)) return out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out[i] = std::clamp((raw[i] - *lo) / range * 100.0, 0.0, 100.0);
    }
    return out;
}

void RankerConfig::validate() const {
    if (!(popularity_window_hours > 0.0)) throw InvalidArgument("ranking.popularity_window_hours must be > 0");
    if (!(performance_window_hours > 0.0)) throw InvalidArgument("ranking.performance_window_hours must be > 0");
    if (!(recency_half_life_hours > 0.0)) throw InvalidArgument("ranking.recency_half_life_hours must be > 0");
}

WindowCounts count_in_window(std::span<const InteractionEvent> events, Timestamp from, Timestamp to) {
    WindowCounts counts;
    for (const auto& e : events) {
        if (e.at < from || e.at > to) continue;
        auto& target = e.is_click() ? counts.clicks : counts.impressions;
        target[e.article_id] += 1.0;
    }
    return counts;
}

ScoreMap ctr_by_article(const WindowCounts& counts) {
    ScoreMap ctr;
    for (const auto& [id, impressions] : counts.impressions) {
        const auto it = counts.clicks.find(id);
        ctr[id] = impressions > 0.0 && it != counts.clicks.end() ? it->second / impressions : 0.0;
    }
    return ctr;
}

namespace {

ScoreMap scale_over_pool(const CandidatePool& pool, const ScoreMap& raw_by_id) {
    std::vector<double> raw;
    raw.reserve(pool.size());
    for (const Article* a : pool.articles) {
        const auto it = raw_by_id.find(a->article_id);
        raw.push_back(it == raw_by_id.end() ? 0.0 : it->second);
    }
    const auto scaled = min_max_scale(raw);
    ScoreMap out;
    out.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) out[pool.articles[i]->article_id] = scaled[i];
    return out;
}

void check_score(double s, const char* name) {
    if (!(s >= 0.0 && s <= 100.0)) throw InvalidArgument(std::string(name) + " outside [0,100]");
}

void check_weight(double w, const char* name) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument(std::string(name) + " must be finite and >= 0");
}

} // namespace

ScoreMap popularity_score(const CandidatePool& pool, const ScoreMap& window_clicks) {
    return scale_over_pool(pool, window_clicks);
}

ScoreMap performance_score(const CandidatePool& pool, const ScoreMap& window_ctr) {
    return scale_over_pool(pool, window_ctr);
}

double recency_score(int initial_news_value, double age_hours, double half_life_hours) {
    const double decay = std::exp2(-std::max(age_hours, 0.0) / half_life_hours);
    return std::clamp(static_cast<double>(initial_news_value) * decay, 0.0, 100.0);
}

double recency_score(const Article& article, Timestamp now, double half_life_hours) {
    const double age_hours = static_cast<double>(now - article.published_at) / kSecondsPerHour;
    return recency_score(article.initial_news_value, age_hours, half_life_hours);
}

double composite_nonpersonalized(const ScoreVector& s, const RankingWeights& w) {
    check_weight(w.w1, "w1");
    check_weight(w.w2, "w2");
    check_weight(w.w3, "w3");
    check_score(s.s1, "s1");
    check_score(s.s2, "s2");
    check_score(s.s3, "s3");
    const double total = w.w1 + w.w2 + w.w3;
    if (!(total > 0.0)) throw InvalidArgument("w1, w2 and w3 are all zero");
    const double weighted = w.w1 * s.s1 + w.w2 * s.s2 + w.w3 * s.s3;
    return std::clamp(weighted / total, 0.0, 100.0);
}

double composite_personalized(const ScoreVector& s, const RankingWeights& w) {
    if (!s.s4) throw InvalidArgument("personalized composite requires s4");
    check_weight(w.w1, "w1");
    check_weight(w.w2, "w2");
    check_weight(w.w3, "w3");
    check_weight(w.w4, "w4");
    check_score(s.s1, "s1");
    check_score(s.s2, "s2");
    check_score(s.s3, "s3");
    check_score(*s.s4, "s4");
    const double total = w.w1 + w.w2 + w.w3 + w.w4;
    if (!(total > 0.0)) throw InvalidArgument("total ranking weight is zero");
    const double weighted = w.w1 * s.s1 + w.w2 * s.s2 + w.w3 * s.s3 + w.w4 * *s.s4;
    return std::clamp(weighted / total, 0.0, 100.0);
}

bool feed_order(const ScoredArticle& a, const ScoredArticle& b) noexcept {
    if (a.composite != b.composite) return a.composite > b.composite;
    if (a.published_at != b.published_at) return a.published_at > b.published_at;
    return a.article_id < b.article_id;
}

void order_feed(std::vector<ScoredArticle>& feed) { std::sort(feed.begin(), feed.end(), feed_order); }

std::vector<ScoredArticle> score_pool(const CandidatePool& pool, Timestamp now,
                                      std::span<const InteractionEvent> events, const RankerConfig& config) {
    const auto pop_from = now - static_cast<Timestamp>(config.popularity_window_hours * kSecondsPerHour);
    const auto perf_from = now - static_cast<Timestamp>(config.performance_window_hours * kSecondsPerHour);
    const auto popularity = popularity_score(pool, count_in_window(events, pop_from, now).clicks);
    const auto performance = performance_score(pool, ctr_by_article(count_in_window(events, perf_from, now)));

    std::vector<ScoredArticle> out;
    out.reserve(pool.size());
    for (const Article* a : pool.articles) {
        ScoredArticle sa;
        sa.article_id = a->article_id;
        sa.published_at = a->published_at;
        sa.scores.s1 = popularity.at(a->article_id);
        sa.scores.s2 = recency_score(*a, now, config.recency_half_life_hours);
        sa.scores.s3 = performance.at(a->article_id);
        out.push_back(std::move(sa));
    }
    return out;
}

std::vector<ScoredArticle> rank_feed(const CandidatePool& pool, const std::string& user_id,
                                     const RankingWeights& weights, Timestamp now, const EventLog& log,
                                     const FactorModel* model, const RankerConfig& config) {
    weights.validate();
    if (weights.w4 > 0.0 && model == nullptr) {
        throw InvalidArgument("w4 > 0 requires a trained factor model");
    }
    auto feed = score_pool(pool, now, log.events, config);
    if (weights.w4 > 0.0) {
        std::vector<std::string> ids;
        ids.reserve(feed.size());
        for (const auto& sa : feed) ids.push_back(sa.article_id);
        const auto relevance = relevance_scores(*model, user_id, ids);
        for (auto& sa : feed) {
            sa.scores.s4 = relevance.at(sa.article_id);
            sa.composite = composite_personalized(sa.scores, weights);
        }
    } else {
        for (auto& sa : feed) sa.composite = composite_nonpersonalized(sa.scores, weights);
    }
    order_feed(feed);
    return feed;
}

} // namespace newsrank
