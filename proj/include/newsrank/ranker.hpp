#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "newsrank/model.hpp"
#include "newsrank/pool.hpp"
#include "newsrank/scores.hpp"

namespace newsrank {

class FactorModel;

struct RankerConfig {
    double popularity_window_hours = 24.0;
    double performance_window_hours = 6.0;
    double recency_half_life_hours = 12.0;

    void validate() const;
};

using ScoreMap = std::unordered_map<std::string, double>;

struct WindowCounts {
    std::unordered_map<std::string, double> clicks;
    std::unordered_map<std::string, double> impressions;
};

// Counts impressions and clicks per article with `from <= at <= to`.
WindowCounts count_in_window(std::span<const InteractionEvent> events, Timestamp from, Timestamp to);

// Click-through rate per article; articles without impressions get 0.
ScoreMap ctr_by_article(const WindowCounts& counts);

// Min-max of window click counts over the pool (articles absent from the map
// count zero clicks).
ScoreMap popularity_score(const CandidatePool& pool, const ScoreMap& window_clicks);

// news_value * 2^(-age/half_life), clamped to 0..100.
double recency_score(int initial_news_value, double age_hours, double half_life_hours = 12.0);
double recency_score(const Article& article, Timestamp now, double half_life_hours = 12.0);

// Min-max of per-article front-page CTR over the pool.
ScoreMap performance_score(const CandidatePool& pool, const ScoreMap& window_ctr);

// Weighted mean of s1..s3; w4 is ignored. Throws InvalidArgument when
// w1..w3 are all zero or a score lies outside 0..100.
double composite_nonpersonalized(const ScoreVector& s, const RankingWeights& w);

// Weighted mean of s1..s4. Reduces exactly to the non-personalized composite
// when w4 = 0. Throws InvalidArgument when s4 is missing or the total weight
// is zero.
double composite_personalized(const ScoreVector& s, const RankingWeights& w);

// Composite descending, then newer first, then article id ascending.
bool feed_order(const ScoredArticle& a, const ScoredArticle& b) noexcept;
void order_feed(std::vector<ScoredArticle>& feed);

// s1..s3 for every pool article, composite left at 0.
std::vector<ScoredArticle> score_pool(const CandidatePool& pool, Timestamp now,
                                      std::span<const InteractionEvent> events, const RankerConfig& config);

// Full ranking for one user. A model is required when weights.w4 > 0.
std::vector<ScoredArticle> rank_feed(const CandidatePool& pool, const std::string& user_id,
                                     const RankingWeights& weights, Timestamp now, const EventLog& log,
                                     const FactorModel* model, const RankerConfig& config = {});

} // namespace newsrank
