#pragma once

#include <optional>
#include <string>

#include "newsrank/model.hpp"

namespace newsrank {

// Component scores of one article, each on the 0..100 scale.
struct ScoreVector {
    double s1 = 0.0; // popularity
    double s2 = 0.0; // recency
    double s3 = 0.0; // performance
    std::optional<double> s4; // personalization

    bool operator==(const ScoreVector&) const = default;
};

struct ScoredArticle {
    std::string article_id;
    Timestamp published_at = 0;
    ScoreVector scores;
    double composite = 0.0;
};

} // namespace newsrank

#include <span>
#include <vector>

namespace newsrank {

// Min-max normalization onto 0..100. When every value is equal (including a
// single value) every output is 50, the midpoint of the scale.
std::vector<double> min_max_scale(std::span<const double> raw);

} // namespace newsrank
