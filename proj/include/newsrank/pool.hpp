#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "newsrank/model.hpp"
#include "newsrank/scores.hpp"

namespace newsrank {

// Editorial constraints on which articles may be ranked automatically.
struct PoolRules {
    double default_max_age_hours = 72.0;
    std::map<std::string, double> max_age_hours_by_section;
    int min_opinion_articles = 3;
    std::set<std::string> opinion_sections{"Kommentar", "Debatt"};

    double max_age_hours(const std::string& section) const;
    bool is_opinion(const std::string& section) const { return opinion_sections.count(section) > 0; }
    void validate() const;
};

struct CandidatePool {
    std::vector<const Article*> articles; // catalog order
    std::size_t admitted_by_opinion_rule = 0;

    std::size_t size() const noexcept { return articles.size(); }
    bool empty() const noexcept { return articles.empty(); }
};

// Articles published at or before `now` and within their section's lifetime.
// If fewer than min_opinion_articles opinion articles qualify, the most recent
// stale opinion articles are admitted until the minimum is met.
CandidatePool build_pool(std::span<const Article> articles, const PoolRules& rules, Timestamp now);

struct EditorialPicks {
    std::vector<std::string> pinned;  // exactly four, top of the page
    std::vector<std::string> curated; // up to four, at curated_positions
    std::vector<int> curated_positions{10, 20, 30};
};

enum class SlotKind { Pinned, Curated, Auto };

struct Slot {
    std::string article_id;
    SlotKind kind = SlotKind::Auto;
};

struct FrontPageLayout {
    std::vector<Slot> slots;

    std::size_t count(SlotKind kind) const noexcept;
    // Share of all slots filled by the ranker (reported, not enforced).
    double automated_share() const noexcept;
};

// Places pinned picks at positions 0..3, curated picks at their positions and
// fills every other slot with ranked articles in order, skipping articles
// already placed editorially. Curated picks whose position lies beyond the
// ranked content are appended. `max_slots` = 0 means no limit.
// Throws InvalidArgument unless exactly four pinned picks are supplied.
FrontPageLayout assemble_front_page(std::span<const ScoredArticle> ranked, const EditorialPicks& picks,
                                    std::size_t max_slots = 0);

} // namespace newsrank
