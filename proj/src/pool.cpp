#include "newsrank/pool.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "newsrank/error.hpp"

namespace newsrank {

double PoolRules::max_age_hours(const std::string& section) const {
    const auto it = max_age_hours_by_section.find(section);
    return it == max_age_hours_by_section.end() ? default_max_age_hours : it->second;
}

void PoolRules::validate() const {
    if (!(default_max_age_hours > 0.0)) throw InvalidArgument("pool.default_max_age_hours must be > 0");
    for (const auto& [section, hours] : max_age_hours_by_section) {
        if (!(hours > 0.0)) throw InvalidArgument("pool.max_age_hours_by_section." + section + " must be > 0");
    }
    if (min_opinion_articles < 0) throw InvalidArgument("pool.min_opinion_articles must be >= 0");
}

CandidatePool build_pool(std::span<const Article> articles, const PoolRules& rules, Timestamp now) {
    CandidatePool pool;
    std::vector<const Article*> stale_opinion;
    int opinion_count = 0;
    for (const Article& a : articles) {
        if (a.published_at > now) continue;
        const double age_hours = static_cast<double>(now - a.published_at) / kSecondsPerHour;
        const bool opinion = rules.is_opinion(a.section);
        if (age_hours <= rules.max_age_hours(a.section)) {
            pool.articles.push_back(&a);
            opinion_count += opinion ? 1 : 0;
        } else if (opinion) {
            stale_opinion.push_back(&a);
        }
    }
    if (opinion_count < rules.min_opinion_articles && !stale_opinion.empty()) {
        std::sort(stale_opinion.begin(), stale_opinion.end(), [](const Article* x, const Article* y) {
            if (x->published_at != y->published_at) return x->published_at > y->published_at;
            return x->article_id < y->article_id;
        });
        const auto missing = static_cast<std::size_t>(rules.min_opinion_articles - opinion_count);
        const auto take = std::min(missing, stale_opinion.size());
        std::unordered_set<const Article*> admitted(stale_opinion.begin(), stale_opinion.begin() + take);
        pool.admitted_by_opinion_rule = take;
        // Rebuild in catalog order so the pool stays deterministic and ordered.
        std::vector<const Article*> ordered;
        ordered.reserve(pool.articles.size() + take);
        std::size_t next = 0;
        for (const Article& a : articles) {
            if (next < pool.articles.size() && pool.articles[next] == &a) {
                ordered.push_back(&a);
                ++next;
            } else if (admitted.count(&a)) {
                ordered.push_back(&a);
            }
        }
        pool.articles = std::move(ordered);
    }
    return pool;
}

std::size_t FrontPageLayout::count(SlotKind kind) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(slots.begin(), slots.end(), [kind](const Slot& s) { return s.kind == kind; }));
}

double FrontPageLayout::automated_share() const noexcept {
    if (slots.empty()) return 0.0;
    return static_cast<double>(count(SlotKind::Auto)) / static_cast<double>(slots.size());
}

FrontPageLayout assemble_front_page(std::span<const ScoredArticle> ranked, const EditorialPicks& picks,
                                    std::size_t max_slots) {
    if (picks.pinned.size() != 4) {
        throw InvalidArgument("front page requires exactly 4 pinned picks, got " +
                              std::to_string(picks.pinned.size()));
    }
    if (picks.curated.size() > 4) throw InvalidArgument("at most 4 curated picks are supported");
    if (picks.curated.size() > picks.curated_positions.size()) {
        throw InvalidArgument("not enough curated positions for the curated picks");
    }
    std::unordered_set<std::string> placed;
    for (const auto& id : picks.pinned) {
        if (!placed.insert(id).second) throw InvalidArgument("duplicate editorial pick " + id);
    }
    for (const auto& id : picks.curated) {
        if (!placed.insert(id).second) throw InvalidArgument("duplicate editorial pick " + id);
    }
    std::vector<int> positions(picks.curated_positions.begin(),
                               picks.curated_positions.begin() + static_cast<long>(picks.curated.size()));
    std::sort(positions.begin(), positions.end());

    FrontPageLayout layout;
    const auto full = [&] { return max_slots != 0 && layout.slots.size() >= max_slots; };
    for (const auto& id : picks.pinned) {
        if (full()) return layout;
        layout.slots.push_back({id, SlotKind::Pinned});
    }
    std::size_t next_curated = 0;
    std::size_t next_ranked = 0;
    while (!full()) {
        const auto index = static_cast<int>(layout.slots.size());
        if (next_curated < positions.size() && positions[next_curated] <= index) {
            layout.slots.push_back({picks.curated[next_curated], SlotKind::Curated});
            ++next_curated;
            continue;
        }
        while (next_ranked < ranked.size() && placed.count(ranked[next_ranked].article_id)) ++next_ranked;
        if (next_ranked == ranked.size()) break;
        placed.insert(ranked[next_ranked].article_id);
        layout.slots.push_back({ranked[next_ranked].article_id, SlotKind::Auto});
        ++next_ranked;
    }
    while (next_curated < positions.size() && !full()) {
        layout.slots.push_back({picks.curated[next_curated], SlotKind::Curated});
        ++next_curated;
    }
    return layout;
}

} // namespace newsrank
