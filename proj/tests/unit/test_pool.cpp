#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "newsrank/error.hpp"
#include "newsrank/pool.hpp"

using namespace newsrank;
using namespace nrtest;

namespace {

constexpr Timestamp kNow = 1'000'000;

Timestamp hours_ago(double h) { return kNow - static_cast<Timestamp>(h * kSecondsPerHour); }

std::vector<ScoredArticle> ranked_ids(const std::string& prefix, int n) {
    std::vector<ScoredArticle> out;
    for (int i = 0; i < n; ++i) {
        ScoredArticle sa;
        sa.article_id = prefix + std::to_string(i);
        sa.composite = 100.0 - i;
        out.push_back(sa);
    }
    return out;
}

EditorialPicks picks(int curated) {
    EditorialPicks p;
    p.pinned = {"p0", "p1", "p2", "p3"};
    for (int i = 0; i < curated; ++i) p.curated.push_back("c" + std::to_string(i));
    return p;
}

} // namespace

TEST(BuildPool, FreshArticlesAllAdmitted) {
    std::vector<Article> arts;
    for (int i = 0; i < 10; ++i) arts.push_back(article("a" + std::to_string(i), "Verden", hours_ago(1)));
    EXPECT_EQ(build_pool(arts, PoolRules{}, kNow).size(), 10u);
}

TEST(BuildPool, OldArticleExcluded) {
    const std::vector<Article> arts{article("old", "Verden", hours_ago(100)), article("new", "Verden", hours_ago(2))};
    const auto pool = build_pool(arts, PoolRules{}, kNow);
    ASSERT_EQ(pool.size(), 1u);
    EXPECT_EQ(pool.articles[0]->article_id, "new");
}

TEST(BuildPool, FutureArticlesNotYetVisible) {
    const std::vector<Article> arts{article("soon", "Verden", kNow + 60)};
    EXPECT_TRUE(build_pool(arts, PoolRules{}, kNow).empty());
}

TEST(BuildPool, StaleOpinionReadmittedToMeetMinimum) {
    const std::vector<Article> arts{article("k1", "Kommentar", hours_ago(5)), article("d1", "Debatt", hours_ago(8)),
                                    article("k_old", "Kommentar", hours_ago(200)),
                                    article("k_older", "Kommentar", hours_ago(300)),
                                    article("v", "Verden", hours_ago(1))};
    const auto pool = build_pool(arts, PoolRules{}, kNow);
    int opinion = 0;
    std::set<std::string> ids;
    for (const Article* a : pool.articles) {
        ids.insert(a->article_id);
        opinion += PoolRules{}.is_opinion(a->section) ? 1 : 0;
    }
    EXPECT_EQ(opinion, 3);
    EXPECT_TRUE(ids.count("k_old"));
    EXPECT_FALSE(ids.count("k_older"));
    EXPECT_EQ(pool.admitted_by_opinion_rule, 1u);
    // Catalog order is kept.
    EXPECT_EQ(pool.articles.front()->article_id, "k1");
    EXPECT_EQ(pool.articles.back()->article_id, "v");
}

TEST(BuildPool, EveryMemberSatisfiesAgeOrOpinionRule) {
    PoolRules rules;
    rules.max_age_hours_by_section["Sport"] = 24.0;
    std::vector<Article> arts;
    for (int i = 0; i < 60; ++i) {
        const char* sec = i % 3 == 0 ? "Sport" : (i % 3 == 1 ? "Kommentar" : "Verden");
        arts.push_back(article("a" + std::to_string(i), sec, hours_ago(i * 3.0)));
    }
    const auto pool = build_pool(arts, rules, kNow);
    for (const Article* a : pool.articles) {
        const double age = static_cast<double>(kNow - a->published_at) / kSecondsPerHour;
        EXPECT_TRUE(age <= rules.max_age_hours(a->section) || rules.is_opinion(a->section)) << a->article_id;
    }
}

TEST(PoolRules, ValidateRejectsBadValues) {
    PoolRules r;
    r.max_age_hours_by_section["Sport"] = 0.0;
    EXPECT_THROW(r.validate(), InvalidArgument);
    PoolRules m;
    m.min_opinion_articles = -1;
    EXPECT_THROW(m.validate(), InvalidArgument);
}

TEST(FrontPage, PinnedCuratedAndRanked) {
    const auto ranked = ranked_ids("r", 20);
    const auto layout = assemble_front_page(ranked, picks(3));
    ASSERT_EQ(layout.slots.size(), 27u);
    EXPECT_EQ(layout.count(SlotKind::Pinned), 4u);
    EXPECT_EQ(layout.count(SlotKind::Curated), 3u);
    EXPECT_EQ(layout.slots[10].kind, SlotKind::Curated);
    EXPECT_EQ(layout.slots[20].kind, SlotKind::Curated);
    int next = 0;
    for (const auto& s : layout.slots) {
        if (s.kind == SlotKind::Auto) EXPECT_EQ(s.article_id, "r" + std::to_string(next++));
    }
    EXPECT_EQ(next, 20);
}

TEST(FrontPage, RankedPinnedArticleIsSkipped) {
    auto ranked = ranked_ids("r", 5);
    ranked[1].article_id = "p2";
    const auto layout = assemble_front_page(ranked, picks(0));
    std::set<std::string> ids;
    for (const auto& s : layout.slots) EXPECT_TRUE(ids.insert(s.article_id).second) << s.article_id;
    EXPECT_EQ(layout.slots.size(), 8u);
}

TEST(FrontPage, AutomatedShareNinetyPercent) {
    const auto layout = assemble_front_page(ranked_ids("r", 36), picks(0));
    EXPECT_EQ(layout.slots.size(), 40u);
    EXPECT_DOUBLE_EQ(layout.automated_share(), 0.9);
}

TEST(FrontPage, RequiresFourPinned) {
    EditorialPicks p = picks(0);
    p.pinned.pop_back();
    EXPECT_THROW(assemble_front_page(ranked_ids("r", 3), p), InvalidArgument);
}

TEST(FrontPage, MaxSlotsAndDeterminism) {
    const auto ranked = ranked_ids("r", 50);
    const auto a = assemble_front_page(ranked, picks(3), 25);
    const auto b = assemble_front_page(ranked, picks(3), 25);
    ASSERT_EQ(a.slots.size(), 25u);
    for (std::size_t i = 0; i < a.slots.size(); ++i) EXPECT_EQ(a.slots[i].article_id, b.slots[i].article_id);
}
