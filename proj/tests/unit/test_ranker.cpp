#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "newsrank/error.hpp"
#include "newsrank/personalize.hpp"
#include "newsrank/ranker.hpp"
#include "newsrank/scores.hpp"

using namespace newsrank;
using namespace nrtest;

namespace {

CandidatePool pool_of(const std::vector<Article>& arts) {
    CandidatePool p;
    for (const auto& a : arts) p.articles.push_back(&a);
    return p;
}

} // namespace

TEST(MinMax, EndpointsAndDegenerate) {
    const std::vector<double> raw{100, 50, 0};
    EXPECT_EQ(min_max_scale(raw), (std::vector<double>{100, 50, 0}));
    const std::vector<double> same{7, 7};
    EXPECT_EQ(min_max_scale(same), (std::vector<double>{50, 50}));
    EXPECT_TRUE(min_max_scale(std::vector<double>{}).empty());
}

TEST(Popularity, ExamplesFromCounts) {
    const std::vector<Article> arts{article("a", "X"), article("b", "X"), article("c", "X")};
    const auto pool = pool_of(arts);
    auto s = popularity_score(pool, {{"a", 100}, {"b", 50}, {"c", 0}});
    EXPECT_DOUBLE_EQ(s["a"], 100);
    EXPECT_DOUBLE_EQ(s["b"], 50);
    EXPECT_DOUBLE_EQ(s["c"], 0);
    s = popularity_score(pool, {{"a", 10}, {"b", 4}, {"c", 1}});
    EXPECT_NEAR(s["b"], 100.0 / 3.0, 1e-12);
    const std::vector<Article> two{article("a", "X"), article("b", "X")};
    s = popularity_score(pool_of(two), {{"a", 7}, {"b", 7}});
    EXPECT_DOUBLE_EQ(s["a"], 50);
    EXPECT_DOUBLE_EQ(s["b"], 50);
    EXPECT_TRUE(popularity_score(CandidatePool{}, {}).empty());
}

TEST(Popularity, MissingArticlesCountZero) {
    const std::vector<Article> arts{article("a", "X"), article("b", "X")};
    auto s = popularity_score(pool_of(arts), {{"a", 3}});
    EXPECT_DOUBLE_EQ(s["a"], 100);
    EXPECT_DOUBLE_EQ(s["b"], 0);
}

TEST(Recency, HalfLifeDecay) {
    EXPECT_DOUBLE_EQ(recency_score(100, 0.0), 100);
    EXPECT_DOUBLE_EQ(recency_score(80, 12.0, 12.0), 40);
    EXPECT_DOUBLE_EQ(recency_score(0, 37.0), 0);
    const Article a = article("a", "X", 0, 80);
    EXPECT_DOUBLE_EQ(recency_score(a, 24 * kSecondsPerHour, 12.0), 20);
}

TEST(Performance, ExamplesFromCtr) {
    const std::vector<Article> arts{article("a", "X"), article("b", "X"), article("c", "X")};
    const auto pool = pool_of(arts);
    auto s = performance_score(pool, {{"a", 0.5}, {"b", 0.25}, {"c", 0.0}});
    EXPECT_DOUBLE_EQ(s["b"], 50);
    s = performance_score(pool, {{"a", 0.2}, {"b", 0.1}, {"c", 0.15}});
    EXPECT_DOUBLE_EQ(s["a"], 100);
    EXPECT_DOUBLE_EQ(s["b"], 0);
    EXPECT_NEAR(s["c"], 50, 1e-12);
    const std::vector<Article> one{article("a", "X")};
    EXPECT_DOUBLE_EQ(performance_score(pool_of(one), {{"a", 0.3}})["a"], 50);
}

TEST(WindowCounts, InclusiveBoundsAndCtr) {
    const std::vector<InteractionEvent> ev{impression("u", "a", 10), click("u", "a", 11), impression("u", "b", 20),
                                           impression("u", "a", 30)};
    const auto c = count_in_window(ev, 10, 20);
    EXPECT_DOUBLE_EQ(c.impressions.at("a"), 1);
    EXPECT_DOUBLE_EQ(c.impressions.at("b"), 1);
    EXPECT_DOUBLE_EQ(c.clicks.at("a"), 1);
    const auto ctr = ctr_by_article(c);
    EXPECT_DOUBLE_EQ(ctr.at("a"), 1.0);
    EXPECT_DOUBLE_EQ(ctr.at("b"), 0.0);
}

TEST(Composite, NonPersonalizedExamples) {
    const RankingWeights w = RankingWeights::non_personalized();
    EXPECT_DOUBLE_EQ(composite_nonpersonalized({100, 100, 100, {}}, w), 100);
    EXPECT_DOUBLE_EQ(composite_nonpersonalized({80, 40, 60, {}}, w), 65);
    EXPECT_DOUBLE_EQ(composite_nonpersonalized({33, 33, 33, {}}, RankingWeights{0.1, 3, 0.7, 0}), 33);
    EXPECT_THROW(composite_nonpersonalized({1, 2, 3, {}}, RankingWeights{0, 0, 0, 1}), InvalidArgument);
    EXPECT_THROW(composite_nonpersonalized({101, 2, 3, {}}, w), InvalidArgument);
}

TEST(Composite, PersonalizedExamples) {
    EXPECT_DOUBLE_EQ(composite_personalized({80, 40, 60, 100}, RankingWeights::personalized()), 72);
    const RankingWeights np = RankingWeights::non_personalized();
    EXPECT_EQ(composite_personalized({80, 40, 60, 13.0}, np), composite_nonpersonalized({80, 40, 60, 13.0}, np));
    EXPECT_DOUBLE_EQ(composite_personalized({50, 50, 50, 50}, RankingWeights{0.3, 0.1, 0.9, 0.4}), 50);
    EXPECT_THROW(composite_personalized({1, 2, 3, {}}, RankingWeights::personalized()), InvalidArgument);
    EXPECT_THROW(composite_personalized({1, 2, 3, 4}, RankingWeights{0, 0, 0, 0}), InvalidArgument);
}

TEST(Composite, MonotoneInEachWeightedComponent) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 99.0);
    const RankingWeights w = RankingWeights::personalized();
    for (int i = 0; i < 1000; ++i) {
        ScoreVector s{u(rng), u(rng), u(rng), u(rng)};
        const double base = composite_personalized(s, w);
        ScoreVector t = s;
        t.s1 += 1.0;
        EXPECT_GT(composite_personalized(t, w), base);
        t = s;
        *t.s4 += 1.0;
        EXPECT_GT(composite_personalized(t, w), base);
    }
}

TEST(FeedOrder, CompositeThenNewerThenId) {
    std::vector<ScoredArticle> feed(4);
    feed[0] = {"b", 100, {}, 60};
    feed[1] = {"a", 100, {}, 70};
    feed[2] = {"d", 300, {}, 60};
    feed[3] = {"c", 300, {}, 60};
    order_feed(feed);
    EXPECT_EQ(feed[0].article_id, "a");
    EXPECT_EQ(feed[1].article_id, "c");
    EXPECT_EQ(feed[2].article_id, "d");
    EXPECT_EQ(feed[3].article_id, "b");
}

TEST(RankFeed, PermutationOfPoolWithDescendingComposite) {
    std::vector<Article> arts;
    std::vector<InteractionEvent> ev;
    for (int i = 0; i < 12; ++i) {
        arts.push_back(article("a" + std::to_string(i), "X", i * 600, 20 + 5 * i));
    }
    for (int i = 0; i < 12; ++i) {
        for (int j = 0; j <= i % 5; ++j) ev.push_back(impression("u", "a" + std::to_string(i), 8000 + j));
        if (i % 3 == 0) ev.push_back(click("u", "a" + std::to_string(i), 8100));
    }
    std::sort(ev.begin(), ev.end(), [](const auto& x, const auto& y) { return x.at < y.at; });
    const EventLog log = make_log(arts, {user("u")}, ev);
    const auto pool = pool_of(log.catalog->articles());
    const auto feed = rank_feed(pool, "u", RankingWeights::non_personalized(), 9000, log, nullptr);
    ASSERT_EQ(feed.size(), 12u);
    std::set<std::string> ids;
    for (std::size_t i = 0; i < feed.size(); ++i) {
        ids.insert(feed[i].article_id);
        if (i > 0) EXPECT_FALSE(feed_order(feed[i], feed[i - 1]));
    }
    EXPECT_EQ(ids.size(), 12u);
    EXPECT_THROW(rank_feed(pool, "u", RankingWeights::personalized(), 9000, log, nullptr), InvalidArgument);
}

TEST(RankFeed, ColdUserDiffersOnlyByFallback) {
    std::vector<Article> arts;
    for (int i = 0; i < 6; ++i) arts.push_back(article("a" + std::to_string(i), "X", i * 100, 10 * i + 5));
    const EventLog log = make_log(arts, {user("cold")}, {impression("cold", "a1", 700), click("cold", "a1", 701)});
    Eigen::MatrixXd uf(1, 2);
    uf << 1.0, 0.5;
    Eigen::MatrixXd itf(2, 2);
    itf << 1.0, 0.0, 0.0, 1.0;
    const FactorModel model({"someone"}, {"a0", "a1"}, uf, itf, AlsParams{}, 0, {});
    const auto pool = pool_of(log.catalog->articles());
    const auto plain = rank_feed(pool, "cold", RankingWeights::non_personalized(), 800, log, nullptr);
    const RankingWeights pw = RankingWeights::personalized();
    const auto pers = rank_feed(pool, "cold", pw, 800, log, &model);
    ASSERT_EQ(plain.size(), pers.size());
    for (const auto& p : pers) {
        ASSERT_TRUE(p.scores.s4.has_value());
        EXPECT_DOUBLE_EQ(*p.scores.s4, 50.0);
        const auto it = std::find_if(plain.begin(), plain.end(),
                                     [&](const ScoredArticle& x) { return x.article_id == p.article_id; });
        ASSERT_NE(it, plain.end());
        const double base = (pw.w1 * it->scores.s1 + pw.w2 * it->scores.s2 + pw.w3 * it->scores.s3);
        EXPECT_NEAR(p.composite, (base + pw.w4 * 50.0) / (pw.w1 + pw.w2 + pw.w3 + pw.w4), 1e-12);
    }
}

TEST(RankFeed, MinMaxScorersIgnoreUniformShift) {
    std::vector<Article> arts;
    for (int i = 0; i < 5; ++i) arts.push_back(article("a" + std::to_string(i), "X"));
    const auto pool = pool_of(arts);
    ScoreMap counts{{"a0", 3}, {"a1", 9}, {"a2", 0}, {"a3", 4}, {"a4", 1}};
    ScoreMap shifted = counts;
    for (auto& [id, v] : shifted) v += 17;
    EXPECT_EQ(popularity_score(pool, counts), popularity_score(pool, shifted));
}
