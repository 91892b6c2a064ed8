#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "newsrank/error.hpp"
#include "newsrank/personalize.hpp"

using namespace newsrank;
using namespace nrtest;

namespace {

constexpr Timestamp kNow = 100 * kSecondsPerDay;

InteractionMatrix block_matrix(int users, int items, std::uint64_t seed) {
    // Preference is rank one: users in the first half like items in the first
    // two thirds. Counts on the support vary so confidences differ.
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> count(1, 6);
    InteractionMatrix m;
    for (int u = 0; u < users; ++u) m.user_ids.push_back("u" + std::to_string(1000 + u));
    for (int i = 0; i < items; ++i) m.article_ids.push_back("a" + std::to_string(1000 + i));
    for (int u = 0; u < users / 2; ++u) {
        for (int i = 0; i < 2 * items / 3; ++i) {
            m.cells.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(i),
                               static_cast<double>(count(rng))});
        }
    }
    m.min_article_clicks = 1;
    return m;
}

InteractionMatrix random_matrix(int users, int items, double density, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution on(density);
    std::uniform_int_distribution<int> count(1, 4);
    InteractionMatrix m;
    for (int u = 0; u < users; ++u) m.user_ids.push_back("u" + std::to_string(1000 + u));
    for (int i = 0; i < items; ++i) m.article_ids.push_back("a" + std::to_string(1000 + i));
    for (int u = 0; u < users; ++u) {
        for (int i = 0; i < items; ++i) {
            if (on(rng)) {
                m.cells.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(i),
                                   static_cast<double>(count(rng))});
            }
        }
    }
    m.min_article_clicks = 1;
    return m;
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

} // namespace

TEST(InteractionMatrix, SingleCellCounts) {
    const EventLog log = make_log({article("a", "X")}, {user("s")},
                                  {click("s", "a", kNow - 100), click("s", "a", kNow - 50), click("s", "a", kNow)});
    const auto m = build_interaction_matrix(log, kNow, 21, 1);
    ASSERT_EQ(m.rows(), 1u);
    ASSERT_EQ(m.cols(), 1u);
    ASSERT_EQ(m.cells.size(), 1u);
    EXPECT_DOUBLE_EQ(m.cells[0].value, 3.0);
}

TEST(InteractionMatrix, MinClicksFilterIsExact) {
    std::vector<User> users;
    std::vector<InteractionEvent> ev;
    for (int i = 0; i < 100; ++i) users.push_back(user("u" + std::to_string(i)));
    for (int i = 0; i < 99; ++i) ev.push_back(click("u" + std::to_string(i), "a99", kNow - 1000 + i));
    for (int i = 0; i < 100; ++i) ev.push_back(click("u" + std::to_string(i), "a100", kNow - 500 + i));
    const EventLog log = make_log({article("a99", "X"), article("a100", "X")}, users, ev);
    const auto m = build_interaction_matrix(log, kNow, 21, 100);
    EXPECT_EQ(m.article_ids, std::vector<std::string>{"a100"});
    for (const auto& c : m.cells) EXPECT_EQ(c.col, 0u);
}

TEST(InteractionMatrix, WindowAndSubscriberFilters) {
    const EventLog log = make_log({article("a", "X")}, {user("s"), user("anon", std::nullopt, false)},
                                  {click("s", "a", kNow - 22 * kSecondsPerDay), click("anon", "a", kNow - 10),
                                   click("s", "a", kNow - 21 * kSecondsPerDay), impression("s", "a", kNow - 5)});
    const auto m = build_interaction_matrix(log, kNow, 21, 1);
    ASSERT_EQ(m.rows(), 1u);
    EXPECT_EQ(m.user_ids[0], "s");
    ASSERT_EQ(m.cells.size(), 1u);
    EXPECT_DOUBLE_EQ(m.cells[0].value, 1.0);
    const auto all = build_interaction_matrix(log, kNow, 21, 1, false);
    EXPECT_EQ(all.rows(), 2u);
    EXPECT_THROW(build_interaction_matrix(log, kNow, 0, 1), InvalidArgument);
}

TEST(InteractionMatrix, IgnoresClicksAfterNow) {
    const EventLog log = make_log({article("a", "X")}, {user("s")}, {click("s", "a", kNow + 1)});
    EXPECT_TRUE(build_interaction_matrix(log, kNow, 21, 1).empty());
}

TEST(Als, RankOnePreferenceIsRecovered) {
    const auto m = block_matrix(30, 24, 5);
    AlsParams p;
    p.k = 1;
    p.lambda = 0.01;
    p.alpha = 40.0;
    p.iterations = 30;
    p.seed = 3;
    const FactorModel model = train(m, p);
    std::vector<double> truth;
    std::vector<double> fit;
    for (std::size_t u = 0; u < m.rows(); ++u) {
        for (std::size_t i = 0; i < m.cols(); ++i) {
            truth.push_back(u < m.rows() / 2 && i < 2 * m.cols() / 3 ? 1.0 : 0.0);
            fit.push_back(model.raw_score(u, i));
        }
    }
    EXPECT_GE(correlation(truth, fit), 0.99);
}

TEST(Als, InvalidParameters) {
    const auto m = block_matrix(4, 3, 1);
    AlsParams p;
    p.k = 0;
    EXPECT_THROW(train(m, p), InvalidArgument);
    EXPECT_THROW(train(InteractionMatrix{}, AlsParams{}), InvalidArgument);
    AlsParams neg;
    neg.lambda = -1;
    EXPECT_THROW(neg.validate(), InvalidArgument);
}

TEST(Als, DeterministicAndThreadIndependent) {
    const auto m = random_matrix(80, 50, 0.1, 9);
    AlsParams p;
    p.k = 6;
    p.iterations = 6;
    p.seed = 42;
    const FactorModel a = train(m, p, 0, Execution::Parallel);
    const FactorModel b = train(m, p, 0, Execution::Parallel);
    const FactorModel s = train(m, p, 0, Execution::Serial);
    EXPECT_TRUE(a.user_factors() == b.user_factors());
    EXPECT_TRUE(a.item_factors() == b.item_factors());
    EXPECT_TRUE(a.user_factors() == s.user_factors());
    EXPECT_TRUE(a.item_factors() == s.item_factors());
    p.seed = 43;
    const FactorModel c = train(m, p);
    EXPECT_FALSE(a.user_factors() == c.user_factors());
}

TEST(Als, ObjectiveNonIncreasing) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto m = random_matrix(60, 40, 0.15, 100 + seed);
        AlsParams p;
        p.k = 5;
        p.iterations = 12;
        p.seed = seed;
        const FactorModel model = train(m, p);
        const auto& h = model.loss_history();
        ASSERT_EQ(h.size(), 13u);
        for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1] + 1e-6) << "iteration " << i;
        EXPECT_NEAR(h.back(), als_objective(m, model.user_factors(), model.item_factors(), p.lambda, p.alpha),
                    1e-6 * std::abs(h.back()));
    }
}

TEST(Relevance, UnknownUserFallsBackToFifty) {
    const auto m = block_matrix(6, 6, 2);
    const FactorModel model = train(m, AlsParams{});
    const std::vector<std::string> cands{"a1000", "a1001", "a1002", "a1003", "a1004"};
    for (const auto& [id, s] : relevance_scores(model, "stranger", cands)) EXPECT_DOUBLE_EQ(s, 50.0) << id;
}

TEST(Relevance, MinMaxOfDotProducts) {
    Eigen::MatrixXd uf(1, 1);
    uf << 1.0;
    Eigen::MatrixXd itf(3, 1);
    itf << 2.0, 1.0, 0.0;
    const FactorModel model({"u"}, {"a", "b", "c"}, uf, itf, AlsParams{}, 0, {});
    const std::vector<std::string> cands{"a", "b", "c", "new"};
    const auto s = relevance_scores(model, "u", cands);
    EXPECT_DOUBLE_EQ(s.at("a"), 100);
    EXPECT_DOUBLE_EQ(s.at("b"), 50);
    EXPECT_DOUBLE_EQ(s.at("c"), 0);
    EXPECT_DOUBLE_EQ(s.at("new"), 50);
    const std::vector<std::string> one{"b"};
    EXPECT_DOUBLE_EQ(relevance_scores(model, "u", one).at("b"), 50);
}

TEST(Relevance, BoundedAndOrderPreserving) {
    const auto m = random_matrix(40, 30, 0.2, 77);
    AlsParams p;
    p.k = 4;
    p.iterations = 5;
    const FactorModel model = train(m, p);
    const auto& cands = m.article_ids;
    for (std::size_t u = 0; u < m.rows(); u += 7) {
        const auto s = relevance_scores(model, m.user_ids[u], cands);
        for (std::size_t i = 0; i < cands.size(); ++i) {
            const double si = s.at(cands[i]);
            EXPECT_GE(si, 0.0);
            EXPECT_LE(si, 100.0);
            for (std::size_t j = 0; j < cands.size(); ++j) {
                if (model.raw_score(u, i) < model.raw_score(u, j)) EXPECT_LE(si, s.at(cands[j]));
            }
        }
    }
}

TEST(Relevance, RowOverloadMatchesIdOverload) {
    const auto m = random_matrix(20, 15, 0.3, 8);
    const FactorModel model = train(m, AlsParams{});
    std::vector<std::string> cands(m.article_ids.begin(), m.article_ids.end());
    cands.push_back("unknown");
    std::vector<std::optional<std::size_t>> rows;
    for (const auto& c : cands) rows.push_back(model.item_row(c));
    const auto by_id = relevance_scores(model, m.user_ids[3], cands);
    const auto by_row = relevance_scores(model, model.user_row(m.user_ids[3]), rows);
    for (std::size_t i = 0; i < cands.size(); ++i) EXPECT_DOUBLE_EQ(by_row[i], by_id.at(cands[i]));
}

TEST(RetrainSchedule, Examples) {
    EXPECT_EQ(retrain_schedule(0, 9.0), (std::vector<Timestamp>{0, 10800, 21600, 32400}));
    EXPECT_EQ(retrain_schedule(500, 0.0), std::vector<Timestamp>{500});
    EXPECT_EQ(retrain_schedule(0, 48.0, 24.0).size(), 3u);
    EXPECT_EQ(retrain_schedule(0, 14 * 24.0).size(), 14u * 8u + 1u);
    EXPECT_THROW(retrain_schedule(0, 5.0, 0.0), InvalidArgument);
}

TEST(ModelDump, CarriesFactorsAndSeed) {
    const auto m = block_matrix(4, 3, 1);
    AlsParams p;
    p.k = 2;
    p.seed = 99;
    const Json j = model_to_json(train(m, p, 1234));
    EXPECT_EQ(j.at("k"), 2);
    EXPECT_EQ(j.at("seed"), 99);
    EXPECT_EQ(j.at("trained_at"), 1234);
}
