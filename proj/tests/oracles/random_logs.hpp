#pragma once

// Seeded random logs for oracle comparisons: few users, articles and
// sections so that ties, repeated clicks and empty arms all occur.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "newsrank/model.hpp"

namespace nroracle {

inline newsrank::EventLog random_log(std::uint64_t seed, std::size_t max_events = 200) {
    using namespace newsrank;
    std::mt19937_64 rng(seed);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

    const int n_sections = pick(1, 5);
    const int n_articles = pick(1, 14);
    const int n_users = pick(1, 9);
    std::vector<Article> articles;
    for (int i = 0; i < n_articles; ++i) {
        Article a;
        a.article_id = "a" + std::to_string(pick(0, 99)) + "_" + std::to_string(i);
        a.section = "s" + std::to_string(pick(0, n_sections - 1));
        a.published_at = 0;
        a.initial_news_value = pick(0, 100);
        a.length_chars = pick(1, 9000);
        articles.push_back(a);
    }
    std::vector<User> users;
    for (int i = 0; i < n_users; ++i) {
        User u;
        u.user_id = "u" + std::to_string(i);
        u.arm = i % 2 ? Arm::Personalization : Arm::Control;
        users.push_back(u);
    }
    // Some logs hold only one kind of event.
    const int mode = pick(0, 9);
    const double click_share = mode == 0 ? 0.0 : (mode == 1 ? 1.0 : std::uniform_real_distribution<double>(0.05, 0.7)(rng));
    const auto n_events = static_cast<std::size_t>(pick(0, static_cast<int>(max_events)));
    std::vector<InteractionEvent> events;
    Timestamp t = 1'700'000'000;
    for (std::size_t i = 0; i < n_events; ++i) {
        InteractionEvent e;
        e.user_id = users[static_cast<std::size_t>(pick(0, n_users - 1))].user_id;
        e.article_id = articles[static_cast<std::size_t>(pick(0, n_articles - 1))].article_id;
        t += pick(0, 400);
        e.at = t;
        e.feed_position = pick(0, 59);
        if (std::bernoulli_distribution(click_share)(rng)) {
            e.kind = EventKind::Click;
            // Land on the cancel thresholds now and then.
            const int r = pick(0, 5);
            e.reading_percentage = r == 0 ? 0.10 : (r == 1 ? 0.0 : std::uniform_real_distribution<double>(0, 1)(rng));
            const int d = pick(0, 5);
            e.activity_duration_s = d == 0 ? 5.0 : (d == 1 ? 0.0 : std::uniform_real_distribution<double>(0, 120)(rng));
        } else {
            e.kind = EventKind::Impression;
        }
        events.push_back(e);
    }
    EventLog log;
    log.catalog = std::make_shared<const Catalog>(std::move(articles), std::move(users));
    log.events = std::move(events);
    return log;
}

} // namespace nroracle
