#include "newsrank/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <unordered_map>

#include "newsrank/error.hpp"
#include "newsrank/scores.hpp"

namespace newsrank {

std::string_view to_string(EngagementLevel level) noexcept {
    switch (level) {
    case EngagementLevel::Low: return "low";
    case EngagementLevel::Medium: return "medium";
    case EngagementLevel::High: return "high";
    }
    return "unknown";
}

std::vector<SectionSpec> default_sections() {
    return {
        // Hard news gets more articles and higher editorial news value.
        {"Verden", 0.16, 0.70},      {"Norge", 0.16, 0.70},     {"Oslo", 0.10, 0.55},
        {"Kultur", 0.09, 0.40},      {"A-magasinet", 0.07, 0.35}, {"Kommentar", 0.08, 0.45},
        {"Debatt", 0.08, 0.40},      {"Sport", 0.08, 0.45},     {"Politikk", 0.05, 0.50},
        {"Sprek", 0.04, 0.30},       {"Fotball", 0.05, 0.40},   {"Okonomi", 0.04, 0.45},
    };
}

void BehaviorParams::validate() const {
    if (!(read_concentration > 0.0)) throw ConfigError("simulation.behavior.read_concentration must be > 0");
    if (!(reading_speed_cps > 0.0)) throw ConfigError("simulation.behavior.reading_speed_cps must be > 0");
    if (!(dwell_noise_sd >= 0.0)) throw ConfigError("simulation.behavior.dwell_noise_sd must be >= 0");
    if (!(impression_gap_s >= 0.0) || !(impression_gap_extra_mean_s >= 0.0)) {
        throw ConfigError("simulation.behavior impression gaps must be >= 0");
    }
    if (!(click_delay_s >= 0.0)) throw ConfigError("simulation.behavior.click_delay_s must be >= 0");
    if (!(temperature_sd >= 0.0)) throw ConfigError("simulation.behavior.temperature_sd must be >= 0");
    if (!(reclick_factor >= 0.0 && reclick_factor <= 1.0)) throw ConfigError("simulation.behavior.reclick_factor must be in [0, 1]");
    for (const auto& l : levels) {
        if (!(l.sessions_per_day >= 0.0)) throw ConfigError("simulation.behavior.levels sessions_per_day must be >= 0");
        if (!(l.continuation >= 0.0 && l.continuation <= 1.0)) {
            throw ConfigError("simulation.behavior.levels continuation must be in [0, 1]");
        }
        if (l.scroll_budget < 1) throw ConfigError("simulation.behavior.levels scroll_budget must be >= 1");
        if (!(l.extra_clicks >= 0.0)) throw ConfigError("simulation.behavior.levels extra_clicks must be >= 0");
    }
    if (click_probability_override && !(*click_probability_override >= 0.0 && *click_probability_override <= 1.0)) {
        throw ConfigError("simulation.behavior.click_probability_override must be in [0, 1]");
    }
}

void BotSpec::validate() const {
    if (rate_bots < 0 || burst_bots < 0 || stale_bots < 0) throw ConfigError("simulation.bots counts must be >= 0");
    if (rate_events < 1 || burst_clicks < 1 || stale_clicks < 1) {
        throw ConfigError("simulation.bots event counts must be >= 1");
    }
    if (!(stale_age_days > 0.0)) throw ConfigError("simulation.bots.stale_age_days must be > 0");
}

void SimConfig::validate() const {
    if (n_users < 2) throw ConfigError("simulation.n_users must be >= 2");
    if (n_articles_per_day < 1) throw ConfigError("simulation.n_articles_per_day must be >= 1");
    if (n_days < 0) throw ConfigError("simulation.n_days must be >= 0");
    if (warmup_days < 0) throw ConfigError("simulation.warmup_days must be >= 0");
    if (!(personalization_share > 0.0 && personalization_share < 1.0)) {
        throw ConfigError("simulation.personalization_share must be in (0, 1)");
    }
    if (sections.empty()) throw ConfigError("simulation.sections must not be empty");
    double share = 0.0;
    for (const auto& s : sections) {
        if (!(s.base_share >= 0.0)) throw ConfigError("simulation.sections base_share must be >= 0");
        if (!(s.news_value > 0.0 && s.news_value < 1.0)) {
            throw ConfigError("simulation.sections news_value must be in (0, 1)");
        }
        share += s.base_share;
    }
    if (!(share > 0.0)) throw ConfigError("simulation.sections base shares sum to zero");
    double mix = 0.0;
    for (double m : level_mixture) {
        if (!(m >= 0.0)) throw ConfigError("simulation.level_mixture entries must be >= 0");
        mix += m;
    }
    if (!(mix > 0.0)) throw ConfigError("simulation.level_mixture sums to zero");
    if (!(affinity_concentration > 0.0)) throw ConfigError("simulation.affinity_concentration must be > 0");
    if (!(affinity_share_exponent >= 0.0)) throw ConfigError("simulation.affinity_share_exponent must be >= 0");
    if (article_length_min < 1 || article_length_max < article_length_min) {
        throw ConfigError("simulation article lengths must satisfy 1 <= min <= max");
    }
    for (double a : daily_activity) {
        if (!(a >= 0.0)) throw ConfigError("simulation.daily_activity entries must be >= 0");
    }
    if (feed_slots < 5) throw ConfigError("ranking.feed_slots must be >= 5");
    if (curated_opinion_picks < 0 || curated_opinion_picks > 4) {
        throw ConfigError("ranking.curated_opinion_picks must be in [0, 4]");
    }
    if (!(retrain_interval_hours > 0.0)) throw ConfigError("personalization.retrain_interval_hours must be > 0");
    if (matrix_window_days < 1) throw ConfigError("personalization.window_days must be >= 1");
    behavior.validate();
    control_weights.validate();
    treatment_weights.validate();
    ranker.validate();
    pool.validate();
    als.validate();
    bots.validate();
}

namespace {

std::string padded_id(const char* prefix, std::size_t i, std::size_t total) {
    int width = 1;
    for (std::size_t n = total > 0 ? total - 1 : 0; n >= 10; n /= 10) ++width;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, std::max(width, 4), i);
    return buf;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Stream identifiers for derive_seed.
enum Stream : std::uint64_t {
    kPopulationStream = 1,
    kArticleStream = 2,
    kScheduleStream = 3,
    kSessionStream = 4,
};

} // namespace

Population generate_population(const SimConfig& config, std::uint64_t seed) {
    Rng rng = make_rng(seed, kPopulationStream);
    const std::size_t n = config.n_users;
    std::vector<double> concentration;
    double weight_sum = 0.0;
    for (const auto& s : config.sections) {
        concentration.push_back(std::pow(s.base_share, config.affinity_share_exponent));
        weight_sum += concentration.back();
    }
    const double total = config.affinity_concentration * static_cast<double>(config.sections.size());
    for (double& c : concentration) c *= total / weight_sum;
    std::discrete_distribution<int> level_dist(config.level_mixture.begin(), config.level_mixture.end());
    std::normal_distribution<double> temp_noise(0.0, 1.0);

    Population pop;
    pop.profiles.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        UserProfile& p = pop.profiles[i];
        p.user_id = padded_id("u", i, n);
        p.section_affinity = sample_dirichlet(rng, concentration);
        p.level = static_cast<EngagementLevel>(level_dist(rng));
        p.temperature = std::exp(config.behavior.temperature_sd * temp_noise(rng));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[uniform_index(rng, i + 1)]);
    const auto treated = static_cast<std::size_t>(std::llround(config.personalization_share * static_cast<double>(n)));
    for (std::size_t j = 0; j < n; ++j) {
        pop.profiles[order[j]].arm = j < treated ? Arm::Personalization : Arm::Control;
    }
    pop.users.reserve(n);
    for (const auto& p : pop.profiles) {
        const auto tenure = static_cast<Timestamp>(uniform_index(rng, 3650) + 30) * kSecondsPerDay;
        pop.users.push_back(User{p.user_id, true, config.start_time - tenure, p.arm});
    }
    return pop;
}

SessionOutcome simulate_session(const UserProfile& user, std::span<const FrontPageItem> front_page,
                                const BehaviorParams& b, Timestamp start, Rng& rng,
                                std::unordered_set<std::string>* read) {
    if (front_page.empty()) throw InvalidArgument("front page is empty");
    const LevelBehavior& level = b.levels[static_cast<std::size_t>(user.level)];
    std::poisson_distribution<int> extra(std::max(level.extra_clicks, 1e-12));
    std::exponential_distribution<double> gap(b.impression_gap_extra_mean_s > 0.0 ? 1.0 / b.impression_gap_extra_mean_s
                                                                                 : 1.0);
    std::normal_distribution<double> dwell_noise(0.0, 1.0);
    const int quota = 1 + (level.extra_clicks > 0.0 ? extra(rng) : 0);

    SessionOutcome out;
    double t = 0.0;
    int clicks = 0;
    const std::size_t limit = std::min(front_page.size(), static_cast<std::size_t>(level.scroll_budget));
    for (std::size_t i = 0; i < limit; ++i) {
        if (i > 0 && uniform01(rng) >= level.continuation) break;
        const FrontPageItem& item = front_page[i];
        const Timestamp shown_at = start + static_cast<Timestamp>(std::llround(t));
        if (item.logged) {
            out.events.push_back({user.user_id, item.article->article_id, EventKind::Impression, shown_at,
                                  std::nullopt, std::nullopt, item.position});
        }
        const double affinity = user.section_affinity[static_cast<std::size_t>(item.section)];
        double p = b.click_probability_override
                       ? *b.click_probability_override
                       : sigmoid((b.click_intercept + b.click_slope * affinity) / user.temperature);
        const bool reread = read != nullptr && read->count(item.article->article_id) > 0;
        if (reread && !b.click_probability_override) p *= b.reclick_factor;
        if (uniform01(rng) < p) {
            const double mean = std::clamp(b.read_mean + b.read_mean_slope * affinity, 0.01, 0.99);
            const double rp = sample_beta(rng, mean * b.read_concentration, (1.0 - mean) * b.read_concentration);
            const double dwell = static_cast<double>(item.article->length_chars) * rp / b.reading_speed_cps +
                                 b.dwell_noise_sd * dwell_noise(rng);
            const double ad = std::max(0.0, std::round(dwell * 10.0) / 10.0);
            const double depth = std::round(rp * 1e4) / 1e4;
            t += b.click_delay_s;
            if (item.logged) {
                out.events.push_back({user.user_id, item.article->article_id, EventKind::Click,
                                      start + static_cast<Timestamp>(std::llround(t)), depth, ad, item.position});
            }
            t += ad;
            if (read != nullptr && !reread) read->insert(item.article->article_id);
            if (++clicks >= quota) break;
        }
        t += b.impression_gap_s + (b.impression_gap_extra_mean_s > 0.0 ? gap(rng) : 0.0);
    }
    out.end = start + static_cast<Timestamp>(std::llround(t));
    return out;
}

namespace {

std::vector<Article> generate_articles(const SimConfig& config, Timestamp from_day, int days, Rng& rng) {
    std::vector<double> shares;
    for (const auto& s : config.sections) shares.push_back(s.base_share);
    std::discrete_distribution<int> section(shares.begin(), shares.end());
    std::uniform_int_distribution<int> length(config.article_length_min, config.article_length_max);

    std::vector<Article> out;
    out.reserve(static_cast<std::size_t>(days) * static_cast<std::size_t>(config.n_articles_per_day));
    for (int d = 0; d < days; ++d) {
        const Timestamp day0 = from_day + static_cast<Timestamp>(d) * kSecondsPerDay;
        for (int i = 0; i < config.n_articles_per_day; ++i) {
            Article a;
            const SectionSpec& spec = config.sections[static_cast<std::size_t>(section(rng))];
            a.section = spec.name;
            a.published_at = day0 + static_cast<Timestamp>(uniform_index(rng, kSecondsPerDay));
            a.initial_news_value = static_cast<int>(std::lround(100.0 * sample_beta(rng, 4.0 * spec.news_value, 4.0 * (1.0 - spec.news_value))));
            a.length_chars = length(rng);
            out.push_back(std::move(a));
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Article& x, const Article& y) { return x.published_at < y.published_at; });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].article_id = padded_id("a", i, out.size());
    return out;
}

// Per-hour click and impression counts by article index.
class HourlyCounts {
public:
    HourlyCounts(Timestamp origin, std::size_t hours, std::size_t articles)
        : origin_(origin), articles_(articles), clicks_(hours * articles, 0.0), impressions_(hours * articles, 0.0) {}

    void add(const InteractionEvent& e, std::size_t article) {
        const Timestamp h = (e.at - origin_) / kSecondsPerHour;
        if (h < 0 || static_cast<std::size_t>(h) * articles_ >= clicks_.size()) return;
        auto& cell = e.is_click() ? clicks_ : impressions_;
        cell[static_cast<std::size_t>(h) * articles_ + article] += 1.0;
    }

    // Sums over the `window` hours before hour `now_hour`.
    void window(std::size_t now_hour, std::size_t window, std::size_t article, double& clicks,
                double& impressions) const {
        clicks = 0.0;
        impressions = 0.0;
        const std::size_t from = now_hour > window ? now_hour - window : 0;
        for (std::size_t h = from; h < now_hour; ++h) {
            clicks += clicks_[h * articles_ + article];
            impressions += impressions_[h * articles_ + article];
        }
    }

private:
    Timestamp origin_;
    std::size_t articles_;
    std::vector<double> clicks_;
    std::vector<double> impressions_;
};

struct PlannedSession {
    std::size_t user = 0;
    Timestamp start = 0;
};

std::vector<FrontPageItem> to_items(const FrontPageLayout& layout, const Catalog& catalog,
                                    const std::unordered_map<std::string, int>& section_index, bool log_editorial) {
    std::vector<FrontPageItem> items;
    items.reserve(layout.slots.size());
    for (std::size_t i = 0; i < layout.slots.size(); ++i) {
        const Slot& s = layout.slots[i];
        const Article* a = catalog.find_article(s.article_id);
        items.push_back({a, section_index.at(a->section), static_cast<int>(i),
                         s.kind == SlotKind::Auto || log_editorial});
    }
    return items;
}

} // namespace

Json to_json(const GroundTruth& truth) {
    Json j;
    j["bots"] = Json{{"high_event_rate", truth.rate_bots},
                     {"short_activity", truth.burst_bots},
                     {"stale_interaction", truth.stale_bots}};
    j["sections"] = truth.sections;
    Json profiles = Json::array();
    for (const auto& p : truth.profiles) {
        Json affinity = Json::object();
        for (std::size_t s = 0; s < truth.sections.size() && s < p.section_affinity.size(); ++s) {
            affinity[truth.sections[s]] = p.section_affinity[s];
        }
        profiles.push_back(Json{{"user_id", p.user_id},
                                {"arm", std::string(to_string(p.arm))},
                                {"engagement_level", std::string(to_string(p.level))},
                                {"temperature", p.temperature},
                                {"section_affinity", affinity}});
    }
    j["profiles"] = profiles;
    return j;
}

Experiment run_experiment(const SimConfig& config) {
    config.validate();
    const std::uint64_t seed = config.seed;
    Population pop = generate_population(config, seed);

    const Timestamp start = config.start_time;
    const Timestamp end = start + static_cast<Timestamp>(config.n_days) * kSecondsPerDay;
    const Timestamp sim_begin = start - static_cast<Timestamp>(config.warmup_days) * kSecondsPerDay;
    // Backfill so that the pool is populated when the warm-up starts.
    const int backfill_days = static_cast<int>(std::ceil(config.pool.default_max_age_hours / 24.0)) + 1;
    const Timestamp articles_from = sim_begin - static_cast<Timestamp>(backfill_days) * kSecondsPerDay;

    Experiment ex;
    ex.truth.profiles = pop.profiles;
    for (const auto& s : config.sections) ex.truth.sections.push_back(s.name);

    Rng article_rng = make_rng(seed, kArticleStream);
    const int article_days = config.n_days > 0 ? backfill_days + config.warmup_days + config.n_days : 0;
    auto catalog = std::make_shared<const Catalog>(generate_articles(config, articles_from, article_days, article_rng),
                                                   std::move(pop.users));
    ex.log.catalog = catalog;
    ex.log.period = ObservationPeriod{start, end};
    if (config.n_days == 0) return ex;

    std::unordered_map<std::string, int> section_index;
    for (std::size_t s = 0; s < config.sections.size(); ++s) section_index[config.sections[s].name] = static_cast<int>(s);
    const auto& articles = catalog->articles();
    const std::size_t n_users = pop.profiles.size();

    // Session start times for every user-day, drawn up front per user.
    const int total_days = config.warmup_days + config.n_days;
    const auto total_hours = static_cast<std::size_t>(total_days) * 24;
    std::vector<std::vector<PlannedSession>> by_hour(total_hours);
    for (std::size_t u = 0; u < n_users; ++u) {
        Rng rng(derive_seed(seed, kScheduleStream, u));
        const LevelBehavior& level = config.behavior.levels[static_cast<std::size_t>(pop.profiles[u].level)];
        for (int d = 0; d < total_days; ++d) {
            const int sim_day = d - config.warmup_days;
            const double activity = sim_day >= 0 && static_cast<std::size_t>(sim_day) < config.daily_activity.size()
                                        ? config.daily_activity[static_cast<std::size_t>(sim_day)]
                                        : 1.0;
            const double rate = level.sessions_per_day * activity;
            const int count = rate > 0.0 ? std::poisson_distribution<int>(rate)(rng) : 0;
            std::vector<Timestamp> starts;
            for (int c = 0; c < count; ++c) {
                starts.push_back(static_cast<Timestamp>(uniform_index(rng, kSecondsPerDay)));
            }
            std::sort(starts.begin(), starts.end());
            for (Timestamp offset : starts) {
                const Timestamp at = sim_begin + static_cast<Timestamp>(d) * kSecondsPerDay + offset;
                by_hour[static_cast<std::size_t>((at - sim_begin) / kSecondsPerHour)].push_back({u, at});
            }
        }
    }

    HourlyCounts counts(sim_begin, total_hours + 1, articles.size());
    std::vector<InteractionEvent> clicks; // training history
    std::vector<InteractionEvent> output;
    std::vector<Timestamp> busy_until(n_users, sim_begin);
    std::vector<Rng> session_rng;
    session_rng.reserve(n_users);
    for (std::size_t u = 0; u < n_users; ++u) session_rng.emplace_back(derive_seed(seed, kSessionStream, u));
    std::vector<std::unordered_set<std::string>> read(n_users);

    const bool any_personalized = config.control_weights.w4 > 0.0 || config.treatment_weights.w4 > 0.0;
    const auto retrain_times = retrain_schedule(start, config.n_days * 24.0, config.retrain_interval_hours);
    std::size_t next_retrain = 0;
    std::unique_ptr<FactorModel> model;
    AlsParams als = config.als;
    als.seed = derive_seed(seed, 99);

    const auto retrain = [&](Timestamp at) {
        RetrainRecord rec;
        rec.at = at;
        if (any_personalized) {
            const InteractionMatrix m = build_interaction_matrix(clicks, *catalog, at, config.matrix_window_days,
                                                                 config.matrix_min_clicks, true);
            rec.users = m.rows();
            rec.articles = m.cols();
            rec.cells = m.cells.size();
            if (!m.empty()) {
                model = std::make_unique<FactorModel>(train(m, als, at, config.execution));
                rec.final_loss = model->loss_history().back();
            }
        }
        ex.retrains.push_back(rec);
    };

    const auto pop_hours = static_cast<std::size_t>(std::llround(config.ranker.popularity_window_hours));
    const auto perf_hours = static_cast<std::size_t>(std::llround(config.ranker.performance_window_hours));
    const bool parallel = config.execution == Execution::Parallel;

    for (std::size_t hour = 0; hour < total_hours; ++hour) {
        const Timestamp now = sim_begin + static_cast<Timestamp>(hour) * kSecondsPerHour;
        while (next_retrain < retrain_times.size() && retrain_times[next_retrain] <= now) {
            retrain(retrain_times[next_retrain++]);
        }
        const bool warmup = now < start;
        const CandidatePool pool = build_pool(articles, config.pool, now);
        if (pool.size() < 4 || by_hour[hour].empty()) {
            continue;
        }

        // Shared components s1..s3 at the start of the slice.
        ScoreMap window_clicks;
        ScoreMap window_ctr;
        std::vector<std::size_t> pool_index;
        pool_index.reserve(pool.size());
        for (const Article* a : pool.articles) {
            const std::size_t idx = static_cast<std::size_t>(a - articles.data());
            pool_index.push_back(idx);
            double c = 0.0;
            double imp = 0.0;
            counts.window(hour, pop_hours, idx, c, imp);
            window_clicks[a->article_id] = c;
            counts.window(hour, perf_hours, idx, c, imp);
            window_ctr[a->article_id] = imp > 0.0 ? c / imp : 0.0;
        }
        const ScoreMap s1 = popularity_score(pool, window_clicks);
        const ScoreMap s3 = performance_score(pool, window_ctr);
        std::vector<ScoredArticle> base;
        base.reserve(pool.size());
        for (const Article* a : pool.articles) {
            ScoredArticle sa;
            sa.article_id = a->article_id;
            sa.published_at = a->published_at;
            sa.scores.s1 = s1.at(a->article_id);
            sa.scores.s2 = recency_score(*a, now, config.ranker.recency_half_life_hours);
            sa.scores.s3 = s3.at(a->article_id);
            base.push_back(std::move(sa));
        }

        // Editorial picks: freshest-news pins and opinion curation.
        std::vector<ScoredArticle> by_recency = base;
        std::sort(by_recency.begin(), by_recency.end(), [](const ScoredArticle& x, const ScoredArticle& y) {
            if (x.scores.s2 != y.scores.s2) return x.scores.s2 > y.scores.s2;
            if (x.published_at != y.published_at) return x.published_at > y.published_at;
            return x.article_id < y.article_id;
        });
        EditorialPicks picks;
        for (std::size_t i = 0; i < 4; ++i) picks.pinned.push_back(by_recency[i].article_id);
        for (std::size_t i = 4; i < by_recency.size(); ++i) {
            if (static_cast<int>(picks.curated.size()) >= config.curated_opinion_picks) break;
            if (config.pool.is_opinion(catalog->find_article(by_recency[i].article_id)->section)) {
                picks.curated.push_back(by_recency[i].article_id);
            }
        }
        picks.curated_positions.resize(picks.curated.size());

        const auto page_for = [&](std::vector<ScoredArticle> feed, const RankingWeights& w) {
            for (auto& sa : feed) sa.composite = composite_nonpersonalized(sa.scores, w);
            order_feed(feed);
            return to_items(assemble_front_page(feed, picks, config.feed_slots), *catalog, section_index,
                            config.log_editorial_slots);
        };
        const auto trace = [&](std::vector<ScoreTraceRow>& sink, const std::vector<ScoredArticle>& feed, Arm arm,
                               const std::string& user) {
            for (std::size_t r = 0; r < feed.size(); ++r) {
                sink.push_back({now, arm, user, static_cast<int>(r), feed[r].article_id, feed[r].scores,
                                feed[r].composite});
            }
        };
        if (config.trace_scores && !warmup) {
            for (const auto& [w, arm] : {std::pair{config.control_weights, Arm::Control},
                                         std::pair{config.treatment_weights, Arm::Personalization}}) {
                if (arm == Arm::Personalization && w.w4 > 0.0) continue;
                std::vector<ScoredArticle> feed = base;
                for (auto& sa : feed) sa.composite = composite_nonpersonalized(sa.scores, w);
                order_feed(feed);
                trace(ex.score_trace, feed, arm, "");
            }
        }
        const auto control_page = page_for(base, config.control_weights);
        const bool treatment_differs = config.treatment_weights != config.control_weights;
        const auto treatment_page =
            treatment_differs && config.treatment_weights.w4 == 0.0 ? page_for(base, config.treatment_weights)
                                                                    : control_page;
        std::vector<std::optional<std::size_t>> item_rows;
        if (model) {
            for (const auto& sa : base) item_rows.push_back(model->item_row(sa.article_id));
        }

        // Group sessions by user so each user's stream is consumed in order.
        std::vector<PlannedSession> sorted = by_hour[hour];
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const PlannedSession& x, const PlannedSession& y) { return x.user < y.user; });
        std::vector<std::pair<std::size_t, std::size_t>> groups; // [begin, end) into sorted
        for (std::size_t i = 0; i < sorted.size();) {
            std::size_t j = i + 1;
            while (j < sorted.size() && sorted[j].user == sorted[i].user) ++j;
            groups.emplace_back(i, j);
            i = j;
        }
        std::vector<std::vector<InteractionEvent>> produced(groups.size());
        std::vector<std::vector<char>> logged(groups.size());
        std::vector<std::vector<ScoreTraceRow>> traced(groups.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const std::size_t u = sorted[groups[g].first].user;
            const UserProfile& profile = pop.profiles[u];
            Rng& rng = session_rng[u];
            const bool treated = profile.arm == Arm::Personalization && !warmup;
            for (std::size_t s = groups[g].first; s < groups[g].second; ++s) {
                const Timestamp at = std::max(sorted[s].start, busy_until[u] + kSecondsPerMinute);
                SessionOutcome outcome;
                if (treated && config.treatment_weights.w4 > 0.0) {
                    std::vector<double> s4(base.size(), 50.0);
                    if (model) s4 = relevance_scores(*model, model->user_row(profile.user_id), item_rows);
                    std::vector<ScoredArticle> feed = base;
                    for (std::size_t k = 0; k < feed.size(); ++k) {
                        feed[k].scores.s4 = s4[k];
                        feed[k].composite = composite_personalized(feed[k].scores, config.treatment_weights);
                    }
                    order_feed(feed);
                    if (config.trace_scores) trace(traced[g], feed, Arm::Personalization, profile.user_id);
                    const auto page = to_items(assemble_front_page(feed, picks, config.feed_slots), *catalog,
                                               section_index, config.log_editorial_slots);
                    outcome = simulate_session(profile, page, config.behavior, at, rng, &read[u]);
                } else {
                    outcome = simulate_session(profile, treated ? treatment_page : control_page, config.behavior, at,
                                               rng, &read[u]);
                }
                busy_until[u] = outcome.end;
                // Warm-up sessions feed the ranking signals but are not logged;
                // logged sessions are cut at the end of the period.
                const bool keep = at >= start;
                for (auto& e : outcome.events) {
                    if (keep && e.at >= end) break;
                    produced[g].push_back(std::move(e));
                    logged[g].push_back(keep ? 1 : 0);
                }
            }
        }
        for (std::size_t g = 0; g < groups.size(); ++g) {
            for (auto& row : traced[g]) ex.score_trace.push_back(std::move(row));
            for (std::size_t i = 0; i < produced[g].size(); ++i) {
                InteractionEvent& e = produced[g][i];
                counts.add(e, *catalog->article_index(e.article_id));
                if (e.is_click()) clicks.push_back(e);
                if (logged[g][i] != 0) output.push_back(std::move(e));
            }
        }
    }
    while (next_retrain < retrain_times.size()) retrain(retrain_times[next_retrain++]);

    std::stable_sort(output.begin(), output.end(),
                     [](const InteractionEvent& x, const InteractionEvent& y) { return x.at < y.at; });
    ex.log.events = std::move(output);

    if (!config.bots.empty()) {
        InjectionResult injected = inject_bots(ex.log, config.bots, derive_seed(seed, 5));
        ex.log = std::move(injected.log);
        ex.truth.rate_bots = std::move(injected.rate_bots);
        ex.truth.burst_bots = std::move(injected.burst_bots);
        ex.truth.stale_bots = std::move(injected.stale_bots);
    }
    return ex;
}

std::string score_trace_csv(std::span<const ScoreTraceRow> rows) {
    std::string out = "at,arm,user_id,rank,article_id,s1,s2,s3,s4,composite\n";
    char buf[256];
    for (const auto& r : rows) {
        out += std::to_string(r.at);
        out += ',';
        out += to_string(r.arm);
        out += ',' + r.user_id + ',' + std::to_string(r.rank) + ',' + r.article_id;
        std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f,", r.scores.s1, r.scores.s2, r.scores.s3);
        out += buf;
        if (r.scores.s4) {
            std::snprintf(buf, sizeof buf, "%.6f", *r.scores.s4);
            out += buf;
        }
        std::snprintf(buf, sizeof buf, ",%.6f\n", r.composite);
        out += buf;
    }
    return out;
}

Json to_json(const RetrainRecord& r) {
    Json j;
    j["at"] = r.at;
    j["users"] = r.users;
    j["articles"] = r.articles;
    j["cells"] = r.cells;
    j["final_loss"] = r.final_loss ? Json(*r.final_loss) : Json(nullptr);
    return j;
}

InjectionResult inject_bots(const EventLog& log, const BotSpec& spec, std::uint64_t seed) {
    spec.validate();
    InjectionResult out{log, {}, {}, {}};
    if (spec.empty()) return out;
    Rng rng = make_rng(seed, 77);

    ObservationPeriod period{0, 14 * kSecondsPerDay};
    if (log.period && log.period->end > log.period->start) {
        period = *log.period;
    } else if (!log.events.empty()) {
        period = {log.events.front().at, log.events.back().at + 1};
    }
    // Keep bot traffic off the edge days when the period allows it.
    Timestamp lo = period.start;
    Timestamp hi = period.end;
    if (hi - lo > 3 * kSecondsPerDay) {
        lo += kSecondsPerDay;
        hi -= kSecondsPerDay;
    }
    const auto draw_time = [&](Timestamp span) {
        const Timestamp room = std::max<Timestamp>(1, hi - lo - span);
        return lo + static_cast<Timestamp>(uniform_index(rng, static_cast<std::uint64_t>(room)));
    };

    std::vector<Article> articles = log.catalog->articles();
    std::vector<User> users = log.catalog->users();
    const std::size_t original_articles = articles.size();
    const std::string archive_section = articles.empty() ? std::string("Archive") : articles.front().section;
    const double max_fresh_age = spec.stale_age_days * static_cast<double>(kSecondsPerDay);

    if (spec.stale_bots > 0) {
        for (int i = 0; i < spec.stale_clicks; ++i) {
            Article a;
            a.article_id = padded_id("archive-", static_cast<std::size_t>(i), static_cast<std::size_t>(spec.stale_clicks));
            a.section = archive_section;
            a.published_at = period.start -
                             static_cast<Timestamp>((spec.stale_age_days + 5.0 + i) * static_cast<double>(kSecondsPerDay));
            a.initial_news_value = 50;
            a.length_chars = 4000;
            articles.push_back(std::move(a));
        }
    }
    const auto fresh_article = [&](Timestamp at) -> const Article* {
        std::vector<const Article*> fresh;
        for (std::size_t i = 0; i < original_articles; ++i) {
            const Article& a = articles[i];
            if (a.published_at <= at && static_cast<double>(at - a.published_at) < max_fresh_age) fresh.push_back(&a);
        }
        if (fresh.empty()) {
            if (original_articles == 0) throw InvalidArgument("cannot inject bots into a log without articles");
            return &articles[uniform_index(rng, original_articles)];
        }
        return fresh[uniform_index(rng, fresh.size())];
    };

    std::vector<InteractionEvent> added;
    int bot_counter = 0;
    const auto add_user = [&](const char* prefix, int i, int total, std::vector<std::string>& sink) {
        std::string id = padded_id(prefix, static_cast<std::size_t>(i), static_cast<std::size_t>(total));
        if (log.catalog->find_user(id) != nullptr) throw InvalidArgument("bot id already present: " + id);
        const Arm arm = bot_counter++ % 2 == 0 ? Arm::Control : Arm::Personalization;
        users.push_back(User{id, true, period.start - 365 * kSecondsPerDay, arm});
        sink.push_back(id);
        return id;
    };

    for (int b = 0; b < spec.rate_bots; ++b) {
        const std::string id = add_user("bot-rate-", b, spec.rate_bots, out.rate_bots);
        const Timestamp t0 = draw_time(2 * spec.rate_events);
        for (int i = 0; i < spec.rate_events; ++i) {
            const Timestamp at = t0 + 2 * i;
            added.push_back({id, fresh_article(at)->article_id, EventKind::Impression, at, std::nullopt, std::nullopt, i});
        }
    }
    for (int b = 0; b < spec.burst_bots; ++b) {
        const std::string id = add_user("bot-burst-", b, spec.burst_bots, out.burst_bots);
        const Timestamp t0 = draw_time(600 * spec.burst_clicks);
        for (int i = 0; i < spec.burst_clicks; ++i) {
            const Timestamp at = t0 + 600 * i;
            const std::string& article = fresh_article(at)->article_id;
            const double ad = std::round((0.2 + 0.8 * uniform01(rng)) * 10.0) / 10.0;
            const double rp = std::round((0.01 + 0.04 * uniform01(rng)) * 1e4) / 1e4;
            added.push_back({id, article, EventKind::Impression, at, std::nullopt, std::nullopt, 0});
            added.push_back({id, article, EventKind::Click, at + 1, rp, ad, 0});
        }
    }
    for (int b = 0; b < spec.stale_bots; ++b) {
        const std::string id = add_user("bot-stale-", b, spec.stale_bots, out.stale_bots);
        const Timestamp t0 = draw_time(600 * spec.stale_clicks);
        for (int i = 0; i < spec.stale_clicks; ++i) {
            const Timestamp at = t0 + 600 * i;
            const std::string& article = articles[original_articles + static_cast<std::size_t>(i)].article_id;
            const double ad = std::round((30.0 + 90.0 * uniform01(rng)) * 10.0) / 10.0;
            const double rp = std::round((0.3 + 0.6 * uniform01(rng)) * 1e4) / 1e4;
            added.push_back({id, article, EventKind::Impression, at, std::nullopt, std::nullopt, 0});
            added.push_back({id, article, EventKind::Click, at + 1, rp, ad, 0});
        }
    }

    out.log.catalog = std::make_shared<const Catalog>(std::move(articles), std::move(users));
    out.log.events.insert(out.log.events.end(), added.begin(), added.end());
    std::stable_sort(out.log.events.begin(), out.log.events.end(),
                     [](const InteractionEvent& x, const InteractionEvent& y) { return x.at < y.at; });
    return out;
}

} // namespace newsrank
