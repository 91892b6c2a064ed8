#include "newsrank/config.hpp"

#include <set>
#include <type_traits>

#include "newsrank/error.hpp"

namespace newsrank {

void StatsConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("stats.alpha must be in (0, 1)");
    if (activity_k.empty()) throw ConfigError("stats.activity_k must list at least one k");
    for (int k : activity_k) {
        if (k < 2) throw ConfigError("stats.activity_k entries must be >= 2");
    }
    if (restarts < 1) throw ConfigError("stats.restarts must be >= 1");
}

void ExperimentConfig::sync() {
    simulation.seed = seed;
    cleaning.timezone_offset_s = timezone_offset_s;
    metrics.timezone_offset_s = timezone_offset_s;
}

void ExperimentConfig::validate() const {
    const auto scoped = [](const char* prefix, const auto& fn) {
        try {
            fn();
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string(prefix) + e.what());
        }
    };
    scoped("ranking.control: ", [&] { simulation.control_weights.validate(); });
    scoped("ranking.personalization: ", [&] { simulation.treatment_weights.validate(); });
    scoped("ranking: ", [&] { simulation.ranker.validate(); });
    scoped("pool: ", [&] { simulation.pool.validate(); });
    scoped("personalization: ", [&] { simulation.als.validate(); });
    scoped("", [&] { simulation.validate(); });
    cleaning.validate();
    metrics.validate();
    stats.validate();

    std::set<std::string> sections;
    for (const auto& s : simulation.sections) {
        if (!sections.insert(s.name).second) throw ConfigError("simulation.sections: duplicate section " + s.name);
    }
    for (const auto& [name, _] : simulation.pool.max_age_hours_by_section) {
        if (sections.count(name) == 0) throw ConfigError("pool.max_age_hours_by_section: unknown section " + name);
    }
    for (const auto& name : simulation.pool.opinion_sections) {
        if (sections.count(name) == 0) throw ConfigError("pool.opinion_sections: unknown section " + name);
    }
}

namespace {

// Walks one JSON object, remembering which keys were consumed.
class Reader {
public:
    Reader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where("") + " must be an object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
            if (it->is_number_integer() && it->template get<std::int64_t>() < 0)
                throw ConfigError(where(key) + " must be non-negative");
        }
        try {
            out = it->template get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(where(key) + " has the wrong type");
        }
    }

    void get_optional(const char* key, std::optional<double>& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return;
        if (!it->is_number()) throw ConfigError(where(key) + " must be a number or null");
        out = it->get<double>();
    }

    bool has(const char* key) const { return j_.contains(key); }

    Reader sub(const char* key) {
        seen_.insert(key);
        static const nlohmann::json empty = nlohmann::json::object();
        const auto it = j_.find(key);
        return Reader(it == j_.end() ? empty : *it, where(key));
    }

    const nlohmann::json* raw(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::string where(const std::string& key) const {
        if (key.empty()) return path_.empty() ? "config" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    void finish() const {
        for (const auto& [key, _] : j_.items()) {
            if (seen_.count(key) == 0) throw ConfigError("unknown config key " + where(key));
        }
    }

private:
    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_weights(Reader r, RankingWeights& w) {
    r.get("w1", w.w1);
    r.get("w2", w.w2);
    r.get("w3", w.w3);
    r.get("w4", w.w4);
    r.finish();
}

void read_level(Reader r, LevelBehavior& l) {
    r.get("sessions_per_day", l.sessions_per_day);
    r.get("continuation", l.continuation);
    r.get("scroll_budget", l.scroll_budget);
    r.get("extra_clicks", l.extra_clicks);
    r.finish();
}

void read_simulation(Reader r, SimConfig& s) {
    r.get("n_users", s.n_users);
    r.get("n_articles_per_day", s.n_articles_per_day);
    r.get("n_days", s.n_days);
    r.get("warmup_days", s.warmup_days);
    r.get("start_time", s.start_time);
    r.get("personalization_share", s.personalization_share);
    r.get("affinity_concentration", s.affinity_concentration);
    r.get("affinity_share_exponent", s.affinity_share_exponent);
    r.get("daily_activity", s.daily_activity);
    {
        Reader m = r.sub("level_mixture");
        m.get("low", s.level_mixture[0]);
        m.get("medium", s.level_mixture[1]);
        m.get("high", s.level_mixture[2]);
        m.finish();
    }
    {
        Reader a = r.sub("article_length");
        a.get("min", s.article_length_min);
        a.get("max", s.article_length_max);
        a.finish();
    }
    if (const auto* sections = r.raw("sections")) {
        if (!sections->is_array()) throw ConfigError("simulation.sections must be an array");
        s.sections.clear();
        for (std::size_t i = 0; i < sections->size(); ++i) {
            Reader sec((*sections)[i], "simulation.sections[" + std::to_string(i) + "]");
            SectionSpec spec;
            sec.get("name", spec.name);
            sec.get("base_share", spec.base_share);
            sec.get("news_value", spec.news_value);
            sec.finish();
            if (spec.name.empty()) throw ConfigError(sec.where("name") + " must be a non-empty string");
            s.sections.push_back(spec);
        }
    }
    {
        Reader b = r.sub("behavior");
        BehaviorParams& p = s.behavior;
        b.get("click_intercept", p.click_intercept);
        b.get("click_slope", p.click_slope);
        b.get("read_mean", p.read_mean);
        b.get("read_mean_slope", p.read_mean_slope);
        b.get("read_concentration", p.read_concentration);
        b.get("reading_speed_cps", p.reading_speed_cps);
        b.get("dwell_noise_sd", p.dwell_noise_sd);
        b.get("impression_gap_s", p.impression_gap_s);
        b.get("impression_gap_extra_mean_s", p.impression_gap_extra_mean_s);
        b.get("click_delay_s", p.click_delay_s);
        b.get("temperature_sd", p.temperature_sd);
        b.get("reclick_factor", p.reclick_factor);
        b.get_optional("click_probability_override", p.click_probability_override);
        Reader levels = b.sub("levels");
        read_level(levels.sub("low"), p.levels[0]);
        read_level(levels.sub("medium"), p.levels[1]);
        read_level(levels.sub("high"), p.levels[2]);
        levels.finish();
        b.finish();
    }
    {
        Reader b = r.sub("bots");
        b.get("rate_bots", s.bots.rate_bots);
        b.get("burst_bots", s.bots.burst_bots);
        b.get("stale_bots", s.bots.stale_bots);
        b.get("rate_events", s.bots.rate_events);
        b.get("burst_clicks", s.bots.burst_clicks);
        b.get("stale_clicks", s.bots.stale_clicks);
        b.get("stale_age_days", s.bots.stale_age_days);
        b.finish();
    }
    r.finish();
}

void read_pool(Reader r, PoolRules& p) {
    r.get("default_max_age_hours", p.default_max_age_hours);
    r.get("max_age_hours_by_section", p.max_age_hours_by_section);
    r.get("min_opinion_articles", p.min_opinion_articles);
    r.get("opinion_sections", p.opinion_sections);
    r.finish();
}

void read_ranking(Reader r, SimConfig& s) {
    read_weights(r.sub("control"), s.control_weights);
    read_weights(r.sub("personalization"), s.treatment_weights);
    r.get("popularity_window_hours", s.ranker.popularity_window_hours);
    r.get("performance_window_hours", s.ranker.performance_window_hours);
    r.get("recency_half_life_hours", s.ranker.recency_half_life_hours);
    r.get("feed_slots", s.feed_slots);
    r.get("curated_opinion_picks", s.curated_opinion_picks);
    r.get("log_editorial_slots", s.log_editorial_slots);
    r.finish();
}

void read_personalization(Reader r, SimConfig& s) {
    r.get("k", s.als.k);
    r.get("lambda", s.als.lambda);
    r.get("alpha", s.als.alpha);
    r.get("iterations", s.als.iterations);
    r.get("retrain_interval_hours", s.retrain_interval_hours);
    r.get("window_days", s.matrix_window_days);
    r.get("min_article_clicks", s.matrix_min_clicks);
    r.finish();
}

void read_cleaning(Reader r, CleaningConfig& c) {
    r.get("max_events_per_minute", c.max_events_per_minute);
    r.get("burst_count", c.burst_count);
    r.get("burst_duration_s", c.burst_duration_s);
    r.get("stale_age_days", c.stale_age_days);
    r.get("stale_click_count", c.stale_click_count);
    r.get("trim_first_last_day", c.trim_first_last_day);
    r.finish();
}

void read_metrics(Reader r, MetricsConfig& m) {
    r.get("cancel_reading_below", m.cancel_reading_below);
    r.get("cancel_duration_at_most_s", m.cancel_duration_at_most_s);
    r.get("popular_share", m.popular_share);
    std::string rule = m.popular_rule == PopularRule::TopShare ? "top_share" : "click_mass";
    r.get("popular_rule", rule);
    if (rule == "top_share") {
        m.popular_rule = PopularRule::TopShare;
    } else if (rule == "click_mass") {
        m.popular_rule = PopularRule::ClickMass;
    } else {
        throw ConfigError("metrics.popular_rule must be \"top_share\" or \"click_mass\"");
    }
    r.finish();
}

void read_stats(Reader r, StatsConfig& s) {
    r.get("alpha", s.alpha);
    r.get("permutations", s.permutations);
    r.get("activity_k", s.activity_k);
    r.get("restarts", s.restarts);
    std::string method =
        s.permutation_method == stats::PermutationMethod::CountSampling ? "count_sampling" : "event_shuffle";
    r.get("permutation_method", method);
    if (method == "count_sampling") {
        s.permutation_method = stats::PermutationMethod::CountSampling;
    } else if (method == "event_shuffle") {
        s.permutation_method = stats::PermutationMethod::EventShuffle;
    } else {
        throw ConfigError("stats.permutation_method must be \"count_sampling\" or \"event_shuffle\"");
    }
    r.finish();
}

} // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    Reader r(j, "");
    if (!r.has("seed")) throw ConfigError("config key seed is required");
    r.get("seed", c.seed);
    r.get("output_dir", c.output_dir);
    r.get("timezone_offset_s", c.timezone_offset_s);
    read_simulation(r.sub("simulation"), c.simulation);
    read_pool(r.sub("pool"), c.simulation.pool);
    read_ranking(r.sub("ranking"), c.simulation);
    read_personalization(r.sub("personalization"), c.simulation);
    read_cleaning(r.sub("cleaning"), c.cleaning);
    read_metrics(r.sub("metrics"), c.metrics);
    read_stats(r.sub("stats"), c.stats);
    r.finish();
    c.sync();
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": invalid JSON: " + e.what());
    }
    return config_from_json(j);
}

namespace {

Json weights_json(const RankingWeights& w) { return Json{{"w1", w.w1}, {"w2", w.w2}, {"w3", w.w3}, {"w4", w.w4}}; }

Json level_json(const LevelBehavior& l) {
    return Json{{"sessions_per_day", l.sessions_per_day},
                {"continuation", l.continuation},
                {"scroll_budget", l.scroll_budget},
                {"extra_clicks", l.extra_clicks}};
}

} // namespace

Json to_json(const ExperimentConfig& c) {
    const SimConfig& s = c.simulation;
    const BehaviorParams& b = s.behavior;
    Json j;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["timezone_offset_s"] = c.timezone_offset_s;

    Json sections = Json::array();
    for (const auto& sec : s.sections) sections.push_back(Json{{"name", sec.name}, {"base_share", sec.base_share}, {"news_value", sec.news_value}});
    Json behavior{{"click_intercept", b.click_intercept},
                  {"click_slope", b.click_slope},
                  {"read_mean", b.read_mean},
                  {"read_mean_slope", b.read_mean_slope},
                  {"read_concentration", b.read_concentration},
                  {"reading_speed_cps", b.reading_speed_cps},
                  {"dwell_noise_sd", b.dwell_noise_sd},
                  {"impression_gap_s", b.impression_gap_s},
                  {"impression_gap_extra_mean_s", b.impression_gap_extra_mean_s},
                  {"click_delay_s", b.click_delay_s},
                  {"temperature_sd", b.temperature_sd},
                  {"reclick_factor", b.reclick_factor},
                  {"click_probability_override",
                   b.click_probability_override ? Json(*b.click_probability_override) : Json(nullptr)},
                  {"levels",
                   Json{{"low", level_json(b.levels[0])},
                        {"medium", level_json(b.levels[1])},
                        {"high", level_json(b.levels[2])}}}};
    j["simulation"] = Json{
        {"n_users", s.n_users},
        {"n_articles_per_day", s.n_articles_per_day},
        {"n_days", s.n_days},
        {"warmup_days", s.warmup_days},
        {"start_time", s.start_time},
        {"personalization_share", s.personalization_share},
        {"affinity_share_exponent", s.affinity_share_exponent},
        {"affinity_concentration", s.affinity_concentration},
        {"daily_activity", s.daily_activity},
        {"level_mixture", Json{{"low", s.level_mixture[0]}, {"medium", s.level_mixture[1]}, {"high", s.level_mixture[2]}}},
        {"article_length", Json{{"min", s.article_length_min}, {"max", s.article_length_max}}},
        {"sections", sections},
        {"behavior", behavior},
        {"bots",
         Json{{"rate_bots", s.bots.rate_bots},
              {"burst_bots", s.bots.burst_bots},
              {"stale_bots", s.bots.stale_bots},
              {"rate_events", s.bots.rate_events},
              {"burst_clicks", s.bots.burst_clicks},
              {"stale_clicks", s.bots.stale_clicks},
              {"stale_age_days", s.bots.stale_age_days}}},
    };
    j["pool"] = Json{{"default_max_age_hours", s.pool.default_max_age_hours},
                     {"max_age_hours_by_section", s.pool.max_age_hours_by_section},
                     {"min_opinion_articles", s.pool.min_opinion_articles},
                     {"opinion_sections", s.pool.opinion_sections}};
    j["ranking"] = Json{{"control", weights_json(s.control_weights)},
                        {"personalization", weights_json(s.treatment_weights)},
                        {"popularity_window_hours", s.ranker.popularity_window_hours},
                        {"performance_window_hours", s.ranker.performance_window_hours},
                        {"recency_half_life_hours", s.ranker.recency_half_life_hours},
                        {"feed_slots", s.feed_slots},
                        {"curated_opinion_picks", s.curated_opinion_picks},
                        {"log_editorial_slots", s.log_editorial_slots}};
    j["personalization"] = Json{{"k", s.als.k},
                                {"lambda", s.als.lambda},
                                {"alpha", s.als.alpha},
                                {"iterations", s.als.iterations},
                                {"retrain_interval_hours", s.retrain_interval_hours},
                                {"window_days", s.matrix_window_days},
                                {"min_article_clicks", s.matrix_min_clicks}};
    j["cleaning"] = Json{{"max_events_per_minute", c.cleaning.max_events_per_minute},
                         {"burst_count", c.cleaning.burst_count},
                         {"burst_duration_s", c.cleaning.burst_duration_s},
                         {"stale_age_days", c.cleaning.stale_age_days},
                         {"stale_click_count", c.cleaning.stale_click_count},
                         {"trim_first_last_day", c.cleaning.trim_first_last_day}};
    j["metrics"] = Json{{"cancel_reading_below", c.metrics.cancel_reading_below},
                        {"cancel_duration_at_most_s", c.metrics.cancel_duration_at_most_s},
                        {"popular_rule", c.metrics.popular_rule == PopularRule::TopShare ? "top_share" : "click_mass"},
                        {"popular_share", c.metrics.popular_share}};
    j["stats"] = Json{{"alpha", c.stats.alpha},
                      {"permutations", c.stats.permutations},
                      {"permutation_method", c.stats.permutation_method == stats::PermutationMethod::CountSampling
                                                 ? "count_sampling"
                                                 : "event_shuffle"},
                      {"activity_k", c.stats.activity_k},
                      {"restarts", c.stats.restarts}};
    return j;
}

} // namespace newsrank
