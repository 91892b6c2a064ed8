#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "newsrank/execution.hpp"
#include "newsrank/io.hpp"
#include "newsrank/model.hpp"
#include "newsrank/personalize.hpp"
#include "newsrank/pool.hpp"
#include "newsrank/random.hpp"
#include "newsrank/ranker.hpp"

namespace newsrank {

enum class EngagementLevel { Low = 0, Medium = 1, High = 2 };

std::string_view to_string(EngagementLevel level) noexcept;

struct LevelBehavior {
    double sessions_per_day = 1.2; // Poisson mean
    double continuation = 0.9;     // chance to scan the next slot
    int scroll_budget = 60;        // slots scanned at most per session
    double extra_clicks = 1.0;     // click quota is 1 + Poisson(extra_clicks)
};

struct BehaviorParams {
    double click_intercept = -3.5;
    double click_slope = 30.0;
    double read_mean = 0.48;       // Beta mean of reading percentage at zero affinity
    double read_mean_slope = 0.05; // added per unit affinity
    double read_concentration = 4.0;
    double reading_speed_cps = 25.0; // characters per second
    double dwell_noise_sd = 5.0;
    double impression_gap_s = 6.0;   // minimum gap between scanned slots
    double impression_gap_extra_mean_s = 4.0;
    double click_delay_s = 1.0;
    double temperature_sd = 0.1; // log-normal spread of the per-user logistic temperature
    double reclick_factor = 1.0; // click probability multiplier for articles the user already read
    std::array<LevelBehavior, 3> levels{{
        {0.7, 0.88, 15, 1.0},
        {1.3, 0.91, 30, 1.5},
        {2.5, 0.94, 45, 2.5},
    }};
    std::optional<double> click_probability_override;

    void validate() const;
};

struct SectionSpec {
    std::string name;
    double base_share = 0.0;
    double news_value = 0.5; // mean initial news value / 100 given by editors
};

std::vector<SectionSpec> default_sections();

struct BotSpec {
    int rate_bots = 0;
    int burst_bots = 0;
    int stale_bots = 0;
    int rate_events = 20;   // events per rate-bot burst, 2 s apart
    int burst_clicks = 10;  // clicks under one second of activity
    int stale_clicks = 11;  // clicks on articles older than stale_age_days + 1
    double stale_age_days = 10.0;

    bool empty() const noexcept { return rate_bots == 0 && burst_bots == 0 && stale_bots == 0; }
    void validate() const;
};

struct SimConfig {
    std::size_t n_users = 2000;
    int n_articles_per_day = 40;
    int n_days = 14;
    int warmup_days = 3;
    Timestamp start_time = 1701345600; // 2023-11-30 12:00 UTC
    std::vector<SectionSpec> sections = default_sections();
    double personalization_share = 0.5;
    std::array<double, 3> level_mixture{0.50, 0.35, 0.15};
    double affinity_concentration = 0.5;
    // Dirichlet mean of the affinities is proportional to base_share^exponent;
    // 0 gives a symmetric Dirichlet.
    double affinity_share_exponent = 0.0;
    int article_length_min = 1500;
    int article_length_max = 9000;
    std::vector<double> daily_activity; // optional multiplier per simulated day
    BehaviorParams behavior;

    RankingWeights control_weights = RankingWeights::non_personalized();
    RankingWeights treatment_weights = RankingWeights::personalized();
    RankerConfig ranker;
    PoolRules pool;
    std::size_t feed_slots = 60;
    int curated_opinion_picks = 3;
    bool log_editorial_slots = false;

    AlsParams als;
    double retrain_interval_hours = 3.0;
    int matrix_window_days = 21;
    std::size_t matrix_min_clicks = 100;

    BotSpec bots;
    std::uint64_t seed = 0;
    Execution execution = Execution::Parallel;
    bool trace_scores = false;

    void validate() const;
};

struct UserProfile {
    std::string user_id;
    std::vector<double> section_affinity; // aligned with SimConfig::sections, sums to 1
    EngagementLevel level = EngagementLevel::Low;
    double temperature = 1.0;
    Arm arm = Arm::Control;
};

struct Population {
    std::vector<UserProfile> profiles;
    std::vector<User> users;
};

// Arms come from a seeded shuffle: round(share * n) users get personalization.
Population generate_population(const SimConfig& config, std::uint64_t seed);

struct FrontPageItem {
    const Article* article = nullptr;
    int section = 0; // index into SimConfig::sections
    int position = 0;
    bool logged = true; // editorial slots are scanned but may stay unlogged
};

struct SessionOutcome {
    std::vector<InteractionEvent> events;
    Timestamp end = 0;
};

// One visit: the user scans the page from the top. Every scanned slot is an
// impression; each may be clicked; the session ends when the continuation
// draw fails, the scroll budget or click quota is used up, or the page ends.
// Clicked articles are added to `read` when it is given.
SessionOutcome simulate_session(const UserProfile& user, std::span<const FrontPageItem> front_page,
                                const BehaviorParams& behavior, Timestamp start, Rng& rng,
                                std::unordered_set<std::string>* read = nullptr);

struct RetrainRecord {
    Timestamp at = 0;
    std::size_t users = 0;
    std::size_t articles = 0;
    std::size_t cells = 0;
    std::optional<double> final_loss; // empty when the matrix was empty
};

struct GroundTruth {
    std::vector<std::string> rate_bots;
    std::vector<std::string> burst_bots;
    std::vector<std::string> stale_bots;
    std::vector<UserProfile> profiles;
    std::vector<std::string> sections;
};

Json to_json(const GroundTruth& truth);

// One ranked article of a feed; user_id is empty for the shared control feed.
struct ScoreTraceRow {
    Timestamp at = 0;
    Arm arm = Arm::Control;
    std::string user_id;
    int rank = 0;
    std::string article_id;
    ScoreVector scores;
    double composite = 0.0;
};

std::string score_trace_csv(std::span<const ScoreTraceRow> rows);

struct Experiment {
    EventLog log;
    std::vector<RetrainRecord> retrains;
    GroundTruth truth;
    std::vector<ScoreTraceRow> score_trace; // filled when SimConfig::trace_scores
};

Json to_json(const RetrainRecord& record);

Experiment run_experiment(const SimConfig& config);

struct InjectionResult {
    EventLog log;
    std::vector<std::string> rate_bots;
    std::vector<std::string> burst_bots;
    std::vector<std::string> stale_bots;
};

// Adds synthetic users whose traces break exactly one cleaning heuristic.
InjectionResult inject_bots(const EventLog& log, const BotSpec& spec, std::uint64_t seed);

} // namespace newsrank
