#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "newsrank/cleaning.hpp"
#include "newsrank/io.hpp"
#include "newsrank/metrics.hpp"
#include "newsrank/simulator.hpp"
#include "newsrank/stats.hpp"

namespace newsrank {

struct StatsConfig {
    double alpha = 0.05;
    std::size_t permutations = 10000;
    stats::PermutationMethod permutation_method = stats::PermutationMethod::CountSampling;
    std::vector<int> activity_k{2, 3, 4, 5, 6, 7, 8};
    int restarts = 50;

    void validate() const;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    std::int64_t timezone_offset_s = 0;
    SimConfig simulation;
    CleaningConfig cleaning;
    MetricsConfig metrics;
    StatsConfig stats;

    // Copies the seed, zone and thread settings into the sub-configs.
    void sync();
    void validate() const;
};

// Every key is optional; unknown keys are rejected with their path.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
Json to_json(const ExperimentConfig& config);

} // namespace newsrank
