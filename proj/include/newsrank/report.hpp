#pragma once

#include <optional>
#include <string>
#include <vector>

#include "newsrank/config.hpp"
#include "newsrank/io.hpp"
#include "newsrank/metrics.hpp"
#include "newsrank/model.hpp"

namespace newsrank {

inline constexpr const char* kReportSchemaVersion = "1.0";

struct Analysis {
    Json report;
    std::string daily_csv; // day,metric,arm,value
};

// Scopes the log to users with at least one click, splits it by arm and runs
// the whole comparison battery. Throws Error when an arm has no such users.
Analysis analyze(const EventLog& log, const ExperimentConfig& config);

// "", "*", "**" or "***" for p >= .05, < .05, < .01, < .001.
std::string significance_marker(std::optional<double> p);

// Plain-text tables of a report. Throws Error when the report does not
// validate against the report schema.
std::string render_report(const Json& report);

// Finds a test entry by id (and segment name, "all" for the whole scope).
const Json* find_test(const Json& report, const std::string& id, const std::string& segment = "all");

} // namespace newsrank
