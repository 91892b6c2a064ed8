#include "newsrank/cli.hpp"

#include <filesystem>
#include <optional>

#include <CLI11.hpp>

#include "newsrank/cleaning.hpp"
#include "newsrank/config.hpp"
#include "newsrank/error.hpp"
#include "newsrank/io.hpp"
#include "newsrank/report.hpp"
#include "newsrank/simulator.hpp"

namespace newsrank {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string log_path;
    std::string score_trace;
    std::string report_path;
};

ExperimentConfig resolve_config(const Options& o) {
    ExperimentConfig c;
    if (!o.config_path.empty()) {
        c = load_config(o.config_path);
    }
    if (o.seed) c.seed = *o.seed;
    c.sync();
    c.validate();
    return c;
}

fs::path output_dir(const Options& o, const ExperimentConfig& c) {
    const fs::path dir = o.out_dir.empty() ? fs::path(c.output_dir) : fs::path(o.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

fs::path events_path(const std::string& log) {
    if (log.empty()) throw IoError("--log is required");
    const fs::path p(log);
    return fs::is_directory(p) ? p / kEventsFile : p;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void cmd_simulate(const Options& o, std::ostream& out) {
    const ExperimentConfig c = resolve_config(o);
    SimConfig sim = c.simulation;
    sim.trace_scores = !o.score_trace.empty();
    const Experiment ex = run_experiment(sim);
    const fs::path dir = output_dir(o, c);
    write_event_log(ex.log, dir);
    Json truth = to_json(ex.truth);
    Json retrains = Json::array();
    for (const auto& r : ex.retrains) retrains.push_back(to_json(r));
    truth["retrains"] = retrains;
    truth["seed"] = c.seed;
    write_file_atomic(dir / "ground_truth.json", dump(truth));
    if (!o.score_trace.empty()) write_file_atomic(o.score_trace, score_trace_csv(ex.score_trace));
    out << "simulated " << ex.log.events.size() << " events, " << ex.log.catalog->users().size() << " users, "
        << ex.log.catalog->articles().size() << " articles, " << ex.retrains.size() << " retrains -> "
        << dir.string() << "\n";
}

void cmd_clean(const Options& o, std::ostream& out) {
    const ExperimentConfig c = resolve_config(o);
    const LoadResult loaded = load_event_log(events_path(o.log_path));
    CleanResult cleaned = clean(loaded.log, c.cleaning);
    cleaned.report.add_load_rejections(loaded.rejected_by_verdict);
    const fs::path dir = output_dir(o, c);
    write_event_log(cleaned.log, dir);
    write_file_atomic(dir / "cleaning_report.json", dump(to_json(cleaned.report)));
    out << "kept " << cleaned.report.surviving_events << " of " << cleaned.report.input_events << " events; flagged "
        << cleaned.report.flagged_users << " users -> " << dir.string() << "\n";
}

void cmd_analyze(const Options& o, std::ostream& out) {
    const ExperimentConfig c = resolve_config(o);
    const LoadResult loaded = load_event_log(events_path(o.log_path));
    const Analysis a = analyze(loaded.log, c);
    const fs::path dir = output_dir(o, c);
    write_file_atomic(dir / "report.json", dump(a.report));
    write_file_atomic(dir / "daily.csv", a.daily_csv);
    out << "wrote " << (dir / "report.json").string() << " and " << (dir / "daily.csv").string() << "\n";
}

void cmd_report(const Options& o, std::ostream& out) {
    if (o.report_path.empty()) throw IoError("a report path is required");
    const std::string text = read_file(o.report_path);
    Json report;
    try {
        report = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(o.report_path, 1, e.what());
    }
    out << render_report(report);
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ranking experiment simulator and analyzer", "newsrank"};
    app.require_subcommand(1);
    Options o;
    std::uint64_t seed = 0;

    const auto common = [&](CLI::App* cmd) {
        cmd->add_option("--config", o.config_path, "Experiment config (JSON)");
        cmd->add_option("--seed", seed, "Seed, overrides the config");
        cmd->add_option("--out", o.out_dir, "Output directory");
    };
    CLI::App* simulate = app.add_subcommand("simulate", "Simulate the experiment and write an event log");
    common(simulate);
    simulate->add_option("--score-trace", o.score_trace, "Write ranker scores as CSV to this path");
    CLI::App* clean_cmd = app.add_subcommand("clean", "Remove bots, invalid records and partial edge days");
    common(clean_cmd);
    clean_cmd->add_option("--log", o.log_path, "Event log file or directory")->required();
    CLI::App* analyze_cmd = app.add_subcommand("analyze", "Compare the arms and write report.json and daily.csv");
    common(analyze_cmd);
    analyze_cmd->add_option("--log", o.log_path, "Cleaned event log file or directory")->required();
    CLI::App* report_cmd = app.add_subcommand("report", "Print a report as tables");
    report_cmd->add_option("report", o.report_path, "report.json")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    for (CLI::App* cmd : {simulate, clean_cmd, analyze_cmd}) {
        if (cmd->parsed() && cmd->count("--seed") > 0) o.seed = seed;
    }

    try {
        if (simulate->parsed()) cmd_simulate(o, out);
        if (clean_cmd->parsed()) cmd_clean(o, out);
        if (analyze_cmd->parsed()) cmd_analyze(o, out);
        if (report_cmd->parsed()) cmd_report(o, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace newsrank
