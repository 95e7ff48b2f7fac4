// Command-line front end: run campaigns and analyze their logs.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "adsfi/campaign.hpp"
#include "adsfi/report.hpp"

namespace fs = std::filesystem;
using namespace adsfi;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitGolden = 3;

int cmd_run(const std::string& config_path, std::string log_path) {
    const CampaignConfig config = load_campaign_config(config_path);
    if (log_path.empty()) log_path = fs::path(config_path).stem().string() + ".jsonl";
    ExecuteOptions opts;
    opts.log_path = log_path;
    const CampaignResult result = execute_campaign(config, opts);

    std::map<std::string, int> labels;
    for (const auto& o : result.outcomes) ++labels[std::string(to_string(o.label))];
    std::cout << "scenario " << config.scenario.name << "\n"
              << "golden runs " << result.golden_ids.size() << ", injected runs " << result.injected_ids.size()
              << "\n";
    for (const auto& [label, n] : labels) std::cout << "  " << label << " " << n << "\n";
    std::cout << "wall clock " << format_real(result.wall_clock_s) << " s\n"
              << "log " << log_path << "\n";
    return kExitOk;
}

int cmd_summarize(const std::string& log, const std::string& group_by) {
    const auto by = group_by_from_string(group_by);
    if (!by) throw CLI::ValidationError("--group-by", "must be module, variable, fault_model or scenario");
    const RunLog rl = load_run_log(log);
    if (rl.outcomes.empty()) {
        std::cerr << "error: " << log << " contains no outcomes\n";
        return kExitError;
    }
    write_summary_csv(std::cout, summarize(rl.outcomes, *by));
    return kExitOk;
}

int cmd_compare(const std::vector<std::string>& logs, const std::string& metric) {
    const RunLog a = load_run_log(logs[0]);
    const RunLog b = load_run_log(logs[1]);
    if (a.outcomes.empty() || b.outcomes.empty()) {
        std::cerr << "error: both logs must contain outcomes\n";
        return kExitError;
    }
    std::vector<std::string> metrics = metric.empty() ? metric_names() : std::vector<std::string>{metric};
    std::vector<ComparisonRow> rows;
    for (const auto& m : metrics) rows.push_back(compare_metric(a.outcomes, logs[0], b.outcomes, logs[1], m));
    write_comparison_csv(std::cout, rows);
    return kExitOk;
}

int cmd_export(const std::string& log, const std::string& what, const std::string& out) {
    const auto kind = export_kind_from_string(what);
    if (!kind) throw CLI::ValidationError("export", "must be traces, outcomes or behavior");
    const auto files = export_log(log, *kind, out);
    std::cerr << "wrote " << files.size() << " file(s) to " << out << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fault-injection campaigns on a closed-loop driving pipeline"};
    app.require_subcommand(1);

    std::string config_path, log_path, group_by = "module", metric, out_dir = ".", what;
    std::vector<std::string> logs;

    auto* run = app.add_subcommand("run", "Execute a campaign and write its JSON-Lines log");
    run->add_option("--config", config_path, "Campaign config (JSON)")->required();
    run->add_option("--log", log_path, "Output log path (default: <config stem>.jsonl)");

    auto* summarize_cmd = app.add_subcommand("summarize", "Outcome rates with Wilson 95% intervals, as CSV");
    summarize_cmd->add_option("--log", log_path, "Run log")->required();
    summarize_cmd->add_option("--group-by", group_by, "module | variable | fault_model | scenario")
        ->check(CLI::IsMember({"module", "variable", "fault_model", "scenario"}));

    auto* compare = app.add_subcommand("compare", "Two-proportion z-tests between two logs, as CSV");
    compare->add_option("--log", logs, "Two run logs (A then B)")->required()->expected(2);
    compare->add_option("--metric", metric, "Outcome metric (default: all)")
        ->check(CLI::IsMember(metric_names()));

    auto* export_cmd = app.add_subcommand("export", "Write CSV files for external plotting");
    export_cmd->add_option("what", what, "traces | outcomes | behavior")
        ->required()
        ->check(CLI::IsMember({"traces", "outcomes", "behavior"}));
    export_cmd->add_option("--log", log_path, "Run log")->required();
    export_cmd->add_option("--out", out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run) return cmd_run(config_path, log_path);
        if (*summarize_cmd) return cmd_summarize(log_path, group_by);
        if (*compare) return cmd_compare(logs, metric);
        if (*export_cmd) return cmd_export(log_path, what, out_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const GoldenSetFailed& e) {
        std::cerr << "golden set failed: " << e.what() << "\n";
        return kExitGolden;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
