#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "adsfi/fault.hpp"
#include "adsfi/oracle.hpp"
#include "adsfi/serialize.hpp"
#include "adsfi/trace.hpp"
#include "adsfi/watchdog.hpp"
#include "adsfi/world.hpp"

namespace adsfi {

/// A golden or profiling run did not complete; the campaign cannot proceed.
class GoldenSetFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunOptions {
    Watchdog::Options watchdog;
    double horizon_s = 10.0;  // collision-distance extrapolation
};

struct CampaignConfig {
    std::filesystem::path scenario_path;
    ScenarioSpec scenario;  // loaded from scenario_path, dt/duration overridden
    int num_golden_runs = 5;
    int num_injected_runs = 100;
    int faults_per_run = 1;
    SiteFilter site_filter;
    std::vector<FaultModel> models;
    TriggerMode trigger = TriggerMode::transient;
    int intermittent_count = 3;
    std::uint64_t master_seed = 0;
    double dt_s = kDefaultDt;
    double duration_s = 30.0;
    double fps = 1.0 / kDefaultDt;
    std::int64_t hang_budget_ms = 1000;
    int max_parallel_runs = 1;
    bool deterministic = true;
    Json source;  // config document as read

    int tick_count() const { return scenario.tick_count(); }
    SafetyParams safety() const { return SafetyParams::ai(fps); }
    RunOptions run_options() const;
    void validate() const;
};

/// Parses and validates a config document. Relative scenario paths resolve
/// against `base_dir`. Throws ConfigError naming the offending field.
CampaignConfig campaign_config_from_json(const Json& j, const std::filesystem::path& base_dir);
CampaignConfig load_campaign_config(const std::filesystem::path& path);

std::uint64_t golden_seed(std::uint64_t master_seed, int index);
std::string golden_run_id(int index);

/// One closed-loop run: ground truth, pipeline tick (with the injector when a
/// plan is given), actuation, step. Stops at duration, crash or hang.
/// `hooks` overrides the injector, e.g. for profiling.
RunTrace run_single(const ScenarioSpec& scenario, const FaultPlan* plan, std::uint64_t seed,
                    const RunOptions& opts = {}, InjectionHooks* hooks = nullptr);

/// One fault-free run observed through ProfilingHooks. Throws GoldenSetFailed
/// if it does not complete.
WorkloadProfile profile_workload(const ScenarioSpec& scenario, std::uint64_t seed, const RunOptions& opts = {});

struct GoldenSet {
    std::vector<RunTrace> traces;
    std::vector<WorkloadProfile> profiles;  // one per trace
};

/// Runs num_golden_runs fault-free runs with seeds golden_seed(master, i).
/// Throws GoldenSetFailed if any of them crashes or hangs.
GoldenSet run_golden_set(const CampaignConfig& config);

PlanRequest plan_request(const CampaignConfig& config);

struct CampaignResult {
    Json config;
    std::vector<std::string> golden_ids;
    std::vector<std::string> injected_ids;
    std::vector<RunOutcome> outcomes;  // sorted by run_id
    double wall_clock_s = 0.0;

    // Populated only when requested.
    std::vector<RunTrace> golden_traces;
    std::vector<RunTrace> injected_traces;
};

struct ExecuteOptions {
    std::optional<std::filesystem::path> log_path;
    bool keep_traces = false;
};

/// golden set, profile, plans, injected runs, classification, persistence.
/// Injected runs execute on up to max_parallel_runs workers; persisted output
/// is ordered by run_id.
CampaignResult execute_campaign(const CampaignConfig& config, const ExecuteOptions& opts = {});

Json campaign_meta_json(const CampaignResult& r, const CampaignConfig& config);

}  // namespace adsfi
