#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "adsfi/campaign.hpp"
#include "adsfi/report.hpp"

using namespace adsfi;

namespace {

const std::filesystem::path kSource = ADSFI_SOURCE_DIR;

ScenarioSpec short_scenario(const char* name, double duration = 3.0) {
    ScenarioSpec s = load_scenario(kSource / "scenarios" / name);
    s.duration_s = duration;
    return s;
}

FaultPlan single_fault(FaultSite site, FaultModel model, Trigger trigger, std::uint64_t seed) {
    FaultPlan p;
    p.run_id = "injected-00000";
    p.seed = seed;
    p.faults.push_back({std::move(site), std::move(model), std::move(trigger)});
    return p;
}

CampaignConfig small_campaign(int workers) {
    Json j{{"scenario_path", "scenarios/highway_follow.json"},
           {"num_golden_runs", 4},
           {"num_injected_runs", 24},
           {"models", Json::array({Json{{"type", "bitflip"}}, Json{{"type", "disappear"}},
                                   Json{{"type", "random"}, {"lower", -100.0}, {"upper", 100.0}}})},
           {"master_seed", 5},
           {"duration_s", 3.0},
           {"max_parallel_runs", workers}};
    return campaign_config_from_json(j, kSource);
}

}  // namespace

TEST_CASE("run identifiers and seeds") {
    CHECK(golden_run_id(7) == "golden-00007");
    CHECK(golden_seed(1, 0) != golden_seed(1, 1));
    CHECK(golden_seed(1, 0) != golden_seed(2, 0));
    CHECK(golden_seed(1, 3) == golden_seed(1, 3));
}

TEST_CASE("fault-free run") {
    const ScenarioSpec s = short_scenario("highway_follow.json");
    const RunTrace a = run_single(s, nullptr, 77);
    CHECK(a.termination.status == TerminationStatus::completed);
    CHECK(a.records.size() == static_cast<std::size_t>(s.tick_count()));
    CHECK(a.world_summary.size() == a.records.size());
    CHECK_FALSE(a.collided());
    CHECK(a.injections.empty());
    CHECK(a.world_summary[0].min_gap < kNoLead);

    const RunTrace b = run_single(s, nullptr, 77);
    CHECK(a.records == b.records);
    CHECK(a.world_summary == b.world_summary);
    CHECK(run_single(s, nullptr, 78).records != a.records);
}

TEST_CASE("crash and hang terminate the run") {
    const ScenarioSpec s = short_scenario("highway_follow.json");

    SUBCASE("invalid lane type crashes path perception") {
        const FaultPlan p = single_fault({ModuleId::path_perception, "lane_type", std::nullopt}, fault::Fixed{9.0},
                                         trigger::Transient{5}, 1);
        const RunTrace t = run_single(s, &p, 1);
        CHECK(t.termination.status == TerminationStatus::crash);
        CHECK(t.termination.module == ModuleId::path_perception);
        CHECK(t.termination.tick == 5);
        CHECK(t.records.size() == 5);
        CHECK(t.world_summary.size() == 6);
        REQUIRE(t.injections.size() == 1);
        CHECK(t.kind == RunKind::injected);
    }
    SUBCASE("runaway offset hangs planning") {
        const FaultPlan p = single_fault({ModuleId::object_perception, "object_coordinates", 1}, fault::Fixed{1e300},
                                         trigger::Transient{3}, 1);
        RunOptions opts;
        opts.watchdog.op_budget = 100000;
        const RunTrace t = run_single(s, &p, 1, opts);
        CHECK(t.termination.status == TerminationStatus::hang);
        CHECK(t.termination.module == ModuleId::planning);
        CHECK(t.termination.tick == 3);
    }
}

TEST_CASE("injection does not affect earlier ticks") {
    const ScenarioSpec s = short_scenario("highway_follow.json");
    const RunTrace golden = run_single(s, nullptr, 9);
    const FaultPlan p = single_fault({ModuleId::localization, "est_speed", std::nullopt}, fault::Scale{3.0},
                                     trigger::Transient{20}, 9);
    const RunTrace inj = run_single(s, &p, 9);
    REQUIRE(inj.records.size() > 20);
    for (int t = 0; t < 20; ++t) CHECK(inj.records[t] == golden.records[t]);
    CHECK(inj.records[20].est_speed != golden.records[20].est_speed);
    REQUIRE(inj.injections.size() == 1);
    CHECK(inj.injections[0].tick == 20);
}

TEST_CASE("golden set and profiles") {
    const CampaignConfig c = small_campaign(1);
    const GoldenSet g = run_golden_set(c);
    REQUIRE(g.traces.size() == 4);
    REQUIRE(g.profiles.size() == 4);
    CHECK(g.traces[2].run_id == "golden-00002");
    CHECK(g.traces[2].seed == golden_seed(5, 2));
    CHECK(g.profiles[0].find({ModuleId::control, "pid_output", std::nullopt}) != nullptr);
    const auto* coords = g.profiles[0].find({ModuleId::object_perception, "object_coordinates", 0});
    REQUIRE(coords != nullptr);
    CHECK_FALSE(coords->live_ticks.empty());
    CHECK(g.profiles[0].find({ModuleId::object_perception, "object_coordinates", 40}) == nullptr);

    const PlanRequest r = plan_request(c);
    CHECK(r.run_seeds.size() == 24);
    CHECK(r.run_seeds[5] == golden_seed(5, 1));
}

TEST_CASE("campaign execution") {
    const auto dir = std::filesystem::temp_directory_path() / "adsfi_campaign_test";
    std::filesystem::create_directories(dir);

    const CampaignResult serial = execute_campaign(small_campaign(1), {dir / "serial.jsonl", false});
    const CampaignResult parallel = execute_campaign(small_campaign(3), {dir / "parallel.jsonl", false});
    REQUIRE(serial.outcomes.size() == 24);
    CHECK(serial.outcomes == parallel.outcomes);
    CHECK(serial.golden_ids.size() == 4);
    for (const auto& o : serial.outcomes) CHECK(ontology_consistent(o));

    std::ifstream in(dir / "serial.jsonl");
    std::string line;
    std::vector<std::string> types;
    while (std::getline(in, line)) types.push_back(Json::parse(line)["type"].get<std::string>());
    REQUIRE(types.size() == 4 + 24 + 24 + 1);
    CHECK(types.front() == "golden_trace");
    CHECK(types[4] == "injected_trace");
    CHECK(types[28] == "outcome");
    CHECK(types.back() == "campaign_meta");

    const RunLog log = load_run_log(dir / "serial.jsonl");
    REQUIRE(log.outcomes.size() == 24);
    CHECK(log.outcomes[0].scenario == "highway_follow");
    CHECK(log.outcomes[0].outcome == serial.outcomes[0]);

    const CampaignResult kept = execute_campaign(small_campaign(2), {std::nullopt, true});
    CHECK(kept.golden_traces.size() == 4);
    CHECK(kept.injected_traces.size() == 24);
    CHECK(kept.outcomes == serial.outcomes);
    std::filesystem::remove_all(dir);
}
