#include "adsfi/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "adsfi/pipeline.hpp"

namespace adsfi {

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& what) { throw ConfigError(field + ": " + what); }

int positive_int(const Json& j, const char* key, int fallback, int minimum) {
    if (!j.contains(key)) return fallback;
    const Json& v = j[key];
    if (!v.is_number_integer()) bad(key, "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < minimum) bad(key, "must be >= " + std::to_string(minimum));
    if (x > 100'000'000) bad(key, "too large");
    return static_cast<int>(x);
}

double real_field(const Json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    return real_from_json(j[key], key);
}

std::vector<std::string> string_list(const Json& j, const std::string& field) {
    if (!j.is_array()) bad(field, "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : j) {
        if (!e.is_string()) bad(field, "expected an array of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
/// thrown by any task is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    const std::size_t count = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (count <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || stop.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
                stop = true;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(count);
    for (std::size_t w = 0; w < count; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// Writes lines in index order regardless of completion order.
class OrderedWriter {
public:
    explicit OrderedWriter(std::ostream* out) : out_(out) {}

    void put(std::size_t index, std::string line) {
        if (!out_) return;
        std::lock_guard lock(mu_);
        pending_.emplace(index, std::move(line));
        while (!pending_.empty() && pending_.begin()->first == next_) {
            *out_ << pending_.begin()->second << '\n';
            pending_.erase(pending_.begin());
            ++next_;
        }
        if (!*out_) throw std::runtime_error("failed to write the run log");
    }

private:
    std::ostream* out_;
    std::mutex mu_;
    std::map<std::size_t, std::string> pending_;
    std::size_t next_ = 0;
};

WorldSample observe(const WorldState& world, double horizon) {
    WorldSample w;
    w.tick = world.tick;
    w.time_s = world.time;
    w.ego_s = world.ego.state.s;
    w.ego_speed = world.ego.state.speed;
    w.ego_lateral = world.ego.state.lateral;
    w.min_gap = min_gap_ahead(world);
    w.collided = world.collided;
    w.collision_distance = kNoCollision;
    const Body ego = body_of(world.ego, world.lanes);
    for (const auto& a : world.actors)
        w.collision_distance = std::min(w.collision_distance, collision_distance(ego, body_of(a, world.lanes), horizon));
    return w;
}

}  // namespace

RunOptions CampaignConfig::run_options() const {
    RunOptions o;
    o.watchdog.deterministic = deterministic;
    o.watchdog.wall_budget = std::chrono::milliseconds(hang_budget_ms);
    return o;
}

void CampaignConfig::validate() const {
    if (num_golden_runs < 2) bad("num_golden_runs", "must be >= 2");
    if (num_injected_runs < 1) bad("num_injected_runs", "must be >= 1");
    if (faults_per_run < 1) bad("faults_per_run", "must be >= 1");
    if (models.empty()) bad("model", "no fault model given");
    if (!(dt_s > 0.0)) bad("dt_s", "must be positive");
    if (!(duration_s > 0.0)) bad("duration_s", "must be positive");
    const double n = duration_s / dt_s;
    if (std::abs(n - std::round(n)) > 1e-6) bad("duration_s", "duration_s / dt_s must be integral");
    if (!(fps > 0.0) || !std::isfinite(fps)) bad("fps", "must be positive");
    if (hang_budget_ms < 1) bad("hang_budget_ms", "must be >= 1");
    if (max_parallel_runs < 1) bad("max_parallel_runs", "must be >= 1");
    if (trigger == TriggerMode::intermittent && intermittent_count < 1) bad("intermittent_count", "must be >= 1");
}

CampaignConfig campaign_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) bad("config", "expected a JSON object");
    CampaignConfig c;
    c.source = j;

    if (!j.contains("scenario_path")) bad("scenario_path", "missing");
    if (!j["scenario_path"].is_string()) bad("scenario_path", "expected a string");
    c.scenario_path = j["scenario_path"].get<std::string>();
    if (c.scenario_path.is_relative()) c.scenario_path = base_dir / c.scenario_path;
    if (!std::filesystem::exists(c.scenario_path)) bad("scenario_path", "file not found: " + c.scenario_path.string());
    c.scenario = load_scenario(c.scenario_path);

    c.num_golden_runs = positive_int(j, "num_golden_runs", c.num_golden_runs, 2);
    c.num_injected_runs = positive_int(j, "num_injected_runs", c.num_injected_runs, 1);
    c.faults_per_run = positive_int(j, "faults_per_run", c.faults_per_run, 1);
    c.intermittent_count = positive_int(j, "intermittent_count", c.intermittent_count, 1);
    c.max_parallel_runs = positive_int(j, "max_parallel_runs", c.max_parallel_runs, 1);
    c.hang_budget_ms = positive_int(j, "hang_budget_ms", static_cast<int>(c.hang_budget_ms), 1);

    if (j.contains("site_filter") && !j["site_filter"].is_null()) {
        const Json& f = j["site_filter"];
        if (!f.is_object()) bad("site_filter", "expected an object");
        if (f.contains("modules")) {
            for (const auto& name : string_list(f["modules"], "site_filter.modules")) {
                const auto m = module_from_string(name);
                if (!m) bad("site_filter.modules", "unknown module '" + name + "'");
                c.site_filter.modules.push_back(*m);
            }
        }
        if (f.contains("variables")) c.site_filter.variables = string_list(f["variables"], "site_filter.variables");
    }

    const double limit = c.scenario.lanes.speed_limit;
    if (j.contains("model") && j.contains("models")) bad("model", "give either model or models, not both");
    if (j.contains("model")) {
        c.models.push_back(fault_model_from_json(j["model"], limit, "model"));
    } else if (j.contains("models")) {
        const Json& ms = j["models"];
        if (!ms.is_array() || ms.empty()) bad("models", "expected a non-empty array");
        for (std::size_t i = 0; i < ms.size(); ++i)
            c.models.push_back(fault_model_from_json(ms[i], limit, "models[" + std::to_string(i) + "]"));
    } else {
        bad("model", "missing");
    }

    if (j.contains("trigger")) {
        if (!j["trigger"].is_string()) bad("trigger", "expected a string");
        const auto t = j["trigger"].get<std::string>();
        if (t == "transient") c.trigger = TriggerMode::transient;
        else if (t == "intermittent") c.trigger = TriggerMode::intermittent;
        else if (t == "permanent") c.trigger = TriggerMode::permanent;
        else bad("trigger", "unknown trigger mode '" + t + "'");
    }

    if (j.contains("master_seed")) {
        const Json& s = j["master_seed"];
        if (s.is_number_unsigned()) c.master_seed = s.get<std::uint64_t>();
        else if (s.is_number_integer() && s.get<std::int64_t>() >= 0) c.master_seed = s.get<std::uint64_t>();
        else bad("master_seed", "expected a non-negative integer");
    }
    if (j.contains("deterministic")) {
        if (!j["deterministic"].is_boolean()) bad("deterministic", "expected a boolean");
        c.deterministic = j["deterministic"].get<bool>();
    }

    c.dt_s = real_field(j, "dt_s", c.scenario.dt_s);
    c.duration_s = real_field(j, "duration_s", c.scenario.duration_s);
    c.fps = real_field(j, "fps", 1.0 / c.dt_s);
    c.validate();
    c.scenario.dt_s = c.dt_s;
    c.scenario.duration_s = c.duration_s;
    return c;
}

CampaignConfig load_campaign_config(const std::filesystem::path& path) {
    const Json j = read_json_file(path);
    return campaign_config_from_json(j, path.parent_path());
}

std::uint64_t golden_seed(std::uint64_t master_seed, int index) {
    return mix_seed(master_seed, static_cast<std::uint64_t>(index));
}

std::string golden_run_id(int index) {
    char id[32];
    std::snprintf(id, sizeof id, "golden-%05d", index);
    return id;
}

RunTrace run_single(const ScenarioSpec& scenario, const FaultPlan* plan, std::uint64_t seed, const RunOptions& opts,
                    InjectionHooks* hooks) {
    RunTrace trace;
    trace.seed = seed;
    if (plan) {
        trace.run_id = plan->run_id;
        trace.kind = RunKind::injected;
        trace.plan = *plan;
    } else {
        trace.run_id = "golden";
    }

    WorldState world = instantiate_scenario(scenario, seed);
    Rng sensor_rng(stream_seed(seed, Stream::sensor));
    std::optional<Injector> injector;
    if (plan && !hooks) hooks = &injector.emplace(*trace.plan, stream_seed(seed, Stream::injector));

    PipelineConfig pcfg;
    pcfg.lanes = scenario.lanes;
    pcfg.dt = scenario.dt_s;
    pcfg.noise = scenario.sensor;
    pcfg.ego_length = world.ego.length;
    Pipeline pipeline(pcfg);
    Watchdog watchdog(opts.watchdog);

    const int ticks = scenario.tick_count();
    trace.records.reserve(ticks);
    trace.world_summary.reserve(ticks);
    for (int t = 0; t < ticks; ++t) {
        const GroundTruth gt = ground_truth(world, scenario.sensor_range_m);
        trace.world_summary.push_back(observe(world, opts.horizon_s));

        TickOutput out;
        try {
            watchdog.begin_tick();
            out = pipeline.tick(gt, sensor_rng, hooks, watchdog);
            watchdog.end_tick();
            world = step(world, out.command, scenario.dt_s);
        } catch (const PipelineCrash& e) {
            trace.termination = {TerminationStatus::crash, e.module(), t};
        } catch (const HangDetected&) {
            trace.termination = {TerminationStatus::hang, pipeline.current_stage(), t};
        } catch (const NonFiniteCommand&) {
            trace.termination = {TerminationStatus::crash, ModuleId::actuation, t};
        }
        if (trace.termination.status != TerminationStatus::completed) break;
        trace.records.push_back(std::move(out.record));
    }
    if (injector) trace.injections = injector->events();
    return trace;
}

WorkloadProfile profile_workload(const ScenarioSpec& scenario, std::uint64_t seed, const RunOptions& opts) {
    ProfilingHooks hooks(scenario.tick_count());
    const RunTrace t = run_single(scenario, nullptr, seed, opts, &hooks);
    if (t.termination.status != TerminationStatus::completed)
        throw GoldenSetFailed("profiling run did not complete (" + std::string(to_string(t.termination.status)) +
                              " in " + std::string(to_string(t.termination.module)) + " at tick " +
                              std::to_string(t.termination.tick) + ")");
    return hooks.take();
}

GoldenSet run_golden_set(const CampaignConfig& config) {
    if (config.num_golden_runs < 2) throw ConfigError("num_golden_runs: must be >= 2");
    const auto n = static_cast<std::size_t>(config.num_golden_runs);
    GoldenSet set;
    set.traces.resize(n);
    set.profiles.resize(n);
    const RunOptions opts = config.run_options();
    parallel_for(n, config.max_parallel_runs, [&](std::size_t i) {
        const int idx = static_cast<int>(i);
        ProfilingHooks hooks(config.tick_count());
        RunTrace t = run_single(config.scenario, nullptr, golden_seed(config.master_seed, idx), opts, &hooks);
        t.run_id = golden_run_id(idx);
        if (t.termination.status != TerminationStatus::completed)
            throw GoldenSetFailed(t.run_id + " did not complete (" + std::string(to_string(t.termination.status)) +
                                  " in " + std::string(to_string(t.termination.module)) + " at tick " +
                                  std::to_string(t.termination.tick) + ")");
        set.profiles[i] = hooks.take();
        set.traces[i] = std::move(t);
    });
    return set;
}

PlanRequest plan_request(const CampaignConfig& config) {
    PlanRequest r;
    r.num_runs = config.num_injected_runs;
    r.faults_per_run = config.faults_per_run;
    r.models = config.models;
    r.filter = config.site_filter;
    r.trigger = config.trigger;
    r.intermittent_count = config.intermittent_count;
    r.master_seed = config.master_seed;
    for (int i = 0; i < config.num_injected_runs; ++i)
        r.run_seeds.push_back(golden_seed(config.master_seed, i % config.num_golden_runs));
    return r;
}

Json campaign_meta_json(const CampaignResult& r, const CampaignConfig& config) {
    std::map<std::string, int> labels;
    for (const auto& o : r.outcomes) ++labels[std::string(to_string(o.label))];
    return {{"type", "campaign_meta"},
            {"config", r.config},
            {"scenario", config.scenario.name},
            {"tick_count", config.tick_count()},
            {"golden_ids", r.golden_ids},
            {"injected_ids", r.injected_ids},
            {"label_counts", labels},
            {"wall_clock_s", r.wall_clock_s}};
}

CampaignResult execute_campaign(const CampaignConfig& config, const ExecuteOptions& opts) {
    const auto started = std::chrono::steady_clock::now();
    CampaignResult result;
    result.config = config.source;

    std::ofstream log;
    if (opts.log_path) {
        log.open(*opts.log_path, std::ios::out | std::ios::trunc);
        if (!log) throw std::runtime_error("cannot open run log " + opts.log_path->string());
    }

    GoldenSet golden = run_golden_set(config);
    for (const auto& t : golden.traces) {
        result.golden_ids.push_back(t.run_id);
        if (log.is_open()) log << to_json(t).dump() << '\n';
    }
    const GoldenEnvelope envelope = build_envelope(golden.traces);

    std::vector<FaultPlan> plans;
    try {
        plans = generate_fault_plan(golden.profiles, plan_request(config));
    } catch (const PlanInvalid& e) {
        throw ConfigError(std::string("fault plan: ") + e.what());
    }

    ClassifyOptions copts;
    copts.safety = config.safety();
    const RunOptions ropts = config.run_options();
    const std::size_t n = plans.size();
    result.outcomes.resize(n);
    if (opts.keep_traces) result.injected_traces.resize(n);
    OrderedWriter writer(log.is_open() ? &log : nullptr);

    // Plans are generated in run_id order, so index order is run_id order.
    parallel_for(n, config.max_parallel_runs, [&](std::size_t i) {
        RunTrace t = run_single(config.scenario, &plans[i], plans[i].seed, ropts);
        result.outcomes[i] = classify_run(t, envelope, copts, config.scenario.lanes);
        if (log.is_open()) writer.put(i, to_json(t).dump());
        if (opts.keep_traces) result.injected_traces[i] = std::move(t);
    });
    for (const auto& p : plans) result.injected_ids.push_back(p.run_id);

    if (log.is_open()) {
        for (const auto& o : result.outcomes) log << to_json(o).dump() << '\n';
    }
    result.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (log.is_open()) {
        log << campaign_meta_json(result, config).dump() << '\n';
        log.flush();
        if (!log) throw std::runtime_error("failed to write the run log");
    }
    if (opts.keep_traces) result.golden_traces = std::move(golden.traces);
    return result;
}

}  // namespace adsfi
