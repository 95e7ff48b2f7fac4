#include "adsfi/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "adsfi/overloaded.hpp"

namespace adsfi {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw ConfigError(field + ": " + what);
}

const Json& require(const Json& j, const char* key, const std::string& ctx) {
    if (!j.is_object()) fail(ctx, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) fail(ctx.empty() ? key : ctx + "." + key, "missing");
    return *it;
}

std::string join(const std::string& ctx, const char* key) { return ctx.empty() ? key : ctx + "." + key; }

double get_real(const Json& j, const char* key, const std::string& ctx) {
    return real_from_json(require(j, key, ctx), join(ctx, key));
}

double get_real_or(const Json& j, const char* key, const std::string& ctx, double fallback) {
    if (!j.contains(key)) return fallback;
    return real_from_json(j.at(key), join(ctx, key));
}

std::int64_t get_int(const Json& j, const char* key, const std::string& ctx) {
    const Json& v = require(j, key, ctx);
    if (!v.is_number_integer()) fail(join(ctx, key), "expected an integer");
    return v.get<std::int64_t>();
}

std::int64_t get_int_or(const Json& j, const char* key, const std::string& ctx, std::int64_t fallback) {
    return j.contains(key) ? get_int(j, key, ctx) : fallback;
}

std::string get_string(const Json& j, const char* key, const std::string& ctx) {
    const Json& v = require(j, key, ctx);
    if (!v.is_string()) fail(join(ctx, key), "expected a string");
    return v.get<std::string>();
}

bool get_bool(const Json& j, const char* key, const std::string& ctx) {
    const Json& v = require(j, key, ctx);
    if (!v.is_boolean()) fail(join(ctx, key), "expected a boolean");
    return v.get<bool>();
}

std::uint64_t get_u64(const Json& j, const char* key, const std::string& ctx) {
    const Json& v = require(j, key, ctx);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    fail(join(ctx, key), "expected a non-negative integer");
}

Json pairs_to_json(const std::vector<Pair>& v) {
    Json a = Json::array();
    for (const auto& p : v) a.push_back(Json::array({real_to_json(p[0]), real_to_json(p[1])}));
    return a;
}

std::vector<Pair> pairs_from_json(const Json& j, const std::string& field) {
    if (!j.is_array()) fail(field, "expected an array");
    std::vector<Pair> out;
    out.reserve(j.size());
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2) fail(field, "expected [x, y] pairs");
        out.push_back({real_from_json(e[0], field), real_from_json(e[1], field)});
    }
    return out;
}

TruncNormalParam trunc_from_json(const Json& j, const std::string& field) {
    if (j.is_number()) return TruncNormalParam::fixed(j.get<double>());
    TruncNormalParam p;
    p.mean = get_real(j, "mean", field);
    p.std_dev = get_real_or(j, "std_dev", field, 0.0);
    p.lower = get_real_or(j, "lower", field, p.mean);
    p.upper = get_real_or(j, "upper", field, p.mean);
    return p;
}

ActorSpec actor_from_json(const Json& j, const std::string& field) {
    ActorSpec a;
    a.actor_id = get_string(j, "actor_id", field);
    a.initial_s = trunc_from_json(require(j, "initial_s", field), join(field, "initial_s"));
    a.lane_index = static_cast<int>(get_int_or(j, "lane_index", field, 0));
    a.speed = j.contains("speed") ? trunc_from_json(j["speed"], join(field, "speed")) : TruncNormalParam::fixed(0.0);
    a.accel = j.contains("accel") ? trunc_from_json(j["accel"], join(field, "accel")) : TruncNormalParam::fixed(0.0);
    if (j.contains("behavior")) {
        const auto b = behavior_from_string(get_string(j, "behavior", field));
        if (!b) fail(join(field, "behavior"), "unknown behavior");
        a.behavior = *b;
    }
    a.length = get_real_or(j, "length", field, a.length);
    a.width = get_real_or(j, "width", field, a.width);
    if (j.contains("object_class")) {
        const auto c = object_class_from_string(get_string(j, "object_class", field));
        if (!c) fail(join(field, "object_class"), "unknown object class");
        a.object_class = *c;
    }
    return a;
}

ModuleId module_field(const Json& j, const char* key, const std::string& ctx) {
    const auto m = module_from_string(get_string(j, key, ctx));
    if (!m) fail(join(ctx, key), "unknown module");
    return *m;
}

}  // namespace

Json real_to_json(double v) {
    if (std::isnan(v)) return "NaN";
    if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
    return v;
}

double real_from_json(const Json& j, const std::string& field) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "NaN") return std::numeric_limits<double>::quiet_NaN();
        if (s == "Infinity") return std::numeric_limits<double>::infinity();
        if (s == "-Infinity") return -std::numeric_limits<double>::infinity();
    }
    fail(field, "expected a number");
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open file");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path.string() + ": malformed JSON (" + e.what() + ")");
    }
}

Json to_json(const TruncNormalParam& p) {
    return {{"mean", p.mean}, {"std_dev", p.std_dev}, {"lower", p.lower}, {"upper", p.upper}};
}

Json to_json(const ActorSpec& a) {
    return {{"actor_id", a.actor_id},
            {"initial_s", to_json(a.initial_s)},
            {"lane_index", a.lane_index},
            {"speed", to_json(a.speed)},
            {"accel", to_json(a.accel)},
            {"behavior", to_string(a.behavior)},
            {"length", a.length},
            {"width", a.width},
            {"object_class", to_string(a.object_class)}};
}

Json to_json(const ScenarioSpec& s) {
    Json actors = Json::array();
    for (const auto& a : s.actors) actors.push_back(to_json(a));
    Json sensor = {{"sigma", s.sensor.sigma},
                   {"lane_sigma", s.sensor.lane_sigma},
                   {"speed_sigma", s.sensor.speed_sigma}};
    if (s.sensor.occlusion) sensor["occlusion"] = {s.sensor.occlusion->first, s.sensor.occlusion->second};
    return {{"name", s.name},
            {"lanes",
             {{"lane_count", s.lanes.lane_count},
              {"lane_width", s.lanes.lane_width},
              {"road_length", s.lanes.road_length},
              {"speed_limit", s.lanes.speed_limit}}},
            {"ego", to_json(s.ego)},
            {"actors", actors},
            {"duration_s", s.duration_s},
            {"dt_s", s.dt_s},
            {"sensor_range_m", s.sensor_range_m},
            {"sensor", sensor}};
}

ScenarioSpec scenario_from_json(const Json& j) {
    if (!j.is_object()) fail("scenario", "expected an object");
    ScenarioSpec s;
    if (j.contains("name")) s.name = get_string(j, "name", "");
    if (j.contains("lanes")) {
        const Json& l = j["lanes"];
        s.lanes.lane_count = static_cast<int>(get_int_or(l, "lane_count", "lanes", s.lanes.lane_count));
        s.lanes.lane_width = get_real_or(l, "lane_width", "lanes", s.lanes.lane_width);
        s.lanes.road_length = get_real_or(l, "road_length", "lanes", s.lanes.road_length);
        s.lanes.speed_limit = get_real_or(l, "speed_limit", "lanes", s.lanes.speed_limit);
    }
    s.ego = actor_from_json(require(j, "ego", ""), "ego");
    if (j.contains("actors")) {
        const Json& a = j["actors"];
        if (!a.is_array()) fail("actors", "expected an array");
        for (std::size_t i = 0; i < a.size(); ++i)
            s.actors.push_back(actor_from_json(a[i], "actors[" + std::to_string(i) + "]"));
    }
    s.duration_s = get_real_or(j, "duration_s", "", s.duration_s);
    s.dt_s = get_real_or(j, "dt_s", "", s.dt_s);
    s.sensor_range_m = get_real_or(j, "sensor_range_m", "", s.sensor_range_m);
    if (j.contains("sensor")) {
        const Json& n = j["sensor"];
        s.sensor.sigma = get_real_or(n, "sigma", "sensor", 0.0);
        s.sensor.lane_sigma = get_real_or(n, "lane_sigma", "sensor", 0.0);
        s.sensor.speed_sigma = get_real_or(n, "speed_sigma", "sensor", 0.0);
        if (n.contains("occlusion")) {
            const Json& o = n["occlusion"];
            if (!o.is_array() || o.size() != 2) fail("sensor.occlusion", "expected [lower, upper]");
            s.sensor.occlusion = std::pair{real_from_json(o[0], "sensor.occlusion"),
                                           real_from_json(o[1], "sensor.occlusion")};
        }
    }
    try {
        s.validate();
    } catch (const ScenarioInvalid& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    return s;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
    try {
        return scenario_from_json(read_json_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

Json to_json(const FaultModel& m) {
    Json j = {{"type", model_tag(m)}};
    std::visit(overloaded{
                   [&](const fault::Random& r) {
                       j["lower"] = r.lower;
                       j["upper"] = r.upper;
                   },
                   [&](const fault::Fixed& f) { j["value"] = real_to_json(f.value); },
                   [&](const fault::Scale& s) { j["ratio"] = s.ratio; },
                   [](const fault::Disappear&) {},
                   [&](const fault::BitFlip& b) { j["n_bits"] = b.n_bits; },
                   [&](const fault::GaussianNoise& g) { j["sigma"] = g.sigma; },
                   [&](const fault::Occlusion& o) {
                       j["lower"] = o.lower;
                       j["upper"] = o.upper;
                   },
               },
               m);
    return j;
}

FaultModel fault_model_from_json(const Json& j, double speed_limit, const std::string& field) {
    const std::string type = get_string(j, "type", field);
    FaultModel m;
    if (type == "random") {
        m = fault::Random{get_real_or(j, "lower", field, 0.0), get_real_or(j, "upper", field, speed_limit)};
    } else if (type == "fixed") {
        m = fault::Fixed{get_real(j, "value", field)};
    } else if (type == "scale") {
        m = fault::Scale{get_real(j, "ratio", field)};
    } else if (type == "disappear") {
        m = fault::Disappear{};
    } else if (type == "bitflip") {
        m = fault::BitFlip{static_cast<int>(get_int_or(j, "n_bits", field, 1))};
    } else if (type == "gaussian_noise") {
        m = fault::GaussianNoise{get_real(j, "sigma", field)};
    } else if (type == "occlusion") {
        m = fault::Occlusion{get_real(j, "lower", field), get_real(j, "upper", field)};
    } else {
        fail(join(field, "type"), "unknown fault model '" + type + "'");
    }
    try {
        validate_model(m);
    } catch (const PlanInvalid& e) {
        fail(field, e.what());
    }
    return m;
}

Json to_json(const FaultSite& s) {
    Json j = {{"module", to_string(s.module)}, {"variable", s.variable}, {"element", nullptr}};
    if (s.element) j["element"] = *s.element;
    return j;
}

FaultSite fault_site_from_json(const Json& j) {
    FaultSite s;
    s.module = module_field(j, "module", "site");
    s.variable = get_string(j, "variable", "site");
    if (j.contains("element") && !j["element"].is_null())
        s.element = static_cast<std::size_t>(get_u64(j, "element", "site"));
    return s;
}

Json to_json(const Trigger& t) {
    return std::visit(overloaded{
                          [](const trigger::Transient& x) -> Json {
                              return {{"mode", "transient"}, {"tick", x.tick}};
                          },
                          [](const trigger::Intermittent& x) -> Json {
                              return {{"mode", "intermittent"}, {"ticks", x.ticks}};
                          },
                          [](const trigger::Permanent& x) -> Json {
                              return {{"mode", "permanent"}, {"from_tick", x.from_tick}};
                          },
                      },
                      t);
}

Trigger trigger_from_json(const Json& j) {
    const std::string mode = get_string(j, "mode", "trigger");
    if (mode == "transient") return trigger::Transient{static_cast<int>(get_int(j, "tick", "trigger"))};
    if (mode == "permanent") return trigger::Permanent{static_cast<int>(get_int(j, "from_tick", "trigger"))};
    if (mode == "intermittent") {
        const Json& ticks = require(j, "ticks", "trigger");
        if (!ticks.is_array()) fail("trigger.ticks", "expected an array");
        trigger::Intermittent x;
        for (const auto& t : ticks) {
            if (!t.is_number_integer()) fail("trigger.ticks", "expected integers");
            x.ticks.push_back(t.get<int>());
        }
        return x;
    }
    fail("trigger.mode", "unknown trigger mode '" + mode + "'");
}

Json to_json(const FaultPlan& p) {
    Json faults = Json::array();
    for (const auto& f : p.faults)
        faults.push_back({{"site", to_json(f.site)}, {"model", to_json(f.model)}, {"trigger", to_json(f.trigger)}});
    return {{"run_id", p.run_id}, {"seed", p.seed}, {"faults", faults}};
}

FaultPlan fault_plan_from_json(const Json& j) {
    FaultPlan p;
    p.run_id = get_string(j, "run_id", "plan");
    p.seed = get_u64(j, "seed", "plan");
    for (const auto& f : require(j, "faults", "plan")) {
        FaultSpec spec;
        spec.site = fault_site_from_json(require(f, "site", "plan.faults"));
        // Bounds are always written explicitly, so the default is never used here.
        spec.model = fault_model_from_json(require(f, "model", "plan.faults"), kDefaultSpeedLimit);
        spec.trigger = trigger_from_json(require(f, "trigger", "plan.faults"));
        p.faults.push_back(std::move(spec));
    }
    return p;
}

Json to_json(const SiteValue& v) {
    return std::visit(overloaded{
                          [](double d) -> Json { return {{"real", real_to_json(d)}}; },
                          [](std::int64_t i) -> Json { return {{"integer", i}}; },
                          [](const Categorical& c) -> Json {
                              return {{"categorical", c.code}, {"variants", c.variant_count}};
                          },
                      },
                      v);
}

SiteValue site_value_from_json(const Json& j) {
    if (j.contains("real")) return real_from_json(j["real"], "value.real");
    if (j.contains("integer")) return get_int(j, "integer", "value");
    if (j.contains("categorical"))
        return Categorical{get_int(j, "categorical", "value"), static_cast<int>(get_int(j, "variants", "value"))};
    fail("value", "unknown value encoding");
}

Json to_json(const InjectionEvent& e) {
    Json j = {{"tick", e.tick},
              {"site", to_json(e.site)},
              {"model", e.model},
              {"before", nullptr},
              {"after", nullptr},
              {"bits", e.bits}};
    if (e.before) j["before"] = to_json(*e.before);
    if (e.after) j["after"] = to_json(*e.after);
    return j;
}

InjectionEvent injection_event_from_json(const Json& j) {
    InjectionEvent e;
    e.tick = static_cast<int>(get_int(j, "tick", "injection"));
    e.site = fault_site_from_json(require(j, "site", "injection"));
    e.model = get_string(j, "model", "injection");
    if (j.contains("before") && !j["before"].is_null()) e.before = site_value_from_json(j["before"]);
    if (j.contains("after") && !j["after"].is_null()) e.after = site_value_from_json(j["after"]);
    if (j.contains("bits")) e.bits = j["bits"].get<std::vector<int>>();
    return e;
}

Json to_json(const MonitoredRecord& r) {
    Json classes = Json::array();
    for (auto c : r.object_class) classes.push_back(to_string(c));
    return {{"frame_id", r.frame_id},
            {"num_detected_objects", r.num_detected_objects},
            {"object_class", classes},
            {"object_coordinates", pairs_to_json(r.object_coordinates)},
            {"bounding_box", pairs_to_json(r.bounding_box)},
            {"lane_type", to_string(r.lane_type)},
            {"lane_c0", real_to_json(r.lane_c0)},
            {"lane_c1", real_to_json(r.lane_c1)},
            {"lane_c2", real_to_json(r.lane_c2)},
            {"est_s", real_to_json(r.est_s)},
            {"est_lateral", real_to_json(r.est_lateral)},
            {"est_heading", real_to_json(r.est_heading)},
            {"est_speed", real_to_json(r.est_speed)},
            {"target_speed", real_to_json(r.target_speed)},
            {"lead_gap", real_to_json(r.lead_gap)},
            {"pid_measured_value", real_to_json(r.pid_measured_value)},
            {"pid_target_value", real_to_json(r.pid_target_value)},
            {"pid_output", real_to_json(r.pid_output)},
            {"throttle", real_to_json(r.throttle)},
            {"brake", real_to_json(r.brake)},
            {"steering", real_to_json(r.steering)},
            {"ego_speed", real_to_json(r.ego_speed)},
            {"ego_lateral", real_to_json(r.ego_lateral)},
            {"ego_s", real_to_json(r.ego_s)}};
}

MonitoredRecord record_from_json(const Json& j) {
    const std::string ctx = "record";
    MonitoredRecord r;
    r.frame_id = static_cast<int>(get_int(j, "frame_id", ctx));
    r.num_detected_objects = get_int(j, "num_detected_objects", ctx);
    for (const auto& c : require(j, "object_class", ctx)) {
        const auto v = object_class_from_string(c.get<std::string>());
        if (!v) fail("record.object_class", "unknown object class");
        r.object_class.push_back(*v);
    }
    r.object_coordinates = pairs_from_json(require(j, "object_coordinates", ctx), "record.object_coordinates");
    r.bounding_box = pairs_from_json(require(j, "bounding_box", ctx), "record.bounding_box");
    const auto lt = lane_type_from_string(get_string(j, "lane_type", ctx));
    if (!lt) fail("record.lane_type", "unknown lane type");
    r.lane_type = *lt;
    r.lane_c0 = get_real(j, "lane_c0", ctx);
    r.lane_c1 = get_real(j, "lane_c1", ctx);
    r.lane_c2 = get_real(j, "lane_c2", ctx);
    r.est_s = get_real(j, "est_s", ctx);
    r.est_lateral = get_real(j, "est_lateral", ctx);
    r.est_heading = get_real(j, "est_heading", ctx);
    r.est_speed = get_real(j, "est_speed", ctx);
    r.target_speed = get_real(j, "target_speed", ctx);
    r.lead_gap = get_real(j, "lead_gap", ctx);
    r.pid_measured_value = get_real(j, "pid_measured_value", ctx);
    r.pid_target_value = get_real(j, "pid_target_value", ctx);
    r.pid_output = get_real(j, "pid_output", ctx);
    r.throttle = get_real(j, "throttle", ctx);
    r.brake = get_real(j, "brake", ctx);
    r.steering = get_real(j, "steering", ctx);
    r.ego_speed = get_real(j, "ego_speed", ctx);
    r.ego_lateral = get_real(j, "ego_lateral", ctx);
    r.ego_s = get_real(j, "ego_s", ctx);
    return r;
}

Json to_json(const WorldSample& w) {
    return {{"tick", w.tick},
            {"time_s", w.time_s},
            {"ego_s", real_to_json(w.ego_s)},
            {"ego_speed", real_to_json(w.ego_speed)},
            {"ego_lateral", real_to_json(w.ego_lateral)},
            {"min_gap", real_to_json(w.min_gap)},
            {"collision_distance", real_to_json(w.collision_distance)},
            {"collided", w.collided}};
}

WorldSample world_sample_from_json(const Json& j) {
    const std::string ctx = "world_summary";
    WorldSample w;
    w.tick = static_cast<int>(get_int(j, "tick", ctx));
    w.time_s = get_real(j, "time_s", ctx);
    w.ego_s = get_real(j, "ego_s", ctx);
    w.ego_speed = get_real(j, "ego_speed", ctx);
    w.ego_lateral = get_real(j, "ego_lateral", ctx);
    w.min_gap = get_real(j, "min_gap", ctx);
    w.collision_distance = get_real(j, "collision_distance", ctx);
    w.collided = get_bool(j, "collided", ctx);
    return w;
}

Json to_json(const RunTrace& t) {
    Json records = Json::array();
    for (const auto& r : t.records) records.push_back(to_json(r));
    Json world = Json::array();
    for (const auto& w : t.world_summary) world.push_back(to_json(w));
    Json injections = Json::array();
    for (const auto& e : t.injections) injections.push_back(to_json(e));
    Json termination = {{"status", to_string(t.termination.status)}};
    if (t.termination.status != TerminationStatus::completed) {
        termination["module"] = to_string(t.termination.module);
        termination["tick"] = t.termination.tick;
    }
    return {{"type", t.kind == RunKind::golden ? "golden_trace" : "injected_trace"},
            {"run_id", t.run_id},
            {"kind", to_string(t.kind)},
            {"seed", t.seed},
            {"plan", t.plan ? to_json(*t.plan) : Json(nullptr)},
            {"termination", termination},
            {"records", records},
            {"world_summary", world},
            {"injections", injections}};
}

RunTrace trace_from_json(const Json& j) {
    const std::string ctx = "trace";
    RunTrace t;
    t.run_id = get_string(j, "run_id", ctx);
    const std::string kind = get_string(j, "kind", ctx);
    if (kind == "golden") t.kind = RunKind::golden;
    else if (kind == "injected") t.kind = RunKind::injected;
    else fail("trace.kind", "unknown run kind");
    t.seed = get_u64(j, "seed", ctx);
    if (j.contains("plan") && !j["plan"].is_null()) t.plan = fault_plan_from_json(j["plan"]);
    const Json& term = require(j, "termination", ctx);
    const std::string status = get_string(term, "status", "termination");
    if (status == "completed") {
        t.termination.status = TerminationStatus::completed;
    } else {
        if (status == "crash") t.termination.status = TerminationStatus::crash;
        else if (status == "hang") t.termination.status = TerminationStatus::hang;
        else fail("termination.status", "unknown status");
        t.termination.module = module_field(term, "module", "termination");
        t.termination.tick = static_cast<int>(get_int(term, "tick", "termination"));
    }
    for (const auto& r : require(j, "records", ctx)) t.records.push_back(record_from_json(r));
    for (const auto& w : require(j, "world_summary", ctx)) t.world_summary.push_back(world_sample_from_json(w));
    if (j.contains("injections"))
        for (const auto& e : j["injections"]) t.injections.push_back(injection_event_from_json(e));
    return t;
}

Json to_json(const RunOutcome& o) {
    Json dev = nullptr;
    if (o.first_deviation) dev = {{"variable_id", o.first_deviation->variable_id}, {"tick", o.first_deviation->tick}};
    return {{"type", "outcome"},
            {"run_id", o.run_id},
            {"activated", o.activated},
            {"label", to_string(o.label)},
            {"actuation_error", o.actuation_error},
            {"safety_envelope_breach", o.safety_envelope_breach},
            {"lane_centering_breach", o.lane_centering_breach},
            {"traffic_violation", o.traffic_violation},
            {"accident", o.accident},
            {"first_deviation", dev},
            {"min_safety_margin", real_to_json(o.min_safety_margin)},
            {"unattributed_hazard", o.unattributed_hazard}};
}

RunOutcome outcome_from_json(const Json& j) {
    const std::string ctx = "outcome";
    RunOutcome o;
    o.run_id = get_string(j, "run_id", ctx);
    o.activated = get_bool(j, "activated", ctx);
    const auto label = outcome_label_from_string(get_string(j, "label", ctx));
    if (!label) fail("outcome.label", "unknown label");
    o.label = *label;
    o.actuation_error = get_bool(j, "actuation_error", ctx);
    o.safety_envelope_breach = get_bool(j, "safety_envelope_breach", ctx);
    o.lane_centering_breach = get_bool(j, "lane_centering_breach", ctx);
    o.traffic_violation = get_bool(j, "traffic_violation", ctx);
    o.accident = get_bool(j, "accident", ctx);
    if (j.contains("first_deviation") && !j["first_deviation"].is_null()) {
        const Json& d = j["first_deviation"];
        o.first_deviation = Deviation{get_string(d, "variable_id", "first_deviation"),
                                      static_cast<int>(get_int(d, "tick", "first_deviation"))};
    }
    o.min_safety_margin = get_real(j, "min_safety_margin", ctx);
    if (j.contains("unattributed_hazard")) o.unattributed_hazard = get_bool(j, "unattributed_hazard", ctx);
    return o;
}

}  // namespace adsfi
