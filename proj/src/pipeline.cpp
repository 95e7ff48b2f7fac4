#include "adsfi/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace adsfi {

namespace {

constexpr int kLaneSampleCount = 10;
constexpr double kLaneSampleSpacing = 5.0;  // m

constexpr std::pair<ModuleId, std::string_view> kModules[] = {
    {ModuleId::sense, "sense"},
    {ModuleId::object_perception, "object_perception"},
    {ModuleId::path_perception, "path_perception"},
    {ModuleId::localization, "localization"},
    {ModuleId::planning, "planning"},
    {ModuleId::control, "control"},
    {ModuleId::actuation, "actuation"},
};

bool finite_all(std::initializer_list<double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

/// Solves a 3x3 system in place by Gaussian elimination with partial pivoting.
bool solve3(std::array<std::array<double, 4>, 3>& m, std::array<double, 3>& x) {
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        }
        if (std::abs(m[pivot][col]) < 1e-12) return false;
        std::swap(m[pivot], m[col]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = m[r][col] / m[col][col];
            for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
        }
    }
    for (int r = 2; r >= 0; --r) {
        double acc = m[r][3];
        for (int c = r + 1; c < 3; ++c) acc -= m[r][c] * x[c];
        x[r] = acc / m[r][r];
    }
    return true;
}

void check_frame(const SensorFrame& f) {
    if (!std::isfinite(f.ego_speed_reading)) throw PipelineCrash(ModuleId::sense, "non-finite speed reading");
    for (const auto& d : f.objects) {
        if (!finite_all({d.ds, d.dlat, d.length, d.width}))
            throw PipelineCrash(ModuleId::sense, "non-finite detection");
    }
    for (const auto& s : f.lane_samples) {
        if (!finite_all({s.x, s.y})) throw PipelineCrash(ModuleId::sense, "non-finite lane sample");
    }
}

void check_objects(const ObjectPerceptionOut& o) {
    if (!o.coherent()) throw PipelineCrash(ModuleId::object_perception, "object list lengths disagree");
    for (auto c : o.object_class) {
        const auto code = static_cast<std::int64_t>(c);
        if (code < 0 || code >= kObjectClassCount)
            throw PipelineCrash(ModuleId::object_perception, "invalid object class");
    }
    for (std::size_t i = 0; i < o.object_coordinates.size(); ++i) {
        const auto& c = o.object_coordinates[i];
        const auto& b = o.bounding_box[i];
        if (!finite_all({c[0], c[1], b[0], b[1]}))
            throw PipelineCrash(ModuleId::object_perception, "non-finite object geometry");
    }
}

void check_path(const PathPerceptionOut& p) {
    const auto code = static_cast<std::int64_t>(p.lane_type);
    if (code < 0 || code >= kLaneTypeCount) throw PipelineCrash(ModuleId::path_perception, "invalid lane type");
    if (!finite_all({p.c0, p.c1, p.c2})) throw PipelineCrash(ModuleId::path_perception, "non-finite lane fit");
}

}  // namespace

std::string_view to_string(ModuleId m) {
    for (const auto& [id, name] : kModules) {
        if (id == m) return name;
    }
    return "invalid";
}

std::optional<ModuleId> module_from_string(std::string_view s) {
    for (const auto& [id, name] : kModules) {
        if (name == s) return id;
    }
    return std::nullopt;
}

bool ObjectPerceptionOut::coherent() const {
    if (num_detected_objects < 0) return false;
    const auto n = static_cast<std::uint64_t>(num_detected_objects);
    return object_class.size() == n && object_coordinates.size() == n && bounding_box.size() == n;
}

SensorFrame sense(const GroundTruth& gt, const SensorNoiseParams& noise, Rng& rng) {
    SensorFrame f;
    f.frame_id = gt.tick;
    f.lane_type = gt.lane_type;
    auto occluded = [&](double x) {
        return noise.occlusion && x >= noise.occlusion->first && x <= noise.occlusion->second;
    };

    for (const auto& obj : gt.objects) {
        Detection d{obj.object_class, obj.ds, obj.dlat, obj.length, obj.width, false};
        if (noise.sigma > 0.0) {
            d.ds += noise.sigma * rng.normal();
            d.dlat += noise.sigma * rng.normal();
        }
        if (!occluded(obj.ds)) f.objects.push_back(d);
    }

    // Lane center (road lateral 0 of the ego lane) seen from the ego frame.
    const double ch = std::cos(gt.ego_heading);
    const double sh = std::sin(gt.ego_heading);
    for (int k = 1; k <= kLaneSampleCount; ++k) {
        const double d = k * kLaneSampleSpacing;
        LaneSample s{d * ch - gt.ego_lateral * sh, -d * sh - gt.ego_lateral * ch};
        if (noise.lane_sigma > 0.0) s.y += noise.lane_sigma * rng.normal();
        if (!occluded(s.x)) f.lane_samples.push_back(s);
    }

    f.ego_speed_reading = gt.ego_speed;
    if (noise.speed_sigma > 0.0) f.ego_speed_reading += noise.speed_sigma * rng.normal();
    return f;
}

ObjectPerceptionOut perceive_objects(const SensorFrame& frame) {
    ObjectPerceptionOut out;
    for (const auto& d : frame.objects) {
        if (d.occluded) continue;
        out.object_class.push_back(d.object_class);
        out.object_coordinates.push_back({d.ds, d.dlat});
        out.bounding_box.push_back({d.length, d.width});
    }
    out.num_detected_objects = static_cast<std::int64_t>(out.object_class.size());
    return out;
}

PathPerceptionOut perceive_path(const SensorFrame& frame, const PathPerceptionOut& previous) {
    if (frame.lane_samples.size() < 3) return previous;

    // Fit in u = x / scale to keep the normal equations well conditioned.
    double scale = 0.0;
    for (const auto& s : frame.lane_samples) scale = std::max(scale, std::abs(s.x));
    if (!(scale > 0.0) || !std::isfinite(scale)) return previous;

    std::array<double, 5> pw{};  // sums of u^0..u^4
    std::array<double, 3> rhs{};  // sums of y*u^0..y*u^2
    for (const auto& s : frame.lane_samples) {
        const double u = s.x / scale;
        double p = 1.0;
        for (int k = 0; k < 5; ++k) {
            pw[k] += p;
            if (k < 3) rhs[k] += s.y * p;
            p *= u;
        }
    }
    std::array<std::array<double, 4>, 3> m{};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) m[r][c] = pw[r + c];
        m[r][3] = rhs[r];
    }
    std::array<double, 3> a{};
    if (!solve3(m, a)) return previous;

    PathPerceptionOut out;
    out.lane_type = frame.lane_type;
    out.c0 = a[0];
    out.c1 = a[1] / scale;
    out.c2 = a[2] / (scale * scale);
    return out;
}

LocalizationOut localize(const SensorFrame& frame, const PathPerceptionOut& path, const LocalizationOut& prev,
                         double dt) {
    LocalizationOut out;
    out.est_speed = frame.ego_speed_reading;
    out.est_lateral = -path.c0;
    out.est_heading = -path.c1;
    out.est_s = prev.est_s + out.est_speed * dt;
    return out;
}

int relative_lane(double dlat, double lane_width, Watchdog& watchdog) {
    // Unbounded on corrupted offsets (e.g. 1e300 never shrinks); the watchdog
    // turns that into a hang verdict.
    const double half = 0.5 * lane_width;
    int lanes = 0;
    double off = dlat;
    while (off >= half) {
        off -= lane_width;
        ++lanes;
        watchdog.charge();
    }
    while (off <= -half) {
        off += lane_width;
        --lanes;
        watchdog.charge();
    }
    return lanes;
}

PlanOut plan(const ObjectPerceptionOut& objects, const PathPerceptionOut& /*path*/, const LocalizationOut& /*loc*/,
             const LaneGeometry& limits, double ego_length, Watchdog& watchdog) {
    PlanOut out;
    out.target_lateral = 0.0;
    out.lead_gap = kNoLead;
    for (std::size_t i = 0; i < objects.object_coordinates.size(); ++i) {
        const auto& [ds, dlat] = objects.object_coordinates[i];
        if (ds <= 0.0) continue;
        if (relative_lane(dlat, limits.lane_width, watchdog) != 0) continue;
        const double obj_length = i < objects.bounding_box.size() ? objects.bounding_box[i][0] : 0.0;
        out.lead_gap = std::min(out.lead_gap, ds - 0.5 * (ego_length + obj_length));
    }

    double target = limits.speed_limit;
    if (out.lead_gap < kNoLead) {
        const double free = out.lead_gap - kStandoff;
        target = std::min(target, free / kTimeGap);
        target = std::min(target, std::sqrt(2.0 * kPlanDecel * std::max(0.0, free)));
    }
    out.target_speed = std::max(0.0, target);
    return out;
}

PlanOut plan(const ObjectPerceptionOut& objects, const PathPerceptionOut& path, const LocalizationOut& loc,
             const LaneGeometry& limits, double ego_length) {
    Watchdog unlimited({true, std::numeric_limits<std::int64_t>::max(), std::chrono::milliseconds{0}});
    return plan(objects, path, loc, limits, ego_length, unlimited);
}

void load_pid_inputs(PidState& pid, const PlanOut& plan, const LocalizationOut& loc) {
    pid.pid_measured_value = loc.est_speed;
    pid.pid_target_value = plan.target_speed;
}

void run_pid_law(PidState& pid, double dt) {
    const double e = pid.pid_target_value - pid.pid_measured_value;
    const double derivative = pid.primed ? (e - pid.prev_error) / dt : 0.0;
    // Conditional integration: hold the integral while the output saturates
    // in the direction of the error.
    const double candidate = std::clamp(pid.integral + e * dt, -kIntegralMax, kIntegralMax);
    const double trial = kKp * e + kKi * candidate + kKd * derivative;
    if (std::abs(trial) <= 1.0 || (trial > 0.0) != (e > 0.0)) pid.integral = candidate;
    pid.pid_output = kKp * e + kKi * pid.integral + kKd * derivative;
    pid.prev_error = e;
    pid.primed = true;
}

ActuationCommand command_from(const PidState& pid, const PlanOut& plan, const LocalizationOut& loc) {
    const double u = std::clamp(pid.pid_output, -1.0, 1.0);
    ActuationCommand cmd;
    cmd.throttle = std::max(0.0, u);
    cmd.brake = std::max(0.0, -u);
    cmd.steering = std::clamp(
        -kSteerLateralGain * (loc.est_lateral - plan.target_lateral) - kSteerHeadingGain * loc.est_heading,
        -kMaxSteer, kMaxSteer);
    return cmd;
}

std::pair<ActuationCommand, PidState> control(const PlanOut& plan, const LocalizationOut& loc, const PidState& pid,
                                              double dt) {
    PidState next = pid;
    load_pid_inputs(next, plan, loc);
    run_pid_law(next, dt);
    return {command_from(next, plan, loc), next};
}

Delivery Pipeline::deliver(ModuleId module, FragmentRef fragment, InjectionHooks* hooks, int tick) {
    stage_ = module;
    if (!hooks) return Delivery::delivered;
    return hooks->intercept(module, fragment, tick);
}

TickOutput Pipeline::tick(const GroundTruth& gt, Rng& sensor_rng, InjectionHooks* hooks, Watchdog& watchdog) {
    const int t = gt.tick;

    stage_ = ModuleId::sense;
    SensorFrame frame = sense(gt, cfg_.noise, sensor_rng);
    if (deliver(ModuleId::sense, &frame, hooks, t) == Delivery::dropped) frame = last_frame_;
    else last_frame_ = frame;
    check_frame(frame);

    stage_ = ModuleId::object_perception;
    ObjectPerceptionOut objects = perceive_objects(frame);
    if (deliver(ModuleId::object_perception, &objects, hooks, t) == Delivery::dropped) objects = last_objects_;
    else last_objects_ = objects;
    check_objects(objects);

    stage_ = ModuleId::path_perception;
    PathPerceptionOut path = perceive_path(frame, last_path_);
    if (deliver(ModuleId::path_perception, &path, hooks, t) == Delivery::dropped) path = last_path_;
    else last_path_ = path;
    check_path(path);

    stage_ = ModuleId::localization;
    LocalizationOut loc = localize(frame, path, last_loc_, cfg_.dt);
    if (deliver(ModuleId::localization, &loc, hooks, t) == Delivery::dropped) loc = last_loc_;
    else last_loc_ = loc;
    if (!finite_all({loc.est_s, loc.est_lateral, loc.est_heading, loc.est_speed}))
        throw PipelineCrash(ModuleId::localization, "non-finite estimate");

    stage_ = ModuleId::planning;
    PlanOut pl = plan(objects, path, loc, cfg_.lanes, cfg_.ego_length, watchdog);
    if (deliver(ModuleId::planning, &pl, hooks, t) == Delivery::dropped) pl = PlanOut{0.0, 0.0, 0.0};
    if (!finite_all({pl.target_speed, pl.target_lateral, pl.lead_gap}))
        throw PipelineCrash(ModuleId::planning, "non-finite plan");

    stage_ = ModuleId::control;
    load_pid_inputs(pid_, pl, loc);
    deliver(ModuleId::control, PidInputs{&pid_}, hooks, t);
    run_pid_law(pid_, cfg_.dt);
    ActuationCommand cmd;
    if (deliver(ModuleId::control, &pid_, hooks, t) == Delivery::dropped) pid_.pid_output = 0.0;
    else cmd = command_from(pid_, pl, loc);
    if (!finite_all({pid_.pid_measured_value, pid_.pid_target_value, pid_.pid_output}))
        throw PipelineCrash(ModuleId::control, "non-finite controller state");

    stage_ = ModuleId::actuation;
    if (deliver(ModuleId::actuation, &cmd, hooks, t) == Delivery::dropped) cmd = ActuationCommand{};
    if (!cmd.finite()) throw PipelineCrash(ModuleId::actuation, "non-finite command");

    TickOutput out;
    out.command = cmd;
    MonitoredRecord& r = out.record;
    r.frame_id = t;
    r.num_detected_objects = objects.num_detected_objects;
    r.object_class = objects.object_class;
    r.object_coordinates = objects.object_coordinates;
    r.bounding_box = objects.bounding_box;
    r.lane_type = path.lane_type;
    r.lane_c0 = path.c0;
    r.lane_c1 = path.c1;
    r.lane_c2 = path.c2;
    r.est_s = loc.est_s;
    r.est_lateral = loc.est_lateral;
    r.est_heading = loc.est_heading;
    r.est_speed = loc.est_speed;
    r.target_speed = pl.target_speed;
    r.lead_gap = pl.lead_gap;
    r.pid_measured_value = pid_.pid_measured_value;
    r.pid_target_value = pid_.pid_target_value;
    r.pid_output = pid_.pid_output;
    r.throttle = cmd.throttle;
    r.brake = cmd.brake;
    r.steering = cmd.steering;
    r.ego_speed = gt.ego_speed;
    r.ego_lateral = gt.ego_lateral;
    r.ego_s = gt.ego_s;
    return out;
}

}  // namespace adsfi
