#include "adsfi/world.hpp"

#include <algorithm>
#include <cmath>

namespace adsfi {

namespace {

constexpr int kMaxRejections = 1000;

template <typename E, std::size_t N>
std::optional<E> lookup(std::string_view s, const std::pair<E, std::string_view> (&table)[N]) {
    for (const auto& [value, name] : table) {
        if (name == s) return value;
    }
    return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(E v, const std::pair<E, std::string_view> (&table)[N]) {
    for (const auto& [value, name] : table) {
        if (value == v) return name;
    }
    return "invalid";
}

constexpr std::pair<Behavior, std::string_view> kBehaviors[] = {
    {Behavior::constant, "constant"},
    {Behavior::decelerate_to_stop, "decelerate_to_stop"},
    {Behavior::accelerate, "accelerate"},
    {Behavior::stationary, "stationary"},
};

constexpr std::pair<ObjectClass, std::string_view> kObjectClasses[] = {
    {ObjectClass::vehicle, "vehicle"},
    {ObjectClass::pedestrian, "pedestrian"},
    {ObjectClass::sign, "sign"},
    {ObjectClass::unknown, "unknown"},
};

constexpr std::pair<LaneType, std::string_view> kLaneTypes[] = {
    {LaneType::solid, "solid"},
    {LaneType::dashed, "dashed"},
    {LaneType::double_line, "double"},
    {LaneType::unknown, "unknown"},
};

void validate_actor(const ActorSpec& a, const LaneGeometry& lanes) {
    const std::string who = "actor '" + a.actor_id + "'";
    if (a.lane_index < 0 || a.lane_index >= lanes.lane_count)
        throw ScenarioInvalid(who + ": lane_index out of range");
    if (!(a.length > 0.0) || !(a.width > 0.0))
        throw ScenarioInvalid(who + ": length and width must be positive");
    a.initial_s.validate(who + ".initial_s");
    a.speed.validate(who + ".speed");
    a.accel.validate(who + ".accel");
    if (a.speed.lower < 0.0) throw ScenarioInvalid(who + ".speed: lower bound below zero");
}

ActorState make_actor(const ActorSpec& spec, Rng& rng) {
    ActorState a;
    a.actor_id = spec.actor_id;
    a.lane_index = spec.lane_index;
    a.behavior = spec.behavior;
    a.length = spec.length;
    a.width = spec.width;
    a.object_class = spec.object_class;
    a.state.s = sample_trunc_normal(spec.initial_s, rng);
    if (spec.behavior != Behavior::stationary) {
        a.state.speed = sample_trunc_normal(spec.speed, rng);
        a.script_accel = std::abs(sample_trunc_normal(spec.accel, rng));
    }
    switch (a.behavior) {
    case Behavior::decelerate_to_stop:
        a.state.accel = a.state.speed > 0.0 ? -a.script_accel : 0.0;
        break;
    case Behavior::accelerate:
        a.state.accel = a.script_accel;
        break;
    default:
        break;
    }
    return a;
}

void advance_actor(ActorState& a, double dt, double speed_limit) {
    VehicleState& st = a.state;
    switch (a.behavior) {
    case Behavior::constant:
        st.s = st.s + st.speed * dt;
        break;
    case Behavior::decelerate_to_stop:
        st.s = st.s + st.speed * dt;
        st.speed = std::max(0.0, st.speed - a.script_accel * dt);
        st.accel = st.speed > 0.0 ? -a.script_accel : 0.0;
        break;
    case Behavior::accelerate:
        st.s = st.s + st.speed * dt;
        if (st.speed < speed_limit) st.speed = std::min(speed_limit, st.speed + a.script_accel * dt);
        st.accel = st.speed < speed_limit ? a.script_accel : 0.0;
        break;
    case Behavior::stationary:
        break;
    }
}

}  // namespace

std::string_view to_string(Behavior b) { return name_of(b, kBehaviors); }
std::string_view to_string(ObjectClass c) { return name_of(c, kObjectClasses); }
std::string_view to_string(LaneType t) { return name_of(t, kLaneTypes); }
std::optional<Behavior> behavior_from_string(std::string_view s) { return lookup(s, kBehaviors); }
std::optional<ObjectClass> object_class_from_string(std::string_view s) {
    return lookup(s, kObjectClasses);
}
std::optional<LaneType> lane_type_from_string(std::string_view s) { return lookup(s, kLaneTypes); }

void LaneGeometry::validate() const {
    if (lane_count < 1) throw ScenarioInvalid("lanes.lane_count must be >= 1");
    if (!(lane_width > 0.0)) throw ScenarioInvalid("lanes.lane_width must be positive");
    if (!(speed_limit > 0.0)) throw ScenarioInvalid("lanes.speed_limit must be positive");
    if (!(road_length > 0.0)) throw ScenarioInvalid("lanes.road_length must be positive");
}

void TruncNormalParam::validate(std::string_view what) const {
    const std::string w(what);
    if (!std::isfinite(mean) || !std::isfinite(std_dev) || !std::isfinite(lower) ||
        !std::isfinite(upper))
        throw ScenarioInvalid(w + ": non-finite parameter");
    if (std_dev < 0.0) throw ScenarioInvalid(w + ": std_dev must be >= 0");
    if (lower > upper) throw ScenarioInvalid(w + ": lower > upper");
    if (mean < lower || mean > upper) throw ScenarioInvalid(w + ": mean outside [lower, upper]");
}

int ScenarioSpec::tick_count() const {
    return static_cast<int>(std::llround(duration_s / dt_s));
}

void ScenarioSpec::validate() const {
    lanes.validate();
    if (!(dt_s > 0.0)) throw ScenarioInvalid("dt_s must be positive");
    if (!(duration_s > 0.0)) throw ScenarioInvalid("duration_s must be positive");
    const double n = duration_s / dt_s;
    if (std::abs(n - std::round(n)) > 1e-6) throw ScenarioInvalid("duration_s / dt_s must be integral");
    if (!(sensor_range_m > 0.0)) throw ScenarioInvalid("sensor_range_m must be positive");
    if (sensor.sigma < 0.0 || sensor.lane_sigma < 0.0 || sensor.speed_sigma < 0.0)
        throw ScenarioInvalid("sensor noise sigmas must be >= 0");
    if (sensor.occlusion && sensor.occlusion->first > sensor.occlusion->second)
        throw ScenarioInvalid("sensor.occlusion interval is reversed");
    validate_actor(ego, lanes);
    for (const auto& a : actors) validate_actor(a, lanes);
}

bool ActuationCommand::finite() const {
    return std::isfinite(throttle) && std::isfinite(brake) && std::isfinite(steering);
}

ActuationCommand ActuationCommand::clamped() const {
    return {std::clamp(throttle, 0.0, 1.0), std::clamp(brake, 0.0, 1.0),
            std::clamp(steering, -kMaxSteer, kMaxSteer)};
}

bool overlaps(const Footprint& a, const Footprint& b) {
    return std::abs(a.s - b.s) < 0.5 * (a.length + b.length) &&
           std::abs(a.lateral - b.lateral) < 0.5 * (a.width + b.width);
}

Footprint footprint(const ActorState& a, const LaneGeometry& lanes) {
    return {a.state.s, a.road_lateral(lanes), a.length, a.width};
}

double sample_trunc_normal(const TruncNormalParam& p, Rng& rng) {
    if (p.std_dev == 0.0 || p.lower == p.upper) return std::clamp(p.mean, p.lower, p.upper);
    double x = p.mean;
    for (int i = 0; i < kMaxRejections; ++i) {
        x = p.mean + p.std_dev * rng.normal();
        if (x >= p.lower && x <= p.upper) return x;
    }
    return std::clamp(x, p.lower, p.upper);
}

WorldState instantiate_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(stream_seed(seed, Stream::scenario));
    WorldState w;
    w.dt = spec.dt_s;
    w.lanes = spec.lanes;
    w.ego = make_actor(spec.ego, rng);
    w.ego.behavior = Behavior::constant;
    w.ego.state.accel = 0.0;
    w.actors.reserve(spec.actors.size());
    for (const auto& a : spec.actors) w.actors.push_back(make_actor(a, rng));

    std::vector<Footprint> boxes;
    boxes.push_back(footprint(w.ego, w.lanes));
    for (const auto& a : w.actors) boxes.push_back(footprint(a, w.lanes));
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        for (std::size_t j = i + 1; j < boxes.size(); ++j) {
            if (overlaps(boxes[i], boxes[j]))
                throw ScenarioInvalid("initial bounding boxes overlap (vehicles " + std::to_string(i) +
                                      " and " + std::to_string(j) + ")");
        }
    }
    return w;
}

WorldState step(const WorldState& world, const ActuationCommand& ego_cmd, double dt) {
    if (!ego_cmd.finite()) throw NonFiniteCommand("non-finite actuation command");
    WorldState out = world;
    out.tick = world.tick + 1;
    out.dt = dt;
    out.time = out.tick * dt;
    if (world.collided) return out;

    const ActuationCommand cmd = ego_cmd.clamped();
    VehicleState& ego = out.ego.state;
    const VehicleState prev = world.ego.state;
    ego.accel = cmd.throttle * kMaxAccel - cmd.brake * kMaxBrakeDecel;
    ego.speed = std::max(0.0, prev.speed + ego.accel * dt);
    ego.s = prev.s + prev.speed * dt;
    ego.heading = std::clamp(prev.heading + (prev.speed / kWheelbase) * std::tan(cmd.steering) * dt,
                             -kMaxHeading, kMaxHeading);
    ego.lateral = prev.lateral + prev.speed * std::sin(prev.heading) * dt;

    for (auto& a : out.actors) advance_actor(a, dt, out.lanes.speed_limit);

    if (detect_collision(out)) {
        out.collided = true;
        out.ego.state.speed = 0.0;
        out.ego.state.accel = 0.0;
        for (auto& a : out.actors) {
            a.state.speed = 0.0;
            a.state.accel = 0.0;
        }
    }
    return out;
}

bool detect_collision(const WorldState& world) {
    std::vector<Footprint> boxes;
    boxes.reserve(world.actors.size() + 1);
    boxes.push_back(footprint(world.ego, world.lanes));
    for (const auto& a : world.actors) boxes.push_back(footprint(a, world.lanes));
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        for (std::size_t j = i + 1; j < boxes.size(); ++j) {
            if (overlaps(boxes[i], boxes[j])) return true;
        }
    }
    return false;
}

GroundTruth ground_truth(const WorldState& world, double sensor_range) {
    GroundTruth gt;
    gt.tick = world.tick;
    const auto& ego = world.ego;
    gt.ego_s = ego.state.s;
    gt.ego_lateral = ego.state.lateral;
    gt.ego_heading = ego.state.heading;
    gt.ego_speed = ego.state.speed;
    gt.ego_length = ego.length;
    gt.lane_width = world.lanes.lane_width;
    gt.lane_type = world.lanes.lane_count == 1 ? LaneType::solid : LaneType::dashed;

    const double ego_lat = ego.road_lateral(world.lanes);
    for (const auto& a : world.actors) {
        const double ds = a.state.s - ego.state.s;
        if (ds < 0.0 || ds > sensor_range) continue;
        gt.objects.push_back({a.actor_id, a.object_class, ds, a.road_lateral(world.lanes) - ego_lat,
                              a.length, a.width});
    }
    std::stable_sort(gt.objects.begin(), gt.objects.end(),
                     [](const TruthObject& x, const TruthObject& y) { return x.ds < y.ds; });
    return gt;
}

double min_gap_ahead(const WorldState& world) {
    const auto& ego = world.ego;
    const double ego_lat = ego.road_lateral(world.lanes);
    double best = kNoLead;
    for (const auto& a : world.actors) {
        const double ds = a.state.s - ego.state.s;
        if (ds <= 0.0) continue;
        if (std::abs(a.road_lateral(world.lanes) - ego_lat) >= 0.5 * (a.width + ego.width)) continue;
        best = std::min(best, ds - 0.5 * (a.length + ego.length));
    }
    return best;
}

}  // namespace adsfi
