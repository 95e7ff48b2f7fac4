#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "adsfi/rng.hpp"

namespace adsfi {

// Vehicle and road constants.
inline constexpr double kMaxAccel = 3.0;             // m/s^2 at full throttle
inline constexpr double kMaxBrakeDecel = 4.7229;     // m/s^2 at full brake; 64 m from 55 mph
inline constexpr double kWheelbase = 2.8;            // m
inline constexpr double kMaxSteer = 0.5;             // rad
inline constexpr double kDefaultSpeedLimit = 29.0576;  // m/s (65 mph)
inline constexpr double kDefaultDt = 0.05;           // s (20 Hz)
inline constexpr double kMaxHeading = 1.5697963267948966;  // pi/2 - 1e-3

class ScenarioInvalid : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonFiniteCommand : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct LaneGeometry {
    int lane_count = 3;
    double lane_width = 3.7;
    double road_length = 5000.0;
    double speed_limit = kDefaultSpeedLimit;

    /// Lateral position of a lane center, measured from the center of lane 0.
    double lane_center(int lane_index) const { return lane_index * lane_width; }
    void validate() const;
};

struct TruncNormalParam {
    double mean = 0.0;
    double std_dev = 0.0;
    double lower = 0.0;
    double upper = 0.0;

    static TruncNormalParam fixed(double v) { return {v, 0.0, v, v}; }
    void validate(std::string_view what) const;
};

enum class Behavior { constant, decelerate_to_stop, accelerate, stationary };

enum class ObjectClass : std::int64_t { vehicle = 0, pedestrian = 1, sign = 2, unknown = 3 };
inline constexpr int kObjectClassCount = 4;

enum class LaneType : std::int64_t { solid = 0, dashed = 1, double_line = 2, unknown = 3 };
inline constexpr int kLaneTypeCount = 4;

std::string_view to_string(Behavior b);
std::string_view to_string(ObjectClass c);
std::string_view to_string(LaneType t);
std::optional<Behavior> behavior_from_string(std::string_view s);
std::optional<ObjectClass> object_class_from_string(std::string_view s);
std::optional<LaneType> lane_type_from_string(std::string_view s);

struct ActorSpec {
    std::string actor_id;
    TruncNormalParam initial_s;
    int lane_index = 0;
    TruncNormalParam speed;
    TruncNormalParam accel;
    Behavior behavior = Behavior::constant;
    double length = 4.5;
    double width = 2.0;
    ObjectClass object_class = ObjectClass::vehicle;
};

/// Sensor model of the single forward-looking camera.
struct SensorNoiseParams {
    double sigma = 0.0;        // m, per-axis noise on object positions
    double lane_sigma = 0.0;   // m, lateral noise on lane samples
    double speed_sigma = 0.0;  // m/s, noise on the ego speed reading
    std::optional<std::pair<double, double>> occlusion;  // longitudinal interval ahead of ego
};

struct ScenarioSpec {
    std::string name = "scenario";
    LaneGeometry lanes;
    ActorSpec ego;
    std::vector<ActorSpec> actors;
    double duration_s = 30.0;
    double dt_s = kDefaultDt;
    double sensor_range_m = 150.0;
    SensorNoiseParams sensor;

    int tick_count() const;
    void validate() const;
};

struct VehicleState {
    double s = 0.0;        // m, longitudinal
    double lateral = 0.0;  // m, offset from the assigned lane center
    double heading = 0.0;  // rad, relative to the road axis
    double speed = 0.0;    // m/s
    double accel = 0.0;    // m/s^2
};

struct ActuationCommand {
    double throttle = 0.0;
    double brake = 0.0;
    double steering = 0.0;

    bool finite() const;
    ActuationCommand clamped() const;
};

/// A vehicle on the road: static attributes plus its kinematic state.
struct ActorState {
    std::string actor_id;
    int lane_index = 0;
    Behavior behavior = Behavior::constant;
    double length = 4.5;
    double width = 2.0;
    ObjectClass object_class = ObjectClass::vehicle;
    double script_accel = 0.0;  // magnitude used by the behavior script
    VehicleState state;

    double road_lateral(const LaneGeometry& lanes) const {
        return lanes.lane_center(lane_index) + state.lateral;
    }
};

struct WorldState {
    int tick = 0;
    double time = 0.0;
    double dt = kDefaultDt;
    LaneGeometry lanes;
    ActorState ego;
    std::vector<ActorState> actors;
    bool collided = false;
};

struct TruthObject {
    std::string actor_id;
    ObjectClass object_class = ObjectClass::vehicle;
    double ds = 0.0;    // center-to-center, along the road
    double dlat = 0.0;  // center-to-center, across the road
    double length = 0.0;
    double width = 0.0;
};

struct GroundTruth {
    int tick = 0;
    std::vector<TruthObject> objects;
    double ego_s = 0.0;
    double ego_lateral = 0.0;
    double ego_heading = 0.0;
    double ego_speed = 0.0;
    double ego_length = 4.5;
    double lane_width = 3.7;
    LaneType lane_type = LaneType::dashed;
};

/// Axis-aligned rectangle in road coordinates.
struct Footprint {
    double s = 0.0;
    double lateral = 0.0;
    double length = 0.0;
    double width = 0.0;
};

bool overlaps(const Footprint& a, const Footprint& b);
Footprint footprint(const ActorState& a, const LaneGeometry& lanes);

double sample_trunc_normal(const TruncNormalParam& p, Rng& rng);

/// Samples every scenario parameter from the stream derived from `seed`.
/// Throws ScenarioInvalid when sampled vehicles overlap at tick 0.
WorldState instantiate_scenario(const ScenarioSpec& spec, std::uint64_t seed);

/// Advances the world by one explicit-Euler step. Throws NonFiniteCommand on
/// NaN/Inf command fields. After a collision the world stays frozen.
WorldState step(const WorldState& world, const ActuationCommand& ego_cmd, double dt);

bool detect_collision(const WorldState& world);

GroundTruth ground_truth(const WorldState& world, double sensor_range);

/// Bumper-to-bumper gap to the nearest vehicle ahead that overlaps the ego
/// laterally; returns kNoLead when there is none.
inline constexpr double kNoLead = 1e9;
double min_gap_ahead(const WorldState& world);

}  // namespace adsfi
