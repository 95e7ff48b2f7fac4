#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "adsfi/world.hpp"

namespace adsfi {

/// Pipeline stages, in execution order. `actuation` is the boundary between
/// the controller and the vehicle.
enum class ModuleId { sense, object_perception, path_perception, localization, planning, control, actuation };
inline constexpr int kModuleCount = 7;

std::string_view to_string(ModuleId m);
std::optional<ModuleId> module_from_string(std::string_view s);

// Planning and control constants.
inline constexpr double kTimeGap = 2.0;      // s
inline constexpr double kStandoff = 5.0;     // m, free space kept to a stopped lead
inline constexpr double kPlanDecel = 2.5;    // m/s^2, braking profile used when closing on a lead
inline constexpr double kKp = 0.5;
inline constexpr double kKi = 0.05;
inline constexpr double kKd = 0.1;
inline constexpr double kIntegralMax = 10.0;
inline constexpr double kSteerLateralGain = 0.2;  // rad/m
inline constexpr double kSteerHeadingGain = 1.0;

using Pair = std::array<double, 2>;

struct Detection {
    ObjectClass object_class = ObjectClass::vehicle;
    double ds = 0.0;
    double dlat = 0.0;
    double length = 0.0;
    double width = 0.0;
    bool occluded = false;
};

/// Lane-center sample in the ego frame: x forward, y left.
struct LaneSample {
    double x = 0.0;
    double y = 0.0;
};

struct SensorFrame {
    int frame_id = 0;
    std::vector<Detection> objects;
    std::vector<LaneSample> lane_samples;
    double ego_speed_reading = 0.0;
    LaneType lane_type = LaneType::unknown;
};

struct ObjectPerceptionOut {
    std::int64_t num_detected_objects = 0;
    std::vector<ObjectClass> object_class;
    std::vector<Pair> object_coordinates;  // (ds, dlat)
    std::vector<Pair> bounding_box;        // (length, width)

    bool coherent() const;
};

/// Lane center as y(x) = c0 + c1 x + c2 x^2 in the ego frame.
struct PathPerceptionOut {
    LaneType lane_type = LaneType::unknown;
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
};

struct LocalizationOut {
    double est_s = 0.0;
    double est_lateral = 0.0;
    double est_heading = 0.0;
    double est_speed = 0.0;
};

struct PlanOut {
    double target_speed = 0.0;
    double target_lateral = 0.0;
    double lead_gap = kNoLead;
};

/// Speed controller state. `pid_output` is the raw law output; the command
/// derivation clamps it to [-1, 1].
struct PidState {
    double pid_measured_value = 0.0;
    double pid_target_value = 0.0;
    double pid_output = 0.0;
    double integral = 0.0;
    double prev_error = 0.0;
    bool primed = false;  // prev_error is valid; no derivative on the first tick
};

/// One tick of monitored values. Field names are the log wire format.
struct MonitoredRecord {
    int frame_id = 0;
    std::int64_t num_detected_objects = 0;
    std::vector<ObjectClass> object_class;
    std::vector<Pair> object_coordinates;
    std::vector<Pair> bounding_box;
    LaneType lane_type = LaneType::unknown;
    double lane_c0 = 0.0;
    double lane_c1 = 0.0;
    double lane_c2 = 0.0;
    double est_s = 0.0;
    double est_lateral = 0.0;
    double est_heading = 0.0;
    double est_speed = 0.0;
    double target_speed = 0.0;
    double lead_gap = 0.0;
    double pid_measured_value = 0.0;
    double pid_target_value = 0.0;
    double pid_output = 0.0;
    double throttle = 0.0;
    double brake = 0.0;
    double steering = 0.0;
    double ego_speed = 0.0;
    double ego_lateral = 0.0;
    double ego_s = 0.0;

    bool operator==(const MonitoredRecord&) const = default;
};

}  // namespace adsfi
