#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "adsfi/pipeline_types.hpp"
#include "adsfi/rng.hpp"
#include "adsfi/sites.hpp"
#include "adsfi/watchdog.hpp"
#include "adsfi/world.hpp"

namespace adsfi {

/// Raised when a stage's output violates its invariants after interception.
class PipelineCrash : public std::runtime_error {
public:
    PipelineCrash(ModuleId module, const std::string& what)
        : std::runtime_error(std::string(to_string(module)) + ": " + what), module_(module) {}
    ModuleId module() const { return module_; }

private:
    ModuleId module_;
};

enum class Delivery { delivered, dropped };

/// Intercept point invoked at every module boundary. Implementations may
/// modify the fragment in place or report that the output was not delivered.
class InjectionHooks {
public:
    virtual ~InjectionHooks() = default;
    virtual Delivery intercept(ModuleId module, FragmentRef fragment, int tick) = 0;
};

// Individual stages. Each is a pure function of its arguments.

SensorFrame sense(const GroundTruth& gt, const SensorNoiseParams& noise, Rng& rng);
ObjectPerceptionOut perceive_objects(const SensorFrame& frame);
/// Least-squares quadratic fit of the lane samples. Fewer than three usable
/// samples hold `previous` (degraded mode).
PathPerceptionOut perceive_path(const SensorFrame& frame, const PathPerceptionOut& previous);
LocalizationOut localize(const SensorFrame& frame, const PathPerceptionOut& path, const LocalizationOut& prev,
                         double dt);
PlanOut plan(const ObjectPerceptionOut& objects, const PathPerceptionOut& path, const LocalizationOut& loc,
             const LaneGeometry& limits, double ego_length, Watchdog& watchdog);
PlanOut plan(const ObjectPerceptionOut& objects, const PathPerceptionOut& path, const LocalizationOut& loc,
             const LaneGeometry& limits, double ego_length = 4.5);

/// Lane offset of a lateral displacement, counted by stepping one lane width
/// at a time (each step is charged to the watchdog).
int relative_lane(double dlat, double lane_width, Watchdog& watchdog);

/// Loads measured/target values into the controller.
void load_pid_inputs(PidState& pid, const PlanOut& plan, const LocalizationOut& loc);
/// Runs the PID law on the loaded inputs; leaves the raw output in pid_output.
void run_pid_law(PidState& pid, double dt);
ActuationCommand command_from(const PidState& pid, const PlanOut& plan, const LocalizationOut& loc);
std::pair<ActuationCommand, PidState> control(const PlanOut& plan, const LocalizationOut& loc, const PidState& pid,
                                              double dt);

struct PipelineConfig {
    LaneGeometry lanes;
    double dt = kDefaultDt;
    SensorNoiseParams noise;
    double ego_length = 4.5;
};

struct TickOutput {
    ActuationCommand command;  // raw, pre-clamp
    MonitoredRecord record;
};

/// Stateful lockstep pipeline: sense, object perception, path perception,
/// localization, planning, control, actuation.
class Pipeline {
public:
    explicit Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) {}

    /// Throws PipelineCrash on invariant violations and HangDetected when the
    /// watchdog budget is exhausted; current_stage() names the failing stage.
    TickOutput tick(const GroundTruth& gt, Rng& sensor_rng, InjectionHooks* hooks, Watchdog& watchdog);

    ModuleId current_stage() const { return stage_; }

private:
    Delivery deliver(ModuleId module, FragmentRef fragment, InjectionHooks* hooks, int tick);

    PipelineConfig cfg_;
    ModuleId stage_ = ModuleId::sense;
    SensorFrame last_frame_;
    ObjectPerceptionOut last_objects_;
    PathPerceptionOut last_path_;
    LocalizationOut last_loc_;
    PidState pid_;
};

}  // namespace adsfi
