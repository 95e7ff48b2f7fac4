#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adsfi/fault.hpp"
#include "adsfi/pipeline_types.hpp"

namespace adsfi {

enum class RunKind { golden, injected };
enum class TerminationStatus { completed, crash, hang };

std::string_view to_string(RunKind k);
std::string_view to_string(TerminationStatus s);

struct Termination {
    TerminationStatus status = TerminationStatus::completed;
    ModuleId module = ModuleId::sense;  // meaningful for crash/hang
    int tick = 0;                       // meaningful for crash/hang

    bool operator==(const Termination&) const = default;
};

/// Ground-truth vehicle measurements observed at one tick.
struct WorldSample {
    int tick = 0;
    double time_s = 0.0;
    double ego_s = 0.0;
    double ego_speed = 0.0;
    double ego_lateral = 0.0;
    double min_gap = 0.0;             // bumper gap to the nearest vehicle ahead in the ego's path
    double collision_distance = 0.0;  // min over actors; +inf when none within the horizon
    bool collided = false;

    bool operator==(const WorldSample&) const = default;
};

struct RunTrace {
    std::string run_id;
    RunKind kind = RunKind::golden;
    std::uint64_t seed = 0;
    std::optional<FaultPlan> plan;
    std::vector<MonitoredRecord> records;
    Termination termination;
    std::vector<WorldSample> world_summary;
    std::vector<InjectionEvent> injections;

    bool collided() const { return !world_summary.empty() && world_summary.back().collided; }
};

}  // namespace adsfi
