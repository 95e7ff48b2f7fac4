#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "adsfi/fault.hpp"
#include "adsfi/oracle.hpp"
#include "adsfi/trace.hpp"
#include "adsfi/world.hpp"

namespace adsfi {

using Json = nlohmann::json;

/// Malformed or out-of-range input document. The message names the field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite reals are written as the strings "NaN", "Infinity", "-Infinity"
// so corrupted values survive a round trip through the log.
Json real_to_json(double v);
double real_from_json(const Json& j, const std::string& field);

Json read_json_file(const std::filesystem::path& path);

Json to_json(const TruncNormalParam& p);
Json to_json(const ActorSpec& a);
Json to_json(const ScenarioSpec& s);
ScenarioSpec scenario_from_json(const Json& j);
ScenarioSpec load_scenario(const std::filesystem::path& path);

Json to_json(const FaultModel& m);
/// `speed_limit` supplies the default bounds of a Random model.
FaultModel fault_model_from_json(const Json& j, double speed_limit, const std::string& field = "model");
Json to_json(const FaultSite& s);
FaultSite fault_site_from_json(const Json& j);
Json to_json(const Trigger& t);
Trigger trigger_from_json(const Json& j);
Json to_json(const FaultPlan& p);
FaultPlan fault_plan_from_json(const Json& j);

Json to_json(const SiteValue& v);
SiteValue site_value_from_json(const Json& j);
Json to_json(const InjectionEvent& e);
InjectionEvent injection_event_from_json(const Json& j);

Json to_json(const MonitoredRecord& r);
MonitoredRecord record_from_json(const Json& j);
Json to_json(const WorldSample& w);
WorldSample world_sample_from_json(const Json& j);

/// Tagged "golden_trace" or "injected_trace" line.
Json to_json(const RunTrace& t);
RunTrace trace_from_json(const Json& j);

/// Tagged "outcome" line.
Json to_json(const RunOutcome& o);
RunOutcome outcome_from_json(const Json& j);

}  // namespace adsfi
