#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "adsfi/pipeline.hpp"
#include "adsfi/rng.hpp"
#include "adsfi/sites.hpp"

namespace adsfi {

class PlanInvalid : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace fault {

struct Random {
    double lower = 0.0;
    double upper = 0.0;
    bool operator==(const Random&) const = default;
};
struct Fixed {
    double value = 0.0;
    bool operator==(const Fixed&) const = default;
};
struct Scale {
    double ratio = 1.0;
    bool operator==(const Scale&) const = default;
};
struct Disappear {
    bool operator==(const Disappear&) const = default;
};
struct BitFlip {
    int n_bits = 1;
    bool operator==(const BitFlip&) const = default;
};
struct GaussianNoise {
    double sigma = 0.0;
    bool operator==(const GaussianNoise&) const = default;
};
struct Occlusion {
    double lower = 0.0;
    double upper = 0.0;
    bool operator==(const Occlusion&) const = default;
};

}  // namespace fault

using FaultModel = std::variant<fault::Random, fault::Fixed, fault::Scale, fault::Disappear, fault::BitFlip,
                                fault::GaussianNoise, fault::Occlusion>;

/// Lowercase wire tag: "random", "fixed", "scale", "disappear", "bitflip",
/// "gaussian_noise", "occlusion".
std::string_view model_tag(const FaultModel& m);
void validate_model(const FaultModel& m);
/// Whether `m` can corrupt a value of kind `k` (list kinds are addressed per element).
bool applicable(const FaultModel& m, ValueKind k);

struct FaultSite {
    ModuleId module = ModuleId::sense;
    std::string variable;
    std::optional<std::size_t> element;

    bool operator==(const FaultSite&) const = default;
};

namespace trigger {
struct Transient {
    int tick = 0;
    bool operator==(const Transient&) const = default;
};
struct Intermittent {
    std::vector<int> ticks;  // sorted, distinct
    bool operator==(const Intermittent&) const = default;
};
struct Permanent {
    int from_tick = 0;
    bool operator==(const Permanent&) const = default;
};
}  // namespace trigger

using Trigger = std::variant<trigger::Transient, trigger::Intermittent, trigger::Permanent>;

bool fires(const Trigger& t, int tick);
/// Earliest tick at which the trigger fires.
int first_tick(const Trigger& t);

struct FaultSpec {
    FaultSite site;
    FaultModel model;
    Trigger trigger;

    bool operator==(const FaultSpec&) const = default;
};

struct FaultPlan {
    std::string run_id;
    std::uint64_t seed = 0;
    std::vector<FaultSpec> faults;

    bool operator==(const FaultPlan&) const = default;
};

/// Checks site existence, model/kind compatibility and trigger bounds.
void validate_spec(const FaultSpec& spec, int tick_count);

struct ProfiledSite {
    FaultSite site;
    ValueKind kind = ValueKind::real;  // kind of the addressed value
    std::vector<int> live_ticks;       // ascending
};

struct WorkloadProfile {
    int tick_count = 0;
    std::vector<ProfiledSite> sites;
    /// Per (module, list variable), element count at each tick.
    struct ListLiveness {
        ModuleId module;
        std::string variable;
        std::vector<std::size_t> elements_per_tick;
    };
    std::vector<ListLiveness> lists;

    std::size_t live_elements(ModuleId module, std::string_view variable, int tick) const;
    const ProfiledSite* find(const FaultSite& site) const;
};

/// Observes every intercept boundary of a fault-free run and accumulates the
/// live sites.
class ProfilingHooks : public InjectionHooks {
public:
    explicit ProfilingHooks(int tick_count);
    Delivery intercept(ModuleId module, FragmentRef fragment, int tick) override;
    WorkloadProfile take();

private:
    ProfiledSite& site_for(ModuleId module, std::string_view variable, std::optional<std::size_t> element,
                           ValueKind kind);
    WorkloadProfile profile_;
};

struct SiteFilter {
    std::vector<ModuleId> modules;       // empty = all
    std::vector<std::string> variables;  // empty = all

    bool admits(const FaultSite& s) const;
};

enum class TriggerMode { transient, intermittent, permanent };

struct PlanRequest {
    int num_runs = 1;
    int faults_per_run = 1;
    std::vector<FaultModel> models;  // one drawn uniformly per fault
    SiteFilter filter;
    TriggerMode trigger = TriggerMode::transient;
    int intermittent_count = 3;
    std::uint64_t master_seed = 0;
    /// Seed recorded in each plan; typically the matched golden run's seed.
    std::vector<std::uint64_t> run_seeds;
};

/// Uniform site sampling over eligible sites, then a uniform trigger tick over
/// the chosen site's live ticks. Pure function of (profile, request).
std::vector<FaultPlan> generate_fault_plan(const WorkloadProfile& profile, const PlanRequest& request);
/// Run i samples from profiles[i % profiles.size()], matching the golden run
/// whose seed it reuses.
std::vector<FaultPlan> generate_fault_plan(std::span<const WorkloadProfile> profiles, const PlanRequest& request);

std::vector<int> bit_positions(const SiteValue& value);
/// Flips exactly the given bit positions of the value's 64-bit representation.
SiteValue flip_bits(const SiteValue& value, std::span<const int> positions);
/// Flips n_bits distinct uniformly chosen positions. Chosen positions are
/// written to `chosen` when supplied.
SiteValue apply_bitflip(const SiteValue& value, int n_bits, Rng& rng, std::vector<int>* chosen = nullptr);

/// Value-level corruption. Returns nullopt for Disappear (value not delivered).
/// Throws PlanInvalid on a model/kind mismatch.
std::optional<SiteValue> apply_sli(const SiteValue& value, const FaultModel& model, Rng& rng);

/// Frame-level sensor perturbations.
void apply_frame_fault(SensorFrame& frame, const FaultModel& model, Rng& rng);

/// Before/after record of one applied corruption.
struct InjectionEvent {
    int tick = 0;
    FaultSite site;
    std::string model;
    std::optional<SiteValue> before;  // absent for frame/output-level faults
    std::optional<SiteValue> after;   // absent when the output disappeared
    std::vector<int> bits;            // flipped positions for bitflip
};

/// Applies a fault plan at module boundaries.
class Injector : public InjectionHooks {
public:
    Injector(const FaultPlan& plan, std::uint64_t stream);
    Delivery intercept(ModuleId module, FragmentRef fragment, int tick) override;
    const std::vector<InjectionEvent>& events() const { return events_; }

private:
    const FaultPlan& plan_;
    Rng rng_;
    std::vector<InjectionEvent> events_;
};

}  // namespace adsfi
