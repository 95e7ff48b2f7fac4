#pragma once

#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "adsfi/trace.hpp"
#include "adsfi/world.hpp"

namespace adsfi {

class EnvelopeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultIqrK = 1.5;
inline constexpr double kNoCollision = std::numeric_limits<double>::infinity();

/// Linear-interpolation quantile of an ascending sample:
/// h = (n-1)p, x[floor h] + (h - floor h)(x[ceil h] - x[floor h]).
double quantile_sorted(std::span<const double> sorted, double p);

struct EnvelopeEntry {
    double q1 = 0.0;
    double q3 = 0.0;
    double min = 0.0;
    double max = 0.0;
};

EnvelopeEntry summarize_sample(std::vector<double> sample);

/// Flattened numeric view of a record: one (channel, value) per scalar and per
/// list element, e.g. "object_coordinates[3]" is the dlat of object 1.
std::vector<std::pair<std::string, double>> numeric_channels(const MonitoredRecord& r);
/// (variable, variant-name) pairs for categorical fields.
std::vector<std::pair<std::string, std::string>> categorical_channels(const MonitoredRecord& r);

class GoldenEnvelope {
public:
    int tick_count() const { return tick_count_; }
    const EnvelopeEntry* entry(std::string_view channel, int tick) const;
    bool seen(std::string_view variable, std::string_view variant) const;

private:
    friend GoldenEnvelope build_envelope(std::span<const RunTrace> golden);
    int tick_count_ = 0;
    std::unordered_map<std::string, std::vector<std::optional<EnvelopeEntry>>> numeric_;
    std::map<std::string, std::set<std::string>, std::less<>> categorical_;
};

/// Per-tick envelopes over completed golden traces. Throws EnvelopeError for
/// fewer than two traces, incomplete traces or misaligned tick counts.
GoldenEnvelope build_envelope(std::span<const RunTrace> golden);

/// Outside both the Tukey fence and the observed golden range; non-finite
/// values are always outliers.
bool is_outlier(double value, const EnvelopeEntry& e, double k = kDefaultIqrK);

struct SafetyParams {
    double perception_time = kDefaultDt;  // s; 1/fps for the pipeline
    double reaction_time = 1.0;           // s
    double brake_decel = kMaxBrakeDecel;  // m/s^2
    double lane_center_threshold = 0.5;   // m
    double horizon_s = 10.0;              // trajectory extrapolation

    static SafetyParams ai(double fps) {
        SafetyParams p;
        p.perception_time = 1.0 / fps;
        return p;
    }
    static SafetyParams human() {
        SafetyParams p;
        p.perception_time = 1.75;
        return p;
    }
    void validate() const;
};

struct StoppingDistance {
    double d_p = 0.0;
    double d_r = 0.0;
    double d_b = 0.0;
    double d_s = 0.0;
};

StoppingDistance stopping_distance(double v, const SafetyParams& params);

/// A vehicle for trajectory extrapolation; `lateral` is absolute road lateral.
struct Body {
    double s = 0.0;
    double lateral = 0.0;
    double length = 4.5;
    double width = 2.0;
    double speed = 0.0;
    double heading = 0.0;
};

Body body_of(const ActorState& a, const LaneGeometry& lanes);

/// Distance the ego travels until the two footprints first overlap under
/// constant-velocity extrapolation; kNoCollision if not within the horizon.
double collision_distance(const Body& ego, const Body& obj, double horizon);

bool check_safety_envelope(const WorldSample& sample, const SafetyParams& params);
bool check_lane_centering(const RunTrace& trace, double threshold = 0.5);
bool check_traffic_violation(const RunTrace& trace, const LaneGeometry& lanes);

enum class OutcomeLabel { masked, due_hang, due_crash, sdc };
std::string_view to_string(OutcomeLabel l);
std::optional<OutcomeLabel> outcome_label_from_string(std::string_view s);

struct Deviation {
    std::string variable_id;
    int tick = 0;
    bool operator==(const Deviation&) const = default;
};

struct RunOutcome {
    std::string run_id;
    bool activated = false;
    OutcomeLabel label = OutcomeLabel::masked;
    bool actuation_error = false;
    bool safety_envelope_breach = false;
    bool lane_centering_breach = false;
    bool traffic_violation = false;
    bool accident = false;
    std::optional<Deviation> first_deviation;
    double min_safety_margin = kNoCollision;
    /// Hazard observed in the trace that the ontology does not attribute to
    /// the fault (no actuation error and no DUE).
    bool unattributed_hazard = false;

    bool operator==(const RunOutcome&) const = default;
};

/// Checks the flag implications of the fault-manifestation ontology.
bool ontology_consistent(const RunOutcome& o);

struct ClassifyOptions {
    SafetyParams safety;
    double iqr_k = kDefaultIqrK;
};

RunOutcome classify_run(const RunTrace& trace, const GoldenEnvelope& env, const ClassifyOptions& opts,
                        const LaneGeometry& lanes);

}  // namespace adsfi
