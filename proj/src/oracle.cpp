#include "adsfi/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace adsfi {

namespace {

constexpr std::string_view kActuationChannels[] = {"throttle", "brake", "steering", "pid_output"};

bool is_actuation_channel(std::string_view name) {
    return std::find(std::begin(kActuationChannels), std::end(kActuationChannels), name) !=
           std::end(kActuationChannels);
}

/// Open time interval during which |d0 + dv t| < half_extent.
std::pair<double, double> overlap_window(double d0, double dv, double half_extent) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (dv == 0.0) {
        return std::abs(d0) < half_extent ? std::pair{-inf, inf} : std::pair{inf, -inf};
    }
    double a = (-half_extent - d0) / dv;
    double b = (half_extent - d0) / dv;
    if (a > b) std::swap(a, b);
    return {a, b};
}

void push_list(std::vector<std::pair<std::string, double>>& out, std::string_view name,
               const std::vector<Pair>& list) {
    for (std::size_t i = 0; i < list.size(); ++i) {
        for (std::size_t c = 0; c < 2; ++c) {
            std::string key(name);
            key += '[';
            key += std::to_string(2 * i + c);
            key += ']';
            out.emplace_back(std::move(key), list[i][c]);
        }
    }
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw EnvelopeError("quantile of an empty sample");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = static_cast<std::size_t>(std::ceil(h));
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

EnvelopeEntry summarize_sample(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    return {quantile_sorted(sample, 0.25), quantile_sorted(sample, 0.75), sample.front(), sample.back()};
}

std::vector<std::pair<std::string, double>> numeric_channels(const MonitoredRecord& r) {
    std::vector<std::pair<std::string, double>> out;
    out.reserve(24 + 4 * r.object_coordinates.size());
    out.emplace_back("frame_id", static_cast<double>(r.frame_id));
    out.emplace_back("num_detected_objects", static_cast<double>(r.num_detected_objects));
    push_list(out, "object_coordinates", r.object_coordinates);
    push_list(out, "bounding_box", r.bounding_box);
    out.emplace_back("lane_c0", r.lane_c0);
    out.emplace_back("lane_c1", r.lane_c1);
    out.emplace_back("lane_c2", r.lane_c2);
    out.emplace_back("est_s", r.est_s);
    out.emplace_back("est_lateral", r.est_lateral);
    out.emplace_back("est_heading", r.est_heading);
    out.emplace_back("est_speed", r.est_speed);
    out.emplace_back("target_speed", r.target_speed);
    out.emplace_back("lead_gap", r.lead_gap);
    out.emplace_back("pid_measured_value", r.pid_measured_value);
    out.emplace_back("pid_target_value", r.pid_target_value);
    out.emplace_back("pid_output", r.pid_output);
    out.emplace_back("throttle", r.throttle);
    out.emplace_back("brake", r.brake);
    out.emplace_back("steering", r.steering);
    out.emplace_back("ego_speed", r.ego_speed);
    out.emplace_back("ego_lateral", r.ego_lateral);
    out.emplace_back("ego_s", r.ego_s);
    return out;
}

std::vector<std::pair<std::string, std::string>> categorical_channels(const MonitoredRecord& r) {
    std::vector<std::pair<std::string, std::string>> out;
    for (auto c : r.object_class) out.emplace_back("object_class", std::string(to_string(c)));
    out.emplace_back("lane_type", std::string(to_string(r.lane_type)));
    return out;
}

const EnvelopeEntry* GoldenEnvelope::entry(std::string_view channel, int tick) const {
    const auto it = numeric_.find(std::string(channel));
    if (it == numeric_.end() || tick < 0 || static_cast<std::size_t>(tick) >= it->second.size()) return nullptr;
    const auto& e = it->second[tick];
    return e ? &*e : nullptr;
}

bool GoldenEnvelope::seen(std::string_view variable, std::string_view variant) const {
    const auto it = categorical_.find(variable);
    return it != categorical_.end() && it->second.count(std::string(variant)) > 0;
}

GoldenEnvelope build_envelope(std::span<const RunTrace> golden) {
    if (golden.size() < 2) throw EnvelopeError("envelope needs at least two golden traces");
    const std::size_t ticks = golden.front().records.size();
    for (const auto& g : golden) {
        if (g.termination.status != TerminationStatus::completed)
            throw EnvelopeError("golden trace " + g.run_id + " did not complete");
        if (g.records.size() != ticks) throw EnvelopeError("golden trace " + g.run_id + " is misaligned");
    }

    std::unordered_map<std::string, std::vector<std::vector<double>>> samples;
    GoldenEnvelope env;
    env.tick_count_ = static_cast<int>(ticks);
    for (const auto& g : golden) {
        for (std::size_t t = 0; t < ticks; ++t) {
            for (auto& [name, value] : numeric_channels(g.records[t])) {
                auto& per_tick = samples[name];
                if (per_tick.empty()) per_tick.resize(ticks);
                per_tick[t].push_back(value);
            }
            for (auto& [name, variant] : categorical_channels(g.records[t])) env.categorical_[name].insert(variant);
        }
    }
    for (auto& [name, per_tick] : samples) {
        auto& entries = env.numeric_[name];
        entries.resize(ticks);
        for (std::size_t t = 0; t < ticks; ++t) {
            if (!per_tick[t].empty()) entries[t] = summarize_sample(std::move(per_tick[t]));
        }
    }
    return env;
}

bool is_outlier(double value, const EnvelopeEntry& e, double k) {
    if (!std::isfinite(value)) return true;
    const double iqr = e.q3 - e.q1;
    const double lower = std::min(e.q1 - k * iqr, e.min);
    const double upper = std::max(e.q3 + k * iqr, e.max);
    return value < lower || value > upper;
}

void SafetyParams::validate() const {
    if (!(perception_time > 0.0) || !(reaction_time > 0.0) || !(brake_decel > 0.0) ||
        !(lane_center_threshold > 0.0) || !(horizon_s > 0.0))
        throw std::invalid_argument("safety parameters must all be positive");
}

StoppingDistance stopping_distance(double v, const SafetyParams& params) {
    StoppingDistance d;
    d.d_p = v * params.perception_time;
    d.d_r = v * params.reaction_time;
    d.d_b = v * v / (2.0 * params.brake_decel);
    d.d_s = d.d_p + d.d_r + d.d_b;
    return d;
}

Body body_of(const ActorState& a, const LaneGeometry& lanes) {
    return {a.state.s, a.road_lateral(lanes), a.length, a.width, a.state.speed, a.state.heading};
}

double collision_distance(const Body& ego, const Body& obj, double horizon) {
    // Longitudinal rate matches the simulator's s' = s + speed*dt.
    const auto [s_lo, s_hi] =
        overlap_window(obj.s - ego.s, obj.speed - ego.speed, 0.5 * (ego.length + obj.length));
    const auto [l_lo, l_hi] = overlap_window(obj.lateral - ego.lateral,
                                             obj.speed * std::sin(obj.heading) - ego.speed * std::sin(ego.heading),
                                             0.5 * (ego.width + obj.width));
    const double lo = std::max({s_lo, l_lo, 0.0});
    const double hi = std::min(s_hi, l_hi);
    if (!(lo < hi) || lo > horizon) return kNoCollision;
    return ego.speed * lo;
}

bool check_safety_envelope(const WorldSample& sample, const SafetyParams& params) {
    return sample.collision_distance < stopping_distance(sample.ego_speed, params).d_s;
}

bool check_lane_centering(const RunTrace& trace, double threshold) {
    return std::any_of(trace.world_summary.begin(), trace.world_summary.end(),
                       [&](const WorldSample& w) { return std::abs(w.ego_lateral) > threshold; });
}

bool check_traffic_violation(const RunTrace& trace, const LaneGeometry& lanes) {
    return std::any_of(trace.world_summary.begin(), trace.world_summary.end(), [&](const WorldSample& w) {
        return w.ego_speed > lanes.speed_limit + 0.5 || std::abs(w.ego_lateral) > 0.5 * lanes.lane_width;
    });
}

std::string_view to_string(OutcomeLabel l) {
    switch (l) {
    case OutcomeLabel::masked: return "masked";
    case OutcomeLabel::due_hang: return "due_hang";
    case OutcomeLabel::due_crash: return "due_crash";
    case OutcomeLabel::sdc: return "sdc";
    }
    return "invalid";
}

std::optional<OutcomeLabel> outcome_label_from_string(std::string_view s) {
    for (auto l : {OutcomeLabel::masked, OutcomeLabel::due_hang, OutcomeLabel::due_crash, OutcomeLabel::sdc}) {
        if (to_string(l) == s) return l;
    }
    return std::nullopt;
}

bool ontology_consistent(const RunOutcome& o) {
    const bool due = o.label == OutcomeLabel::due_hang || o.label == OutcomeLabel::due_crash;
    const bool any_flag = o.actuation_error || o.safety_envelope_breach || o.lane_centering_breach ||
                          o.traffic_violation || o.accident;
    if (o.label == OutcomeLabel::masked && (o.activated || any_flag)) return false;
    if (o.label != OutcomeLabel::masked && !o.activated) return false;
    if (o.accident && !o.safety_envelope_breach) return false;
    if (o.actuation_error && o.label != OutcomeLabel::sdc) return false;
    const bool breach = o.safety_envelope_breach || o.lane_centering_breach || o.traffic_violation || o.accident;
    if (breach && !(o.actuation_error || due)) return false;
    return true;
}

RunOutcome classify_run(const RunTrace& trace, const GoldenEnvelope& env, const ClassifyOptions& opts,
                        const LaneGeometry& lanes) {
    RunOutcome o;
    o.run_id = trace.run_id;

    bool deviated = false;
    bool actuation_deviated = false;
    for (std::size_t t = 0; t < trace.records.size(); ++t) {
        const int tick = static_cast<int>(t);
        const auto& rec = trace.records[t];
        auto note = [&](const std::string& name) {
            deviated = true;
            if (!o.first_deviation) o.first_deviation = Deviation{name, tick};
            if (is_actuation_channel(name)) actuation_deviated = true;
        };
        for (const auto& [name, value] : numeric_channels(rec)) {
            const EnvelopeEntry* e = env.entry(name, tick);
            if (!e || is_outlier(value, *e, opts.iqr_k)) note(name);
        }
        for (const auto& [name, variant] : categorical_channels(rec)) {
            if (!env.seen(name, variant)) note(name);
        }
    }

    switch (trace.termination.status) {
    case TerminationStatus::hang: o.label = OutcomeLabel::due_hang; break;
    case TerminationStatus::crash: o.label = OutcomeLabel::due_crash; break;
    case TerminationStatus::completed: o.label = deviated ? OutcomeLabel::sdc : OutcomeLabel::masked; break;
    }
    o.activated = o.label != OutcomeLabel::masked;
    o.actuation_error = o.label == OutcomeLabel::sdc && actuation_deviated;

    bool envelope_breach = false;
    for (const auto& w : trace.world_summary) {
        if (check_safety_envelope(w, opts.safety)) envelope_breach = true;
        if (std::isfinite(w.collision_distance)) {
            const double margin = w.collision_distance - stopping_distance(w.ego_speed, opts.safety).d_s;
            o.min_safety_margin = std::min(o.min_safety_margin, margin);
        }
    }
    const bool lane_breach = check_lane_centering(trace, opts.safety.lane_center_threshold);
    const bool traffic = check_traffic_violation(trace, lanes);
    const bool accident = trace.collided();

    const bool attributable = o.actuation_error || o.label == OutcomeLabel::due_hang ||
                              o.label == OutcomeLabel::due_crash;
    if (attributable) {
        o.accident = accident;
        o.safety_envelope_breach = envelope_breach || accident;
        o.lane_centering_breach = lane_breach;
        o.traffic_violation = traffic;
    } else {
        o.unattributed_hazard = envelope_breach || lane_breach || traffic || accident;
    }
    return o;
}

}  // namespace adsfi
