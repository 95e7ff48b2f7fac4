#include "adsfi/fault.hpp"
#include "adsfi/overloaded.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

namespace adsfi {

namespace {

constexpr double kInt64Limit = 9.2e18;

std::int64_t saturating_round(double x) {
    if (std::isnan(x)) return 0;
    if (x >= kInt64Limit) return std::numeric_limits<std::int64_t>::max();
    if (x <= -kInt64Limit) return std::numeric_limits<std::int64_t>::min();
    return std::llround(x);
}

bool is_frame_model(const FaultModel& m) {
    return std::holds_alternative<fault::GaussianNoise>(m) || std::holds_alternative<fault::Occlusion>(m);
}

std::string site_key(ModuleId module, std::string_view variable, std::optional<std::size_t> element) {
    std::string key(to_string(module));
    key += '/';
    key += variable;
    if (element) key += '[' + std::to_string(*element) + ']';
    return key;
}

}  // namespace

std::string_view model_tag(const FaultModel& m) {
    return std::visit(overloaded{
                          [](const fault::Random&) { return std::string_view("random"); },
                          [](const fault::Fixed&) { return std::string_view("fixed"); },
                          [](const fault::Scale&) { return std::string_view("scale"); },
                          [](const fault::Disappear&) { return std::string_view("disappear"); },
                          [](const fault::BitFlip&) { return std::string_view("bitflip"); },
                          [](const fault::GaussianNoise&) { return std::string_view("gaussian_noise"); },
                          [](const fault::Occlusion&) { return std::string_view("occlusion"); },
                      },
                      m);
}

void validate_model(const FaultModel& m) {
    std::visit(overloaded{
                   [](const fault::Random& r) {
                       if (!std::isfinite(r.lower) || !std::isfinite(r.upper) || r.lower > r.upper)
                           throw PlanInvalid("random: need finite lower <= upper");
                   },
                   [](const fault::Fixed& f) {
                       if (!std::isfinite(f.value)) throw PlanInvalid("fixed: value must be finite");
                   },
                   [](const fault::Scale& s) {
                       if (!std::isfinite(s.ratio)) throw PlanInvalid("scale: ratio must be finite");
                   },
                   [](const fault::Disappear&) {},
                   [](const fault::BitFlip& b) {
                       if (b.n_bits != 1 && b.n_bits != 2) throw PlanInvalid("bitflip: n_bits must be 1 or 2");
                   },
                   [](const fault::GaussianNoise& g) {
                       if (!std::isfinite(g.sigma) || g.sigma < 0.0)
                           throw PlanInvalid("gaussian_noise: sigma must be finite and >= 0");
                   },
                   [](const fault::Occlusion& o) {
                       if (!std::isfinite(o.lower) || !std::isfinite(o.upper) || o.lower > o.upper)
                           throw PlanInvalid("occlusion: need finite lower <= upper");
                   },
               },
               m);
}

bool applicable(const FaultModel& m, ValueKind k) {
    k = element_kind(k);
    const bool numeric = k == ValueKind::real || k == ValueKind::integer;
    return std::visit(overloaded{
                          [&](const fault::Random&) { return numeric || k == ValueKind::categorical; },
                          [&](const fault::Fixed&) { return numeric || k == ValueKind::categorical; },
                          [&](const fault::Scale&) { return numeric; },
                          [&](const fault::Disappear&) { return k == ValueKind::module_output; },
                          [&](const fault::BitFlip&) { return numeric || k == ValueKind::categorical; },
                          [&](const fault::GaussianNoise&) { return k == ValueKind::frame; },
                          [&](const fault::Occlusion&) { return k == ValueKind::frame; },
                      },
                      m);
}

bool fires(const Trigger& t, int tick) {
    return std::visit(overloaded{
                          [&](const trigger::Transient& x) { return x.tick == tick; },
                          [&](const trigger::Intermittent& x) {
                              return std::binary_search(x.ticks.begin(), x.ticks.end(), tick);
                          },
                          [&](const trigger::Permanent& x) { return tick >= x.from_tick; },
                      },
                      t);
}

int first_tick(const Trigger& t) {
    return std::visit(overloaded{
                          [](const trigger::Transient& x) { return x.tick; },
                          [](const trigger::Intermittent& x) { return x.ticks.empty() ? 0 : x.ticks.front(); },
                          [](const trigger::Permanent& x) { return x.from_tick; },
                      },
                      t);
}

void validate_spec(const FaultSpec& spec, int tick_count) {
    validate_model(spec.model);
    const auto kind = catalog_kind(spec.site.module, spec.site.variable);
    const std::string where = site_key(spec.site.module, spec.site.variable, spec.site.element);
    if (!kind) throw PlanInvalid("unknown fault site " + where);
    const bool list = *kind == ValueKind::real_list || *kind == ValueKind::categorical_list;
    if (list != spec.site.element.has_value())
        throw PlanInvalid("site " + where + (list ? " needs an element index" : " takes no element index"));
    if (!applicable(spec.model, *kind))
        throw PlanInvalid(std::string(model_tag(spec.model)) + " cannot target " + where + " (" +
                          std::string(to_string(*kind)) + ")");
    if (const auto* f = std::get_if<fault::Fixed>(&spec.model);
        f && element_kind(*kind) != ValueKind::real && std::abs(f->value) >= kInt64Limit)
        throw PlanInvalid("fixed value does not fit the integer site " + where);

    auto in_range = [&](int t) { return t >= 0 && t < tick_count; };
    const bool ok = std::visit(overloaded{
                                   [&](const trigger::Transient& x) { return in_range(x.tick); },
                                   [&](const trigger::Intermittent& x) {
                                       return !x.ticks.empty() && std::all_of(x.ticks.begin(), x.ticks.end(), in_range) &&
                                              std::is_sorted(x.ticks.begin(), x.ticks.end());
                                   },
                                   [&](const trigger::Permanent& x) { return in_range(x.from_tick); },
                               },
                               spec.trigger);
    if (!ok) throw PlanInvalid("trigger ticks outside [0, " + std::to_string(tick_count) + ") for " + where);
}

std::size_t WorkloadProfile::live_elements(ModuleId module, std::string_view variable, int tick) const {
    for (const auto& l : lists) {
        if (l.module == module && l.variable == variable) {
            if (tick < 0 || static_cast<std::size_t>(tick) >= l.elements_per_tick.size()) return 0;
            return l.elements_per_tick[tick];
        }
    }
    return 0;
}

const ProfiledSite* WorkloadProfile::find(const FaultSite& site) const {
    for (const auto& s : sites) {
        if (s.site == site) return &s;
    }
    return nullptr;
}

ProfilingHooks::ProfilingHooks(int tick_count) { profile_.tick_count = tick_count; }

ProfiledSite& ProfilingHooks::site_for(ModuleId module, std::string_view variable,
                                       std::optional<std::size_t> element, ValueKind kind) {
    for (auto& s : profile_.sites) {
        if (s.site.module == module && s.site.element == element && s.site.variable == variable) return s;
    }
    profile_.sites.push_back({FaultSite{module, std::string(variable), element}, kind, {}});
    return profile_.sites.back();
}

Delivery ProfilingHooks::intercept(ModuleId module, FragmentRef fragment, int tick) {
    for (const auto& v : variables_of(fragment)) {
        if (v.kind == ValueKind::real_list || v.kind == ValueKind::categorical_list) {
            auto it = std::find_if(profile_.lists.begin(), profile_.lists.end(), [&](const auto& l) {
                return l.module == module && l.variable == v.name;
            });
            if (it == profile_.lists.end()) {
                profile_.lists.push_back(
                    {module, std::string(v.name), std::vector<std::size_t>(profile_.tick_count, 0)});
                it = std::prev(profile_.lists.end());
            }
            if (tick >= 0 && tick < profile_.tick_count) it->elements_per_tick[tick] = v.elements;
            for (std::size_t e = 0; e < v.elements; ++e)
                site_for(module, v.name, e, element_kind(v.kind)).live_ticks.push_back(tick);
        } else {
            site_for(module, v.name, std::nullopt, v.kind).live_ticks.push_back(tick);
        }
    }
    return Delivery::delivered;
}

WorkloadProfile ProfilingHooks::take() { return std::move(profile_); }

bool SiteFilter::admits(const FaultSite& s) const {
    if (!modules.empty() && std::find(modules.begin(), modules.end(), s.module) == modules.end()) return false;
    if (!variables.empty() && std::find(variables.begin(), variables.end(), s.variable) == variables.end())
        return false;
    return true;
}

std::vector<FaultPlan> generate_fault_plan(const WorkloadProfile& profile, const PlanRequest& request) {
    return generate_fault_plan(std::span<const WorkloadProfile>(&profile, 1), request);
}

std::vector<FaultPlan> generate_fault_plan(std::span<const WorkloadProfile> profiles, const PlanRequest& request) {
    if (profiles.empty()) throw PlanInvalid("no workload profile");
    if (request.num_runs < 1) throw PlanInvalid("num_injected_runs must be >= 1");
    if (request.faults_per_run < 1) throw PlanInvalid("faults_per_run must be >= 1");
    if (request.models.empty()) throw PlanInvalid("no fault model given");
    if (!request.run_seeds.empty() && request.run_seeds.size() != static_cast<std::size_t>(request.num_runs))
        throw PlanInvalid("run_seeds must have one entry per run");
    if (request.trigger == TriggerMode::intermittent && request.intermittent_count < 1)
        throw PlanInvalid("intermittent trigger needs count >= 1");

    // eligible[p][m]: sites of profile p that model m can corrupt.
    std::vector<std::vector<std::vector<const ProfiledSite*>>> eligible(profiles.size());
    for (std::size_t p = 0; p < profiles.size(); ++p) {
        eligible[p].resize(request.models.size());
        for (std::size_t m = 0; m < request.models.size(); ++m) {
            validate_model(request.models[m]);
            for (const auto& s : profiles[p].sites) {
                if (!s.live_ticks.empty() && request.filter.admits(s.site) && applicable(request.models[m], s.kind))
                    eligible[p][m].push_back(&s);
            }
            if (eligible[p][m].empty())
                throw PlanInvalid("no eligible fault site for model '" + std::string(model_tag(request.models[m])) +
                                  "' after filtering");
        }
    }

    const std::uint64_t plan_root = stream_seed(request.master_seed, Stream::plan);
    std::vector<FaultPlan> plans;
    plans.reserve(request.num_runs);
    for (int i = 0; i < request.num_runs; ++i) {
        Rng rng(mix_seed(plan_root, static_cast<std::uint64_t>(i)));
        FaultPlan plan;
        char id[32];
        std::snprintf(id, sizeof id, "injected-%05d", i);
        plan.run_id = id;
        plan.seed = request.run_seeds.empty() ? mix_seed(request.master_seed, i) : request.run_seeds[i];
        for (int f = 0; f < request.faults_per_run; ++f) {
            const std::size_t m = rng.below(request.models.size());
            const auto& candidates = eligible[static_cast<std::size_t>(i) % profiles.size()][m];
            const ProfiledSite& site = *candidates[rng.below(candidates.size())];
            const auto& ticks = site.live_ticks;
            Trigger trig;
            switch (request.trigger) {
            case TriggerMode::transient:
                trig = trigger::Transient{ticks[rng.below(ticks.size())]};
                break;
            case TriggerMode::permanent:
                trig = trigger::Permanent{ticks[rng.below(ticks.size())]};
                break;
            case TriggerMode::intermittent: {
                std::vector<std::size_t> idx(ticks.size());
                std::iota(idx.begin(), idx.end(), std::size_t{0});
                const std::size_t k = std::min<std::size_t>(request.intermittent_count, idx.size());
                for (std::size_t j = 0; j < k; ++j) std::swap(idx[j], idx[j + rng.below(idx.size() - j)]);
                trigger::Intermittent x;
                for (std::size_t j = 0; j < k; ++j) x.ticks.push_back(ticks[idx[j]]);
                std::sort(x.ticks.begin(), x.ticks.end());
                trig = std::move(x);
                break;
            }
            }
            plan.faults.push_back({site.site, request.models[m], std::move(trig)});
        }
        plans.push_back(std::move(plan));
    }
    return plans;
}

std::vector<int> bit_positions(const SiteValue&) {
    std::vector<int> p(64);
    std::iota(p.begin(), p.end(), 0);
    return p;
}

SiteValue flip_bits(const SiteValue& value, std::span<const int> positions) {
    std::uint64_t mask = 0;
    for (int p : positions) mask ^= std::uint64_t{1} << (p & 63);
    return std::visit(overloaded{
                          [&](double d) {
                              return SiteValue{std::bit_cast<double>(std::bit_cast<std::uint64_t>(d) ^ mask)};
                          },
                          [&](std::int64_t i) {
                              return SiteValue{static_cast<std::int64_t>(static_cast<std::uint64_t>(i) ^ mask)};
                          },
                          [&](Categorical c) {
                              c.code = static_cast<std::int64_t>(static_cast<std::uint64_t>(c.code) ^ mask);
                              return SiteValue{c};
                          },
                      },
                      value);
}

SiteValue apply_bitflip(const SiteValue& value, int n_bits, Rng& rng, std::vector<int>* chosen) {
    if (n_bits != 1 && n_bits != 2) throw PlanInvalid("bitflip: n_bits must be 1 or 2");
    int bits[2] = {static_cast<int>(rng.below(64)), 0};
    if (n_bits == 2) {
        int second = static_cast<int>(rng.below(63));
        if (second >= bits[0]) ++second;
        bits[1] = second;
    }
    const std::span<const int> used(bits, static_cast<std::size_t>(n_bits));
    if (chosen) chosen->assign(used.begin(), used.end());
    return flip_bits(value, used);
}

std::optional<SiteValue> apply_sli(const SiteValue& value, const FaultModel& model, Rng& rng) {
    auto mismatch = [&]() -> PlanInvalid {
        return PlanInvalid(std::string(model_tag(model)) + " is not applicable to this value kind");
    };
    return std::visit(
        overloaded{
            [&](const fault::Random& r) -> std::optional<SiteValue> {
                return std::visit(overloaded{
                                      [&](double) { return SiteValue{rng.uniform(r.lower, r.upper)}; },
                                      [&](std::int64_t) {
                                          const auto lo = saturating_round(std::ceil(r.lower));
                                          const auto hi = std::max(lo, saturating_round(std::floor(r.upper)));
                                          const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
                                          return SiteValue{lo + static_cast<std::int64_t>(rng.below(span))};
                                      },
                                      [&](Categorical c) {
                                          c.code = static_cast<std::int64_t>(rng.below(c.variant_count));
                                          return SiteValue{c};
                                      },
                                  },
                                  value);
            },
            [&](const fault::Fixed& f) -> std::optional<SiteValue> {
                return std::visit(overloaded{
                                      [&](double) { return SiteValue{f.value}; },
                                      [&](std::int64_t) { return SiteValue{saturating_round(f.value)}; },
                                      [&](Categorical c) {
                                          c.code = saturating_round(f.value);
                                          return SiteValue{c};
                                      },
                                  },
                                  value);
            },
            [&](const fault::Scale& s) -> std::optional<SiteValue> {
                if (const auto* d = std::get_if<double>(&value)) return SiteValue{*d * s.ratio};
                if (const auto* i = std::get_if<std::int64_t>(&value))
                    return SiteValue{saturating_round(static_cast<double>(*i) * s.ratio)};
                throw mismatch();
            },
            [&](const fault::Disappear&) -> std::optional<SiteValue> { return std::nullopt; },
            [&](const fault::BitFlip& b) -> std::optional<SiteValue> { return apply_bitflip(value, b.n_bits, rng); },
            [&](const fault::GaussianNoise&) -> std::optional<SiteValue> { throw mismatch(); },
            [&](const fault::Occlusion&) -> std::optional<SiteValue> { throw mismatch(); },
        },
        model);
}

void apply_frame_fault(SensorFrame& frame, const FaultModel& model, Rng& rng) {
    if (const auto* g = std::get_if<fault::GaussianNoise>(&model)) {
        for (auto& d : frame.objects) {
            d.ds += g->sigma * rng.normal();
            d.dlat += g->sigma * rng.normal();
        }
        for (auto& s : frame.lane_samples) s.y += g->sigma * rng.normal();
    } else if (const auto* o = std::get_if<fault::Occlusion>(&model)) {
        auto inside = [&](double x) { return x >= o->lower && x <= o->upper; };
        for (auto& d : frame.objects) {
            if (inside(d.ds)) d.occluded = true;
        }
        std::erase_if(frame.lane_samples, [&](const LaneSample& s) { return inside(s.x); });
    } else {
        throw PlanInvalid(std::string(model_tag(model)) + " is not a sensor-frame fault");
    }
}

Injector::Injector(const FaultPlan& plan, std::uint64_t stream) : plan_(plan), rng_(stream) {}

Delivery Injector::intercept(ModuleId module, FragmentRef fragment, int tick) {
    Delivery result = Delivery::delivered;
    const bool output_phase = !std::holds_alternative<PidInputs>(fragment);
    for (const auto& f : plan_.faults) {
        if (f.site.module != module || !fires(f.trigger, tick)) continue;
        InjectionEvent ev{tick, f.site, std::string(model_tag(f.model)), std::nullopt, std::nullopt, {}};

        if (std::holds_alternative<fault::Disappear>(f.model)) {
            if (!output_phase || f.site.variable != kOutputVariable) continue;
            result = Delivery::dropped;
            events_.push_back(std::move(ev));
            continue;
        }
        if (is_frame_model(f.model)) {
            auto* const* frame = std::get_if<SensorFrame*>(&fragment);
            if (!frame || f.site.variable != kFrameVariable) continue;
            apply_frame_fault(**frame, f.model, rng_);
            events_.push_back(std::move(ev));
            continue;
        }

        const auto before = read_variable(fragment, f.site.variable, f.site.element);
        if (!before) continue;  // variable belongs to another phase, or element not live this tick
        std::optional<SiteValue> after;
        if (const auto* b = std::get_if<fault::BitFlip>(&f.model)) after = apply_bitflip(*before, b->n_bits, rng_, &ev.bits);
        else after = apply_sli(*before, f.model, rng_);
        write_variable(fragment, f.site.variable, f.site.element, *after);
        ev.before = before;
        ev.after = after;
        events_.push_back(std::move(ev));
    }
    return result;
}

}  // namespace adsfi
