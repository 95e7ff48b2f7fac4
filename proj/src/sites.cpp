#include "adsfi/sites.hpp"

#include <algorithm>
#include <utility>

namespace adsfi {

namespace {

template <typename T>
struct RealField {
    std::string_view name;
    double T::*member;
};

constexpr RealField<SensorFrame> kFrameReals[] = {{"ego_speed_reading", &SensorFrame::ego_speed_reading}};
constexpr RealField<PathPerceptionOut> kPathReals[] = {
    {"lane_c0", &PathPerceptionOut::c0},
    {"lane_c1", &PathPerceptionOut::c1},
    {"lane_c2", &PathPerceptionOut::c2},
};
constexpr RealField<LocalizationOut> kLocReals[] = {
    {"est_s", &LocalizationOut::est_s},
    {"est_lateral", &LocalizationOut::est_lateral},
    {"est_heading", &LocalizationOut::est_heading},
    {"est_speed", &LocalizationOut::est_speed},
};
constexpr RealField<PlanOut> kPlanReals[] = {
    {"target_speed", &PlanOut::target_speed},
    {"lead_gap", &PlanOut::lead_gap},
};
constexpr RealField<PidState> kPidInputReals[] = {
    {"pid_measured_value", &PidState::pid_measured_value},
    {"pid_target_value", &PidState::pid_target_value},
};
constexpr RealField<PidState> kPidOutputReals[] = {{"pid_output", &PidState::pid_output}};
constexpr RealField<ActuationCommand> kCommandReals[] = {
    {"throttle", &ActuationCommand::throttle},
    {"brake", &ActuationCommand::brake},
    {"steering", &ActuationCommand::steering},
};

template <typename T, std::size_t N>
double* find_real(T& obj, const RealField<T> (&fields)[N], std::string_view name) {
    for (const auto& f : fields) {
        if (f.name == name) return &(obj.*(f.member));
    }
    return nullptr;
}

template <typename T, std::size_t N>
void append_reals(std::vector<VariableInfo>& out, const RealField<T> (&fields)[N]) {
    for (const auto& f : fields) out.push_back({f.name, ValueKind::real, 1});
}

/// Uniform pointer to an addressable slot inside a fragment.
struct Slot {
    double* real = nullptr;
    std::int64_t* integer = nullptr;
    ObjectClass* object_class = nullptr;
    LaneType* lane_type = nullptr;
};

double* pair_element(std::vector<Pair>& list, std::size_t element) {
    const std::size_t i = element / 2;
    if (i >= list.size()) return nullptr;
    return &list[i][element % 2];
}

Slot locate(FragmentRef fragment, std::string_view name, std::optional<std::size_t> element) {
    Slot slot;
    auto scalar_only = [&](double* p) {
        if (!element) slot.real = p;
    };
    std::visit(
        [&](auto frag) {
            using F = decltype(frag);
            if constexpr (std::is_same_v<F, SensorFrame*>) {
                scalar_only(find_real(*frag, kFrameReals, name));
            } else if constexpr (std::is_same_v<F, ObjectPerceptionOut*>) {
                if (name == "num_detected_objects" && !element) {
                    slot.integer = &frag->num_detected_objects;
                } else if (name == "object_class" && element) {
                    if (*element < frag->object_class.size()) {
                        slot.object_class = &frag->object_class[*element];
                    }
                } else if (name == "object_coordinates" && element) {
                    slot.real = pair_element(frag->object_coordinates, *element);
                } else if (name == "bounding_box" && element) {
                    slot.real = pair_element(frag->bounding_box, *element);
                }
            } else if constexpr (std::is_same_v<F, PathPerceptionOut*>) {
                if (name == "lane_type" && !element) {
                    slot.lane_type = &frag->lane_type;
                } else {
                    scalar_only(find_real(*frag, kPathReals, name));
                }
            } else if constexpr (std::is_same_v<F, LocalizationOut*>) {
                scalar_only(find_real(*frag, kLocReals, name));
            } else if constexpr (std::is_same_v<F, PlanOut*>) {
                scalar_only(find_real(*frag, kPlanReals, name));
            } else if constexpr (std::is_same_v<F, PidInputs>) {
                scalar_only(find_real(*frag.pid, kPidInputReals, name));
            } else if constexpr (std::is_same_v<F, PidState*>) {
                scalar_only(find_real(*frag, kPidOutputReals, name));
            } else if constexpr (std::is_same_v<F, ActuationCommand*>) {
                scalar_only(find_real(*frag, kCommandReals, name));
            }
        },
        fragment);
    return slot;
}

constexpr std::pair<ValueKind, std::string_view> kKinds[] = {
    {ValueKind::real, "real"},
    {ValueKind::integer, "integer"},
    {ValueKind::categorical, "categorical"},
    {ValueKind::real_list, "real_list"},
    {ValueKind::categorical_list, "categorical_list"},
    {ValueKind::frame, "frame"},
    {ValueKind::module_output, "module_output"},
};

}  // namespace

std::string_view to_string(ValueKind k) {
    for (const auto& [kind, name] : kKinds) {
        if (kind == k) return name;
    }
    return "invalid";
}

std::optional<ValueKind> value_kind_from_string(std::string_view s) {
    for (const auto& [kind, name] : kKinds) {
        if (name == s) return kind;
    }
    return std::nullopt;
}

ValueKind element_kind(ValueKind k) {
    switch (k) {
    case ValueKind::real_list: return ValueKind::real;
    case ValueKind::categorical_list: return ValueKind::categorical;
    default: return k;
    }
}

std::vector<VariableInfo> variables_of(FragmentRef fragment) {
    std::vector<VariableInfo> out;
    std::visit(
        [&](auto frag) {
            using F = decltype(frag);
            if constexpr (std::is_same_v<F, SensorFrame*>) {
                out.push_back({kFrameVariable, ValueKind::frame, 1});
                append_reals(out, kFrameReals);
            } else if constexpr (std::is_same_v<F, ObjectPerceptionOut*>) {
                out.push_back({"num_detected_objects", ValueKind::integer, 1});
                out.push_back({"object_class", ValueKind::categorical_list, frag->object_class.size()});
                out.push_back({"object_coordinates", ValueKind::real_list, 2 * frag->object_coordinates.size()});
                out.push_back({"bounding_box", ValueKind::real_list, 2 * frag->bounding_box.size()});
            } else if constexpr (std::is_same_v<F, PathPerceptionOut*>) {
                out.push_back({"lane_type", ValueKind::categorical, 1});
                append_reals(out, kPathReals);
            } else if constexpr (std::is_same_v<F, LocalizationOut*>) {
                append_reals(out, kLocReals);
            } else if constexpr (std::is_same_v<F, PlanOut*>) {
                append_reals(out, kPlanReals);
            } else if constexpr (std::is_same_v<F, PidInputs>) {
                append_reals(out, kPidInputReals);
            } else if constexpr (std::is_same_v<F, PidState*>) {
                append_reals(out, kPidOutputReals);
            } else if constexpr (std::is_same_v<F, ActuationCommand*>) {
                append_reals(out, kCommandReals);
            }
            if constexpr (!std::is_same_v<F, PidInputs>) {
                out.push_back({kOutputVariable, ValueKind::module_output, 1});
            }
        },
        fragment);
    return out;
}

std::optional<SiteValue> read_variable(FragmentRef fragment, std::string_view name,
                                       std::optional<std::size_t> element) {
    const Slot slot = locate(fragment, name, element);
    if (slot.real) return SiteValue{*slot.real};
    if (slot.integer) return SiteValue{*slot.integer};
    if (slot.object_class)
        return SiteValue{Categorical{static_cast<std::int64_t>(*slot.object_class), kObjectClassCount}};
    if (slot.lane_type) return SiteValue{Categorical{static_cast<std::int64_t>(*slot.lane_type), kLaneTypeCount}};
    return std::nullopt;
}

bool write_variable(FragmentRef fragment, std::string_view name, std::optional<std::size_t> element,
                    const SiteValue& value) {
    const Slot slot = locate(fragment, name, element);
    if (slot.real) {
        if (const auto* d = std::get_if<double>(&value)) {
            *slot.real = *d;
            return true;
        }
    } else if (slot.integer) {
        if (const auto* i = std::get_if<std::int64_t>(&value)) {
            *slot.integer = *i;
            return true;
        }
    } else if (slot.object_class || slot.lane_type) {
        if (const auto* c = std::get_if<Categorical>(&value)) {
            if (slot.object_class) *slot.object_class = static_cast<ObjectClass>(c->code);
            if (slot.lane_type) *slot.lane_type = static_cast<LaneType>(c->code);
            return true;
        }
    }
    return false;
}

const std::vector<SiteDescriptor>& site_catalog() {
    static const std::vector<SiteDescriptor> catalog = [] {
        std::vector<SiteDescriptor> c;
        SensorFrame frame;
        ObjectPerceptionOut objects;
        PathPerceptionOut path;
        LocalizationOut loc;
        PlanOut plan;
        PidState pid;
        ActuationCommand cmd;
        const std::pair<ModuleId, FragmentRef> fragments[] = {
            {ModuleId::sense, &frame},           {ModuleId::object_perception, &objects},
            {ModuleId::path_perception, &path},  {ModuleId::localization, &loc},
            {ModuleId::planning, &plan},         {ModuleId::control, PidInputs{&pid}},
            {ModuleId::control, &pid},           {ModuleId::actuation, &cmd},
        };
        for (const auto& [module, frag] : fragments) {
            for (const auto& v : variables_of(frag)) c.push_back({module, v.name, v.kind});
        }
        return c;
    }();
    return catalog;
}

std::optional<ValueKind> catalog_kind(ModuleId module, std::string_view variable) {
    for (const auto& d : site_catalog()) {
        if (d.module == module && d.variable == variable) return d.kind;
    }
    return std::nullopt;
}

}  // namespace adsfi
