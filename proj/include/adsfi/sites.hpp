#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "adsfi/pipeline_types.hpp"

namespace adsfi {

/// Value kinds of injectable variables. List kinds are addressed per element;
/// pair lists are flattened, so element 2*i+1 is the second component of entry i.
enum class ValueKind { real, integer, categorical, real_list, categorical_list, frame, module_output };

std::string_view to_string(ValueKind k);
std::optional<ValueKind> value_kind_from_string(std::string_view s);

/// Kind of a single addressed value (list element kinds collapse to scalars).
ValueKind element_kind(ValueKind k);

struct Categorical {
    std::int64_t code = 0;
    int variant_count = 1;

    bool valid() const { return code >= 0 && code < variant_count; }
    bool operator==(const Categorical&) const = default;
};

using SiteValue = std::variant<double, std::int64_t, Categorical>;

/// Speed-controller inputs, intercepted before the control law runs.
struct PidInputs {
    PidState* pid = nullptr;
};

/// A module's output at its intercept boundary.
using FragmentRef = std::variant<SensorFrame*, ObjectPerceptionOut*, PathPerceptionOut*, LocalizationOut*,
                                 PlanOut*, PidInputs, PidState*, ActuationCommand*>;

/// Whole-output site of every module; the target of Disappear.
inline constexpr std::string_view kOutputVariable = "output";
/// Whole camera frame; the target of sensor-level perturbations.
inline constexpr std::string_view kFrameVariable = "camera_frame";

struct VariableInfo {
    std::string_view name;
    ValueKind kind = ValueKind::real;
    std::size_t elements = 1;  // live element count for list kinds
};

std::vector<VariableInfo> variables_of(FragmentRef fragment);

std::optional<SiteValue> read_variable(FragmentRef fragment, std::string_view name,
                                       std::optional<std::size_t> element);

/// Returns false when the variable or element does not exist in `fragment`.
bool write_variable(FragmentRef fragment, std::string_view name, std::optional<std::size_t> element,
                    const SiteValue& value);

struct SiteDescriptor {
    ModuleId module;
    std::string_view variable;
    ValueKind kind;
};

/// Every injectable site the pipeline exposes, independent of any run.
const std::vector<SiteDescriptor>& site_catalog();
std::optional<ValueKind> catalog_kind(ModuleId module, std::string_view variable);

}  // namespace adsfi
