#include "adsfi/trace.hpp"

namespace adsfi {

std::string_view to_string(RunKind k) {
    return k == RunKind::golden ? "golden" : "injected";
}

std::string_view to_string(TerminationStatus s) {
    switch (s) {
    case TerminationStatus::completed: return "completed";
    case TerminationStatus::crash: return "crash";
    case TerminationStatus::hang: return "hang";
    }
    return "invalid";
}

}  // namespace adsfi
