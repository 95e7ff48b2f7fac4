#pragma once

#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adsfi/fault.hpp"
#include "adsfi/oracle.hpp"
#include "adsfi/trace.hpp"

namespace adsfi {

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

/// Wilson score interval for `successes` out of `n`. n must be > 0.
Interval wilson_interval(long successes, long n, double z = kZ95);

struct ZTest {
    double z = 0.0;
    double p = 1.0;
};

/// Pooled two-proportion z-test, two-sided. Throws std::invalid_argument if
/// either sample is empty.
ZTest two_proportion_z(long xa, long na, long xb, long nb);

enum class GroupBy { module, variable, fault_model, scenario };
std::optional<GroupBy> group_by_from_string(std::string_view s);

/// One outcome joined with the plan of its trace and its campaign's scenario.
struct LoggedOutcome {
    RunOutcome outcome;
    std::optional<FaultPlan> plan;
    std::string scenario = "unknown";
};

struct RunLog {
    std::vector<LoggedOutcome> outcomes;
    std::vector<RunTrace> traces;  // filled only when requested
};

/// Reads a JSON-Lines run log. Several campaigns may be concatenated; each
/// ends with its campaign_meta line. Without `with_traces` the per-tick
/// payload of trace lines is skipped.
RunLog load_run_log(const std::filesystem::path& path, bool with_traces = false);

/// Group key of a run; runs with several faults join distinct values with '+'.
std::string group_key(const LoggedOutcome& o, GroupBy by);

/// Outcome metrics usable with compare: masked, sdc, due, due_hang,
/// due_crash, actuation_error, breach, safety_envelope_breach,
/// lane_centering_breach, traffic_violation, accident, unattributed_hazard.
const std::vector<std::string>& metric_names();
bool metric_hit(const RunOutcome& o, std::string_view metric);

struct SummaryRow {
    std::string group;
    long n_runs = 0;
    long masked = 0;
    long sdc = 0;
    long due = 0;
    long actuation_error = 0;
    long breach = 0;  // any safety-envelope, lane-centering or traffic breach
    long accident = 0;
};

std::vector<SummaryRow> summarize(const std::vector<LoggedOutcome>& outcomes, GroupBy by);

struct ComparisonRow {
    std::string group_a;
    std::string group_b;
    std::string metric;
    long n_a = 0;
    long n_b = 0;
    double rate_a = 0.0;
    double rate_b = 0.0;
    ZTest test;
};

ComparisonRow compare_metric(const std::vector<LoggedOutcome>& a, const std::string& name_a,
                             const std::vector<LoggedOutcome>& b, const std::string& name_b,
                             const std::string& metric);

/// RFC-4180 writer: CRLF line ends, fields quoted when needed.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}
    CsvWriter& field(std::string_view v);
    CsvWriter& field(const char* v) { return field(std::string_view(v)); }
    CsvWriter& field(double v);
    CsvWriter& field(long v);
    CsvWriter& field(int v) { return field(static_cast<long>(v)); }
    CsvWriter& field(bool v) { return field(std::string_view(v ? "true" : "false")); }
    void end_row();
    void row(std::initializer_list<std::string_view> fields);

private:
    std::ostream& out_;
    bool first_ = true;
};

/// Shortest round-trip text for a double; non-finite values are "NaN",
/// "Infinity", "-Infinity".
std::string format_real(double v);

/// Splits RFC-4180 text into rows of fields.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);

void write_outcomes_csv(std::ostream& out, const std::vector<LoggedOutcome>& outcomes);
void write_traces_csv(std::ostream& out, const std::vector<RunTrace>& traces);
/// Per-tick columns: tick, time_s, ego_speed, ego_lateral, min_gap, throttle,
/// brake, steering; one row per recorded tick.
void write_behavior_csv(std::ostream& out, const RunTrace& trace);

enum class ExportKind { traces, outcomes, behavior };
std::optional<ExportKind> export_kind_from_string(std::string_view s);

/// Writes CSV files into `dir`; returns the paths written.
std::vector<std::filesystem::path> export_log(const std::filesystem::path& log, ExportKind what,
                                              const std::filesystem::path& dir);

}  // namespace adsfi
