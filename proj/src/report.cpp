#include "adsfi/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include "adsfi/serialize.hpp"

namespace adsfi {

namespace {

constexpr std::string_view kTraceLines[] = {"golden_trace", "injected_trace"};

bool is_trace_line(std::string_view type) {
    return std::find(std::begin(kTraceLines), std::end(kTraceLines), type) != std::end(kTraceLines);
}

/// Calls `fn(json)` for every non-empty line. Bulky per-tick arrays of trace
/// lines are dropped during parsing unless `full` is set.
void for_each_line(const std::filesystem::path& path, bool full, const std::function<void(Json&)>& fn) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open log");
    const Json::parser_callback_t skip_payload = [](int depth, Json::parse_event_t ev, Json& parsed) {
        if (ev == Json::parse_event_t::key && depth == 1 && parsed.is_string()) {
            const auto& k = parsed.get_ref<const std::string&>();
            return k != "records" && k != "world_summary" && k != "injections";
        }
        return true;
    };
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = full ? Json::parse(line) : Json::parse(line, skip_payload);
        } catch (const Json::parse_error& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": malformed line");
        }
        if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": line has no type tag");
        fn(j);
    }
}

std::string join_distinct(const std::vector<std::string>& parts) {
    std::vector<std::string> seen;
    for (const auto& p : parts)
        if (std::find(seen.begin(), seen.end(), p) == seen.end()) seen.push_back(p);
    std::string out;
    for (const auto& s : seen) {
        if (!out.empty()) out += '+';
        out += s;
    }
    return out;
}

bool breach(const RunOutcome& o) {
    return o.safety_envelope_breach || o.lane_centering_breach || o.traffic_violation;
}

}  // namespace

Interval wilson_interval(long successes, long n, double z) {
    if (n <= 0) throw std::invalid_argument("wilson interval of an empty sample");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    // The bounds are exactly 0 and 1 at the extremes; avoid rounding residue.
    const double lo = successes <= 0 ? 0.0 : std::clamp(center - half, 0.0, 1.0);
    const double hi = successes >= n ? 1.0 : std::clamp(center + half, 0.0, 1.0);
    return {lo, hi};
}

ZTest two_proportion_z(long xa, long na, long xb, long nb) {
    if (na <= 0 || nb <= 0) throw std::invalid_argument("two-proportion test needs two non-empty samples");
    const double pa = static_cast<double>(xa) / static_cast<double>(na);
    const double pb = static_cast<double>(xb) / static_cast<double>(nb);
    const double pooled = static_cast<double>(xa + xb) / static_cast<double>(na + nb);
    const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb));
    if (se == 0.0) return {0.0, 1.0};  // pooled rate 0 or 1: both rates equal
    const double z = (pa - pb) / se;
    return {z, std::clamp(std::erfc(std::abs(z) / std::sqrt(2.0)), 0.0, 1.0)};
}

std::optional<GroupBy> group_by_from_string(std::string_view s) {
    if (s == "module") return GroupBy::module;
    if (s == "variable") return GroupBy::variable;
    if (s == "fault_model") return GroupBy::fault_model;
    if (s == "scenario") return GroupBy::scenario;
    return std::nullopt;
}

RunLog load_run_log(const std::filesystem::path& path, bool with_traces) {
    RunLog log;
    std::map<std::string, std::optional<FaultPlan>> plans;  // of the current campaign
    std::size_t segment_start = 0;

    auto close_segment = [&](const std::string& scenario) {
        for (std::size_t i = segment_start; i < log.outcomes.size(); ++i) {
            auto& o = log.outcomes[i];
            o.scenario = scenario;
            const auto it = plans.find(o.outcome.run_id);
            if (it != plans.end()) o.plan = it->second;
        }
        segment_start = log.outcomes.size();
        plans.clear();
    };

    for_each_line(path, with_traces, [&](Json& j) {
        const auto& type = j["type"].get_ref<const std::string&>();
        if (is_trace_line(type)) {
            if (with_traces) {
                RunTrace t = trace_from_json(j);
                plans[t.run_id] = t.plan;
                log.traces.push_back(std::move(t));
            } else {
                std::optional<FaultPlan> plan;
                if (j.contains("plan") && !j["plan"].is_null()) plan = fault_plan_from_json(j["plan"]);
                plans[j.at("run_id").get<std::string>()] = std::move(plan);
            }
        } else if (type == "outcome") {
            log.outcomes.push_back({outcome_from_json(j), std::nullopt, "unknown"});
        } else if (type == "campaign_meta") {
            close_segment(j.contains("scenario") ? j["scenario"].get<std::string>() : "unknown");
        }
    });
    close_segment("unknown");
    return log;
}

std::string group_key(const LoggedOutcome& o, GroupBy by) {
    if (by == GroupBy::scenario) return o.scenario;
    if (!o.plan || o.plan->faults.empty()) return "none";
    std::vector<std::string> parts;
    for (const auto& f : o.plan->faults) {
        switch (by) {
        case GroupBy::module: parts.emplace_back(to_string(f.site.module)); break;
        case GroupBy::variable: parts.push_back(f.site.variable); break;
        case GroupBy::fault_model: parts.emplace_back(model_tag(f.model)); break;
        case GroupBy::scenario: break;
        }
    }
    return join_distinct(parts);
}

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names = {
        "masked", "sdc", "due", "due_hang", "due_crash", "actuation_error", "breach", "safety_envelope_breach",
        "lane_centering_breach", "traffic_violation", "accident", "unattributed_hazard"};
    return names;
}

bool metric_hit(const RunOutcome& o, std::string_view metric) {
    if (metric == "masked") return o.label == OutcomeLabel::masked;
    if (metric == "sdc") return o.label == OutcomeLabel::sdc;
    if (metric == "due") return o.label == OutcomeLabel::due_hang || o.label == OutcomeLabel::due_crash;
    if (metric == "due_hang") return o.label == OutcomeLabel::due_hang;
    if (metric == "due_crash") return o.label == OutcomeLabel::due_crash;
    if (metric == "actuation_error") return o.actuation_error;
    if (metric == "breach") return breach(o);
    if (metric == "safety_envelope_breach") return o.safety_envelope_breach;
    if (metric == "lane_centering_breach") return o.lane_centering_breach;
    if (metric == "traffic_violation") return o.traffic_violation;
    if (metric == "accident") return o.accident;
    if (metric == "unattributed_hazard") return o.unattributed_hazard;
    throw std::invalid_argument("unknown metric '" + std::string(metric) + "'");
}

std::vector<SummaryRow> summarize(const std::vector<LoggedOutcome>& outcomes, GroupBy by) {
    std::map<std::string, SummaryRow> groups;
    for (const auto& lo : outcomes) {
        const std::string key = group_key(lo, by);
        SummaryRow& r = groups[key];
        r.group = key;
        const RunOutcome& o = lo.outcome;
        ++r.n_runs;
        r.masked += o.label == OutcomeLabel::masked;
        r.sdc += o.label == OutcomeLabel::sdc;
        r.due += o.label == OutcomeLabel::due_hang || o.label == OutcomeLabel::due_crash;
        r.actuation_error += o.actuation_error;
        r.breach += breach(o);
        r.accident += o.accident;
    }
    std::vector<SummaryRow> rows;
    for (auto& [_, r] : groups)
        if (r.n_runs > 0) rows.push_back(r);
    return rows;
}

ComparisonRow compare_metric(const std::vector<LoggedOutcome>& a, const std::string& name_a,
                             const std::vector<LoggedOutcome>& b, const std::string& name_b,
                             const std::string& metric) {
    ComparisonRow row;
    row.group_a = name_a;
    row.group_b = name_b;
    row.metric = metric;
    row.n_a = static_cast<long>(a.size());
    row.n_b = static_cast<long>(b.size());
    long xa = 0;
    long xb = 0;
    for (const auto& o : a) xa += metric_hit(o.outcome, metric);
    for (const auto& o : b) xb += metric_hit(o.outcome, metric);
    row.test = two_proportion_z(xa, row.n_a, xb, row.n_b);
    row.rate_a = static_cast<double>(xa) / static_cast<double>(row.n_a);
    row.rate_b = static_cast<double>(xb) / static_cast<double>(row.n_b);
    return row;
}

std::string format_real(double v) {
    if (std::isnan(v)) return "NaN";
    if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

CsvWriter& CsvWriter::field(std::string_view v) {
    if (!first_) out_ << ',';
    first_ = false;
    if (v.find_first_of(",\"\r\n") == std::string_view::npos) {
        out_ << v;
        return *this;
    }
    out_ << '"';
    for (char c : v) {
        if (c == '"') out_ << '"';
        out_ << c;
    }
    out_ << '"';
    return *this;
}

CsvWriter& CsvWriter::field(double v) { return field(std::string_view(format_real(v))); }

CsvWriter& CsvWriter::field(long v) { return field(std::string_view(std::to_string(v))); }

void CsvWriter::end_row() {
    out_ << "\r\n";
    first_ = true;
}

void CsvWriter::row(std::initializer_list<std::string_view> fields) {
    for (auto f : fields) field(f);
    end_row();
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cur;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(cur));
            cur.clear();
            any = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            row.push_back(std::move(cur));
            cur.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            cur += c;
            any = true;
        }
    }
    if (any || !cur.empty() || !row.empty()) {
        row.push_back(std::move(cur));
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    CsvWriter csv(out);
    csv.field("group").field("n_runs");
    for (const char* name : {"masked", "sdc", "due", "actuation_error", "breach", "accident"}) {
        const std::string n(name);
        csv.field(n + "_rate").field(n + "_ci_low").field(n + "_ci_high");
    }
    csv.end_row();
    for (const auto& r : rows) {
        csv.field(std::string_view(r.group)).field(r.n_runs);
        for (long count : {r.masked, r.sdc, r.due, r.actuation_error, r.breach, r.accident}) {
            const Interval ci = wilson_interval(count, r.n_runs);
            csv.field(static_cast<double>(count) / static_cast<double>(r.n_runs)).field(ci.lo).field(ci.hi);
        }
        csv.end_row();
    }
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
    CsvWriter csv(out);
    csv.row({"group_a", "group_b", "metric", "n_a", "n_b", "rate_a", "rate_b", "z", "p_value"});
    for (const auto& r : rows) {
        csv.field(std::string_view(r.group_a))
            .field(std::string_view(r.group_b))
            .field(std::string_view(r.metric))
            .field(r.n_a)
            .field(r.n_b)
            .field(r.rate_a)
            .field(r.rate_b)
            .field(r.test.z)
            .field(r.test.p);
        csv.end_row();
    }
}

void write_outcomes_csv(std::ostream& out, const std::vector<LoggedOutcome>& outcomes) {
    CsvWriter csv(out);
    csv.row({"run_id", "scenario", "module", "variable", "fault_model", "label", "activated", "actuation_error",
             "safety_envelope_breach", "lane_centering_breach", "traffic_violation", "accident",
             "first_deviation_variable", "first_deviation_tick", "min_safety_margin", "unattributed_hazard"});
    for (const auto& lo : outcomes) {
        const RunOutcome& o = lo.outcome;
        csv.field(std::string_view(o.run_id))
            .field(std::string_view(lo.scenario))
            .field(std::string_view(group_key(lo, GroupBy::module)))
            .field(std::string_view(group_key(lo, GroupBy::variable)))
            .field(std::string_view(group_key(lo, GroupBy::fault_model)))
            .field(to_string(o.label))
            .field(o.activated)
            .field(o.actuation_error)
            .field(o.safety_envelope_breach)
            .field(o.lane_centering_breach)
            .field(o.traffic_violation)
            .field(o.accident);
        if (o.first_deviation) {
            csv.field(std::string_view(o.first_deviation->variable_id)).field(o.first_deviation->tick);
        } else {
            csv.field("").field("");
        }
        csv.field(o.min_safety_margin).field(o.unattributed_hazard);
        csv.end_row();
    }
}

namespace {

void traces_header(CsvWriter& csv) {
    csv.row({"run_id", "kind", "frame_id", "num_detected_objects", "object_class", "object_coordinates",
             "bounding_box", "lane_type", "lane_c0", "lane_c1", "lane_c2", "est_s", "est_lateral", "est_heading",
             "est_speed", "target_speed", "lead_gap", "pid_measured_value", "pid_target_value", "pid_output",
             "throttle", "brake", "steering", "ego_speed", "ego_lateral", "ego_s"});
}

std::string join_pairs(const std::vector<Pair>& v) {
    std::string s;
    for (const auto& p : v) {
        if (!s.empty()) s += ';';
        s += format_real(p[0]) + ' ' + format_real(p[1]);
    }
    return s;
}

void trace_rows(CsvWriter& csv, const RunTrace& t) {
    for (const auto& r : t.records) {
        std::string classes;
        for (auto c : r.object_class) {
            if (!classes.empty()) classes += ';';
            classes += to_string(c);
        }
        csv.field(std::string_view(t.run_id))
            .field(to_string(t.kind))
            .field(r.frame_id)
            .field(static_cast<long>(r.num_detected_objects))
            .field(std::string_view(classes))
            .field(std::string_view(join_pairs(r.object_coordinates)))
            .field(std::string_view(join_pairs(r.bounding_box)))
            .field(to_string(r.lane_type));
        for (double v : {r.lane_c0, r.lane_c1, r.lane_c2, r.est_s, r.est_lateral, r.est_heading, r.est_speed,
                         r.target_speed, r.lead_gap, r.pid_measured_value, r.pid_target_value, r.pid_output,
                         r.throttle, r.brake, r.steering, r.ego_speed, r.ego_lateral, r.ego_s})
            csv.field(v);
        csv.end_row();
    }
}

}  // namespace

void write_traces_csv(std::ostream& out, const std::vector<RunTrace>& traces) {
    CsvWriter csv(out);
    traces_header(csv);
    for (const auto& t : traces) trace_rows(csv, t);
}

void write_behavior_csv(std::ostream& out, const RunTrace& trace) {
    CsvWriter csv(out);
    csv.row({"tick", "time_s", "ego_speed", "ego_lateral", "min_gap", "throttle", "brake", "steering"});
    const std::size_t n = std::min(trace.records.size(), trace.world_summary.size());
    for (std::size_t t = 0; t < n; ++t) {
        const auto& w = trace.world_summary[t];
        const auto& r = trace.records[t];
        csv.field(w.tick)
            .field(w.time_s)
            .field(w.ego_speed)
            .field(w.ego_lateral)
            .field(w.min_gap)
            .field(r.throttle)
            .field(r.brake)
            .field(r.steering);
        csv.end_row();
    }
}

std::optional<ExportKind> export_kind_from_string(std::string_view s) {
    if (s == "traces") return ExportKind::traces;
    if (s == "outcomes") return ExportKind::outcomes;
    if (s == "behavior") return ExportKind::behavior;
    return std::nullopt;
}

std::vector<std::filesystem::path> export_log(const std::filesystem::path& log, ExportKind what,
                                              const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto open = [&](const std::filesystem::path& p) {
        std::ofstream f(p, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + p.string());
        written.push_back(p);
        return f;
    };

    if (what == ExportKind::outcomes) {
        const RunLog rl = load_run_log(log);
        auto f = open(dir / "outcomes.csv");
        write_outcomes_csv(f, rl.outcomes);
        return written;
    }

    // Trace exports stream the log one line at a time.
    std::ofstream traces_file;
    std::optional<CsvWriter> traces_csv;
    if (what == ExportKind::traces) {
        traces_file = open(dir / "traces.csv");
        traces_csv.emplace(traces_file);
        traces_header(*traces_csv);
    }
    std::set<std::string> used;
    for_each_line(log, true, [&](Json& j) {
        if (!is_trace_line(j["type"].get_ref<const std::string&>())) return;
        const RunTrace t = trace_from_json(j);
        if (what == ExportKind::traces) {
            trace_rows(*traces_csv, t);
            return;
        }
        std::string name = "behavior_" + t.run_id;
        for (int k = 2; used.count(name); ++k) name = "behavior_" + t.run_id + "_" + std::to_string(k);
        used.insert(name);
        auto f = open(dir / (name + ".csv"));
        write_behavior_csv(f, t);
    });
    return written;
}

}  // namespace adsfi
