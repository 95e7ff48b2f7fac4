#include <doctest.h>

#include <cmath>

#include "adsfi/oracle.hpp"
#include "adsfi/rng.hpp"
#include "oracles.hpp"

using namespace adsfi;

namespace {

RunTrace flat_trace(const std::string& id, int ticks, double speed = 25.0) {
    RunTrace t;
    t.run_id = id;
    for (int i = 0; i < ticks; ++i) {
        MonitoredRecord r;
        r.frame_id = i;
        r.ego_speed = speed;
        r.est_speed = speed;
        r.pid_measured_value = speed;
        r.lane_type = LaneType::dashed;
        t.records.push_back(r);
        WorldSample w;
        w.tick = i;
        w.ego_speed = speed;
        w.collision_distance = kNoCollision;
        t.world_summary.push_back(w);
    }
    return t;
}

std::vector<RunTrace> golden_traces(int n, int ticks) {
    std::vector<RunTrace> g;
    for (int i = 0; i < n; ++i) g.push_back(flat_trace("golden-" + std::to_string(i), ticks, 24.0 + 0.1 * i));
    return g;
}

}  // namespace

TEST_CASE("quantiles") {
    const std::vector<double> x{1, 2, 3, 4};
    CHECK(quantile_sorted(x, 0.25) == 1.75);
    CHECK(quantile_sorted(x, 0.5) == 2.5);
    CHECK(quantile_sorted(x, 1.0) == 4.0);
    CHECK(quantile_sorted(std::vector<double>{7.0}, 0.75) == 7.0);
    CHECK_THROWS_AS(quantile_sorted(std::vector<double>{}, 0.5), EnvelopeError);

    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> s(1 + rng.below(60));
        for (auto& v : s) v = rng.uniform(-100, 100);
        const EnvelopeEntry e = summarize_sample(s);
        CHECK(e.q1 == testing::brute_quantile(s, 0.25));
        CHECK(e.q3 == testing::brute_quantile(s, 0.75));
    }
}

TEST_CASE("outlier fence") {
    const EnvelopeEntry e = summarize_sample({1, 2, 3, 4, 5});
    CHECK(e.q1 == 2.0);
    CHECK(e.q3 == 4.0);
    CHECK(is_outlier(10.0, e));
    CHECK_FALSE(is_outlier(6.9, e));
    CHECK(is_outlier(-1.1, e));
    CHECK(is_outlier(std::nan(""), e));
    CHECK(is_outlier(INFINITY, e));

    // The observed range widens a degenerate fence.
    const EnvelopeEntry spread{0.0, 0.0, -3.0, 3.0};
    CHECK_FALSE(is_outlier(2.0, spread));
}

TEST_CASE("stopping distance") {
    SafetyParams human = SafetyParams::human();
    const StoppingDistance d = stopping_distance(24.5872, human);
    CHECK(d.d_p == doctest::Approx(43.028).epsilon(1e-5));
    CHECK(d.d_r == doctest::Approx(24.587).epsilon(1e-4));
    CHECK(std::abs(d.d_b - 64.0) < 0.1);
    CHECK(std::abs(d.d_s - 131.615) < 0.01);
    CHECK(d.d_s == d.d_p + d.d_r + d.d_b);
    CHECK(stopping_distance(0.0, human).d_s == 0.0);

    double prev = 0.0;
    for (double v = 0.5; v < 40.0; v += 0.5) {
        const double ds = stopping_distance(v, SafetyParams::ai(20)).d_s;
        CHECK(ds > prev);
        prev = ds;
    }
}

TEST_CASE("collision distance") {
    const Body ego{0.0, 0.0, 4.5, 2.0, 25.0, 0.0};
    SUBCASE("stationary lead") {
        const Body lead{100.0, 0.0, 4.5, 2.0, 0.0, 0.0};
        CHECK(collision_distance(ego, lead, 10.0) == doctest::Approx(95.5));
    }
    SUBCASE("faster lead never collides") {
        const Body lead{30.0, 0.0, 4.5, 2.0, 30.0, 0.0};
        CHECK(collision_distance(ego, lead, 10.0) == kNoCollision);
    }
    SUBCASE("adjacent lane never collides") {
        const Body side{30.0, 3.7, 4.5, 2.0, 0.0, 0.0};
        CHECK(collision_distance(ego, side, 10.0) == kNoCollision);
    }
    SUBCASE("beyond the horizon") {
        const Body far{1000.0, 0.0, 4.5, 2.0, 0.0, 0.0};
        CHECK(collision_distance(ego, far, 10.0) == kNoCollision);
    }
    SUBCASE("already overlapping") {
        const Body on{2.0, 0.0, 4.5, 2.0, 25.0, 0.0};
        CHECK(collision_distance(ego, on, 10.0) == 0.0);
    }
    SUBCASE("matches forward simulation") {
        Rng rng(6);
        int compared = 0;
        for (int i = 0; i < 300; ++i) {
            const Body e{0.0, rng.uniform(-0.5, 0.5), 4.5, 2.0, rng.uniform(0.0, 35.0), rng.uniform(-0.05, 0.05)};
            const Body o{rng.uniform(5.0, 150.0), rng.uniform(-0.5, 0.5), rng.uniform(3.0, 6.0), 2.0,
                         rng.uniform(0.0, e.speed), 0.0};
            const double a = collision_distance(e, o, 10.0);
            const double b = testing::simulated_collision_distance(e, o, 10.0);
            if (std::isinf(a) || std::isinf(b)) {
                // A grazing contact can fall between two simulation steps.
                if (std::isinf(a) != std::isinf(b)) {
                    const double finite = std::isinf(a) ? b : a;
                    CHECK(finite >= e.speed * 9.9);
                }
            } else {
                CHECK(std::abs(a - b) < 0.1);
                ++compared;
            }
        }
        CHECK(compared > 50);
    }
}

TEST_CASE("safety checks") {
    SafetyParams ai = SafetyParams::ai(20);
    WorldSample w;
    w.ego_speed = 24.5872;
    w.collision_distance = 200.0;
    CHECK_FALSE(check_safety_envelope(w, ai));
    w.collision_distance = 20.0;
    CHECK(check_safety_envelope(w, SafetyParams::human()));
    w.collision_distance = kNoCollision;
    CHECK_FALSE(check_safety_envelope(w, ai));

    RunTrace t = flat_trace("x", 10);
    t.world_summary[4].ego_lateral = 0.49;
    CHECK_FALSE(check_lane_centering(t));
    t.world_summary[4].ego_lateral = -0.51;
    CHECK(check_lane_centering(t));
    t.world_summary[4].ego_lateral = 0.5;
    CHECK_FALSE(check_lane_centering(t));

    const LaneGeometry lanes;
    RunTrace fast = flat_trace("y", 10);
    CHECK_FALSE(check_traffic_violation(fast, lanes));
    fast.world_summary[9].ego_speed = lanes.speed_limit + 0.6;
    CHECK(check_traffic_violation(fast, lanes));
    RunTrace wide = flat_trace("z", 10);
    wide.world_summary[3].ego_lateral = 1.9;
    CHECK(check_traffic_violation(wide, lanes));
}

TEST_CASE("envelope construction") {
    auto g = golden_traces(5, 20);
    const GoldenEnvelope env = build_envelope(g);
    CHECK(env.tick_count() == 20);
    REQUIRE(env.entry("ego_speed", 3));
    CHECK(env.entry("ego_speed", 3)->min == doctest::Approx(24.0));
    CHECK(env.entry("ego_speed", 3)->max == doctest::Approx(24.4));
    CHECK(env.entry("ego_speed", 20) == nullptr);
    CHECK(env.entry("object_coordinates[0]", 3) == nullptr);
    CHECK(env.seen("lane_type", "dashed"));
    CHECK_FALSE(env.seen("lane_type", "solid"));

    CHECK_THROWS_AS(build_envelope(std::span<const RunTrace>(g.data(), 1)), EnvelopeError);
    g[2].records.pop_back();
    CHECK_THROWS_AS(build_envelope(g), EnvelopeError);
    g[2] = flat_trace("bad", 20);
    g[2].termination.status = TerminationStatus::crash;
    CHECK_THROWS_AS(build_envelope(g), EnvelopeError);
}

TEST_CASE("classification") {
    const auto g = golden_traces(5, 20);
    const GoldenEnvelope env = build_envelope(g);
    const ClassifyOptions opts{SafetyParams::ai(20), kDefaultIqrK};
    const LaneGeometry lanes;

    SUBCASE("goldens are masked") {
        for (const auto& t : g) {
            const RunOutcome o = classify_run(t, env, opts, lanes);
            CHECK(o.label == OutcomeLabel::masked);
            CHECK_FALSE(o.activated);
            CHECK(ontology_consistent(o));
        }
    }
    SUBCASE("deviation in a perception value is sdc without actuation error") {
        RunTrace t = flat_trace("injected-0", 20, 24.2);
        t.records[7].lane_c1 = 5.0;
        t.records[9].lane_c1 = 5.0;
        const RunOutcome o = classify_run(t, env, opts, lanes);
        CHECK(o.label == OutcomeLabel::sdc);
        CHECK(o.activated);
        CHECK_FALSE(o.actuation_error);
        REQUIRE(o.first_deviation);
        CHECK(o.first_deviation->variable_id == "lane_c1");
        CHECK(o.first_deviation->tick == 7);
        CHECK(ontology_consistent(o));
    }
    SUBCASE("deviation in throttle is an actuation error; hazards are attributed") {
        RunTrace t = flat_trace("injected-1", 20, 24.2);
        t.records[4].throttle = 1.0;
        t.world_summary[10].ego_lateral = 0.8;
        const RunOutcome o = classify_run(t, env, opts, lanes);
        CHECK(o.actuation_error);
        CHECK(o.lane_centering_breach);
        CHECK_FALSE(o.unattributed_hazard);
        CHECK(ontology_consistent(o));
    }
    SUBCASE("unseen object class is a deviation") {
        RunTrace t = flat_trace("injected-2", 20, 24.2);
        t.records[2].object_class = {ObjectClass::pedestrian};
        t.records[2].object_coordinates = {{10.0, 0.0}};
        t.records[2].bounding_box = {{1.0, 1.0}};
        const RunOutcome o = classify_run(t, env, opts, lanes);
        CHECK(o.label == OutcomeLabel::sdc);
    }
    SUBCASE("crash and hang are DUE and keep breach flags") {
        RunTrace t = flat_trace("injected-3", 20, 24.2);
        t.termination = {TerminationStatus::crash, ModuleId::planning, 12};
        t.world_summary[11].collided = true;
        t.world_summary.resize(12);
        RunOutcome o = classify_run(t, env, opts, lanes);
        CHECK(o.label == OutcomeLabel::due_crash);
        CHECK(o.accident);
        CHECK(o.safety_envelope_breach);
        CHECK(ontology_consistent(o));

        t.termination.status = TerminationStatus::hang;
        o = classify_run(t, env, opts, lanes);
        CHECK(o.label == OutcomeLabel::due_hang);
    }
    SUBCASE("hazard without an actuation deviation is reported, not attributed") {
        RunTrace t = flat_trace("injected-4", 20, 24.2);
        t.records[5].lane_c0 = 9.0;
        t.world_summary[5].ego_lateral = 0.7;
        const RunOutcome o = classify_run(t, env, opts, lanes);
        CHECK(o.label == OutcomeLabel::sdc);
        CHECK_FALSE(o.lane_centering_breach);
        CHECK(o.unattributed_hazard);
        CHECK(ontology_consistent(o));
    }
    SUBCASE("safety margin") {
        RunTrace t = flat_trace("injected-5", 20, 24.2);
        t.world_summary[3].collision_distance = 100.0;
        const RunOutcome o = classify_run(t, env, opts, lanes);
        CHECK(o.min_safety_margin == doctest::Approx(100.0 - stopping_distance(24.2, opts.safety).d_s));
    }
}

TEST_CASE("ontology implications") {
    RunOutcome o;
    CHECK(ontology_consistent(o));
    o.activated = true;
    CHECK_FALSE(ontology_consistent(o));
    o.label = OutcomeLabel::sdc;
    CHECK(ontology_consistent(o));
    o.accident = true;
    o.actuation_error = true;
    CHECK_FALSE(ontology_consistent(o));
    o.safety_envelope_breach = true;
    CHECK(ontology_consistent(o));
    o.label = OutcomeLabel::due_crash;
    CHECK_FALSE(ontology_consistent(o));
    o.actuation_error = false;
    CHECK(ontology_consistent(o));

    for (auto l : {OutcomeLabel::masked, OutcomeLabel::due_hang, OutcomeLabel::due_crash, OutcomeLabel::sdc})
        CHECK(outcome_label_from_string(to_string(l)) == l);
    CHECK_FALSE(outcome_label_from_string("benign"));
}
