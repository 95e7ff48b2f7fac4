#include <doctest.h>

#include <cmath>
#include <set>

#include "adsfi/rng.hpp"
#include "adsfi/world.hpp"

using namespace adsfi;

namespace {

ScenarioSpec two_car(double lead_s = 50.0) {
    ScenarioSpec s;
    s.ego.actor_id = "ego";
    s.ego.initial_s = TruncNormalParam::fixed(0.0);
    s.ego.lane_index = 1;
    s.ego.speed = TruncNormalParam::fixed(20.0);
    ActorSpec lead;
    lead.actor_id = "lead";
    lead.initial_s = TruncNormalParam::fixed(lead_s);
    lead.lane_index = 1;
    lead.speed = TruncNormalParam::fixed(20.0);
    s.actors.push_back(lead);
    return s;
}

ActorState car(double s, int lane, double speed = 0.0) {
    ActorState a;
    a.lane_index = lane;
    a.state.s = s;
    a.state.speed = speed;
    return a;
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
    Rng a(123), b(123), c(124);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    CHECK(Rng(123).next_u64() != c.next_u64());
    CHECK(stream_seed(7, Stream::scenario) != stream_seed(7, Stream::sensor));
    CHECK(mix_seed(1, 0) != mix_seed(1, 1));
}

TEST_CASE("uniform01 and below stay in range") {
    Rng r(5);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform01();
        CHECK((u >= 0.0 && u < 1.0));
        CHECK(r.below(7) < 7u);
    }
}

TEST_CASE("normal deviates have unit variance") {
    Rng r(99);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(sq / n - mean * mean - 1.0) < 0.02);
}

TEST_CASE("sample_trunc_normal") {
    Rng r(1);
    SUBCASE("zero variance returns the mean") {
        CHECK(sample_trunc_normal({20.0, 0.0, 0.0, 30.0}, r) == 20.0);
    }
    SUBCASE("truncation bounds hold") {
        for (int i = 0; i < 10000; ++i) {
            const double x = sample_trunc_normal({20.0, 5.0, 18.0, 22.0}, r);
            CHECK((x >= 18.0 && x <= 22.0));
        }
    }
    SUBCASE("monte carlo mean of a wide window") {
        double sum = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) sum += sample_trunc_normal({20.0, 5.0, 0.0, 40.0}, r);
        CHECK(std::abs(sum / n - 20.0) < 0.1);
    }
    SUBCASE("far tail falls back to clamping") {
        const double x = sample_trunc_normal({0.0, 1.0, 50.0, 51.0}, r);
        CHECK((x >= 50.0 && x <= 51.0));
    }
}

TEST_CASE("instantiate_scenario") {
    SUBCASE("same seed gives identical states") {
        ScenarioSpec s = two_car();
        s.actors[0].initial_s = {100.0, 10.0, 80.0, 120.0};
        const WorldState a = instantiate_scenario(s, 42);
        const WorldState b = instantiate_scenario(s, 42);
        CHECK(a.actors[0].state.s == b.actors[0].state.s);
        CHECK(a.ego.state.speed == b.ego.state.speed);
        const double gap = a.actors[0].state.s - a.ego.state.s;
        CHECK((gap >= 80.0 && gap <= 120.0));
    }
    SUBCASE("stationary actors start at rest") {
        ScenarioSpec s = two_car(200.0);
        s.actors[0].behavior = Behavior::stationary;
        s.actors[0].speed = {20.0, 3.0, 10.0, 30.0};
        const WorldState w = instantiate_scenario(s, 3);
        CHECK(w.actors[0].state.speed == 0.0);
    }
    SUBCASE("overlapping vehicles are rejected") {
        CHECK_THROWS_AS(instantiate_scenario(two_car(2.0), 1), ScenarioInvalid);
    }
    SUBCASE("lane index out of range is rejected") {
        ScenarioSpec s = two_car();
        s.actors[0].lane_index = 5;
        CHECK_THROWS_AS(s.validate(), ScenarioInvalid);
    }
    SUBCASE("mean outside its bounds is rejected") {
        ScenarioSpec s = two_car();
        s.actors[0].speed = {50.0, 1.0, 0.0, 30.0};
        CHECK_THROWS_AS(s.validate(), ScenarioInvalid);
    }
}

TEST_CASE("step kinematics") {
    WorldState w;
    w.ego = car(0.0, 1, 10.0);

    SUBCASE("coasting") {
        const WorldState n = step(w, {}, 0.05);
        CHECK(n.ego.state.speed == 10.0);
        CHECK(n.ego.state.s == doctest::Approx(0.5));
        CHECK(n.tick == 1);
        CHECK(n.time == doctest::Approx(0.05));
    }
    SUBCASE("explicit Euler position update uses the old speed") {
        const WorldState n = step(w, {1.0, 0.0, 0.0}, 0.05);
        CHECK(n.ego.state.s - w.ego.state.s - w.ego.state.speed * 0.05 == 0.0);
        CHECK(n.ego.state.speed == doctest::Approx(10.0 + kMaxAccel * 0.05));
    }
    SUBCASE("no reverse") {
        w.ego.state.speed = 0.0;
        CHECK(step(w, {0.0, 1.0, 0.0}, 0.05).ego.state.speed == 0.0);
    }
    SUBCASE("non-finite command") {
        CHECK_THROWS_AS(step(w, {std::nan(""), 0.0, 0.0}, 0.05), NonFiniteCommand);
    }
    SUBCASE("steering changes heading then lateral") {
        WorldState n = step(w, {0.0, 0.0, 0.1}, 0.05);
        CHECK(n.ego.state.heading > 0.0);
        CHECK(n.ego.state.lateral == 0.0);
        n = step(n, {0.0, 0.0, 0.1}, 0.05);
        CHECK(n.ego.state.lateral > 0.0);
    }
}

TEST_CASE("braking calibration covers 64 m from 55 mph") {
    WorldState w;
    w.ego = car(0.0, 0, 24.5872);
    const double dt = 1e-3;
    while (w.ego.state.speed > 0.0) w = step(w, {0.0, 1.0, 0.0}, dt);
    CHECK(std::abs(w.ego.state.s - 64.0) <= 0.5);
}

TEST_CASE("detect_collision") {
    WorldState w;
    w.ego = car(0.0, 0);
    SUBCASE("same lane, 20 m gap") {
        w.actors.push_back(car(24.5, 0));
        CHECK_FALSE(detect_collision(w));
    }
    SUBCASE("identical positions") {
        w.actors.push_back(car(0.0, 0));
        CHECK(detect_collision(w));
    }
    SUBCASE("adjacent lanes") {
        w.actors.push_back(car(0.0, 1));
        CHECK_FALSE(detect_collision(w));
    }
    SUBCASE("collision freezes the world and never reverts") {
        w.ego.state.speed = 10.0;
        w.actors.push_back(car(4.4, 0));
        WorldState n = step(w, {1.0, 0.0, 0.0}, 0.05);
        CHECK(n.collided);
        const double s = n.ego.state.s;
        for (int i = 0; i < 10; ++i) n = step(n, {1.0, 0.0, 0.0}, 0.05);
        CHECK(n.collided);
        CHECK(n.ego.state.s == s);
    }
}

TEST_CASE("ground_truth") {
    WorldState w;
    w.ego = car(100.0, 1, 20.0);
    SUBCASE("lead inside range") {
        w.actors.push_back(car(150.0, 1));
        const GroundTruth g = ground_truth(w, 100.0);
        REQUIRE(g.objects.size() == 1);
        CHECK(g.objects[0].ds == 50.0);
        CHECK(g.objects[0].dlat == 0.0);
    }
    SUBCASE("actor behind is excluded") {
        w.actors.push_back(car(90.0, 1));
        CHECK(ground_truth(w, 100.0).objects.empty());
    }
    SUBCASE("empty world") {
        const GroundTruth g = ground_truth(w, 100.0);
        CHECK(g.objects.empty());
        CHECK(g.lane_type == LaneType::dashed);
        CHECK(g.lane_width == 3.7);
    }
}

TEST_CASE("actor scripts") {
    WorldState w;
    w.ego = car(0.0, 0, 0.0);
    ActorState a = car(100.0, 1, 10.0);
    a.script_accel = 2.0;
    SUBCASE("decelerate to stop") {
        a.behavior = Behavior::decelerate_to_stop;
        w.actors.push_back(a);
        for (int i = 0; i < 200; ++i) w = step(w, {}, 0.05);
        CHECK(w.actors[0].state.speed == 0.0);
    }
    SUBCASE("accelerate is capped at the limit") {
        a.behavior = Behavior::accelerate;
        w.actors.push_back(a);
        for (int i = 0; i < 400; ++i) w = step(w, {}, 0.05);
        CHECK(w.actors[0].state.speed == doctest::Approx(w.lanes.speed_limit));
    }
}

TEST_CASE("min_gap_ahead reports the bumper gap") {
    WorldState w;
    w.ego = car(0.0, 1);
    w.actors.push_back(car(30.0, 1));
    w.actors.push_back(car(10.0, 0));
    CHECK(min_gap_ahead(w) == doctest::Approx(25.5));
    w.actors.clear();
    CHECK(min_gap_ahead(w) == kNoLead);
}
