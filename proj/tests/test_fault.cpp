#include <doctest.h>

#include <array>
#include <bit>
#include <cmath>
#include <map>

#include "adsfi/fault.hpp"

using namespace adsfi;

namespace {

WorkloadProfile four_site_profile(int ticks) {
    WorkloadProfile p;
    p.tick_count = ticks;
    std::vector<int> live(ticks);
    for (int t = 0; t < ticks; ++t) live[t] = t;
    const char* vars[] = {"target_speed", "target_lateral", "lead_gap"};
    for (const char* v : vars) p.sites.push_back({{ModuleId::planning, v, std::nullopt}, ValueKind::real, live});
    p.sites.push_back({{ModuleId::control, "pid_output", std::nullopt}, ValueKind::real, live});
    return p;
}

double chi_square(const std::vector<long>& counts, double expected) {
    double x2 = 0.0;
    for (long c : counts) x2 += (c - expected) * (c - expected) / expected;
    return x2;
}

}  // namespace

TEST_CASE("bit flips") {
    SUBCASE("sign bit of a double") {
        const std::array<int, 1> sign{63};
        CHECK(std::get<double>(flip_bits(SiteValue{2.5}, sign)) == -2.5);
    }
    SUBCASE("two low bits of an integer") {
        const std::array<int, 2> low{0, 1};
        CHECK(std::get<std::int64_t>(flip_bits(SiteValue{std::int64_t{0}}, low)) == 3);
    }
    SUBCASE("flipping twice restores the value") {
        Rng rng(9);
        for (int i = 0; i < 10000; ++i) {
            const double v = rng.uniform(-1e6, 1e6);
            std::vector<int> bits;
            const SiteValue once = apply_bitflip(SiteValue{v}, 1 + static_cast<int>(i % 2), rng, &bits);
            const SiteValue twice = flip_bits(once, bits);
            CHECK(std::bit_cast<std::uint64_t>(std::get<double>(twice)) == std::bit_cast<std::uint64_t>(v));
        }
    }
    SUBCASE("two-bit flips choose distinct positions") {
        Rng rng(10);
        for (int i = 0; i < 1000; ++i) {
            std::vector<int> bits;
            apply_bitflip(SiteValue{1.0}, 2, rng, &bits);
            REQUIRE(bits.size() == 2);
            CHECK(bits[0] != bits[1]);
        }
    }
    SUBCASE("positions are uniform over 64 bits") {
        Rng rng(11);
        std::vector<long> counts(64, 0);
        const int n = 64000;
        for (int i = 0; i < n; ++i) {
            std::vector<int> bits;
            apply_bitflip(SiteValue{std::int64_t{5}}, 1, rng, &bits);
            ++counts[bits[0]];
        }
        // 63 degrees of freedom, 0.1% critical value.
        CHECK(chi_square(counts, n / 64.0) < 103.4);
    }
    Rng rng(1);
    CHECK_THROWS_AS(apply_bitflip(SiteValue{1.0}, 3, rng), PlanInvalid);
}

TEST_CASE("value-level models") {
    Rng rng(12);
    CHECK(std::get<double>(*apply_sli(SiteValue{10.0}, fault::Scale{0.5}, rng)) == 5.0);
    CHECK(std::get<std::int64_t>(*apply_sli(SiteValue{std::int64_t{7}}, fault::Scale{0.5}, rng)) == 4);
    CHECK(std::get<double>(*apply_sli(SiteValue{10.0}, fault::Fixed{-3.0}, rng)) == -3.0);
    CHECK_FALSE(apply_sli(SiteValue{10.0}, fault::Disappear{}, rng).has_value());
    CHECK_THROWS_AS(apply_sli(Categorical{1, 4}, fault::Scale{2.0}, rng), PlanInvalid);
    CHECK_THROWS_AS(apply_sli(SiteValue{1.0}, fault::GaussianNoise{1.0}, rng), PlanInvalid);

    for (int i = 0; i < 1000; ++i) {
        const double r = std::get<double>(*apply_sli(SiteValue{0.0}, fault::Random{-2.0, 3.0}, rng));
        CHECK(r >= -2.0);
        CHECK(r <= 3.0);
        const auto c = std::get<Categorical>(*apply_sli(Categorical{0, 4}, fault::Random{}, rng));
        CHECK(c.valid());
        const auto k = std::get<std::int64_t>(*apply_sli(SiteValue{std::int64_t{0}}, fault::Random{1.5, 4.2}, rng));
        CHECK(k >= 2);
        CHECK(k <= 4);
    }
}

TEST_CASE("frame-level models") {
    Rng rng(13);
    SensorFrame f;
    f.objects.push_back({ObjectClass::vehicle, 40.0, 0.0, 4.5, 2.0, false});
    f.objects.push_back({ObjectClass::vehicle, 90.0, 0.0, 4.5, 2.0, false});
    for (int k = 1; k <= 10; ++k) f.lane_samples.push_back({5.0 * k, 0.0});

    SUBCASE("occlusion") {
        apply_frame_fault(f, fault::Occlusion{30.0, 45.0}, rng);
        CHECK(f.objects[0].occluded);
        CHECK_FALSE(f.objects[1].occluded);
        CHECK(f.lane_samples.size() == 6);
    }
    SUBCASE("gaussian noise") {
        apply_frame_fault(f, fault::GaussianNoise{1.0}, rng);
        CHECK(f.objects[0].ds != 40.0);
    }
    CHECK_THROWS_AS(apply_frame_fault(f, fault::Fixed{1.0}, rng), PlanInvalid);
}

TEST_CASE("model applicability") {
    CHECK(applicable(fault::BitFlip{}, ValueKind::real_list));
    CHECK(applicable(fault::Random{}, ValueKind::categorical_list));
    CHECK_FALSE(applicable(fault::Scale{}, ValueKind::categorical));
    CHECK(applicable(fault::Disappear{}, ValueKind::module_output));
    CHECK_FALSE(applicable(fault::Disappear{}, ValueKind::real));
    CHECK(applicable(fault::Occlusion{}, ValueKind::frame));
    CHECK_FALSE(applicable(fault::Occlusion{}, ValueKind::real));
}

TEST_CASE("triggers") {
    CHECK(fires(trigger::Transient{4}, 4));
    CHECK_FALSE(fires(trigger::Transient{4}, 5));
    CHECK(fires(trigger::Permanent{4}, 400));
    CHECK_FALSE(fires(trigger::Permanent{4}, 3));
    const trigger::Intermittent x{{2, 5, 9}};
    CHECK(fires(x, 5));
    CHECK_FALSE(fires(x, 6));
    CHECK(first_tick(x) == 2);
}

TEST_CASE("fault spec checks") {
    const FaultSite pid{ModuleId::control, "pid_output", std::nullopt};
    CHECK_NOTHROW(validate_spec({pid, fault::Fixed{1.0}, trigger::Permanent{0}}, 100));
    CHECK_THROWS_AS(validate_spec({pid, fault::Fixed{1.0}, trigger::Transient{100}}, 100), PlanInvalid);
    CHECK_THROWS_AS(validate_spec({pid, fault::Disappear{}, trigger::Transient{1}}, 100), PlanInvalid);
    CHECK_THROWS_AS(validate_spec({{ModuleId::control, "nope", std::nullopt}, fault::Fixed{1.0}, trigger::Transient{1}}, 100),
                    PlanInvalid);
    CHECK_THROWS_AS(
        validate_spec({{ModuleId::object_perception, "object_coordinates", std::nullopt}, fault::Fixed{1.0},
                       trigger::Transient{1}},
                      100),
        PlanInvalid);
    CHECK_THROWS_AS(validate_spec({pid, fault::BitFlip{3}, trigger::Transient{1}}, 100), PlanInvalid);
    CHECK_THROWS_AS(validate_spec({pid, fault::Fixed{1.0}, trigger::Intermittent{{}}}, 100), PlanInvalid);
}

TEST_CASE("plan generation") {
    const WorkloadProfile profile = four_site_profile(50);
    PlanRequest req;
    req.num_runs = 10000;
    req.models = {fault::BitFlip{1}};
    req.master_seed = 99;

    SUBCASE("sites are drawn uniformly") {
        const auto plans = generate_fault_plan(profile, req);
        std::map<std::string, long> by_site;
        std::vector<long> by_tick(50, 0);
        for (const auto& p : plans) {
            REQUIRE(p.faults.size() == 1);
            ++by_site[p.faults[0].site.variable];
            ++by_tick[first_tick(p.faults[0].trigger)];
        }
        REQUIRE(by_site.size() == 4);
        std::vector<long> counts;
        for (const auto& [k, v] : by_site) counts.push_back(v);
        // 3 and 49 degrees of freedom, 0.1% critical values.
        CHECK(chi_square(counts, req.num_runs / 4.0) < 16.27);
        CHECK(chi_square(by_tick, req.num_runs / 50.0) < 85.35);
    }
    SUBCASE("same request, same plans") {
        req.num_runs = 50;
        CHECK(generate_fault_plan(profile, req) == generate_fault_plan(profile, req));
        PlanRequest other = req;
        other.master_seed = 100;
        CHECK(generate_fault_plan(profile, req) != generate_fault_plan(profile, other));
    }
    SUBCASE("filter restricts sites") {
        req.num_runs = 200;
        req.filter.modules = {ModuleId::control};
        for (const auto& p : generate_fault_plan(profile, req)) CHECK(p.faults[0].site.variable == "pid_output");
        req.filter.modules = {ModuleId::sense};
        CHECK_THROWS_AS(generate_fault_plan(profile, req), PlanInvalid);
    }
    SUBCASE("only live ticks are chosen") {
        WorkloadProfile sparse = profile;
        for (auto& s : sparse.sites) s.live_ticks = {7, 30};
        req.num_runs = 200;
        for (const auto& p : generate_fault_plan(sparse, req)) {
            const int t = first_tick(p.faults[0].trigger);
            CHECK((t == 7 || t == 30));
        }
    }
    SUBCASE("intermittent triggers have distinct sorted ticks") {
        req.num_runs = 100;
        req.trigger = TriggerMode::intermittent;
        req.intermittent_count = 4;
        for (const auto& p : generate_fault_plan(profile, req)) {
            const auto& x = std::get<trigger::Intermittent>(p.faults[0].trigger);
            REQUIRE(x.ticks.size() == 4);
            for (std::size_t i = 1; i < x.ticks.size(); ++i) CHECK(x.ticks[i - 1] < x.ticks[i]);
        }
    }
    SUBCASE("run seeds are carried into plans") {
        req.num_runs = 3;
        req.run_seeds = {11, 22, 33};
        const auto plans = generate_fault_plan(profile, req);
        CHECK(plans[2].seed == 33);
        CHECK(plans[0].run_id == "injected-00000");
        req.run_seeds = {1};
        CHECK_THROWS_AS(generate_fault_plan(profile, req), PlanInvalid);
    }
}

TEST_CASE("injector") {
    FaultPlan plan;
    plan.run_id = "injected-00000";
    plan.faults.push_back({{ModuleId::planning, "target_speed", std::nullopt}, fault::Scale{0.5}, trigger::Transient{3}});
    Injector inj(plan, 1);

    PlanOut p{20.0, 0.0, 50.0};
    CHECK(inj.intercept(ModuleId::planning, &p, 2) == Delivery::delivered);
    CHECK(p.target_speed == 20.0);
    CHECK(inj.intercept(ModuleId::planning, &p, 3) == Delivery::delivered);
    CHECK(p.target_speed == 10.0);
    REQUIRE(inj.events().size() == 1);
    CHECK(std::get<double>(*inj.events()[0].before) == 20.0);
    CHECK(std::get<double>(*inj.events()[0].after) == 10.0);

    SUBCASE("disappear drops the output") {
        FaultPlan gone;
        gone.faults.push_back({{ModuleId::actuation, std::string(kOutputVariable), std::nullopt}, fault::Disappear{},
                               trigger::Permanent{0}});
        Injector d(gone, 1);
        ActuationCommand c{1.0, 0.0, 0.0};
        CHECK(d.intercept(ModuleId::actuation, &c, 5) == Delivery::dropped);
    }
    SUBCASE("elements that are not live are skipped") {
        FaultPlan elem;
        elem.faults.push_back({{ModuleId::object_perception, "object_coordinates", 5}, fault::Fixed{0.0},
                               trigger::Permanent{0}});
        Injector e(elem, 1);
        ObjectPerceptionOut o;
        o.num_detected_objects = 1;
        o.object_class = {ObjectClass::vehicle};
        o.object_coordinates = {{10.0, 0.0}};
        o.bounding_box = {{4.5, 2.0}};
        e.intercept(ModuleId::object_perception, &o, 0);
        CHECK(e.events().empty());
        CHECK(o.object_coordinates[0][0] == 10.0);
    }
}
