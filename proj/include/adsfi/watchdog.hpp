#pragma once

#include <chrono>
#include <cstdint>
#include <stdexcept>

namespace adsfi {

class HangDetected : public std::runtime_error {
public:
    HangDetected() : std::runtime_error("tick exceeded its execution budget") {}
};

/// Per-tick execution budget. Iterative pipeline code charges one unit per
/// loop step. In deterministic mode only the operation counter is consulted,
/// so hang verdicts do not depend on machine speed.
class Watchdog {
public:
    static constexpr std::int64_t kDefaultOpBudget = 100'000'000;

    struct Options {
        bool deterministic = true;
        std::int64_t op_budget = kDefaultOpBudget;
        std::chrono::milliseconds wall_budget{1000};
    };

    Watchdog() = default;
    explicit Watchdog(Options opts) : opts_(opts) {}

    void begin_tick() {
        ops_ = 0;
        if (!opts_.deterministic) start_ = std::chrono::steady_clock::now();
    }

    void charge(std::int64_t n = 1) {
        ops_ += n;
        if (ops_ > opts_.op_budget) throw HangDetected();
        if (!opts_.deterministic && (ops_ & 0xFFF) == 0) check_wall_clock();
    }

    /// Throws HangDetected if the wall-clock budget was exceeded.
    void end_tick() {
        if (!opts_.deterministic) check_wall_clock();
    }

    std::int64_t ops() const { return ops_; }
    const Options& options() const { return opts_; }

private:
    void check_wall_clock() const {
        if (std::chrono::steady_clock::now() - start_ > opts_.wall_budget) throw HangDetected();
    }

    Options opts_{};
    std::int64_t ops_ = 0;
    std::chrono::steady_clock::time_point start_{};
};

enum class WatchdogVerdict { ok, hang };

/// Runs one tick body under the watchdog.
template <typename Body>
WatchdogVerdict guard_tick(Watchdog& wd, Body&& body) {
    wd.begin_tick();
    try {
        body(wd);
        wd.end_tick();
    } catch (const HangDetected&) {
        return WatchdogVerdict::hang;
    }
    return WatchdogVerdict::ok;
}

}  // namespace adsfi
