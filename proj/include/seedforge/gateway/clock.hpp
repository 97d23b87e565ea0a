#pragma once

#include <chrono>
#include <memory>
#include <mutex>

namespace seedforge {

// Time source for rate limiting and backoff; swappable for simulated time.
class Clock {
public:
    using duration = std::chrono::nanoseconds;
    using time_point = std::chrono::time_point<std::chrono::steady_clock, duration>;

    virtual ~Clock() = default;
    virtual time_point now() = 0;
    virtual void sleep_until(time_point t) = 0;

    void sleep_for(duration d) { sleep_until(now() + d); }
};

class SteadyClock final : public Clock {
public:
    time_point now() override { return std::chrono::steady_clock::now(); }
    void sleep_until(time_point t) override;
};

// Simulated clock: sleeping jumps time forward. Thread-safe; time never
// moves backwards.
class ManualClock final : public Clock {
public:
    time_point now() override {
        std::lock_guard lock(mu_);
        return now_;
    }
    void sleep_until(time_point t) override {
        std::lock_guard lock(mu_);
        if (t > now_) now_ = t;
    }
    void advance(duration d) {
        std::lock_guard lock(mu_);
        now_ += d;
    }

private:
    std::mutex mu_;
    time_point now_{};
};

std::shared_ptr<Clock> steady_clock();

}  // namespace seedforge
