#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <memory>
#include <mutex>

#include "seedforge/gateway/clock.hpp"

namespace seedforge {

// Sliding-window limiter: in any window of `window` length, at most
// `max_requests` acquisitions complete. Each caller reserves the earliest
// admissible slot under the lock and sleeps outside it.
class RateLimiter {
public:
    RateLimiter(int max_requests, Clock::duration window, std::shared_ptr<Clock> clock);

    // Blocks until the caller may issue one request; returns the slot time.
    Clock::time_point acquire();

private:
    int max_requests_;
    Clock::duration window_;
    std::shared_ptr<Clock> clock_;
    std::mutex mu_;
    std::deque<Clock::time_point> slots_;
};

// Caps the number of in-flight requests.
class ConcurrencyLimiter {
public:
    explicit ConcurrencyLimiter(std::size_t max_in_flight) : available_(max_in_flight) {}

    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return available_ > 0; });
        --available_;
    }
    void release() {
        {
            std::lock_guard lock(mu_);
            ++available_;
        }
        cv_.notify_one();
    }

    class Slot {
    public:
        explicit Slot(ConcurrencyLimiter& owner) : owner_(owner) { owner_.acquire(); }
        ~Slot() { owner_.release(); }
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;

    private:
        ConcurrencyLimiter& owner_;
    };

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::size_t available_;
};

}  // namespace seedforge
