#include "seedforge/gateway/rate_limiter.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

namespace seedforge {

void SteadyClock::sleep_until(time_point t) { std::this_thread::sleep_until(t); }

std::shared_ptr<Clock> steady_clock() {
    static const auto clock = std::make_shared<SteadyClock>();
    return clock;
}

RateLimiter::RateLimiter(int max_requests, Clock::duration window, std::shared_ptr<Clock> clock)
    : max_requests_(max_requests), window_(window), clock_(std::move(clock)) {
    if (max_requests_ < 1) throw std::invalid_argument("rate limiter needs max_requests >= 1");
}

Clock::time_point RateLimiter::acquire() {
    Clock::time_point slot;
    Clock::time_point now;
    {
        std::lock_guard lock(mu_);
        now = clock_->now();
        slot = now;
        const auto n = static_cast<std::size_t>(max_requests_);
        // The new slot must be a full window after the n-th most recent one,
        // so any window holds at most n slots.
        if (slots_.size() >= n) slot = std::max(slot, slots_[slots_.size() - n] + window_);
        slots_.push_back(slot);
        while (slots_.size() > n) slots_.pop_front();
    }
    if (slot > now) clock_->sleep_until(slot);
    return slot;
}

}  // namespace seedforge
