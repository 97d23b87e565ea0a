#include "seedforge/eval/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "seedforge/errors.hpp"

namespace seedforge {

namespace {

struct Ranked {
    std::vector<std::int64_t> doubled;  // 2 x midrank, so ties stay integral
    double tie_term = 0.0;              // sum of t^3 - t over tie groups
};

Ranked rank_pooled(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size() + b.size();
    std::vector<std::pair<double, std::size_t>> v;
    v.reserve(n);
    for (std::size_t i = 0; i < a.size(); ++i) v.emplace_back(a[i], i);
    for (std::size_t i = 0; i < b.size(); ++i) v.emplace_back(b[i], a.size() + i);
    for (const auto& [x, i] : v) {
        if (std::isnan(x)) throw PreconditionError("rank-sum test: NaN in sample");
    }
    std::sort(v.begin(), v.end());
    Ranked r;
    r.doubled.assign(n, 0);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && v[j].first == v[i].first) ++j;
        // Ranks i+1..j share (i+1+j)/2.
        const auto twice = static_cast<std::int64_t>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) r.doubled[v[k].second] = twice;
        const double t = static_cast<double>(j - i);
        r.tie_term += t * t * t - t;
        i = j;
    }
    return r;
}

void check(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw PreconditionError("rank-sum test needs two non-empty samples");
}

}  // namespace

double rank_sum_exact_p(std::span<const double> a, std::span<const double> b) {
    check(a, b);
    const std::size_t n = a.size() + b.size();
    if (n > 20) throw PreconditionError("exact rank-sum enumeration limited to 20 values");
    const Ranked r = rank_pooled(a, b);
    const std::int64_t total = std::accumulate(r.doubled.begin(), r.doubled.end(), std::int64_t{0});
    const std::int64_t observed =
        std::accumulate(r.doubled.begin(), r.doubled.begin() + static_cast<std::ptrdiff_t>(a.size()), std::int64_t{0});
    // Compare |n*R - k*T| to avoid fractions: mean of R is k*T/n.
    const auto k = static_cast<std::int64_t>(a.size());
    const auto nn = static_cast<std::int64_t>(n);
    const std::int64_t obs_dev = std::llabs(nn * observed - k * total);

    std::uint64_t extreme = 0, all = 0;
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(a.size()), true);
    do {
        std::int64_t s = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pick[i]) s += r.doubled[i];
        }
        ++all;
        if (std::llabs(nn * s - k * total) >= obs_dev) ++extreme;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return static_cast<double>(extreme) / static_cast<double>(all);
}

RankSumResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b) {
    check(a, b);
    const Ranked r = rank_pooled(a, b);
    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    const double n = n1 + n2;
    const double var = n1 * n2 / 12.0 * ((n + 1.0) - r.tie_term / (n * (n - 1.0)));
    if (!(var > 0.0)) throw DegenerateTestError("rank-sum test: all values are identical");

    std::int64_t twice_sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) twice_sum += r.doubled[i];
    RankSumResult out;
    out.rank_sum = static_cast<double>(twice_sum) / 2.0;
    const double dev = out.rank_sum - n1 * (n + 1.0) / 2.0;
    const double corrected = std::abs(dev) <= 0.5 ? 0.0 : dev - std::copysign(0.5, dev);
    out.w = corrected / std::sqrt(var);
    out.p_normal = std::min(1.0, std::erfc(std::abs(out.w) / std::sqrt(2.0)));
    if (a.size() + b.size() <= kExactRankSumLimit) {
        out.p = rank_sum_exact_p(a, b);
        out.exact = true;
    } else {
        out.p = out.p_normal;
    }
    return out;
}

}  // namespace seedforge
