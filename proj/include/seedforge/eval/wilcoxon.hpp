#pragma once

#include <cstddef>
#include <span>

namespace seedforge {

// Combined sample size at or below which rank_sum_test reports the exact
// permutation p-value.
inline constexpr std::size_t kExactRankSumLimit = 12;

struct RankSumResult {
    double w = 0.0;         // standardized statistic (z) for sample a
    double rank_sum = 0.0;  // sum of a's midranks
    double p = 1.0;         // two-sided; exact when `exact`
    double p_normal = 1.0;  // normal approximation, always computed
    bool exact = false;
};

// Wilcoxon rank-sum test of a against b. Midranks for ties, tie-corrected
// variance and a continuity correction of 1/2 on the rank sum. Throws
// PreconditionError on an empty sample and DegenerateTestError when every
// value is identical.
RankSumResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b);

// Two-sided p from the permutation distribution of a's rank sum over all
// C(n, |a|) splits of the pooled midranks. Limited to 20 pooled values.
double rank_sum_exact_p(std::span<const double> a, std::span<const double> b);

}  // namespace seedforge
