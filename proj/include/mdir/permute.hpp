#pragma once

#include <cstdint>
#include <vector>

#include "mdir/data.hpp"
#include "mdir/logrank.hpp"
#include "mdir/weights.hpp"

namespace mdir {

struct PermConfig {
    long n_perm = 10000;
    std::uint64_t seed = 1;
    bool keep_stats = true;   // retain the resampled statistics (needed for quantiles)
    bool report_randomized_gamma = false;
    int threads = 0;          // 0 = resolve_threads()
};

// Components of the randomized decision rule at level alpha: reject when
// S > critical, reject with probability gamma when S == critical.
struct RandomizedDecision {
    double critical = 0.0;
    long count_gt = 0;  // resampled statistics strictly above critical
    long count_eq = 0;  // resampled statistics equal to critical
    double gamma = 0.0;
};

struct PermResult {
    double s_obs = 0.0;
    long n_perm = 0;
    std::uint64_t seed = 0;
    long count_ge = 0;       // resampled statistics >= s_obs
    double p_perm = 1.0;     // (1 + count_ge) / (n_perm + 1)
    long degenerate = 0;     // replicates whose covariance matrix was zero
    std::vector<double> perm_stats;  // retained when PermConfig::keep_stats

    // Empirical (1-alpha) quantile of the retained statistics: the
    // ceil((1-alpha) * B)-th order statistic.
    double quantile(double alpha) const;
    RandomizedDecision randomized(double alpha) const;
};

// Monte Carlo permutation test: group labels are reshuffled across the sorted
// observations, everything else is held fixed. Deterministic for a given seed
// regardless of worker count.
PermResult permutation_test(const TwoSampleData& data, const WeightSet& ws,
                            const PermConfig& cfg);

// Naive implementation that rebuilds the risk table for every replicate.
// Slow; kept as the reference the incremental engine is checked against.
// Bit-identical to permutation_test for the same config.
PermResult permutation_test_reference(const TwoSampleData& data, const WeightSet& ws,
                                      const PermConfig& cfg);

struct ExhaustiveResult {
    double s_obs = 0.0;
    long n_assignments = 0;  // C(n, n1)
    long count_ge = 0;
    double p_exact = 1.0;    // count_ge / n_assignments
};

// Full enumeration of the C(n, n1) group assignments. Errors when that count
// exceeds 1e6.
ExhaustiveResult exhaustive_permutation_test(const TwoSampleData& data, const WeightSet& ws);

}  // namespace mdir
