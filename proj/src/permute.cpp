#include "mdir/permute.hpp"

#include <algorithm>
#include <cmath>

#include "mdir/error.hpp"
#include "mdir/rng.hpp"
#include "mdir/threads.hpp"

namespace mdir {

namespace {

void check_config(const PermConfig& cfg) {
    if (cfg.n_perm < 1) fail(errc::bad_config, "n_perm must be at least 1");
}

bool zero_sigma(const SymMatrix& sigma) {
    for (int i = 0; i < sigma.dim(); ++i)
        if (sigma(i, i) != 0.0) return false;
    return true;
}

void check_degeneracy(long degenerate, long n_perm) {
    if (degenerate * 100 > n_perm * 99)
        fail(errc::degenerate_statistic,
             "more than 99% of the resampled covariance matrices were zero; "
             "the permutation distribution is degenerate");
}

PermResult finish(double s_obs, const PermConfig& cfg, std::vector<double>&& stats,
                  long degenerate) {
    PermResult res;
    res.s_obs = s_obs;
    res.n_perm = cfg.n_perm;
    res.seed = cfg.seed;
    res.degenerate = degenerate;
    check_degeneracy(degenerate, cfg.n_perm);
    long ge = 0;
    for (double s : stats)
        if (s >= s_obs) ++ge;
    res.count_ge = ge;
    res.p_perm = static_cast<double>(1 + ge) / static_cast<double>(cfg.n_perm + 1);
    if (cfg.keep_stats) res.perm_stats = std::move(stats);
    return res;
}

unsigned long long binom_capped(int n, int k, unsigned long long cap) {
    if (k < 0 || k > n) return 0;
    unsigned __int128 c = 1;
    for (int i = 1; i <= k; ++i) {
        c = c * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        if (c > cap) return cap + 1;
    }
    return static_cast<unsigned long long>(c);
}

}  // namespace

double PermResult::quantile(double alpha) const {
    if (!(alpha > 0.0 && alpha < 1.0))
        fail(errc::bad_config, "alpha must lie strictly between 0 and 1");
    if (perm_stats.empty())
        fail(errc::bad_config, "permutation sample was not retained (keep_stats = false)");
    std::vector<double> sorted = perm_stats;
    std::sort(sorted.begin(), sorted.end());
    const long b = static_cast<long>(sorted.size());
    long idx = static_cast<long>(std::ceil((1.0 - alpha) * static_cast<double>(b)));
    if (idx < 1) idx = 1;
    if (idx > b) idx = b;
    return sorted[static_cast<std::size_t>(idx - 1)];
}

RandomizedDecision PermResult::randomized(double alpha) const {
    RandomizedDecision rd;
    rd.critical = quantile(alpha);
    for (double s : perm_stats) {
        if (s > rd.critical)
            ++rd.count_gt;
        else if (s == rd.critical)
            ++rd.count_eq;
    }
    if (rd.count_eq > 0) {
        const double b = static_cast<double>(perm_stats.size());
        double g = (alpha * b - static_cast<double>(rd.count_gt)) /
                   static_cast<double>(rd.count_eq);
        rd.gamma = std::clamp(g, 0.0, 1.0);
    }
    return rd;
}

PermResult permutation_test(const TwoSampleData& data, const WeightSet& ws,
                            const PermConfig& cfg) {
    check_config(cfg);
    LogrankKernel kernel(data, ws);
    if (!kernel.has_events())
        fail(errc::no_events, "all observations are censored; the statistic is undefined");

    LogrankKernel::Scratch obs = kernel.make_scratch();
    kernel.stats_for(kernel.observed_c1(), obs);
    int rank = 0;
    const double s_obs = sn_from(obs.t, obs.sigma, rank);

    const long b_total = cfg.n_perm;
    const int threads = cfg.threads > 0 ? resolve_threads(cfg.threads) : resolve_threads();
    std::vector<double> stats(static_cast<std::size_t>(b_total));
    std::vector<std::uint8_t> degen(static_cast<std::size_t>(b_total), 0);

    std::vector<LogrankKernel::Scratch> scratch;
    std::vector<std::vector<std::uint8_t>> labels(static_cast<std::size_t>(threads));
    scratch.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) scratch.push_back(kernel.make_scratch());

    parallel_for(b_total, threads, [&](std::int64_t b) {
        const int w = worker_id();
        auto& s = scratch[static_cast<std::size_t>(w)];
        auto& c1 = labels[static_cast<std::size_t>(w)];
        c1 = kernel.observed_c1();
        RngStream rng(cfg.seed, static_cast<std::uint64_t>(b));
        shuffle(c1, rng);
        kernel.stats_for(c1, s);
        int r = 0;
        stats[static_cast<std::size_t>(b)] = sn_from(s.t, s.sigma, r);
        degen[static_cast<std::size_t>(b)] = zero_sigma(s.sigma) ? 1 : 0;
    });

    long degenerate = 0;
    for (std::uint8_t d : degen) degenerate += d;
    return finish(s_obs, cfg, std::move(stats), degenerate);
}

PermResult permutation_test_reference(const TwoSampleData& data, const WeightSet& ws,
                                      const PermConfig& cfg) {
    check_config(cfg);
    LogrankKernel kernel(data, ws);  // only for the sorted order and label vector
    if (!kernel.has_events())
        fail(errc::no_events, "all observations are censored; the statistic is undefined");
    const std::vector<int>& order = kernel.sorted_order();

    const double s_obs = compute_sn(build_risk_table(data), ws).s_n;

    const long b_total = cfg.n_perm;
    std::vector<double> stats(static_cast<std::size_t>(b_total));
    long degenerate = 0;
    TwoSampleData perm = data;
    for (long b = 0; b < b_total; ++b) {
        std::vector<std::uint8_t> c1 = kernel.observed_c1();
        RngStream rng(cfg.seed, static_cast<std::uint64_t>(b));
        shuffle(c1, rng);
        for (int k = 0; k < kernel.n(); ++k)
            perm.subjects[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])].group =
                c1[static_cast<std::size_t>(k)] ? 1 : 2;
        StatResult sr = compute_sn(build_risk_table(perm), ws);
        stats[static_cast<std::size_t>(b)] = sr.s_n;
        if (zero_sigma(sr.sigma_hat)) ++degenerate;
    }
    return finish(s_obs, cfg, std::move(stats), degenerate);
}

ExhaustiveResult exhaustive_permutation_test(const TwoSampleData& data, const WeightSet& ws) {
    constexpr unsigned long long kMaxAssignments = 1000000;
    const unsigned long long total =
        binom_capped(data.n(), data.n1, kMaxAssignments);
    if (total > kMaxAssignments)
        fail(errc::too_many_assignments,
             "C(n, n1) exceeds 1e6; exhaustive enumeration is not feasible");

    LogrankKernel kernel(data, ws);
    if (!kernel.has_events())
        fail(errc::no_events, "all observations are censored; the statistic is undefined");

    LogrankKernel::Scratch s = kernel.make_scratch();
    kernel.stats_for(kernel.observed_c1(), s);
    int rank = 0;
    const double s_obs = sn_from(s.t, s.sigma, rank);

    const int n = kernel.n();
    const int k = kernel.n1();
    std::vector<int> comb(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) comb[static_cast<std::size_t>(i)] = i;
    std::vector<std::uint8_t> c1(static_cast<std::size_t>(n));

    ExhaustiveResult res;
    res.s_obs = s_obs;
    res.n_assignments = static_cast<long>(total);
    while (true) {
        std::fill(c1.begin(), c1.end(), 0);
        for (int i : comb) c1[static_cast<std::size_t>(i)] = 1;
        kernel.stats_for(c1, s);
        int r = 0;
        if (sn_from(s.t, s.sigma, r) >= s_obs) ++res.count_ge;

        // advance to the next k-subset in lexicographic order
        int i = k - 1;
        while (i >= 0 && comb[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++comb[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
    res.p_exact = static_cast<double>(res.count_ge) / static_cast<double>(res.n_assignments);
    return res;
}

}  // namespace mdir
