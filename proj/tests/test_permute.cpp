#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "mdir/data.hpp"
#include "mdir/error.hpp"
#include "mdir/logrank.hpp"
#include "mdir/permute.hpp"
#include "mdir/rng.hpp"
#include "mdir/weights.hpp"

using namespace mdir;

namespace {

WeightSet two_dir() { return verified(make_weight_set({make_rg(0, 0), make_crossing()})); }

TwoSampleData random_sample(RngStream& rng, int n1, int n2) {
    std::vector<Subject> subs;
    for (int g = 1; g <= 2; ++g)
        for (int i = 0; i < (g == 1 ? n1 : n2); ++i)
            subs.push_back({std::ceil(8.0 * rng.exponential(1.0)) / 8.0,
                            rng.next_double() < 0.85 ? 1 : 0, g});
    return from_subjects(std::move(subs));
}

}  // namespace

TEST_CASE("engine and reference implementation agree bit for bit") {
    RngStream rng(21, 0);
    for (int trial = 0; trial < 5; ++trial) {
        TwoSampleData d = random_sample(rng, 12, 15);
        PermConfig cfg;
        cfg.n_perm = 400;
        cfg.seed = 1000 + static_cast<std::uint64_t>(trial);
        PermResult a = permutation_test(d, two_dir(), cfg);
        PermResult b = permutation_test_reference(d, two_dir(), cfg);
        CHECK(a.s_obs == b.s_obs);
        CHECK(a.count_ge == b.count_ge);
        CHECK(a.p_perm == b.p_perm);
        REQUIRE(a.perm_stats.size() == b.perm_stats.size());
        CHECK(a.perm_stats == b.perm_stats);
        CHECK(a.degenerate == b.degenerate);
    }
}

TEST_CASE("results are independent of the worker count") {
    RngStream rng(22, 0);
    TwoSampleData d = random_sample(rng, 20, 20);
    PermConfig cfg;
    cfg.n_perm = 2000;
    cfg.seed = 77;
    cfg.threads = 1;
    PermResult serial = permutation_test(d, two_dir(), cfg);
    cfg.threads = 4;
    PermResult wide = permutation_test(d, two_dir(), cfg);
    CHECK(serial.p_perm == wide.p_perm);
    CHECK(serial.count_ge == wide.count_ge);
    CHECK(serial.perm_stats == wide.perm_stats);
}

TEST_CASE("p value follows the add-one convention") {
    RngStream rng(23, 0);
    TwoSampleData d = random_sample(rng, 8, 8);
    PermConfig cfg;
    cfg.n_perm = 999;
    PermResult res = permutation_test(d, two_dir(), cfg);
    CHECK(res.p_perm == doctest::Approx((1.0 + res.count_ge) / 1000.0).epsilon(1e-15));
    CHECK(res.p_perm > 0.0);
    CHECK(res.p_perm <= 1.0);
}

TEST_CASE("monte carlo agrees with exhaustive enumeration") {
    RngStream rng(24, 0);
    for (int trial = 0; trial < 3; ++trial) {
        TwoSampleData d = random_sample(rng, 4, 4);
        ExhaustiveResult ex = exhaustive_permutation_test(d, two_dir());
        CHECK(ex.n_assignments == 70);
        CHECK(ex.count_ge >= 1);  // the observed assignment is one of them
        PermConfig cfg;
        cfg.n_perm = 40000;
        cfg.seed = 5 + static_cast<std::uint64_t>(trial);
        cfg.keep_stats = false;
        PermResult mc = permutation_test(d, two_dir(), cfg);
        CHECK(mc.s_obs == ex.s_obs);
        const double se = std::sqrt(ex.p_exact * (1.0 - ex.p_exact) / cfg.n_perm);
        CHECK(std::abs(mc.p_perm - ex.p_exact) < 3.0 * se + 2.0 / cfg.n_perm);
    }
}

TEST_CASE("exhaustive enumeration rejects infeasible sizes") {
    RngStream rng(25, 0);
    TwoSampleData d = random_sample(rng, 30, 30);
    try {
        exhaustive_permutation_test(d, two_dir());
        FAIL("expected an Error");
    } catch (const Error& e) {
        CHECK(e.code() == errc::too_many_assignments);
    }
}

TEST_CASE("engine never rebuilds the risk table per replicate") {
    RngStream rng(26, 0);
    TwoSampleData d = random_sample(rng, 10, 10);
    PermConfig cfg;
    cfg.n_perm = 300;

    long before = risk_table_build_count();
    permutation_test(d, two_dir(), cfg);
    long engine_builds = risk_table_build_count() - before;
    CHECK(engine_builds <= 2);

    before = risk_table_build_count();
    permutation_test_reference(d, two_dir(), cfg);
    long reference_builds = risk_table_build_count() - before;
    CHECK(reference_builds >= cfg.n_perm);
}

TEST_CASE("a constant permutation distribution is reported as degenerate") {
    auto d = from_subjects({{0.5, 0, 2}, {1.0, 1, 1}});
    PermConfig cfg;
    cfg.n_perm = 100;
    try {
        permutation_test(d, two_dir(), cfg);
        FAIL("expected an Error");
    } catch (const Error& e) {
        CHECK(e.code() == errc::degenerate_statistic);
    }
}

TEST_CASE("all-censored data are rejected up front") {
    auto d = from_subjects({{1, 0, 1}, {2, 0, 2}, {3, 0, 1}, {4, 0, 2}});
    PermConfig cfg;
    cfg.n_perm = 10;
    try {
        permutation_test(d, two_dir(), cfg);
        FAIL("expected an Error");
    } catch (const Error& e) {
        CHECK(e.code() == errc::no_events);
    }
}

TEST_CASE("config validation") {
    RngStream rng(27, 0);
    TwoSampleData d = random_sample(rng, 5, 5);
    PermConfig cfg;
    cfg.n_perm = 0;
    CHECK_THROWS_AS(permutation_test(d, two_dir(), cfg), Error);
}

TEST_CASE("empirical quantile and randomized decision agree with manual computation") {
    RngStream rng(28, 0);
    TwoSampleData d = random_sample(rng, 15, 15);
    PermConfig cfg;
    cfg.n_perm = 1000;
    cfg.keep_stats = true;
    PermResult res = permutation_test(d, two_dir(), cfg);
    REQUIRE(res.perm_stats.size() == 1000);

    const double alpha = 0.05;
    std::vector<double> sorted = res.perm_stats;
    std::sort(sorted.begin(), sorted.end());
    const double q = res.quantile(alpha);
    long count_gt = 0, count_eq = 0;
    for (double s : res.perm_stats) {
        if (s > q) ++count_gt;
        if (s == q) ++count_eq;
    }
    CHECK(count_gt <= static_cast<long>(std::floor(alpha * 1000)));
    CHECK(count_gt + count_eq > static_cast<long>(std::floor(alpha * 1000)));

    RandomizedDecision rd = res.randomized(alpha);
    CHECK(rd.critical == q);
    CHECK(rd.count_gt == count_gt);
    CHECK(rd.count_eq == count_eq);
    CHECK(rd.gamma >= 0.0);
    CHECK(rd.gamma <= 1.0);
    // the randomized rule exhausts the level exactly
    CHECK(static_cast<double>(count_gt) + rd.gamma * static_cast<double>(count_eq) ==
          doctest::Approx(alpha * 1000).epsilon(1e-9));
}

TEST_CASE("quantile requires retained statistics") {
    RngStream rng(29, 0);
    TwoSampleData d = random_sample(rng, 6, 6);
    PermConfig cfg;
    cfg.n_perm = 50;
    cfg.keep_stats = false;
    PermResult res = permutation_test(d, two_dir(), cfg);
    CHECK(res.perm_stats.empty());
    CHECK_THROWS_AS(res.quantile(0.05), Error);
}
