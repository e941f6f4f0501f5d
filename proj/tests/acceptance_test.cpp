// Acceptance gate: one line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mdir/cli.hpp"
#include "mdir/data.hpp"
#include "mdir/error.hpp"
#include "mdir/logrank.hpp"
#include "mdir/numerics.hpp"
#include "mdir/permute.hpp"
#include "mdir/rng.hpp"
#include "mdir/simstudy.hpp"
#include "mdir/weights.hpp"

using namespace mdir;

namespace {

const std::string kGtsg = std::string(MDIR_DATA_DIR) + "/gtsg.csv";

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct Column {
    const char* name;
    std::vector<WeightFn> menu;
    double paper_chi2;
    double paper_perm;
};

std::vector<Column> paper_columns() {
    return {
        {"crossing", {make_crossing()}, 0.002, 0.001},
        {"proportional", {make_rg(0, 0)}, 0.255, 0.256},
        {"early", {make_rg(1, 5)}, 0.005, 0.005},
        {"central", {make_rg(1, 1)}, 0.748, 0.742},
        {"2-dir", {make_rg(0, 0), make_crossing()}, 0.007, 0.007},
        {"4-dir", {make_rg(0, 0), make_rg(1, 1), make_rg(1, 5), make_crossing()}, 0.018, 0.017},
    };
}

WeightSet two_dir() { return menu_two_directions(); }

TwoSampleData random_dataset(RngStream& rng, int n1, int n2, double event_prob, bool ties) {
    std::vector<Subject> subs;
    for (int g = 1; g <= 2; ++g)
        for (int i = 0; i < (g == 1 ? n1 : n2); ++i) {
            double t = rng.exponential(1.0);
            if (ties) t = std::ceil(4.0 * t) / 4.0;
            subs.push_back({t, rng.next_double() < event_prob ? 1 : 0, g});
        }
    return from_subjects(std::move(subs));
}

bool criterion1() {
    const double t0 = now_s();
    auto rt = build_risk_table(ingest(read_survival_csv(kGtsg)));
    bool ok = true;
    double worst = 0.0;
    for (const Column& col : paper_columns()) {
        StatResult res = compute_sn(rt, verified(make_weight_set(col.menu)));
        const double p = chi2_test(res, 0.05).p_chi2;
        worst = std::max(worst, std::abs(p - col.paper_chi2));
        ok = ok && std::abs(p - col.paper_chi2) <= 0.002;
    }
    const double dt = now_s() - t0;
    ok = ok && dt < 1.0;
    std::printf("%s  1  chi2 p-values within 0.002 of the published table "
                "(max dev %.5f, %.2fs)\n",
                ok ? "PASS" : "FAIL", worst, dt);
    return ok;
}

bool criterion2() {
    const double t0 = now_s();
    auto data = ingest(read_survival_csv(kGtsg));
    bool ok = true;
    double worst_z = 0.0;
    for (const Column& col : paper_columns()) {
        PermConfig cfg;
        cfg.n_perm = 10000;
        cfg.seed = 12345;
        cfg.keep_stats = false;
        PermResult pr = permutation_test(data, verified(make_weight_set(col.menu)), cfg);
        const double se = std::sqrt(col.paper_perm * (1.0 - col.paper_perm) / cfg.n_perm);
        const double z = std::abs(pr.p_perm - col.paper_perm) / se;
        worst_z = std::max(worst_z, z);
        ok = ok && z <= 3.0;
    }
    const double dt = now_s() - t0;
    ok = ok && dt < 30.0;
    std::printf("%s  2  permutation p-values within 3 binomial SE of the published table "
                "(max %.2f SE, %.1fs)\n",
                ok ? "PASS" : "FAIL", worst_z, dt);
    return ok;
}

bool criterion3() {
    const double t0 = now_s();
    const std::pair<int, int> sizes[4] = {{50, 50}, {30, 70}, {100, 100}, {150, 50}};
    const CensoringSpec designs[3] = {CensoringSpec::none(), CensoringSpec::equal(0.15),
                                      CensoringSpec::unequal(0.10, 0.20)};
    double anchor_perm = -1.0;
    int liberal = 0;
    int idx = 0;
    for (const auto& [n1, n2] : sizes) {
        for (int c = 0; c < 3; ++c, ++idx) {
            SimScenario sc;
            sc.id = "t1";
            sc.n1 = n1;
            sc.n2 = n2;
            sc.censoring = designs[c];
            sc.weight_menu = two_dir();
            sc.n_sim = 2000;
            sc.n_perm = 500;
            sc.seed = derive_seed(20260818u, static_cast<std::uint64_t>(idx));
            SimReport rep = run_type1_study(sc);
            const double perm = rep.methods[0].rate;
            const double chi2 = rep.methods[1].rate;
            if (n1 == 50 && n2 == 50 && c == 1) anchor_perm = perm;
            if (chi2 > perm) ++liberal;
        }
    }
    const double dt = now_s() - t0;
    const bool ok =
        anchor_perm >= 0.040 && anchor_perm <= 0.062 && liberal >= 7 && dt <= 600.0;
    std::printf("%s  3  null rejection rates: anchor permutation %.2f%% in [4.0,6.2], "
                "chi2 liberal in %d/12 scenarios (%.0fs)\n",
                ok ? "PASS" : "FAIL", 100.0 * anchor_perm, liberal, dt);
    return ok;
}

bool criterion4() {
    const double t0 = now_s();
    struct Fig {
        const char* name;
        WeightFn alt;
        WeightFn mismatched;
        double theta_max;
    };
    const Fig figs[4] = {
        {"proportional", make_rg(0, 0), make_crossing(), 0.9},
        {"crossing", make_crossing(), make_rg(0, 0), 0.9},
        {"central", make_rg(1, 1), make_crossing(), 4.5},
        {"early", make_rg(0, 5), make_crossing(), 4.5},
    };
    const int grid = 10, n_sim = 500;
    const double band3 = 3.0 * std::sqrt(0.05 * 0.95 / n_sim);
    bool start_ok = true, flat_ok = true, top_ok = true, dominate_ok = true;
    for (int f = 0; f < 4; ++f) {
        std::vector<SimScenario> scenarios;
        for (int k = 0; k < grid; ++k) {
            SimScenario sc;
            sc.id = figs[f].name;
            sc.n1 = 50;
            sc.n2 = 50;
            sc.alternative =
                Alternative::hazard(figs[f].theta_max * k / (grid - 1), figs[f].alt);
            sc.mismatched = figs[f].mismatched;
            sc.n_sim = n_sim;
            sc.n_perm = 500;
            sc.seed = derive_seed(777u, static_cast<std::uint64_t>(100 * f + k));
            scenarios.push_back(std::move(sc));
        }
        std::vector<SimReport> reps = run_power_study(scenarios);
        for (const MethodRate& mr : reps[0].methods)
            start_ok = start_ok && std::abs(mr.rate - 0.05) <= band3;
        if (f == 1) {
            for (const SimReport& rep : reps)
                flat_ok = flat_ok && std::abs(rep.methods[3].rate - 0.05) <= band3;
            top_ok = top_ok && reps[grid - 1].methods[1].rate > 0.30;
        }
        for (int k = grid - 3; k < grid; ++k) {
            const MethodRate& four = reps[static_cast<std::size_t>(k)].methods[0];
            const MethodRate& single = reps[static_cast<std::size_t>(k)].methods[2];
            const double slack = 2.0 * std::sqrt(four.se * four.se + single.se * single.se);
            dominate_ok = dominate_ok && single.rate >= four.rate - slack;
        }
    }
    const double dt = now_s() - t0;
    const bool ok = start_ok && flat_ok && top_ok && dominate_ok;
    std::printf("%s  4  power curves: start at level %s, mismatched flat %s, "
                "2-dir top %s, matched single dominates 4-dir %s (%.0fs)\n",
                ok ? "PASS" : "FAIL", start_ok ? "yes" : "NO", flat_ok ? "yes" : "NO",
                top_ok ? "yes" : "NO", dominate_ok ? "yes" : "NO", dt);
    return ok;
}

bool criterion5() {
    const double t0 = now_s();
    RngStream rng(505, 0);
    bool ok = true;
    double worst = 0.0;
    int done = 0;
    while (done < 50) {
        TwoSampleData d = random_dataset(rng, 4, 4, 0.85, false);
        ExhaustiveResult ex;
        try {
            ex = exhaustive_permutation_test(d, two_dir());
        } catch (const Error&) {
            continue;  // all censored or degenerate draw; take another
        }
        ++done;
        PermConfig cfg;
        cfg.n_perm = 100000;
        cfg.seed = 600 + static_cast<std::uint64_t>(done);
        cfg.keep_stats = false;
        PermResult mc = permutation_test(d, two_dir(), cfg);
        const double se = std::sqrt(ex.p_exact * (1.0 - ex.p_exact) / cfg.n_perm);
        const double dev = std::abs(mc.p_perm - ex.p_exact);
        worst = std::max(worst, dev - 3.0 * se);
        ok = ok && dev <= 3.0 * se + 2.0 / cfg.n_perm;
    }
    const double dt = now_s() - t0;
    std::printf("%s  5  Monte Carlo matches exhaustive enumeration on 50 small datasets "
                "(worst overshoot %.2g, %.0fs)\n",
                ok ? "PASS" : "FAIL", worst, dt);
    return ok;
}

bool criterion6() {
    const double t0 = now_s();
    const int n_sim = 5000;
    SimScenario sc;
    sc.n1 = 100;
    sc.n2 = 100;
    sc.weight_menu = two_dir();
    sc.seed = 606;
    std::vector<double> stats(n_sim);
    for (int r = 0; r < n_sim; ++r) {
        TwoSampleData d = sample_dataset(sc, static_cast<std::uint64_t>(r));
        stats[static_cast<std::size_t>(r)] = compute_sn(build_risk_table(d), sc.weight_menu).s_n;
    }
    double sum = 0.0, sumsq = 0.0;
    for (double s : stats) {
        sum += s;
        sumsq += s * s;
    }
    const double mean = sum / n_sim;
    const double sd = std::sqrt((sumsq - n_sim * mean * mean) / (n_sim - 1));
    const double mean_dev = std::abs(mean - 2.0);
    const double mean_tol = 3.0 * sd / std::sqrt(static_cast<double>(n_sim));

    std::sort(stats.begin(), stats.end());
    double ks = 0.0;
    for (int i = 0; i < n_sim; ++i) {
        const double f = 1.0 - std::exp(-0.5 * stats[static_cast<std::size_t>(i)]);
        ks = std::max(ks, std::max(f - i / static_cast<double>(n_sim),
                                   (i + 1) / static_cast<double>(n_sim) - f));
    }
    const double ks_crit = 1.62762 / std::sqrt(static_cast<double>(n_sim));
    const double dt = now_s() - t0;
    const bool ok = mean_dev <= mean_tol && ks < ks_crit;
    std::printf("%s  6  null distribution: mean %.3f (tol %.3f around 2), "
                "KS %.4f < %.4f (%.0fs)\n",
                ok ? "PASS" : "FAIL", mean, mean_tol, ks, ks_crit, dt);
    return ok;
}

bool criterion7() {
    const double t0 = now_s();
    RngStream rng(707, 0);
    bool ok = true;
    int checked = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const int n1 = 5 + static_cast<int>(rng.below(21));
        const int n2 = 5 + static_cast<int>(rng.below(21));
        TwoSampleData d = random_dataset(rng, n1, n2, 0.8, true);
        WeightSet ws = trial % 2 == 0 ? two_dir() : menu_four_directions();
        StatResult res;
        try {
            res = compute_sn(build_risk_table(d), ws);
        } catch (const Error&) {
            continue;
        }
        ++checked;
        for (const DirectionDiag& diag : res.per_direction)
            ok = ok && res.s_n >= diag.studentized_sq - 1e-9;
    }
    // the same inequality along permutation replicates
    for (int trial = 0; trial < 100; ++trial) {
        TwoSampleData d = random_dataset(rng, 12, 12, 0.85, true);
        LogrankKernel kernel(d, two_dir());
        if (!kernel.has_events()) continue;
        std::vector<std::uint8_t> c1 = kernel.observed_c1();
        for (int b = 0; b < 100; ++b) {
            shuffle(c1, rng);
            StatResult res = kernel.result_for(c1);
            for (const DirectionDiag& diag : res.per_direction)
                ok = ok && res.s_n >= diag.studentized_sq - 1e-9;
        }
    }
    const double dt = now_s() - t0;
    std::printf("%s  7  S dominates every studentized direction on %d datasets "
                "and 10000 permutation replicates (%.0fs)\n",
                ok ? "PASS" : "FAIL", checked, dt);
    return ok;
}

bool criterion8() {
    const double t0 = now_s();
    bool ok = true;
    double worst_z = 0.0;
    for (const WeightFn& dir : {make_rg(0, 0), make_crossing()}) {
        AsymptoticPowerSpec spec;
        spec.weight_menu = two_dir();
        spec.direction = dir;
        const AsymptoticPower ap = asymptotic_power(spec);

        SimScenario sc;
        sc.id = dir.tag;
        sc.n1 = 500;
        sc.n2 = 500;
        sc.alternative = Alternative::local(dir, 500, 500);
        sc.weight_menu = two_dir();
        sc.n_sim = 4000;
        sc.n_perm = 0;
        sc.calibration = Calibration::chi2;
        sc.seed = derive_seed(808u, std::hash<std::string>{}(dir.tag));
        SimReport rep = run_rejection_study(sc);
        const double se = std::sqrt(ap.power * (1.0 - ap.power) / sc.n_sim);
        const double z = std::abs(rep.rejection_rate - ap.power) / se;
        worst_z = std::max(worst_z, z);
        ok = ok && z <= 4.0;
    }
    const double dt = now_s() - t0;
    std::printf("%s  8  local-alternative power matches the analytic value "
                "(max %.2f of 4 allowed SE, %.0fs)\n",
                ok ? "PASS" : "FAIL", worst_z, dt);
    return ok;
}

bool criterion9() {
    const double t0 = now_s();
    bool ok = true;
    RngStream rng(909, 0);

    // Penrose conditions on random PSD matrices
    for (int trial = 0; trial < 50 && ok; ++trial) {
        const int m = 1 + static_cast<int>(rng.below(5));
        const int rank = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
        std::vector<std::vector<double>> basis(static_cast<std::size_t>(rank),
                                               std::vector<double>(static_cast<std::size_t>(m)));
        for (auto& v : basis)
            for (double& x : v) x = 2.0 * rng.next_double() - 1.0;
        SymMatrix a(m);
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) {
                double s = 0.0;
                for (int k = 0; k < rank; ++k)
                    s += basis[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] *
                         basis[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
                a.set(i, j, s);
            }
        auto [pinv, r] = pseudo_inverse(a);
        ok = ok && r == rank;
        auto mul = [m](const SymMatrix& x, const SymMatrix& y) {
            SymMatrix z(m);
            for (int i = 0; i < m; ++i)
                for (int j = i; j < m; ++j) {
                    double s = 0.0;
                    for (int k = 0; k < m; ++k) s += x(i, k) * y(k, j);
                    z.set(i, j, s);
                }
            return z;
        };
        SymMatrix apa = mul(mul(a, pinv), a);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) ok = ok && std::abs(apa(i, j) - a(i, j)) < 1e-9;
    }

    // chi-square round trips
    for (int df : {1, 2, 3, 4, 6})
        for (double p : {0.01, 0.05, 0.5, 0.95, 0.999})
            ok = ok && std::abs(chi2_cdf(chi2_quantile(p, df), df) - p) < 1e-9;

    // noncentral CDF against Monte Carlo
    auto normal = [&rng]() {
        const double u1 = std::max(rng.next_double(), 1e-300);
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586 * rng.next_double());
    };
    for (double lambda : {1.0, 4.0}) {
        const int n = 200000, df = 2;
        const double x = 5.991464547;
        int below = 0;
        for (int i = 0; i < n; ++i) {
            const double z1 = normal() + std::sqrt(lambda);
            const double z2 = normal();
            if (z1 * z1 + z2 * z2 <= x) ++below;
        }
        const double est = static_cast<double>(below) / n;
        const double se = std::sqrt(est * (1.0 - est) / n);
        ok = ok && std::abs(noncentral_chi2_cdf(x, df, lambda) - est) < 4.0 * se + 1e-6;
    }
    const double dt = now_s() - t0;
    std::printf("%s  9  numerics: Penrose conditions, quantile round trips, "
                "noncentral CDF vs Monte Carlo (%.0fs)\n",
                ok ? "PASS" : "FAIL", dt);
    return ok;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

bool criterion10() {
    const double t0 = now_s();
    bool ok = true;

    // worker count must not change permutation results
    RngStream rng(1010, 0);
    TwoSampleData d = random_dataset(rng, 25, 25, 0.85, true);
    PermConfig cfg;
    cfg.n_perm = 4000;
    cfg.seed = 11;
    cfg.threads = 1;
    PermResult serial = permutation_test(d, two_dir(), cfg);
    cfg.threads = 3;
    PermResult wide = permutation_test(d, two_dir(), cfg);
    ok = ok && serial.p_perm == wide.p_perm && serial.perm_stats == wide.perm_stats;

    // nor simulation study reports
    SimScenario sc;
    sc.id = "det";
    sc.n1 = 30;
    sc.n2 = 30;
    sc.censoring = CensoringSpec::equal(0.15);
    sc.weight_menu = two_dir();
    sc.n_sim = 200;
    sc.n_perm = 100;
    sc.seed = 12;
    sc.threads = 1;
    SimReport a = run_type1_study(sc);
    sc.threads = 3;
    SimReport b = run_type1_study(sc);
    ok = ok && a.rejection_rate == b.rejection_rate &&
         a.methods[1].rate == b.methods[1].rate;

    // end to end through the binary with different MDIR_THREADS
    std::ofstream("acc_t1.json") << "{\"kind\":\"type1\",\"sizes\":[[30,30]],"
                                    "\"censoring\":[\"equal\"],\"n_sim\":150,"
                                    "\"n_perm\":100,\"seed\":99}";
    const std::string bin = MDIR_BIN;
    ok = ok &&
         std::system(("MDIR_THREADS=1 " + bin +
                      " simulate type1 --input acc_t1.json --out acc_a.csv")
                         .c_str()) == 0;
    ok = ok &&
         std::system(("MDIR_THREADS=4 " + bin +
                      " simulate type1 --input acc_t1.json --out acc_b.csv")
                         .c_str()) == 0;
    ok = ok &&
         std::system(("MDIR_THREADS=1 " + bin + " test --input " + kGtsg +
                      " --nperm 3000 --format json --out acc_a.json")
                         .c_str()) == 0;
    ok = ok &&
         std::system(("MDIR_THREADS=4 " + bin + " test --input " + kGtsg +
                      " --nperm 3000 --format json --out acc_b.json")
                         .c_str()) == 0;
    const std::string csv_a = slurp("acc_a.csv"), csv_b = slurp("acc_b.csv");
    const std::string json_a = slurp("acc_a.json"), json_b = slurp("acc_b.json");
    ok = ok && !csv_a.empty() && csv_a == csv_b && !json_a.empty() && json_a == json_b;
    for (const char* f : {"acc_t1.json", "acc_a.csv", "acc_b.csv", "acc_a.json", "acc_b.json"})
        std::remove(f);

    const double dt = now_s() - t0;
    std::printf("%s 10  byte-identical output across worker counts, in process "
                "and through the binary (%.0fs)\n",
                ok ? "PASS" : "FAIL", dt);
    return ok;
}

}  // namespace

int main() {
    const double t0 = now_s();
    int failures = 0;
    failures += criterion1() ? 0 : 1;
    failures += criterion2() ? 0 : 1;
    failures += criterion3() ? 0 : 1;
    failures += criterion4() ? 0 : 1;
    failures += criterion5() ? 0 : 1;
    failures += criterion6() ? 0 : 1;
    failures += criterion7() ? 0 : 1;
    failures += criterion8() ? 0 : 1;
    failures += criterion9() ? 0 : 1;
    failures += criterion10() ? 0 : 1;
    std::printf("%s: %d of 10 criteria passed (%.0fs total)\n",
                failures == 0 ? "ACCEPTED" : "REJECTED", 10 - failures, now_s() - t0);
    return failures;
}
