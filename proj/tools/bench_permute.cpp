// Benchmark of the permutation engines: the naive reference (risk table
// rebuilt per replicate) against the incremental kernel, serial and with
// OpenMP workers. Also cross-checks that all paths agree bit for bit.
//
// usage: bench_permute [n] [n_perm] [seed]

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "mdir/data.hpp"
#include "mdir/permute.hpp"
#include "mdir/rng.hpp"
#include "mdir/threads.hpp"
#include "mdir/weights.hpp"

namespace {

mdir::TwoSampleData synthetic(int n, std::uint64_t seed) {
    mdir::RngStream rng(seed, 0);
    std::vector<mdir::Subject> subjects;
    subjects.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double t = rng.exponential(1.0);
        double c = rng.exponential(0.2);
        mdir::Subject s;
        s.time = t < c ? t : c;
        s.status = t < c ? 1 : 0;
        s.group = i < n / 2 ? 1 : 2;
        subjects.push_back(s);
    }
    return mdir::from_subjects(std::move(subjects));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    int n = argc > 1 ? std::atoi(argv[1]) : 200;
    long n_perm = argc > 2 ? std::atol(argv[2]) : 20000;
    std::uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 42;
    if (n < 4 || n_perm < 1) {
        std::fprintf(stderr, "usage: %s [n >= 4] [n_perm >= 1] [seed]\n", argv[0]);
        return 2;
    }

    mdir::TwoSampleData data = synthetic(n, seed);
    mdir::WeightSet ws = mdir::verified(
        mdir::make_weight_set({mdir::make_rg(0, 0), mdir::make_crossing()}));

    std::printf("n = %d, n_perm = %ld, seed = %" PRIu64 ", directions = %d\n", n, n_perm, seed,
                ws.m());

    mdir::PermConfig cfg;
    cfg.seed = seed;
    cfg.keep_stats = true;

    // reference engine on a reduced replicate count (it is the slow one)
    long b_ref = n_perm < 2000 ? n_perm : 2000;
    cfg.n_perm = b_ref;
    cfg.threads = 1;
    auto t0 = std::chrono::steady_clock::now();
    mdir::PermResult ref = mdir::permutation_test_reference(data, ws, cfg);
    double ref_s = seconds_since(t0);
    double ref_rate = static_cast<double>(b_ref) / ref_s;
    std::printf("%-28s %8ld perms  %8.3f s  %12.0f perms/s\n", "reference (rebuild)", b_ref,
                ref_s, ref_rate);

    t0 = std::chrono::steady_clock::now();
    mdir::PermResult inc_small = mdir::permutation_test(data, ws, cfg);
    double inc_small_s = seconds_since(t0);
    std::printf("%-28s %8ld perms  %8.3f s  %12.0f perms/s  (%.1fx)\n", "incremental, 1 thread",
                b_ref, inc_small_s, static_cast<double>(b_ref) / inc_small_s,
                ref_s / inc_small_s);

    bool same = ref.count_ge == inc_small.count_ge && ref.s_obs == inc_small.s_obs;
    for (std::size_t i = 0; same && i < ref.perm_stats.size(); ++i)
        same = ref.perm_stats[i] == inc_small.perm_stats[i];
    std::printf("reference vs incremental: %s\n",
                same ? "bit-identical" : "MISMATCH (bug!)");
    if (!same) return 1;

    cfg.n_perm = n_perm;
    std::vector<double> base_stats;
    for (int threads : {1, 2, 4, 8}) {
        if (threads > 1 && threads > mdir::resolve_threads(threads)) break;
        cfg.threads = threads;
        t0 = std::chrono::steady_clock::now();
        mdir::PermResult r = mdir::permutation_test(data, ws, cfg);
        double s = seconds_since(t0);
        char label[64];
        std::snprintf(label, sizeof label, "incremental, %d thread%s", threads,
                      threads == 1 ? "" : "s");
        std::printf("%-28s %8ld perms  %8.3f s  %12.0f perms/s  (%.1fx vs reference)\n", label,
                    n_perm, s, static_cast<double>(n_perm) / s,
                    ref_rate > 0 ? (static_cast<double>(n_perm) / s) / ref_rate : 0.0);
        if (threads == 1) {
            base_stats = r.perm_stats;
        } else {
            bool eq = base_stats == r.perm_stats;
            if (!eq) {
                std::printf("thread count changed the results (bug!)\n");
                return 1;
            }
        }
    }
    std::printf("all engines agree\n");
    return 0;
}
