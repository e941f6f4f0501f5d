#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdir/data.hpp"
#include "mdir/numerics.hpp"
#include "mdir/weights.hpp"

namespace mdir {

struct DirectionDiag {
    std::string tag;
    double t_n = 0.0;            // weighted logrank statistic for this direction
    double sigma2 = 0.0;         // its variance estimate
    double studentized_sq = 0.0; // t_n^2 / sigma2, 0 when sigma2 == 0
};

struct StatResult {
    std::vector<double> t_vec;
    SymMatrix sigma_hat;
    double s_n = 0.0;
    int df_used = 0;
    std::vector<DirectionDiag> per_direction;
};

struct TestOutcome {
    StatResult stat;
    double p_chi2 = 1.0;
    double alpha = 0.05;
    bool reject = false;

    bool reject_at(double a) const { return p_chi2 <= a; }
};

// The statistic processes tied events sequentially in a canonical order
// (events before censorings within a time, group-1 events first), so results
// depend only on the per-time counts, never on input row order.
std::vector<double> compute_t_vec(const RiskTable& rt, const WeightSet& ws);
SymMatrix compute_sigma(const RiskTable& rt, const WeightSet& ws);
StatResult compute_sn(const RiskTable& rt, const WeightSet& ws);
TestOutcome chi2_test(const StatResult& stat, double alpha);

// Quadratic form through the Moore-Penrose inverse; also reports the rank of
// sigma. Shared by every path that turns (T, Sigma) into S so that the plain
// test, the permutation engine and its serial reference produce bit-identical
// values.
double sn_from(const std::vector<double>& t, const SymMatrix& sigma, int& rank_out);

// Precomputed, label-independent view of a dataset for repeated evaluation
// under permuted group assignments. The pooled rows (t, y, d, km_left) and the
// per-row weight values are fixed once; only the group-1 counts (y1, d1) are
// derived per assignment.
class LogrankKernel {
public:
    LogrankKernel(const TwoSampleData& data, const WeightSet& ws);

    int n() const { return n_; }
    int n1() const { return n1_; }
    int m() const { return m_; }
    bool has_events() const { return !row_y_.empty(); }

    // Group-1 indicator of the original data along sorted time order.
    const std::vector<std::uint8_t>& observed_c1() const { return observed_c1_; }
    // Subject index occupying each sorted position.
    const std::vector<int>& sorted_order() const { return order_; }

    struct Scratch {
        std::vector<int> y1;
        std::vector<int> d1;
        std::vector<double> t;
        SymMatrix sigma;
    };
    Scratch make_scratch() const;

    // T and Sigma for the assignment c1 (indexed by sorted position).
    void stats_for(const std::vector<std::uint8_t>& c1, Scratch& s) const;

    // Full StatResult (with per-direction diagnostics) for an assignment.
    StatResult result_for(const std::vector<std::uint8_t>& c1) const;

private:
    void group_counts(const std::vector<std::uint8_t>& c1, std::vector<int>& y1,
                      std::vector<int>& d1) const;

    int n_ = 0;
    int n1_ = 0;
    int m_ = 0;
    bool verified_independent_ = false;
    double scale_ = 0.0;  // n / (n1 n2)
    std::vector<std::string> tags_;

    std::vector<int> order_;
    std::vector<std::uint8_t> observed_c1_;

    // event rows only
    std::vector<int> row_y_;
    std::vector<int> row_d_;
    std::vector<double> weight_values_;   // row-major (#event rows) x m
    std::vector<int> row_of_pos_begin_;   // per sorted position: event row starting here, else -1
    std::vector<int> event_pos_;          // sorted positions carrying an event, grouped by row
    std::vector<int> event_pos_offset_;   // per event row: [offset[j], offset[j+1]) into event_pos_
};

}  // namespace mdir
