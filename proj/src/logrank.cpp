#include "mdir/logrank.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "mdir/error.hpp"

namespace mdir {

namespace {

// Tied events are processed one at a time in a fixed order: within a tied
// time, events come before censorings and group-1 events before group-2.
// Each event sees the at-risk set left after the events already handled, and
// the pooled survival estimate steps between them, so the statistic depends
// only on the per-time counts and never on input row order.
//
// Every caller funnels through this one pass so the floating-point operation
// order is identical in the plain test, the permutation engine, and the
// serial reference engine. weight_values holds m weights per event slot,
// slots in row order (see push_slot_weights).
void accumulate(int rows, const int* y, const int* d, const int* y1, const int* d1,
                const double* weight_values, int m, double scale,
                std::vector<double>& t, SymMatrix& sigma) {
    t.assign(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) sigma.set(i, j, 0.0);

    const double* w = weight_values;
    for (int r = 0; r < rows; ++r) {
        const int yr = y[r];
        const int dr = d[r];
        const int y1r = y1[r];
        const int d1r = d1[r];
        for (int s = 0; s < dr; ++s, w += m) {
            const int ys = yr - s;
            const int y1s = s < d1r ? y1r - s : y1r - d1r;
            const double p = static_cast<double>(y1s) / static_cast<double>(ys);
            const double g = (s < d1r ? 1.0 : 0.0) - p;
            const double q = ys > 1 ? p * (1.0 - p) : 0.0;
            for (int i = 0; i < m; ++i) t[static_cast<std::size_t>(i)] += w[i] * g;
            for (int i = 0; i < m; ++i)
                for (int j = i; j < m; ++j) sigma.set(i, j, sigma(i, j) + (w[i] * w[j]) * q);
        }
    }

    const double root_scale = std::sqrt(scale);
    for (int i = 0; i < m; ++i) t[static_cast<std::size_t>(i)] *= root_scale;
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) sigma.set(i, j, sigma(i, j) * scale);
}

// Weight values at each event slot of a row. The first slot sits at the
// row's left limit of the pooled survival scale; subsequent slots step the
// survival estimate through the row's events one at a time.
void push_slot_weights(const WeightSet& ws, int y, int d, double km_left,
                       std::vector<double>& out) {
    double surv = 1.0 - km_left;
    double u = km_left;
    for (int j = 0; j < d; ++j) {
        for (const WeightFn& wf : ws.weights) out.push_back(eval(wf, u));
        surv *= 1.0 - 1.0 / static_cast<double>(y - j);
        u = 1.0 - surv;
    }
}

struct RowArrays {
    std::vector<int> y, d, y1, d1;
    std::vector<double> w;  // m weights per event slot, slots in row order
    int rows = 0;
    double scale = 0.0;
};

RowArrays event_rows_of(const RiskTable& rt, const WeightSet& ws) {
    if (rt.total_events() == 0)
        fail(errc::no_events, "all observations are censored; the statistic is undefined");
    RowArrays a;
    for (const RiskRow& row : rt.rows) {
        if (row.d == 0) continue;
        a.y.push_back(row.y);
        a.d.push_back(row.d);
        a.y1.push_back(row.y1);
        a.d1.push_back(row.d1);
        push_slot_weights(ws, row.y, row.d, row.km_left, a.w);
    }
    a.rows = static_cast<int>(a.y.size());
    a.scale = static_cast<double>(rt.n) /
              (static_cast<double>(rt.n1) * static_cast<double>(rt.n2));
    return a;
}

std::vector<DirectionDiag> direction_diags(const WeightSet& ws, const std::vector<double>& t,
                                           const SymMatrix& sigma) {
    std::vector<DirectionDiag> out;
    const int m = ws.m();
    out.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        DirectionDiag dd;
        dd.tag = ws.weights[static_cast<std::size_t>(i)].tag;
        dd.t_n = t[static_cast<std::size_t>(i)];
        dd.sigma2 = sigma(i, i);
        dd.studentized_sq = dd.sigma2 > 0.0 ? (dd.t_n * dd.t_n) / dd.sigma2 : 0.0;
        out.push_back(std::move(dd));
    }
    return out;
}

}  // namespace

std::vector<double> compute_t_vec(const RiskTable& rt, const WeightSet& ws) {
    RowArrays a = event_rows_of(rt, ws);
    const int m = ws.m();
    std::vector<double> t;
    SymMatrix sigma(m);
    accumulate(a.rows, a.y.data(), a.d.data(), a.y1.data(), a.d1.data(), a.w.data(), m,
               a.scale, t, sigma);
    return t;
}

SymMatrix compute_sigma(const RiskTable& rt, const WeightSet& ws) {
    RowArrays a = event_rows_of(rt, ws);
    const int m = ws.m();
    std::vector<double> t;
    SymMatrix sigma(m);
    accumulate(a.rows, a.y.data(), a.d.data(), a.y1.data(), a.d1.data(), a.w.data(), m,
               a.scale, t, sigma);
    return sigma;
}

double sn_from(const std::vector<double>& t, const SymMatrix& sigma, int& rank_out) {
    const int m = sigma.dim();
    auto [pinv, rank] = pseudo_inverse(sigma);
    rank_out = rank;
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
        double row = 0.0;
        for (int j = 0; j < m; ++j) row += pinv(i, j) * t[static_cast<std::size_t>(j)];
        s += t[static_cast<std::size_t>(i)] * row;
    }
    if (s < 0.0) s = 0.0;
#ifndef NDEBUG
    for (int i = 0; i < m; ++i) {
        const double v = sigma(i, i);
        if (v > 0.0) {
            const double stud = t[static_cast<std::size_t>(i)] * t[static_cast<std::size_t>(i)] / v;
            assert(s >= stud - 1e-9 && "quadratic form fell below a single studentized direction");
        }
    }
#endif
    return s;
}

StatResult compute_sn(const RiskTable& rt, const WeightSet& ws) {
    RowArrays a = event_rows_of(rt, ws);
    const int m = ws.m();
    StatResult res;
    res.sigma_hat = SymMatrix(m);
    accumulate(a.rows, a.y.data(), a.d.data(), a.y1.data(), a.d1.data(), a.w.data(), m,
               a.scale, res.t_vec, res.sigma_hat);
    int rank = 0;
    res.s_n = sn_from(res.t_vec, res.sigma_hat, rank);
    res.df_used = ws.verified_independent ? m : std::max(1, rank);
    res.per_direction = direction_diags(ws, res.t_vec, res.sigma_hat);
    return res;
}

TestOutcome chi2_test(const StatResult& stat, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        fail(errc::bad_config, "alpha must lie strictly between 0 and 1");
    TestOutcome out;
    out.stat = stat;
    out.alpha = alpha;
    out.p_chi2 = 1.0 - chi2_cdf(stat.s_n, stat.df_used);
    if (out.p_chi2 < 0.0) out.p_chi2 = 0.0;
    out.reject = out.p_chi2 <= alpha;
    return out;
}

LogrankKernel::LogrankKernel(const TwoSampleData& data, const WeightSet& ws) {
    n_ = data.n();
    n1_ = data.n1;
    m_ = ws.m();
    verified_independent_ = ws.verified_independent;
    scale_ = static_cast<double>(n_) / (static_cast<double>(data.n1) * static_cast<double>(data.n2));
    for (const WeightFn& w : ws.weights) tags_.push_back(w.tag);

    order_.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) order_[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
        return data.subjects[static_cast<std::size_t>(a)].time <
               data.subjects[static_cast<std::size_t>(b)].time;
    });
    observed_c1_.resize(static_cast<std::size_t>(n_));
    for (int k = 0; k < n_; ++k)
        observed_c1_[static_cast<std::size_t>(k)] =
            data.subjects[static_cast<std::size_t>(order_[static_cast<std::size_t>(k)])].group == 1
                ? 1
                : 0;

    RiskTable rt = build_risk_table(data);
    row_of_pos_begin_.assign(static_cast<std::size_t>(n_), -1);
    event_pos_offset_.push_back(0);
    int pos = 0;
    for (const RiskRow& row : rt.rows) {
        const int begin = pos;
        // positions covered by this row: all sorted positions with this time
        int span = 0;
        while (pos + span < n_ &&
               data.subjects[static_cast<std::size_t>(order_[static_cast<std::size_t>(pos + span)])]
                       .time == row.t)
            ++span;
        if (row.d > 0) {
            const int j = static_cast<int>(row_y_.size());
            row_y_.push_back(row.y);
            row_d_.push_back(row.d);
            push_slot_weights(ws, row.y, row.d, row.km_left, weight_values_);
            row_of_pos_begin_[static_cast<std::size_t>(begin)] = j;
            for (int k = begin; k < begin + span; ++k)
                if (data.subjects[static_cast<std::size_t>(order_[static_cast<std::size_t>(k)])]
                        .status == 1)
                    event_pos_.push_back(k);
            event_pos_offset_.push_back(static_cast<int>(event_pos_.size()));
        }
        pos += span;
    }
}

LogrankKernel::Scratch LogrankKernel::make_scratch() const {
    Scratch s;
    s.y1.resize(row_y_.size());
    s.d1.resize(row_y_.size());
    s.t.resize(static_cast<std::size_t>(m_));
    s.sigma = SymMatrix(m_);
    return s;
}

void LogrankKernel::group_counts(const std::vector<std::uint8_t>& c1, std::vector<int>& y1,
                                 std::vector<int>& d1) const {
    int cum = 0;
    for (int k = n_ - 1; k >= 0; --k) {
        cum += c1[static_cast<std::size_t>(k)];
        const int j = row_of_pos_begin_[static_cast<std::size_t>(k)];
        if (j >= 0) y1[static_cast<std::size_t>(j)] = cum;
    }
    const int rows = static_cast<int>(row_y_.size());
    for (int j = 0; j < rows; ++j) {
        int c = 0;
        for (int e = event_pos_offset_[static_cast<std::size_t>(j)];
             e < event_pos_offset_[static_cast<std::size_t>(j) + 1]; ++e)
            c += c1[static_cast<std::size_t>(event_pos_[static_cast<std::size_t>(e)])];
        d1[static_cast<std::size_t>(j)] = c;
    }
}

void LogrankKernel::stats_for(const std::vector<std::uint8_t>& c1, Scratch& s) const {
    group_counts(c1, s.y1, s.d1);
    accumulate(static_cast<int>(row_y_.size()), row_y_.data(), row_d_.data(), s.y1.data(),
               s.d1.data(), weight_values_.data(), m_, scale_, s.t, s.sigma);
}

StatResult LogrankKernel::result_for(const std::vector<std::uint8_t>& c1) const {
    if (!has_events())
        fail(errc::no_events, "all observations are censored; the statistic is undefined");
    Scratch s = make_scratch();
    stats_for(c1, s);
    StatResult res;
    res.t_vec = s.t;
    res.sigma_hat = s.sigma;
    int rank = 0;
    res.s_n = sn_from(res.t_vec, res.sigma_hat, rank);
    res.df_used = verified_independent_ ? m_ : std::max(1, rank);
    res.per_direction.reserve(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) {
        DirectionDiag dd;
        dd.tag = tags_[static_cast<std::size_t>(i)];
        dd.t_n = res.t_vec[static_cast<std::size_t>(i)];
        dd.sigma2 = res.sigma_hat(i, i);
        dd.studentized_sq = dd.sigma2 > 0.0 ? (dd.t_n * dd.t_n) / dd.sigma2 : 0.0;
        res.per_direction.push_back(std::move(dd));
    }
    return res;
}

}  // namespace mdir
