#include "mdir/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mdir {

SymMatrix SymMatrix::from_dense(int dim, const std::vector<double>& row_major) {
    if (dim < 1 || row_major.size() != static_cast<std::size_t>(dim) * dim)
        fail(errc::bad_input, "dense storage does not match dimension");
    double scale = 0.0;
    for (double v : row_major) scale = std::max(scale, std::abs(v));
    SymMatrix m(dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            double ij = row_major[static_cast<std::size_t>(i) * dim + j];
            double ji = row_major[static_cast<std::size_t>(j) * dim + i];
            if (std::abs(ij - ji) > 1e-12 * std::max(1.0, scale))
                fail(errc::bad_input, "matrix is not symmetric");
            m.set(i, j, 0.5 * (ij + ji));
        }
    }
    return m;
}

EigenDecomp eigen_sym(const SymMatrix& a) {
    const int n = a.dim();
    if (n < 1) fail(errc::bad_input, "empty matrix");

    std::vector<double> w(a.data());
    std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;
    auto at = [&](int i, int j) -> double& { return w[static_cast<std::size_t>(i) * n + j]; };
    auto vt = [&](int i, int j) -> double& { return v[static_cast<std::size_t>(i) * n + j]; };

    const int max_sweeps = 64;
    bool converged = (n == 1);
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += at(p, q) * at(p, q);
        double norm = 0.0;
        for (double x : w) norm += x * x;
        if (off <= 1e-32 * std::max(1e-300, norm)) {
            converged = true;
            break;
        }
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = at(p, q);
                if (apq == 0.0) continue;
                double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                double tau = s / (1.0 + c);
                double app = at(p, p), aqq = at(q, q);
                at(p, p) = app - t * apq;
                at(q, q) = aqq + t * apq;
                at(p, q) = at(q, p) = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (i != p && i != q) {
                        double aip = at(i, p), aiq = at(i, q);
                        at(i, p) = at(p, i) = aip - s * (aiq + tau * aip);
                        at(i, q) = at(q, i) = aiq + s * (aip - tau * aiq);
                    }
                    double vip = vt(i, p), viq = vt(i, q);
                    vt(i, p) = vip - s * (viq + tau * vip);
                    vt(i, q) = viq + s * (vip - tau * viq);
                }
            }
        }
    }
    if (!converged) {
        // final check after the sweep budget
        double off = 0.0, norm = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += at(p, q) * at(p, q);
        for (double x : w) norm += x * x;
        if (off > 1e-24 * std::max(1e-300, norm))
            fail(errc::no_convergence, "Jacobi sweeps exhausted");
    }

    EigenDecomp out;
    out.dim = n;
    out.values.resize(n);
    for (int i = 0; i < n; ++i) out.values[i] = at(i, i);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return out.values[x] > out.values[y]; });
    std::vector<double> sorted_vals(n);
    std::vector<double> sorted_vecs(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k) {
        sorted_vals[k] = out.values[order[k]];
        for (int i = 0; i < n; ++i)
            sorted_vecs[static_cast<std::size_t>(i) * n + k] = vt(i, order[k]);
    }
    out.values = std::move(sorted_vals);
    out.vectors = std::move(sorted_vecs);
    return out;
}

std::pair<SymMatrix, int> pseudo_inverse(const SymMatrix& a) {
    EigenDecomp ed = eigen_sym(a);
    const int n = a.dim();
    double lambda_max = ed.values.empty() ? 0.0 : ed.values.front();
    double tol = (lambda_max == 0.0) ? 0.0
                                     : n * std::numeric_limits<double>::epsilon() * lambda_max;
    SymMatrix inv(n);
    int rank = 0;
    for (int k = 0; k < n; ++k) {
        if (ed.values[k] <= tol) continue;
        ++rank;
        double w = 1.0 / ed.values[k];
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
                inv.set(i, j, inv(i, j) + w * ed.vec(i, k) * ed.vec(j, k));
    }
    return {inv, rank};
}

namespace {

// Lower regularized incomplete gamma by series (x < a+1).
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double term = sum;
    for (int n = 0; n < 1000; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16)
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    fail(errc::no_convergence, "incomplete gamma series");
}

// Upper regularized incomplete gamma by Lentz continued fraction (x >= a+1).
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16)
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    fail(errc::no_convergence, "incomplete gamma continued fraction");
}

}  // namespace

double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) fail(errc::bad_input, "gamma_p requires x >= 0, a > 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double chi2_cdf(double x, int df) {
    if (df < 1) fail(errc::bad_input, "df must be >= 1");
    if (x <= 0.0) return 0.0;
    return gamma_p(0.5 * df, 0.5 * x);
}

double chi2_quantile(double p, int df) {
    if (!(p > 0.0 && p < 1.0)) fail(errc::bad_input, "p must be in (0,1)");
    double hi = 1.0;
    while (chi2_cdf(hi, df) < p) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++i) {
        double mid = 0.5 * (lo + hi);
        (chi2_cdf(mid, df) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double noncentral_chi2_cdf(double x, int df, double lambda) {
    if (df < 1) fail(errc::bad_input, "df must be >= 1");
    if (lambda < 0.0) fail(errc::bad_input, "lambda must be >= 0");
    if (x <= 0.0) return 0.0;
    if (lambda == 0.0) return chi2_cdf(x, df);

    const double half = 0.5 * lambda;
    double weight = std::exp(-half);  // Poisson(half) mass at k = 0
    double cum = weight;
    double sum = weight * chi2_cdf(x, df);
    for (int k = 1; k < 100000; ++k) {
        if (1.0 - cum < 1e-12) break;
        weight *= half / k;
        cum += weight;
        sum += weight * chi2_cdf(x, df + 2 * k);
    }
    return std::min(sum, 1.0);
}

}  // namespace mdir
