#include "mdir/weights.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <utility>

namespace mdir {

namespace {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

// Rank by fraction-free (Bareiss) elimination; all divisions are exact.
int exact_rank(std::vector<std::vector<BigInt>> m) {
    if (m.empty()) return 0;
    const int rows = static_cast<int>(m.size());
    const int cols = static_cast<int>(m[0].size());
    int rank = 0;
    BigInt prev = 1;
    for (int col = 0; col < cols && rank < rows; ++col) {
        int piv = -1;
        for (int r = rank; r < rows; ++r) {
            if (m[r][col] != 0) {
                piv = r;
                break;
            }
        }
        if (piv < 0) continue;
        std::swap(m[rank], m[piv]);
        for (int r = rank + 1; r < rows; ++r) {
            for (int c = col + 1; c < cols; ++c)
                m[r][c] = (m[rank][col] * m[r][c] - m[r][col] * m[rank][c]) / prev;
            m[r][col] = 0;
        }
        prev = m[rank][col];
        ++rank;
    }
    return rank;
}

std::vector<std::vector<BigInt>> coeff_matrix(const std::vector<WeightFn>& ws) {
    std::size_t cols = 0;
    for (const auto& w : ws) cols = std::max(cols, w.coeffs.size());
    std::vector<std::vector<BigInt>> m(ws.size(), std::vector<BigInt>(cols, 0));
    for (std::size_t i = 0; i < ws.size(); ++i)
        for (std::size_t j = 0; j < ws[i].coeffs.size(); ++j) m[i][j] = ws[i].coeffs[j];
    return m;
}

}  // namespace

WeightFn make_weight(std::vector<long long> coeffs, std::string tag) {
    while (!coeffs.empty() && coeffs.back() == 0) coeffs.pop_back();
    if (coeffs.empty()) fail(errc::bad_input, "weight '" + tag + "' is identically zero");
    if (static_cast<int>(coeffs.size()) - 1 > kMaxWeightDegree)
        fail(errc::degree_too_large, "weight '" + tag + "' exceeds degree " +
                                         std::to_string(kMaxWeightDegree));
    return {std::move(coeffs), std::move(tag)};
}

WeightFn make_rg(int r, int g) {
    if (r < 0 || g < 0) fail(errc::bad_input, "r and g must be nonnegative");
    if (r + g > kMaxWeightDegree)
        fail(errc::degree_too_large,
             "r + g = " + std::to_string(r + g) + " exceeds " + std::to_string(kMaxWeightDegree));
    // u^r (1-u)^g = sum_k C(g,k) (-1)^k u^(r+k)
    std::vector<long long> coeffs(static_cast<std::size_t>(r + g) + 1, 0);
    long long binom = 1;
    for (int k = 0; k <= g; ++k) {
        coeffs[static_cast<std::size_t>(r + k)] = (k % 2 == 0) ? binom : -binom;
        binom = binom * (g - k) / (k + 1);
    }
    return {std::move(coeffs), "w(" + std::to_string(r) + "," + std::to_string(g) + ")"};
}

WeightFn make_crossing() { return {{1, -2}, "cross"}; }

double eval(const WeightFn& w, double u) {
    if (!(u >= 0.0 && u <= 1.0))
        fail(errc::out_of_domain, "weight argument " + std::to_string(u) + " outside [0,1]");
    double v = 0.0;
    for (auto it = w.coeffs.rbegin(); it != w.coeffs.rend(); ++it) v = v * u + static_cast<double>(*it);
    return v;
}

WeightSet make_weight_set(std::vector<WeightFn> weights) {
    if (weights.empty()) fail(errc::bad_input, "weight set must be nonempty");
    if (static_cast<int>(weights.size()) > kMaxDirections)
        fail(errc::too_many_directions,
             "at most " + std::to_string(kMaxDirections) + " directions supported");
    for (const auto& w : weights)
        if (w.coeffs.empty()) fail(errc::bad_input, "weight '" + w.tag + "' has no coefficients");
    return {std::move(weights), false};
}

bool check_independence(const WeightSet& ws) {
    if (ws.weights.empty()) fail(errc::bad_input, "weight set must be nonempty");
    return exact_rank(coeff_matrix(ws.weights)) == ws.m();
}

WeightSet select_independent_subset(const WeightSet& ws) {
    if (ws.weights.empty()) fail(errc::bad_input, "weight set must be nonempty");
    std::vector<WeightFn> kept;
    for (const auto& w : ws.weights) {
        std::vector<WeightFn> trial = kept;
        trial.push_back(w);
        if (exact_rank(coeff_matrix(trial)) == static_cast<int>(trial.size())) kept = std::move(trial);
    }
    WeightSet out;
    out.weights = std::move(kept);
    out.verified_independent = true;
    return out;
}

WeightSet verified(WeightSet ws) {
    ws.verified_independent = check_independence(ws);
    return ws;
}

bool integrates_to_zero01(const WeightFn& a, const WeightFn& b) {
    // Exact rational integral of the product polynomial.
    std::vector<BigInt> prod(a.coeffs.size() + b.coeffs.size() - 1, 0);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        for (std::size_t j = 0; j < b.coeffs.size(); ++j)
            prod[i + j] += BigInt(a.coeffs[i]) * BigInt(b.coeffs[j]);
    BigRat total = 0;
    for (std::size_t k = 0; k < prod.size(); ++k)
        total += BigRat(prod[k], BigInt(k + 1));
    return total == 0;
}

}  // namespace mdir
