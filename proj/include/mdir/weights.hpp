#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdir/error.hpp"

namespace mdir {

inline constexpr int kMaxWeightDegree = 20;
inline constexpr int kMaxDirections = 10;

// Polynomial hazard weight on [0,1] with exact integer coefficients in
// ascending degree. Integer coefficients make linear-independence checking a
// matter of exact rank computation, with no floating tolerance anywhere.
struct WeightFn {
    std::vector<long long> coeffs;
    std::string tag;

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

struct WeightSet {
    std::vector<WeightFn> weights;
    bool verified_independent = false;

    int m() const { return static_cast<int>(weights.size()); }
};

// Validated constructor for an arbitrary polynomial weight (used for custom
// combinations; the named families below cover the usual cases).
WeightFn make_weight(std::vector<long long> coeffs, std::string tag);

// w(u) = u^r (1-u)^g, expanded to exact integer coefficients.
WeightFn make_rg(int r, int g);

// Crossing-hazard weight w(u) = 1 - 2u.
WeightFn make_crossing();

double eval(const WeightFn& w, double u);

// Validates count and coefficients; does not mark the set independent.
WeightSet make_weight_set(std::vector<WeightFn> weights);

// Exact full-row-rank test of the coefficient matrix (fraction-free Gaussian
// elimination over big integers). For polynomials, rank m is equivalent to
// linear independence on every [0, eps].
bool check_independence(const WeightSet& ws);

// Greedy left-to-right scan keeping each weight outside the exact span of the
// ones already kept. The result is marked verified_independent.
WeightSet select_independent_subset(const WeightSet& ws);

// Returns a copy with verified_independent set from check_independence.
WeightSet verified(WeightSet ws);

// True iff the exact rational integral of a*b over [0,1] is zero.
bool integrates_to_zero01(const WeightFn& a, const WeightFn& b);

}  // namespace mdir
