#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdir/data.hpp"
#include "mdir/rng.hpp"
#include "mdir/weights.hpp"

namespace mdir {

enum class CensoringKind { none, equal, unequal };

// Exponential censoring calibrated by target censoring proportions per group
// (proportions are meant against the Exp(1) survival baseline).
struct CensoringSpec {
    CensoringKind kind = CensoringKind::none;
    double p1 = 0.0;
    double p2 = 0.0;

    static CensoringSpec none() { return {}; }
    static CensoringSpec equal(double p) { return {CensoringKind::equal, p, p}; }
    static CensoringSpec unequal(double pa, double pb) {
        return {CensoringKind::unequal, pa, pb};
    }
};

// Hazard perturbation of the Exp(1) baseline: group j draws survival times
// with hazard 1 + theta_j * w(F0(t)). theta1 = 0, theta2 = theta is the
// one-sided alternative used in the power studies; local() scales both groups
// in opposite directions at the usual two-sample rate.
struct Alternative {
    double theta1 = 0.0;
    double theta2 = 0.0;
    WeightFn w;  // ignored when both coefficients are zero

    static Alternative none() { return {}; }
    static Alternative hazard(double theta, WeightFn dir) {
        return {0.0, theta, std::move(dir)};
    }
    static Alternative local(WeightFn dir, int n1, int n2);

    bool is_null() const { return theta1 == 0.0 && theta2 == 0.0; }
};

enum class Calibration { permutation, chi2 };

struct SimScenario {
    std::string id;
    int n1 = 0;
    int n2 = 0;
    CensoringSpec censoring;
    Alternative alternative;
    WeightSet weight_menu;
    WeightFn mismatched;  // second single-direction comparator (power studies)
    double alpha = 0.05;
    int n_sim = 0;
    int n_perm = 0;  // 0 skips the permutation calibration entirely
    std::uint64_t seed = 1;
    Calibration calibration = Calibration::permutation;
    int threads = 0;
};

struct MethodRate {
    std::string method;
    double rate = 0.0;
    double se = 0.0;
};

struct SimReport {
    std::string scenario_id;
    double theta = 0.0;
    int n_sim = 0;
    double rejection_rate = 0.0;  // rate of the scenario's configured calibration
    double se = 0.0;
    std::vector<MethodRate> methods;  // every method that was run
    double seconds = 0.0;             // wall time; excluded from serialized output
};

// Exponential censoring rate hitting a target censoring proportion for Exp(1)
// survival times: P(C < T) = rate / (1 + rate) = p, so rate = p / (1 - p).
double censoring_rate_for_target(double p);

// Certified enclosure of 1 + theta*w on [0,1]: extrema live at the interval
// ends or at roots of the derivative, which are isolated by sign-certified
// Bernstein subdivision.
struct HazardRange {
    double lo = 0.0;
    double hi = 0.0;
};
HazardRange hazard_range(const WeightFn& w, double theta);

// Survival times with hazard 1 + theta*w(1 - exp(-t)), drawn by thinning a
// homogeneous Poisson proposal running at the hazard's certified maximum.
class HazardSampler {
public:
    HazardSampler(double theta, WeightFn w);
    double draw(RngStream& rng) const;

private:
    double theta_;
    WeightFn w_;
    double bound_;
};

inline double sample_alternative(double theta, const WeightFn& w, RngStream& rng) {
    return HazardSampler(theta, w).draw(rng);
}

// One synthetic dataset under the scenario's alternative and censoring,
// deterministic in (scenario seed, replicate index).
TwoSampleData sample_dataset(const SimScenario& sc, std::uint64_t replicate);

// Rejection rate of the scenario's menu over n_sim synthetic datasets.
// Permutation and chi-squared calibrations run on the same datasets; the
// permutation calibration is skipped when n_perm == 0. Replicates are
// parallel; results are independent of the worker count.
SimReport run_rejection_study(const SimScenario& sc);

// run_rejection_study restricted to null scenarios (type-I error studies).
SimReport run_type1_study(const SimScenario& sc);

// Power study over a theta grid. Every scenario is evaluated with four
// permutation-calibrated methods on shared datasets: the four-direction menu,
// the two-direction menu, the single direction matching the alternative, and
// the scenario's mismatched single direction. rejection_rate echoes the
// two-direction method (the recommended default test).
std::vector<SimReport> run_power_study(const std::vector<SimScenario>& scenarios);

// The standard simulation menus: {proportional, crossing} and additionally
// {central w(1,1), early w(1,3)}.
WeightSet menu_two_directions();
WeightSet menu_four_directions();

struct AsymptoticPowerSpec {
    double eta = 0.5;         // limiting share of group 1
    double cens_rate1 = 0.0;  // exponential censoring rate, group 1
    double cens_rate2 = 0.0;
    WeightFn direction;  // hazard direction of the local alternative
    WeightSet weight_menu;
    double alpha = 0.05;
};

struct AsymptoticPower {
    double lambda = 0.0;
    double power = 0.0;
};

// Limiting power of the menu test against a local alternative in the given
// direction: noncentrality lambda = a' Sigma^- a with a_i = integral of
// w*w_i*psi and Sigma_rs = integral of w_r*w_s*psi over the baseline scale,
// psi the censoring adjustment; power from the noncentral chi-squared tail.
AsymptoticPower asymptotic_power(const AsymptoticPowerSpec& spec);

}  // namespace mdir
