#include "mdir/simstudy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "mdir/error.hpp"
#include "mdir/logrank.hpp"
#include "mdir/numerics.hpp"
#include "mdir/permute.hpp"
#include "mdir/threads.hpp"

namespace mdir {

namespace {

constexpr std::uint64_t kDataSalt = 0x64617461u;  // dataset generation
constexpr std::uint64_t kPermSalt = 0x7065726du;  // inner permutation seeds

double wall_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// parallel_for that captures the first exception (in index order) instead of
// letting it escape the worker team.
template <class F>
void guarded_parallel_for(std::int64_t n, int threads, F&& body) {
    std::vector<std::string> what(static_cast<std::size_t>(n));
    std::vector<errc> code(static_cast<std::size_t>(n), errc::bad_config);
    std::vector<std::uint8_t> failed(static_cast<std::size_t>(n), 0);
    parallel_for(n, threads, [&](std::int64_t i) {
        try {
            body(i);
        } catch (const Error& e) {
            code[static_cast<std::size_t>(i)] = e.code();
            what[static_cast<std::size_t>(i)] = e.what();
            failed[static_cast<std::size_t>(i)] = 1;
        } catch (const std::exception& e) {
            what[static_cast<std::size_t>(i)] = e.what();
            failed[static_cast<std::size_t>(i)] = 2;
        }
    });
    for (std::int64_t i = 0; i < n; ++i) {
        if (failed[static_cast<std::size_t>(i)] == 1)
            throw Error(code[static_cast<std::size_t>(i)], what[static_cast<std::size_t>(i)]);
        if (failed[static_cast<std::size_t>(i)] == 2)
            throw std::runtime_error(what[static_cast<std::size_t>(i)]);
    }
}

// Bernstein coefficients on [0,1] of a power-basis polynomial.
std::vector<double> to_bernstein(const std::vector<double>& a) {
    const int d = static_cast<int>(a.size()) - 1;
    std::vector<std::vector<double>> choose(static_cast<std::size_t>(d) + 1);
    for (int i = 0; i <= d; ++i) {
        choose[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(i) + 1, 1.0);
        for (int k = 1; k < i; ++k)
            choose[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
                choose[static_cast<std::size_t>(i) - 1][static_cast<std::size_t>(k) - 1] +
                choose[static_cast<std::size_t>(i) - 1][static_cast<std::size_t>(k)];
    }
    std::vector<double> b(static_cast<std::size_t>(d) + 1, 0.0);
    for (int i = 0; i <= d; ++i)
        for (int k = 0; k <= i; ++k)
            b[static_cast<std::size_t>(i)] += choose[static_cast<std::size_t>(i)]
                                                    [static_cast<std::size_t>(k)] /
                                              choose[static_cast<std::size_t>(d)]
                                                    [static_cast<std::size_t>(k)] *
                                              a[static_cast<std::size_t>(k)];
    return b;
}

// Roots of the polynomial (Bernstein coefficients b on [lo,hi]) by sign-based
// subdivision: a segment whose coefficients share a strict sign holds no root.
void isolate_roots(std::vector<double> b, double lo, double hi, std::vector<double>& roots) {
    bool all_pos = true, all_neg = true;
    for (double v : b) {
        all_pos = all_pos && v > 0.0;
        all_neg = all_neg && v < 0.0;
    }
    if (all_pos || all_neg) return;
    if (hi - lo < 1e-13) {
        roots.push_back(0.5 * (lo + hi));
        return;
    }
    // de Casteljau split at the midpoint
    const std::size_t e = b.size() - 1;
    std::vector<double> left(b.size()), right(b.size());
    left[0] = b[0];
    right[e] = b[e];
    for (std::size_t r = 1; r <= e; ++r) {
        for (std::size_t i = 0; i + r <= e; ++i) b[i] = 0.5 * (b[i] + b[i + 1]);
        left[r] = b[0];
        right[e - r] = b[e - r];
    }
    const double mid = 0.5 * (lo + hi);
    isolate_roots(std::move(left), lo, mid, roots);
    isolate_roots(std::move(right), mid, hi, roots);
}

double horner(const std::vector<double>& a, double u) {
    double v = 0.0;
    for (std::size_t k = a.size(); k-- > 0;) v = v * u + a[k];
    return v;
}

}  // namespace

double censoring_rate_for_target(double p) {
    if (!(p >= 0.0 && p < 1.0))
        fail(errc::bad_config, "target censoring proportion must lie in [0,1)");
    return p / (1.0 - p);
}

HazardRange hazard_range(const WeightFn& w, double theta) {
    // p(u) = 1 + theta * w(u) in the power basis
    std::vector<double> p(w.coeffs.size(), 0.0);
    if (p.empty()) p.assign(1, 0.0);
    for (std::size_t k = 0; k < w.coeffs.size(); ++k)
        p[k] = theta * static_cast<double>(w.coeffs[k]);
    p[0] += 1.0;

    std::vector<double> candidates = {0.0, 1.0};
    if (p.size() > 1) {
        std::vector<double> dp(p.size() - 1);
        bool zero = true;
        for (std::size_t k = 1; k < p.size(); ++k) {
            dp[k - 1] = static_cast<double>(k) * p[k];
            zero = zero && dp[k - 1] == 0.0;
        }
        if (!zero) isolate_roots(to_bernstein(dp), 0.0, 1.0, candidates);
    }

    HazardRange r{std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity()};
    for (double u : candidates) {
        const double v = horner(p, u);
        r.lo = std::min(r.lo, v);
        r.hi = std::max(r.hi, v);
    }
    return r;
}

HazardSampler::HazardSampler(double theta, WeightFn w)
    : theta_(theta), w_(std::move(w)), bound_(1.0) {
    if (theta_ == 0.0) return;
    const HazardRange r = hazard_range(w_, theta_);
    if (r.lo < -1e-9)
        fail(errc::negative_hazard, "hazard 1 + theta*w drops to " + std::to_string(r.lo) +
                                        " on [0,1]; shrink theta");
    if (r.hi <= 1e-12) fail(errc::bad_config, "hazard 1 + theta*w vanishes everywhere");
    // tiny inflation keeps the proposal rate an upper bound despite the
    // 1e-13 root-location slack in hazard_range
    bound_ = r.hi + 1e-9 * std::max(1.0, r.hi);
}

double HazardSampler::draw(RngStream& rng) const {
    if (theta_ == 0.0) return rng.exponential(1.0);
    double t = 0.0;
    for (;;) {
        t += rng.exponential(bound_);
        const double u = 1.0 - std::exp(-t);
        double haz = 1.0 + theta_ * eval(w_, u);
        if (haz < 0.0) haz = 0.0;
        if (rng.next_double() * bound_ <= haz) return t;
    }
}

Alternative Alternative::local(WeightFn dir, int n1, int n2) {
    if (n1 < 1 || n2 < 1) fail(errc::bad_config, "group sizes must be positive");
    const double root = std::sqrt(static_cast<double>(n1) * static_cast<double>(n2) /
                                  static_cast<double>(n1 + n2));
    Alternative a;
    a.theta1 = root / static_cast<double>(n1);
    a.theta2 = -root / static_cast<double>(n2);
    a.w = std::move(dir);
    return a;
}

namespace {

void validate_scenario(const SimScenario& sc) {
    if (sc.n1 < 1 || sc.n2 < 1) fail(errc::bad_config, "group sizes must be positive");
    if (!(sc.alpha > 0.0 && sc.alpha < 1.0))
        fail(errc::bad_config, "alpha must lie strictly between 0 and 1");
    if (sc.n_sim < 1) fail(errc::bad_config, "n_sim must be positive");
    if (sc.n_perm < 0) fail(errc::bad_config, "n_perm must be nonnegative");
}

double rate_for(const CensoringSpec& c, int group) {
    if (c.kind == CensoringKind::none) return 0.0;
    return censoring_rate_for_target(group == 1 ? c.p1 : c.p2);
}

MethodRate method_rate(std::string name, long count, int n_sim) {
    MethodRate mr;
    mr.method = std::move(name);
    mr.rate = static_cast<double>(count) / n_sim;
    mr.se = std::sqrt(mr.rate * (1.0 - mr.rate) / n_sim);
    return mr;
}

}  // namespace

TwoSampleData sample_dataset(const SimScenario& sc, std::uint64_t replicate) {
    RngStream rng(derive_seed(sc.seed, kDataSalt), replicate);
    const HazardSampler gen1(sc.alternative.theta1, sc.alternative.w);
    const HazardSampler gen2(sc.alternative.theta2, sc.alternative.w);
    const double rate1 = rate_for(sc.censoring, 1);
    const double rate2 = rate_for(sc.censoring, 2);

    std::vector<Subject> subs;
    subs.reserve(static_cast<std::size_t>(sc.n1 + sc.n2));
    for (int g = 1; g <= 2; ++g) {
        const int size = g == 1 ? sc.n1 : sc.n2;
        const HazardSampler& gen = g == 1 ? gen1 : gen2;
        const double crate = g == 1 ? rate1 : rate2;
        for (int i = 0; i < size; ++i) {
            const double t = gen.draw(rng);
            const double c =
                crate > 0.0 ? rng.exponential(crate) : std::numeric_limits<double>::infinity();
            subs.push_back({std::min(t, c), t <= c ? 1 : 0, g});
        }
    }
    return from_subjects(std::move(subs));
}

SimReport run_rejection_study(const SimScenario& sc) {
    validate_scenario(sc);
    if (sc.weight_menu.m() < 1) fail(errc::bad_config, "weight menu is empty");
    const bool with_perm = sc.n_perm > 0;
    if (!with_perm && sc.calibration == Calibration::permutation)
        fail(errc::bad_config, "permutation calibration requested with n_perm = 0");
    const WeightSet menu =
        sc.weight_menu.verified_independent ? sc.weight_menu : verified(sc.weight_menu);

    const int threads = resolve_threads(sc.threads);
    std::vector<std::uint8_t> rej_perm(static_cast<std::size_t>(sc.n_sim), 0);
    std::vector<std::uint8_t> rej_chi2(static_cast<std::size_t>(sc.n_sim), 0);
    const std::uint64_t perm_key = derive_seed(sc.seed, kPermSalt);

    const double t0 = wall_seconds();
    guarded_parallel_for(sc.n_sim, threads, [&](std::int64_t r) {
        const TwoSampleData data = sample_dataset(sc, static_cast<std::uint64_t>(r));
        const StatResult res = compute_sn(build_risk_table(data), menu);
        rej_chi2[static_cast<std::size_t>(r)] = chi2_test(res, sc.alpha).reject ? 1 : 0;
        if (with_perm) {
            PermConfig pc;
            pc.n_perm = sc.n_perm;
            pc.seed = derive_seed(perm_key, static_cast<std::uint64_t>(r));
            pc.keep_stats = false;
            pc.threads = 1;
            const PermResult pr = permutation_test(data, menu, pc);
            rej_perm[static_cast<std::size_t>(r)] = pr.p_perm <= sc.alpha ? 1 : 0;
        }
    });
    const double seconds = wall_seconds() - t0;

    long perm_count = 0, chi2_count = 0;
    for (int r = 0; r < sc.n_sim; ++r) {
        perm_count += rej_perm[static_cast<std::size_t>(r)];
        chi2_count += rej_chi2[static_cast<std::size_t>(r)];
    }

    SimReport rep;
    rep.scenario_id = sc.id;
    rep.theta = sc.alternative.theta2;
    rep.n_sim = sc.n_sim;
    rep.seconds = seconds;
    if (with_perm) rep.methods.push_back(method_rate("permutation", perm_count, sc.n_sim));
    rep.methods.push_back(method_rate("chi2", chi2_count, sc.n_sim));
    const MethodRate& chosen =
        sc.calibration == Calibration::permutation ? rep.methods.front() : rep.methods.back();
    rep.rejection_rate = chosen.rate;
    rep.se = chosen.se;
    return rep;
}

SimReport run_type1_study(const SimScenario& sc) {
    if (!sc.alternative.is_null())
        fail(errc::bad_config, "type-I error study requires the null alternative");
    return run_rejection_study(sc);
}

std::vector<SimReport> run_power_study(const std::vector<SimScenario>& scenarios) {
    std::vector<SimReport> reports;
    reports.reserve(scenarios.size());
    for (const SimScenario& sc : scenarios) {
        validate_scenario(sc);
        if (sc.n_perm < 1) fail(errc::bad_config, "power studies need n_perm >= 1");
        if (sc.alternative.w.coeffs.empty())
            fail(errc::bad_config, "power scenario needs the alternative's hazard direction");
        if (sc.mismatched.coeffs.empty())
            fail(errc::bad_config, "power scenario needs a mismatched comparison direction");
        if (sc.mismatched.tag == sc.alternative.w.tag)
            fail(errc::bad_config, "mismatched direction equals the alternative direction");

        const WeightSet menus[4] = {menu_four_directions(), menu_two_directions(),
                                    verified(make_weight_set({sc.alternative.w})),
                                    verified(make_weight_set({sc.mismatched}))};
        const std::string labels[4] = {"dir4", "dir2", "single:" + sc.alternative.w.tag,
                                       "single:" + sc.mismatched.tag};

        const int threads = resolve_threads(sc.threads);
        std::vector<std::uint8_t> rej[4];
        for (auto& v : rej) v.assign(static_cast<std::size_t>(sc.n_sim), 0);

        const double t0 = wall_seconds();
        guarded_parallel_for(sc.n_sim, threads, [&](std::int64_t r) {
            const TwoSampleData data = sample_dataset(sc, static_cast<std::uint64_t>(r));
            for (int k = 0; k < 4; ++k) {
                PermConfig pc;
                pc.n_perm = sc.n_perm;
                pc.seed = derive_seed(derive_seed(sc.seed, kPermSalt + static_cast<std::uint64_t>(k)),
                                      static_cast<std::uint64_t>(r));
                pc.keep_stats = false;
                pc.threads = 1;
                const PermResult pr = permutation_test(data, menus[k], pc);
                rej[k][static_cast<std::size_t>(r)] = pr.p_perm <= sc.alpha ? 1 : 0;
            }
        });
        const double seconds = wall_seconds() - t0;

        SimReport rep;
        rep.scenario_id = sc.id;
        rep.theta = sc.alternative.theta2;
        rep.n_sim = sc.n_sim;
        rep.seconds = seconds;
        for (int k = 0; k < 4; ++k) {
            long count = 0;
            for (int r = 0; r < sc.n_sim; ++r) count += rej[k][static_cast<std::size_t>(r)];
            rep.methods.push_back(method_rate(labels[k], count, sc.n_sim));
        }
        rep.rejection_rate = rep.methods[1].rate;  // the recommended two-direction test
        rep.se = rep.methods[1].se;
        reports.push_back(std::move(rep));
    }
    return reports;
}

WeightSet menu_two_directions() {
    return verified(make_weight_set({make_rg(0, 0), make_crossing()}));
}

WeightSet menu_four_directions() {
    return verified(
        make_weight_set({make_rg(0, 0), make_crossing(), make_rg(1, 1), make_rg(1, 3)}));
}

namespace {

// Quadrature over [0,1]; tanh-sinh tolerates the fractional-power behavior
// the censoring term produces at u = 1.
template <class F>
double integrate01(const F& f, double tol) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    const double term = std::max(tol, 1.5e-8);
    double error = 0.0;
    double l1 = 0.0;
    const double value = integrator.integrate(f, 0.0, 1.0, term, &error, &l1);
    if (!std::isfinite(value) || error > 1e-6 * std::max(1.0, l1))
        fail(errc::quadrature_failure, "quadrature did not reach the requested accuracy");
    return value;
}

}  // namespace

AsymptoticPower asymptotic_power(const AsymptoticPowerSpec& spec) {
    if (!(spec.eta > 0.0 && spec.eta < 1.0))
        fail(errc::bad_config, "eta must lie strictly between 0 and 1");
    if (spec.cens_rate1 < 0.0 || spec.cens_rate2 < 0.0)
        fail(errc::bad_config, "censoring rates must be nonnegative");
    if (!(spec.alpha > 0.0 && spec.alpha < 1.0))
        fail(errc::bad_config, "alpha must lie strictly between 0 and 1");
    if (spec.weight_menu.m() < 1) fail(errc::bad_config, "weight menu is empty");
    if (spec.direction.coeffs.empty()) fail(errc::bad_config, "hazard direction is empty");

    const double eta = spec.eta;
    const double g1 = spec.cens_rate1;
    const double g2 = spec.cens_rate2;
    const auto psi = [eta, g1, g2](double u) {
        const double s1 = std::pow(1.0 - u, g1);
        const double s2 = std::pow(1.0 - u, g2);
        const double den = eta * s1 + (1.0 - eta) * s2;
        return den > 0.0 ? s1 * s2 / den : 0.0;
    };

    const int m = spec.weight_menu.m();
    constexpr double tol = 1e-10;
    std::vector<double> a(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const WeightFn& wi = spec.weight_menu.weights[static_cast<std::size_t>(i)];
        a[static_cast<std::size_t>(i)] = integrate01(
            [&](double u) { return eval(spec.direction, u) * eval(wi, u) * psi(u); }, tol);
    }
    SymMatrix sigma(m);
    for (int r = 0; r < m; ++r)
        for (int s = r; s < m; ++s) {
            const WeightFn& wr = spec.weight_menu.weights[static_cast<std::size_t>(r)];
            const WeightFn& ws = spec.weight_menu.weights[static_cast<std::size_t>(s)];
            sigma.set(r, s,
                      integrate01([&](double u) { return eval(wr, u) * eval(ws, u) * psi(u); },
                                  tol));
        }

    auto [pinv, rank] = pseudo_inverse(sigma);
    (void)rank;
    double lambda = 0.0;
    for (int i = 0; i < m; ++i) {
        double row = 0.0;
        for (int j = 0; j < m; ++j) row += pinv(i, j) * a[static_cast<std::size_t>(j)];
        lambda += a[static_cast<std::size_t>(i)] * row;
    }
    if (lambda < 0.0) lambda = 0.0;

    const double q = chi2_quantile(1.0 - spec.alpha, m);
    double power = 1.0 - noncentral_chi2_cdf(q, m, lambda);
    power = std::clamp(power, 0.0, 1.0);
    return {lambda, power};
}

}  // namespace mdir
