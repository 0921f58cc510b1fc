#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "cle/levy.hpp"
#include "cle/quadrature.hpp"
#include "cle/specialfn.hpp"
#include "doctest.h"

using namespace cle;
using namespace cle::levy;
using std::numbers::pi;

namespace {

StableLevyConfig coarse(double eps, std::uint64_t seed) {
    StableLevyConfig c;
    c.beta = 1.7;
    c.jump_cutoff_eps = eps;
    c.seed = seed;
    c.event_budget = 1'000'000;
    return c;
}

double median(std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
}

}  // namespace

TEST_CASE("one-sided stable sampler matches its Laplace transform") {
    Rng rng = replicate_rng(1, 0);
    const int n = 100000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double v = std::exp(-sample_one_sided_stable(0.6, 1.0, rng));
        s1 += v;
        s2 += v * v;
    }
    const double mean = s1 / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - std::exp(-1.0)) < 3 * se);
}

TEST_CASE("one-sided stable scale additivity") {
    Rng rng = replicate_rng(2, 0);
    const int n = 100000;
    for (double lam : {0.5, 1.0, 2.0}) {
        double sum = 0, sq = 0;
        for (int i = 0; i < n; ++i) {
            const double s = sample_one_sided_stable(0.7, 0.4, rng) + sample_one_sided_stable(0.7, 1.1, rng);
            const double v = std::exp(-lam * s);
            sum += v;
            sq += v * v;
        }
        const double mean = sum / n;
        const double se = std::sqrt((sq / n - mean * mean) / n);
        CHECK(std::abs(mean - std::exp(-1.5 * std::pow(lam, 0.7))) < 3 * se);
    }
}

TEST_CASE("inverse moment of the unit subordinator") {
    Rng rng = replicate_rng(3, 0);
    const int n = 100000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        const double v = 1 / sample_one_sided_stable(1 / 1.7, 1.0, rng);
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean - std::tgamma(2.7)) < 3 * se);
}

TEST_CASE("hitting time ratio") {
    const auto e11 = estimate_tau_ratio(1, 1, 100000, 11);
    CHECK(std::abs(e11.estimate - 0.5) < 3 * e11.std_error);
    const auto e12 = estimate_tau_ratio(1, 2, 100000, 12);
    CHECK(std::abs(e12.estimate - 1.0 / 3) < 3 * e12.std_error);
    // the ratio is scale free: same stream, scaled levels, same draws
    const auto scaled = estimate_tau_ratio(3, 6, 100000, 12);
    CHECK(std::abs(scaled.estimate - e12.estimate) < 1e-12);
    // unbiased with 1/sqrt(n) error on a doubling ladder
    double prev_se = 0;
    for (std::uint64_t n : {1000ULL, 10000ULL, 100000ULL}) {
        const auto e = estimate_tau_ratio(1, 1, n, 40 + n);
        CHECK(std::abs(e.estimate - 0.5) < 3.5 * e.std_error);
        if (prev_se > 0) CHECK(prev_se / e.std_error == doctest::Approx(std::sqrt(10.0)).epsilon(0.15));
        prev_se = e.std_error;
    }
    CHECK_THROWS_AS(estimate_tau_ratio(1, 1, 10, 1), DomainError);
}

TEST_CASE("inverse hitting time mean") {
    const double target = pi / std::sin(0.3 * pi);
    CHECK(inv_tau_mean_exact(1, 1.7) == doctest::Approx(target).epsilon(1e-14));
    CHECK(inv_tau_mean_exact(1, 1.7) == doctest::Approx(std::tgamma(2.7) * std::tgamma(-1.7)).epsilon(1e-13));
    const auto e = estimate_inv_tau_mean(1, 1.7, 100000, 5);
    CHECK(e.estimate > 0);
    CHECK(std::abs(e.estimate - target) < 3 * e.std_error);
    const auto e2 = estimate_inv_tau_mean(2, 1.7, 100000, 6);
    CHECK(std::abs(e2.estimate - std::pow(2.0, -1.7) * target) < 3 * e2.std_error);
}

TEST_CASE("estimators are deterministic and thread-count independent") {
    const auto a = estimate_inv_tau_mean(1, 1.8, 5000, 99, 1);
    const auto b = estimate_inv_tau_mean(1, 1.8, 5000, 99, 3);
    CHECK(a.estimate == b.estimate);
    CHECK(a.std_error == b.std_error);
    const auto c = estimate_inv_tau_mean(1, 1.8, 5000, 100, 1);
    CHECK(a.estimate != c.estimate);
    std::vector<double> edges{0.5, 1, 2};
    const auto h1 = estimate_marked_jump_density(1, coarse(0.05, 4), edges, 300, 1);
    const auto h2 = estimate_marked_jump_density(1, coarse(0.05, 4), edges, 300, 2);
    CHECK(h1.weighted_mass == h2.weighted_mass);
    CHECK(h1.inv_tau_sum == h2.inv_tau_sum);
}

TEST_CASE("jump catalog intensity") {
    // a far-away level so the path never hits; stop after a fixed number of jumps
    auto cfg = coarse(0.02, 8);
    Rng rng = replicate_rng(8, 0);
    const std::uint64_t target = 200000;
    std::uint64_t seen = 0, above_double = 0;
    const auto r = simulate_to_hit(1e9, cfg, rng, [&](double x) {
        CHECK_FALSE(x < 0.02);
        if (x >= 0.04) ++above_double;
        return ++seen < target;
    });
    CHECK(r.stopped);
    const double rate = std::pow(0.02, -1.7) / 1.7;
    CHECK(r.tau * rate / target == doctest::Approx(1.0).epsilon(4 / std::sqrt(double(target))));
    const double frac = double(above_double) / target;
    CHECK(std::abs(frac - std::pow(2.0, -1.7)) < 4 * std::sqrt(frac * (1 - frac) / target));
}

TEST_CASE("simulated hitting times follow the exact subordinator law") {
    auto cfg = coarse(0.03, 21);
    const int n = 3000;
    // an aborted path has not hit yet: tau is beyond every completed one
    auto tau_or_inf = [&](double a, Rng& r) {
        try {
            return sample_path_to_hit(a, cfg, r).tau;
        } catch (const BudgetExceeded&) {
            return HUGE_VAL;
        }
    };
    std::vector<double> sim1, sim2, exact;
    for (int i = 0; i < n; ++i) {
        Rng r1 = replicate_rng(21, i);
        sim1.push_back(tau_or_inf(1, r1));
        Rng r2 = replicate_rng(22, i);
        sim2.push_back(tau_or_inf(2, r2));
        Rng r3 = replicate_rng(23, i);
        exact.push_back(sample_hitting_time(1, 1.7, r3));
    }
    // means are infinite; compare medians. tau_{-2} =d 2^beta tau_{-1}
    const double m1 = median(sim1);
    CHECK(median(sim2) / m1 == doctest::Approx(std::pow(2.0, 1.7)).epsilon(0.12));
    CHECK(m1 / median(exact) == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("path samples") {
    auto cfg = coarse(0.05, 3);
    cfg.record_threshold = 0.1;
    Rng rng = replicate_rng(3, 1);
    const auto p = sample_path_to_hit(1.5, cfg, rng);
    CHECK(p.tau > 0);
    CHECK(p.target_level == 1.5);
    CHECK(std::is_sorted(p.jumps.rbegin(), p.jumps.rend()));
    for (double x : p.jumps) CHECK(x >= 0.1);
    auto tight = coarse(0.05, 3);
    tight.event_budget = 1;
    bool thrown = false;
    for (int i = 0; i < 20 && !thrown; ++i) {
        Rng r = replicate_rng(3, i);
        try {
            sample_path_to_hit(5, tight, r);
        } catch (const BudgetExceeded& e) {
            thrown = true;
            CHECK(e.events() == 2);
        }
    }
    CHECK(thrown);
    StableLevyConfig bad;
    bad.beta = 1.4;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad.beta = 1.7;
    bad.jump_cutoff_eps = 1.5;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("refining eps does not shrink the largest jump") {
    // one-sided two-sample KS: the finer run must not be stochastically smaller.
    // Budgets are scaled with the jump rate so both runs abort past the same tau.
    auto largest = [](double eps, std::uint64_t seed) {
        auto cfg = coarse(eps, seed);
        cfg.event_budget = static_cast<std::uint64_t>(200 * std::pow(eps, -1.7) / 1.7);
        cfg.record_threshold = 1e-2;
        std::vector<double> out;
        for (std::uint64_t i = 0; i < 2000; ++i) {
            Rng rng = replicate_rng(seed, i);
            try {
                const auto p = sample_path_to_hit(1, cfg, rng);
                out.push_back(p.jumps.empty() ? 0.0 : p.jumps.front());
            } catch (const BudgetExceeded&) {
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    };
    const auto c = largest(1e-2, 91);
    const auto f = largest(3e-3, 92);
    REQUIRE(c.size() > 1800);
    REQUIRE(f.size() > 1800);
    double d_plus = 0.0;  // sup_x F_fine(x) - F_coarse(x)
    for (double x : c) {
        const double fc = double(std::upper_bound(c.begin(), c.end(), x) - c.begin()) / c.size();
        const double ff = double(std::upper_bound(f.begin(), f.end(), x) - f.begin()) / f.size();
        d_plus = std::max(d_plus, ff - fc);
    }
    const double crit = std::sqrt(-std::log(0.001) / 2 * (c.size() + f.size()) / double(c.size() * f.size()));
    CHECK(d_plus < crit);
}

TEST_CASE("drift only mode crosses linearly") {
    auto cfg = coarse(0.05, 17);
    cfg.small_jump_mode = SmallJumpMode::drift_only;
    const auto e = estimate_marked_jump_density(1, cfg, {0.5, 1.0, 2.0}, 2000, 1);
    CHECK(e.inv_tau_sum > 0);
    CHECK(e.aborted_paths < 10);
}

TEST_CASE("inverse Gaussian sampler") {
    Rng rng = replicate_rng(31, 0);
    const int n = 200000;
    const double mean = 0.7, shape = 2.0;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double v = sample_inverse_gaussian(mean, shape, rng);
        s1 += v;
        s2 += v * v;
    }
    const double m = s1 / n;
    const double var = s2 / n - m * m;
    CHECK(std::abs(m - mean) < 4 * std::sqrt(mean * mean * mean / shape / n));
    CHECK(var == doctest::Approx(mean * mean * mean / shape).epsilon(0.03));
}

TEST_CASE("marked jump histogram against the closed-form law") {
    const std::vector<double> edges{0.5, 0.7, 1.0, 1.4, 2.0, 3.0};
    const auto h = estimate_marked_jump_density(1, coarse(0.05, 77), edges, 6000);
    const auto d = h.density();
    double sum = 0;
    for (double m : h.weighted_mass) sum += m;
    CHECK(sum == doctest::Approx(h.total_weight).epsilon(1e-12));
    CHECK(h.aborted_paths < 20);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double lo = edges[i], hi = edges[i + 1];
        const double target =
            quad::adapt_integrate([](double b) { return marked_jump_target_density(b, 1, 1.7); }, {lo, hi}, 1e-12).value /
            (hi - lo);
        CHECK(d[i] == doctest::Approx(target).epsilon(0.12));
    }
    CHECK_THROWS_AS(estimate_marked_jump_density(1, coarse(0.05, 1), {0.1, 1.0}, 10), DomainError);
    // the closed form C = sin(-pi beta)/pi is the same as cos(pi(4/gamma^2 - 1))/pi
    const double beta = 1.7;
    const double g = std::sqrt(4 / (beta - 0.5));
    CHECK(marked_jump_target_density(1, 1, beta) ==
          doctest::Approx(std::cos(pi * (4 / (g * g) - 1)) / pi / 2).epsilon(1e-13));
}

TEST_CASE("quantum disk area law") {
    const auto p = LqgParams::from_gamma(std::sqrt(3.0));
    CHECK(qd_area_shape(p) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
    Rng rng = replicate_rng(51, 0);
    const int n = 1000000;
    std::vector<double> edges;
    for (double x = 0.05; x < 5.0001; x *= std::pow(100.0, 1.0 / 16)) edges.push_back(x);
    std::vector<double> counts(edges.size() - 1, 0.0);
    for (int i = 0; i < n; ++i) {
        const double a = sample_qd_area(p, rng);
        CHECK_FALSE(a <= 0);
        const auto it = std::upper_bound(edges.begin(), edges.end(), a);
        if (it != edges.begin() && it != edges.end()) counts[std::size_t(it - edges.begin()) - 1] += 1;
    }
    // the one-point disk density, reweighted by 1/x and renormalized
    auto reweighted = [&](double x) { return disk_area_density(std::sqrt(3.0), x, p) / x; };
    const double norm = quad::adapt_integrate(reweighted, {0, quad::inf}, 1e-12).value;
    double worst = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double mass = quad::adapt_integrate(reweighted, {edges[i], edges[i + 1]}, 1e-12).value / norm;
        worst = std::max(worst, std::abs(counts[i] / n / mass - 1));
    }
    CHECK(worst < 0.03);
    // Laplace transform of the law
    Rng r2 = replicate_rng(52, 0);
    double s = 0;
    for (int i = 0; i < 200000; ++i) s += std::exp(-0.8 * sample_qd_area(p, r2));
    CHECK(s / 200000 == doctest::Approx(qd_area_laplace(0.8, p)).epsilon(0.005));
}

TEST_CASE("small jump area exponent") {
    const auto p = LqgParams::from_gamma(std::sqrt(3.0));
    const double mean_area = qd_area_rate(p) / (qd_area_shape(p) - 1);
    const double d = 2 - p.beta();
    // first order: mu E[A] int_0^eps x^{1-beta} dx
    auto leading = [&](double eps) { return 1.3 * mean_area * std::pow(eps, d) / d; };
    CHECK(small_jump_area_exponent(1.3, 1e-9, p.beta(), p) == doctest::Approx(leading(1e-9)).epsilon(0.01));
    CHECK(small_jump_area_exponent(1.3, 0.1, p.beta(), p) < leading(0.1));
}

TEST_CASE("annulus area Laplace transform") {
    const auto p = LqgParams::from_gamma(std::sqrt(3.0));
    auto cfg = coarse(0.05, 61);
    const auto e = estimate_annulus_area_laplace(1, 1, 1, p, cfg, 6000);
    const double target = annulus_area_target(1, 1, 1, p);
    CHECK(target == doctest::Approx(std::exp(-2 * std::sqrt(1 / std::sin(0.75 * pi)))).epsilon(1e-14));
    CHECK(std::abs(e.estimate - target) < 3 * e.std_error + 0.05 * target);

    // multiplicativity in the total length
    cfg.seed = 62;
    const auto l1 = estimate_annulus_area_laplace(0.5, 0.5, 1, p, cfg, 6000);
    const double ratio = e.estimate / (l1.estimate * l1.estimate);
    const double ratio_se = ratio * std::sqrt(std::pow(e.std_error / e.estimate, 2) + 4 * std::pow(l1.std_error / l1.estimate, 2));
    CHECK(std::abs(ratio - 1) < 3 * ratio_se + 0.05);

    // mu scaling: (mu = 4, L = 1) against (mu = 1, L = 2)
    cfg.seed = 63;
    const auto m4 = estimate_annulus_area_laplace(0.5, 0.5, 4, p, cfg, 6000);
    CHECK(std::abs(m4.estimate - e.estimate) < 3 * std::hypot(m4.std_error, e.std_error) + 0.05 * target);
}
