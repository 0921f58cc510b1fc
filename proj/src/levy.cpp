#include "cle/levy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "cle/parallel.hpp"
#include "cle/quadrature.hpp"
#include "cle/specialfn.hpp"

namespace cle::levy {
namespace {

using std::numbers::pi;

constexpr std::uint64_t kBlock = 512;

struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::uint64_t n = 0;
    std::uint64_t aborted = 0;
};

// Mean and standard error over n replicates. `draw(rng, i)` returns false
// when replicate i was aborted. Blocks are reduced in index order, so the
// result does not depend on the thread count.
template <class Draw>
Estimate replicate_mean(std::uint64_t n, std::uint64_t seed, unsigned threads, Draw draw) {
    const std::uint64_t blocks = (n + kBlock - 1) / kBlock;
    std::vector<Moments> partial(blocks);
    parallel_for(blocks, threads, [&](std::size_t blk) {
        Moments m;
        const std::uint64_t end = std::min<std::uint64_t>(n, (blk + 1) * kBlock);
        for (std::uint64_t i = blk * kBlock; i < end; ++i) {
            Rng rng = replicate_rng(seed, i);
            double v = 0.0;
            if (draw(rng, i, v)) {
                m.sum += v;
                m.sum_sq += v * v;
                ++m.n;
            } else {
                ++m.aborted;
            }
        }
        partial[blk] = m;
    });
    Moments total;
    for (const auto& m : partial) {
        total.sum += m.sum;
        total.sum_sq += m.sum_sq;
        total.n += m.n;
        total.aborted += m.aborted;
    }
    Estimate e;
    e.n = total.n;
    e.aborted = total.aborted;
    if (total.n == 0) return e;
    const double nn = static_cast<double>(total.n);
    e.estimate = total.sum / nn;
    const double var = total.n > 1 ? std::max(0.0, (total.sum_sq - nn * e.estimate * e.estimate) / (nn - 1)) : 0.0;
    e.std_error = std::sqrt(var / nn);
    return e;
}

void require_beta(double beta) {
    if (!(beta > 1.5 && beta < 2.0)) throw DomainError("beta must lie in (3/2, 2)");
}

}  // namespace

void StableLevyConfig::validate() const {
    require_beta(beta);
    if (!(jump_cutoff_eps > 0.0 && jump_cutoff_eps < 1.0)) throw DomainError("jump_cutoff_eps must lie in (0, 1)");
    if (event_budget == 0) throw DomainError("event_budget must be positive");
}

std::vector<double> WeightedJumpHistogram::density() const {
    std::vector<double> d(weighted_mass.size(), 0.0);
    if (!(inv_tau_sum > 0.0)) return d;
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = weighted_mass[i] / (inv_tau_sum * (bin_edges[i + 1] - bin_edges[i]));
    }
    return d;
}

double laplace_exponent_coefficient(double beta) { return std::tgamma(-beta); }

double sample_one_sided_stable(double index, double scale, Rng& rng) {
    if (!(index > 0.0 && index < 1.0)) throw DomainError("stable index must lie in (0, 1)");
    if (!(scale > 0.0)) throw DomainError("stable scale must be positive");
    const double u = pi * uniform_open(rng);
    const double e = exponential(rng);
    const double s = std::sin(index * u) / std::pow(std::sin(u), 1.0 / index) *
                     std::pow(std::sin((1.0 - index) * u) / e, (1.0 - index) / index);
    return s * std::pow(scale, 1.0 / index);
}

double hitting_time_scale(double a, double beta) {
    require_beta(beta);
    // E exp(-q tau_{-a}) = exp(-a (q / Gamma(-beta))^{1/beta})
    return a * std::pow(laplace_exponent_coefficient(beta), -1.0 / beta);
}

double sample_hitting_time(double a, double beta, Rng& rng) {
    if (!(a > 0.0)) throw DomainError("hitting level must be positive");
    return sample_one_sided_stable(1.0 / beta, hitting_time_scale(a, beta), rng);
}

double sample_inverse_gaussian(double mean, double shape, Rng& rng) {
    const double z = standard_normal(rng);
    const double y = z * z;
    if (!std::isfinite(mean)) return shape / y;  // Levy limit
    // Michael-Schucany-Haas, with the small root written without cancellation
    const double s = std::sqrt(1.0 + 4.0 * shape / (mean * y));
    const double x = 4.0 * shape / (y * (s + 1.0) * (s + 1.0));
    return uniform_open(rng) <= mean / (mean + x) ? x : mean * mean / x;
}

PathOutcome simulate_to_hit(double a, const StableLevyConfig& cfg, Rng& rng,
                            const std::function<bool(double)>& on_jump, std::uint64_t replicate) {
    cfg.validate();
    if (!(a > 0.0)) throw DomainError("hitting level must be positive");
    const double beta = cfg.beta;
    const double eps = cfg.jump_cutoff_eps;
    const double rate = std::pow(eps, -beta) / beta;
    // compensator of the jumps >= eps
    const double drift = std::pow(eps, 1.0 - beta) / (beta - 1.0);
    const double var_rate =
        cfg.small_jump_mode == SmallJumpMode::gaussian_match ? std::pow(eps, 2.0 - beta) / (2.0 - beta) : 0.0;
    const double inv_beta = -1.0 / beta;

    double x = 0.0;
    double t = 0.0;
    std::uint64_t events = 0;
    for (;;) {
        const double dt = exponential(rng) / rate;
        const double h1 = x + a;
        if (var_rate == 0.0) {
            const double end = x - drift * dt;
            if (end + a <= 0.0) return {t + h1 / drift, events, false};
            x = end;
        } else {
            const double v = var_rate * dt;
            const double end = x - drift * dt + std::sqrt(v) * standard_normal(rng);
            const double h2 = end + a;
            bool hit = h2 <= 0.0;
            // Brownian bridge dips below the level with prob exp(-2 h1 h2 / v)
            if (!hit) hit = uniform_open(rng) < std::exp(-2.0 * h1 * h2 / v);
            if (hit) {
                // given a crossing, r = T / (dt - T) is inverse Gaussian
                const double h2abs = std::abs(h2);
                const double mean = h2abs > 0.0 ? h1 / h2abs : std::numeric_limits<double>::infinity();
                const double r = sample_inverse_gaussian(mean, h1 * h1 / v, rng);
                return {t + dt * r / (1.0 + r), events, false};
            }
            x = end;
        }
        t += dt;
        const double jump = eps * std::pow(uniform_open(rng), inv_beta);
        if (++events > cfg.event_budget) {
            throw BudgetExceeded("path exceeded " + std::to_string(cfg.event_budget) + " events before hitting",
                                 replicate, events);
        }
        x += jump;
        if (!on_jump(jump)) return {t, events, true};
    }
}

LevyPathSample sample_path_to_hit(double a, const StableLevyConfig& cfg, Rng& rng) {
    LevyPathSample out;
    out.target_level = a;
    const double keep = std::max(cfg.record_threshold, cfg.jump_cutoff_eps);
    const auto r = simulate_to_hit(a, cfg, rng, [&](double x) {
        if (x >= keep) out.jumps.push_back(x);
        return true;
    });
    out.tau = r.tau;
    out.events = r.events;
    std::sort(out.jumps.begin(), out.jumps.end(), std::greater<>());
    return out;
}

Estimate estimate_tau_ratio(double a, double b, std::uint64_t n, std::uint64_t seed, unsigned threads) {
    if (!(a > 0.0 && b > 0.0)) throw DomainError("estimate_tau_ratio: a and b must be positive");
    if (n < 1000) throw DomainError("estimate_tau_ratio: need n >= 1000");
    // beta cancels in the ratio; any admissible value gives the same law
    const double beta = 1.7;
    return replicate_mean(n, seed, threads, [&](Rng& rng, std::uint64_t, double& v) {
        const double first = sample_hitting_time(a, beta, rng);
        const double rest = sample_hitting_time(b, beta, rng);
        v = first / (first + rest);
        return true;
    });
}

Estimate estimate_inv_tau_mean(double a, double beta, std::uint64_t n, std::uint64_t seed, unsigned threads) {
    if (!(a > 0.0)) throw DomainError("estimate_inv_tau_mean: a must be positive");
    require_beta(beta);
    return replicate_mean(n, seed, threads, [&](Rng& rng, std::uint64_t, double& v) {
        v = 1.0 / sample_hitting_time(a, beta, rng);
        return true;
    });
}

double inv_tau_mean_exact(double a, double beta) {
    require_beta(beta);
    return std::pow(a, -beta) * pi / std::sin(-pi * beta);
}

double marked_jump_target_density(double b, double a, double beta) {
    if (!(b > 0.0)) return 0.0;
    return std::sin(-pi * beta) / pi / (a + b) * std::pow(a / b, beta + 1.0);
}

WeightedJumpHistogram estimate_marked_jump_density(double a, const StableLevyConfig& cfg,
                                                   const std::vector<double>& bin_edges, std::uint64_t n_paths,
                                                   unsigned threads) {
    cfg.validate();
    if (bin_edges.size() < 2) throw DomainError("need at least one bin");
    for (std::size_t i = 1; i < bin_edges.size(); ++i) {
        if (!(bin_edges[i] > bin_edges[i - 1])) throw DomainError("bin edges must increase");
    }
    if (bin_edges.front() < 10.0 * cfg.jump_cutoff_eps) throw DomainError("lowest bin edge must be >= 10 eps");
    const std::size_t nb = bin_edges.size() - 1;
    const std::uint64_t blocks = (n_paths + kBlock - 1) / kBlock;
    struct Partial {
        std::vector<double> mass;
        double inv_tau = 0.0;
        std::uint64_t aborted = 0;
    };
    std::vector<Partial> partial(blocks);
    parallel_for(blocks, threads, [&](std::size_t blk) {
        Partial p;
        p.mass.assign(nb, 0.0);
        std::vector<double> seen;
        const std::uint64_t end = std::min<std::uint64_t>(n_paths, (blk + 1) * kBlock);
        for (std::uint64_t i = blk * kBlock; i < end; ++i) {
            Rng rng = replicate_rng(cfg.seed, i);
            seen.clear();
            PathOutcome r;
            try {
                r = simulate_to_hit(a, cfg, rng, [&](double x) {
                    if (x >= bin_edges.front() && x < bin_edges.back()) seen.push_back(x);
                    return true;
                }, i);
            } catch (const BudgetExceeded&) {
                ++p.aborted;
                continue;
            }
            const double w = 1.0 / r.tau;
            p.inv_tau += w;
            for (double x : seen) {
                const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), x);
                p.mass[static_cast<std::size_t>(it - bin_edges.begin()) - 1] += w;
            }
        }
        partial[blk] = std::move(p);
    });
    WeightedJumpHistogram h;
    h.bin_edges = bin_edges;
    h.weighted_mass.assign(nb, 0.0);
    h.n_paths = n_paths;
    for (const auto& p : partial) {
        for (std::size_t j = 0; j < nb; ++j) h.weighted_mass[j] += p.mass[j];
        h.inv_tau_sum += p.inv_tau;
        h.aborted_paths += p.aborted;
    }
    for (double m : h.weighted_mass) h.total_weight += m;
    return h;
}

double qd_area_shape(const LqgParams& params) {
    const double g = params.gamma();
    return 2.0 / g * (params.q_charge() - g) + 1.0;
}

double qd_area_rate(const LqgParams& params) {
    return 1.0 / (4.0 * std::sin(pi * params.kappa() / 4.0));
}

double sample_qd_area(const LqgParams& params, Rng& rng) {
    if (!params.simple_loop_regime()) throw DomainError("sample_qd_area: kappa must lie in (8/3, 4)");
    std::gamma_distribution<double> g(qd_area_shape(params), 1.0);
    return qd_area_rate(params) / g(rng);
}

double qd_area_laplace(double s, const LqgParams& params) {
    if (!(s >= 0.0)) throw DomainError("qd_area_laplace: s must be non-negative");
    if (s == 0.0) return 1.0;
    const double k = qd_area_shape(params);
    const double z = s * qd_area_rate(params);
    return 2.0 * std::pow(z, 0.5 * k) * bessel_k(k, 2.0 * std::sqrt(z)) / std::tgamma(k);
}

double small_jump_area_exponent(double mu, double eps, double beta, const LqgParams& params) {
    const double k = qd_area_shape(params);
    const double rate = qd_area_rate(params);
    const double lg = std::lgamma(k);
    // 1 - E exp(-s A) with A = rate / G, G ~ Gamma(k, 1); no cancellation for small s
    auto one_minus_laplace = [&](double s) {
        quad::Options opt;
        opt.abs_tol = 0.0;
        opt.rel_tol = 1e-10;
        return quad::integrate([&](double g) {
            if (g == 0.0) return 0.0;
            return -std::expm1(-s * rate / g) * std::exp((k - 1.0) * std::log(g) - g - lg);
        }, {0.0, quad::inf}, opt).value;
    };
    // x = eps u^{1/(2-beta)} turns x^{1-beta} dx into a constant times du
    const double p = 1.0 / (2.0 - beta);
    quad::Options opt;
    opt.abs_tol = 0.0;
    opt.rel_tol = 1e-8;
    const auto r = quad::integrate([&](double u) {
        const double x = eps * std::pow(u, p);
        if (x == 0.0) return mu * rate / (k - 1.0);
        return one_minus_laplace(mu * x * x) / (x * x);
    }, {0.0, 1.0}, opt);
    return std::pow(eps, 2.0 - beta) / (2.0 - beta) * r.value;
}

Estimate estimate_annulus_area_laplace(double a, double b, double mu, const LqgParams& params,
                                       const StableLevyConfig& cfg, std::uint64_t n_paths, unsigned threads) {
    if (!(a > 0.0 && b > 0.0 && mu > 0.0)) throw DomainError("estimate_annulus_area_laplace: a, b, mu must be positive");
    if (!params.simple_loop_regime()) throw DomainError("estimate_annulus_area_laplace: kappa must lie in (8/3, 4)");
    StableLevyConfig c = cfg;
    c.beta = params.beta();
    c.validate();
    const double small = c.small_jump_mode == SmallJumpMode::gaussian_match
                             ? small_jump_area_exponent(mu, c.jump_cutoff_eps, c.beta, params)
                             : 0.0;
    // once mu * area passes this, the path contributes below 1e-26
    const double cutoff = 60.0;
    return replicate_mean(n_paths, c.seed, threads, [&](Rng& rng, std::uint64_t i, double& v) {
        double area = 0.0;
        try {
            const auto r = simulate_to_hit(a + b, c, rng, [&](double x) {
                area += x * x * sample_qd_area(params, rng);
                return mu * area < cutoff;
            }, i);
            v = r.stopped ? 0.0 : std::exp(-mu * area - small * r.tau);
        } catch (const BudgetExceeded&) {
            return false;
        }
        return true;
    });
}

double annulus_area_target(double a, double b, double mu, const LqgParams& params) {
    return std::exp(-(a + b) * std::sqrt(mu / std::sin(pi * params.kappa() / 4.0)));
}

}  // namespace cle::levy
