#pragma once

// Spectrally positive beta-stable Levy process with Levy measure
// 1_{x>0} x^{-beta-1} dx, zero mean. Exact samplers for its first-passage
// subordinator and an epsilon-truncated path simulator for jump functionals.

#include <cstdint>
#include <functional>
#include <vector>

#include "cle/params.hpp"
#include "cle/rng.hpp"

namespace cle::levy {

enum class SmallJumpMode { drift_only, gaussian_match };

struct StableLevyConfig {
    double beta = 1.7;
    double jump_cutoff_eps = 1e-2;
    SmallJumpMode small_jump_mode = SmallJumpMode::gaussian_match;
    std::uint64_t seed = 0;
    // per-path cap on simulated events (jumps); exceeding it aborts the path
    std::uint64_t event_budget = 100'000'000;
    // jumps below this size are simulated but not stored in LevyPathSample
    double record_threshold = 0.0;

    void validate() const;
};

struct LevyPathSample {
    std::vector<double> jumps;  // sorted decreasing
    double tau = 0.0;
    double target_level = 0.0;
    std::uint64_t events = 0;
};

struct Estimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
    std::uint64_t aborted = 0;
};

struct WeightedJumpHistogram {
    std::vector<double> bin_edges;
    std::vector<double> weighted_mass;
    double total_weight = 0.0;
    std::uint64_t n_paths = 0;
    std::uint64_t aborted_paths = 0;
    // sum over completed paths of 1/tau, the Monte Carlo normalizer
    double inv_tau_sum = 0.0;

    // weighted_mass / (inv_tau_sum * bin width): estimated density per bin
    std::vector<double> density() const;
};

// Laplace exponent of the process: E[exp(-lambda X_t)] = exp(t Gamma(-beta) lambda^beta).
double laplace_exponent_coefficient(double beta);

// Positive stable variate with E[exp(-lambda S)] = exp(-scale lambda^index),
// index in (0, 1), by Kanter's representation.
double sample_one_sided_stable(double index, double scale, Rng& rng);

// tau_{-a} is one-sided stable of index 1/beta with this scale.
double hitting_time_scale(double a, double beta);
double sample_hitting_time(double a, double beta, Rng& rng);

// Truncated path simulation until first passage below -a. `on_jump` sees
// every jump >= eps in time order and may return false to stop the path
// early (then `stopped` is set and tau is the time reached so far).
struct PathOutcome {
    double tau = 0.0;
    std::uint64_t events = 0;
    bool stopped = false;
};
PathOutcome simulate_to_hit(double a, const StableLevyConfig& cfg, Rng& rng,
                            const std::function<bool(double)>& on_jump, std::uint64_t replicate = 0);

// Inverse Gaussian variate with the given mean (may be +inf) and shape.
double sample_inverse_gaussian(double mean, double shape, Rng& rng);

// Poisson exponent of the jumps below eps in the area functional:
// int_0^eps (1 - E[exp(-mu x^2 A)]) x^{-beta-1} dx.
double small_jump_area_exponent(double mu, double eps, double beta, const LqgParams& params);

LevyPathSample sample_path_to_hit(double a, const StableLevyConfig& cfg, Rng& rng);

Estimate estimate_tau_ratio(double a, double b, std::uint64_t n, std::uint64_t seed, unsigned threads = 0);
Estimate estimate_inv_tau_mean(double a, double beta, std::uint64_t n, std::uint64_t seed, unsigned threads = 0);
double inv_tau_mean_exact(double a, double beta);

// Density C/(a+b) (a/b)^{beta+1} with C = sin(-pi beta)/pi.
double marked_jump_target_density(double b, double a, double beta);

WeightedJumpHistogram estimate_marked_jump_density(double a, const StableLevyConfig& cfg,
                                                   const std::vector<double>& bin_edges, std::uint64_t n_paths,
                                                   unsigned threads = 0);

// Quantum area of a unit-boundary quantum disk: inverse gamma with shape
// 2(Q - gamma)/gamma + 1 and rate 1/(4 sin(pi gamma^2/4)).
double qd_area_shape(const LqgParams& params);
double qd_area_rate(const LqgParams& params);
double sample_qd_area(const LqgParams& params, Rng& rng);
// E[exp(-s A)] for that law.
double qd_area_laplace(double s, const LqgParams& params);

// Monte Carlo of E[exp(-mu sum_i x_i^2 A_i)] over jumps x_i before tau_{-(a+b)}.
// In gaussian_match mode the jumps below eps are accounted for by their exact
// Poisson contribution given tau.
Estimate estimate_annulus_area_laplace(double a, double b, double mu, const LqgParams& params,
                                       const StableLevyConfig& cfg, std::uint64_t n_paths, unsigned threads = 0);
double annulus_area_target(double a, double b, double mu, const LqgParams& params);

}  // namespace cle::levy
