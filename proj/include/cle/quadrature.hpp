#pragma once

// Globally adaptive Gauss-Kronrod (10/21) integration on finite, half-infinite
// and infinite intervals. Header-only so integrands inline into the rule.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include "cle/errors.hpp"
#include "cle/params.hpp"

namespace cle::quad {

inline constexpr double inf = std::numeric_limits<double>::infinity();

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

// How a half-infinite range is handled: the rational map x = lo + t/(1-t)
// onto (0,1), or a run of doubling panels for integrands with exponential decay.
enum class InfiniteMap { rational, log_panels };

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    std::size_t max_evals = 1'000'000;
    InfiniteMap map = InfiniteMap::rational;
};

template <class T>
struct QuadResult {
    T value{};
    double err_est = 0.0;
    bool converged = false;
    std::size_t evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 11> xgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> wgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525685468, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> wg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }
inline bool finite(double v) { return std::isfinite(v); }
inline bool finite(const std::complex<double>& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
}
inline std::complex<double> as_complex(double v) { return {v, 0.0}; }
inline std::complex<double> as_complex(const std::complex<double>& v) { return v; }

template <class T>
struct Segment {
    double a, b;
    T value;
    double err;
};

template <class T, class F>
Segment<T> gk21(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const T fc = f(c);
    if (!finite(fc)) throw DomainError("integrand not finite at x = " + std::to_string(c));
    T kron = fc * wgk[10];
    T gauss{};
    double abs_sum = magnitude(fc) * wgk[10];
    for (int j = 0; j < 10; ++j) {
        const double dx = h * xgk[j];
        const T f1 = f(c - dx);
        const T f2 = f(c + dx);
        if (!finite(f1) || !finite(f2))
            throw DomainError("integrand not finite near x = " + std::to_string(c - dx));
        kron += (f1 + f2) * wgk[j];
        abs_sum += (magnitude(f1) + magnitude(f2)) * wgk[j];
        if (j % 2 == 1) gauss += (f1 + f2) * wg[j / 2];
    }
    Segment<T> s{a, b, kron * h, magnitude((kron - gauss) * h)};
    // floor at the rounding level of the rule itself
    s.err = std::max(s.err, 50.0 * std::numeric_limits<double>::epsilon() * abs_sum * std::abs(h));
    return s;
}

template <class T>
bool by_error(const Segment<T>& x, const Segment<T>& y) {
    return x.err < y.err;
}

// Adaptive bisection of the worst segment until the summed error meets the
// tolerance. `budget` counts integrand evaluations across calls.
template <class T, class F>
QuadResult<T> adapt_finite(const F& f, double a, double b, const Options& opt, std::size_t& used) {
    std::vector<Segment<T>> heap;
    heap.reserve(64);
    heap.push_back(gk21<T>(f, a, b));
    used += 21;
    T total = heap.front().value;
    double err = heap.front().err;
    auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * magnitude(total)); };
    while (err > target()) {
        if (used + 42 > opt.max_evals) {
            throw NonConvergence("quadrature node budget exhausted", as_complex(total), err, used);
        }
        std::pop_heap(heap.begin(), heap.end(), by_error<T>);
        const Segment<T> worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            throw NonConvergence("quadrature interval collapsed below machine resolution",
                                 as_complex(total), err, used);
        }
        Segment<T> left = gk21<T>(f, worst.a, mid);
        Segment<T> right = gk21<T>(f, mid, worst.b);
        used += 42;
        total += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), by_error<T>);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), by_error<T>);
        if (heap.size() % 64 == 0) {
            // resum to keep the running totals from drifting
            total = T{};
            err = 0.0;
            for (const auto& s : heap) {
                total += s.value;
                err += s.err;
            }
        }
    }
    total = T{};
    err = 0.0;
    for (const auto& s : heap) {
        total += s.value;
        err += s.err;
    }
    return {total, err, true, used};
}

}  // namespace detail

// Integrate f over [lo, hi]; either end may be infinite.
template <class F>
auto integrate(F&& f, Interval iv, const Options& opt = {})
    -> QuadResult<std::decay_t<std::invoke_result_t<F&, double>>> {
    using T = std::decay_t<std::invoke_result_t<F&, double>>;
    std::size_t used = 0;
    const bool lo_inf = std::isinf(iv.lo);
    const bool hi_inf = std::isinf(iv.hi);
    if (std::isnan(iv.lo) || std::isnan(iv.hi)) throw DomainError("NaN integration bound");
    if (iv.lo == iv.hi) return {T{}, 0.0, true, 0};
    if (iv.lo > iv.hi) {
        auto r = integrate(f, {iv.hi, iv.lo}, opt);
        r.value = -r.value;
        return r;
    }
    if (!lo_inf && !hi_inf) return detail::adapt_finite<T>(f, iv.lo, iv.hi, opt, used);

    if (lo_inf && hi_inf) {
        Options half = opt;
        auto left = integrate(f, {-inf, 0.0}, half);
        half.max_evals = opt.max_evals > left.evaluations ? opt.max_evals - left.evaluations : 0;
        auto right = integrate(f, {0.0, inf}, half);
        return {left.value + right.value, left.err_est + right.err_est, true,
                left.evaluations + right.evaluations};
    }

    const double anchor = lo_inf ? iv.hi : iv.lo;
    const double sign = lo_inf ? -1.0 : 1.0;
    if (opt.map == InfiniteMap::log_panels) {
        // panels [anchor + w(2^k - 1), anchor + w(2^{k+1} - 1)], stop after two
        // consecutive panels below tolerance
        T total{};
        double err = 0.0;
        double w = 1.0;
        double start = 0.0;
        int quiet = 0;
        for (int k = 0; k < 1100 && quiet < 2; ++k) {
            Options panel = opt;
            panel.max_evals = opt.max_evals > used ? opt.max_evals - used : 0;
            std::size_t local = 0;
            auto g = [&](double u) { return f(anchor + sign * u); };
            auto r = detail::adapt_finite<T>(g, start, start + w, panel, local);
            used += local;
            total += r.value;
            err += r.err_est;
            const double scale = std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total));
            quiet = (detail::magnitude(r.value) + r.err_est <= 0.01 * scale) ? quiet + 1 : 0;
            start += w;
            w *= 2.0;
            if (!std::isfinite(start)) break;
        }
        if (quiet < 2) throw NonConvergence("panel scheme did not settle", detail::as_complex(total), err, used);
        return {total, err, true, used};
    }

    auto g = [&](double t) -> T {
        const double u = 1.0 - t;
        const double x = anchor + sign * t / u;
        return f(x) * (1.0 / (u * u));
    };
    return detail::adapt_finite<T>(g, 0.0, 1.0, opt, used);
}

// Real integrand convenience entry: converges when err_est <= tol * max(|value|, 1).
QuadResult<double> adapt_integrate(const std::function<double(double)>& f, Interval iv, double tol);

// Integral identities used as quadrature checks; each returns a relative residual.
// `perturb` rescales one natural parameter of one side (1 = faithful).
double verify_bessel_identity_one(double c, double nu, double tol, double perturb = 1.0);
double verify_bessel_identity_two(double nu, double tol, double perturb = 1.0);
double verify_qa_welding_identity(double a, double mu, const LqgParams& params, double tol,
                                  double perturb = 1.0);
double verify_k_integral(double nu, double tol, double perturb = 1.0);

// Integral over (0, inf) of x^power * weight(x) * K_nu(scale * x), with weight
// smooth and finite at 0. The singular head near 0 is integrated in closed
// form from the small-argument expansion of K_nu.
double integrate_bessel_k_moment(double nu, double scale, double power,
                                 const std::function<double(double)>& weight, double tol);

}  // namespace cle::quad
