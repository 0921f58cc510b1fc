#include "cle/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "cle/specialfn.hpp"

namespace cle::quad {
namespace {

using std::numbers::pi;
constexpr double kEulerGamma = std::numbers::egamma;
constexpr double kSmallOrder = 1e-7;

double relative_residual(double lhs, double rhs) { return std::abs(lhs - rhs) / std::abs(rhs); }

// int_0^X x^p K_nu(x) dx from the two leading terms of K_nu at 0.
double bessel_head(double nu, double p, double X) {
    nu = std::abs(nu);
    if (nu < kSmallOrder) {
        return std::pow(X, p + 1.0) / (p + 1.0) * (-std::log(0.5 * X) - kEulerGamma + 1.0 / (p + 1.0));
    }
    return 0.5 * (std::tgamma(nu) * std::pow(2.0, nu) * std::pow(X, p + 1.0 - nu) / (p + 1.0 - nu) +
                  std::tgamma(-nu) * std::pow(2.0, -nu) * std::pow(X, p + 1.0 + nu) / (p + 1.0 + nu));
}

Options piece_options(double tol) {
    Options opt;
    opt.abs_tol = 0.0;
    opt.rel_tol = tol;
    return opt;
}

void require_half_order(double nu, const char* who) {
    if (!(std::abs(nu) < 0.5)) throw DomainError(std::string(who) + ": nu must lie in (-1/2, 1/2)");
}

}  // namespace

QuadResult<double> adapt_integrate(const std::function<double(double)>& f, Interval iv, double tol) {
    if (!(tol > 0.0)) throw DomainError("adapt_integrate: tol must be positive");
    Options opt;
    opt.abs_tol = tol;
    opt.rel_tol = tol;
    return integrate(f, iv, opt);
}

double integrate_bessel_k_moment(double nu, double scale, double power,
                                 const std::function<double(double)>& weight, double tol) {
    if (!(scale > 0.0)) throw DomainError("integrate_bessel_k_moment: scale must be positive");
    if (!(power + 1.0 - std::abs(nu) > 0.0)) throw DomainError("integrate_bessel_k_moment: not integrable at 0");
    // work in y = scale * x; the weight is assumed to vary on unit scale in x
    const double head_end = 1e-14 * std::min(1.0, scale);
    const double k_tol = std::max(1e-15, 1e-3 * tol);
    auto in_y = [&](double y) { return std::pow(y, power) * weight(y / scale) * bessel_k(nu, y, k_tol); };
    const double head = weight(0.0) * bessel_head(nu, power, head_end);
    const auto mid = integrate([&](double u) {
        const double y = std::exp(u);
        return y * in_y(y);
    }, {std::log(head_end), 0.0}, piece_options(0.25 * tol));
    const auto tail = integrate(in_y, {1.0, inf}, piece_options(0.25 * tol));
    return std::pow(scale, -power - 1.0) * (head + mid.value + tail.value);
}

double verify_bessel_identity_one(double c, double nu, double tol, double perturb) {
    if (!(c > 0.0)) throw DomainError("verify_bessel_identity_one: c must be positive");
    require_half_order(nu, "verify_bessel_identity_one");
    const double lc = perturb * c;
    const double lhs = integrate_bessel_k_moment(nu, lc, -0.5, [&](double x) { return std::exp(-lc * x); }, tol);
    const double rhs = std::pow(pi, 1.5) / (std::sqrt(2.0 * c) * std::cos(pi * nu));
    return relative_residual(lhs, rhs);
}

double verify_bessel_identity_two(double nu, double tol, double perturb) {
    require_half_order(nu, "verify_bessel_identity_two");
    const double anu = std::abs(nu);
    const double inner_tol = std::max(1e-14, 1e-2 * tol);
    // inner integral over b at fixed x
    auto inner = [&](double x) {
        return integrate_bessel_k_moment(nu, x, -0.5, [&](double b) {
            return std::exp(-perturb * (b + 1.0) * x) / (b + 1.0);
        }, inner_tol);
    };
    // below x_min the inner integral is replaced by its small-x expansion
    const double x_min = 1e-16;
    double head;
    if (anu < kSmallOrder) {
        head = -pi * x_min * (std::log(0.5 * x_min) - 1.0 + kEulerGamma);
    } else {
        head = pi / (2.0 * std::cos(pi * anu)) *
               (std::tgamma(anu) * std::pow(2.0, anu) * std::pow(x_min, 1.0 - anu) / (1.0 - anu) +
                std::tgamma(-anu) * std::pow(2.0, -anu) * std::pow(x_min, 1.0 + anu) / (1.0 + anu));
    }
    const auto mid = integrate([&](double u) {
        const double x = std::exp(u);
        return x * inner(x);
    }, {std::log(x_min), 0.0}, piece_options(0.25 * tol));
    const auto tail = integrate(inner, {1.0, inf}, piece_options(0.25 * tol));
    const double lhs = head + mid.value + tail.value;
    const double rhs = pi * pi / (2.0 * std::cos(pi * nu) * std::cos(0.5 * pi * nu));
    return relative_residual(lhs, rhs);
}

double verify_qa_welding_identity(double a, double mu, const LqgParams& params, double tol, double perturb) {
    if (!(a > 0.0 && mu > 0.0)) throw DomainError("verify_qa_welding_identity: a and mu must be positive");
    if (!params.simple_loop_regime()) throw DomainError("verify_qa_welding_identity: kappa must lie in (8/3, 4)");
    const double g = params.gamma();
    const double nu = 2.0 / g * (params.q_charge() - g);
    const double s = std::sqrt(mu / std::sin(pi * g * g / 4.0));
    const double k_tol = std::max(1e-15, 1e-3 * tol);
    const double lhs = bessel_k(nu, a * s * perturb, k_tol) / a;
    const double c = std::cos(pi * nu) / pi;
    // b * QA(a, b)[e^{-mu A}] * b^{-1} K_nu(b s), with b^{-1/2} pulled into the power
    const double rhs = integrate_bessel_k_moment(nu, s, -0.5, [&](double b) {
        return c * std::exp(-(a + b) * s) / (std::sqrt(a) * (a + b));
    }, tol);
    return relative_residual(lhs, rhs);
}

double verify_k_integral(double nu, double tol, double perturb) {
    if (!(std::abs(nu) < 1.0)) throw DomainError("verify_k_integral: nu must lie in (-1, 1)");
    const double lhs = integrate_bessel_k_moment(nu, perturb, 0.0, [](double) { return 1.0; }, tol);
    const double rhs = pi / (2.0 * std::cos(0.5 * pi * nu));
    return relative_residual(lhs, rhs);
}

}  // namespace cle::quad
