#include <algorithm>
#include <cmath>
#include <numbers>

#include "cle/quadrature.hpp"
#include "cle/specialfn.hpp"

namespace cle {
namespace {

using std::numbers::pi;

void require_simple_loops(const LqgParams& p, const char* who) {
    if (!p.simple_loop_regime()) throw DomainError(std::string(who) + ": kappa must lie in (8/3, 4)");
}

void require_disk_alpha(double alpha, const LqgParams& p, const char* who) {
    if (!(alpha > 0.5 * p.gamma() && alpha < p.q_charge()))
        throw DomainError(std::string(who) + ": alpha must lie in (gamma/2, Q)");
}

double sin_area(const LqgParams& p) { return std::sin(pi * p.kappa() / 4.0); }

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// sin(pi r)/(pi r) with r = sqrt(radicand), continued to sinh for radicand < 0.
double sinc_of_root(double radicand) {
    if (radicand >= 0.0) return sinc(pi * std::sqrt(radicand));
    const double y = pi * std::sqrt(-radicand);
    return std::sinh(y) / y;
}

}  // namespace

double bessel_k(double nu, double x, double tol) {
    if (!(x > 0.0)) throw DomainError("bessel_k: x must be positive");
    if (!(tol > 0.0)) throw DomainError("bessel_k: tol must be positive");
    const double anu = std::abs(nu);
    // Trapezoid rule on the even, analytic integrand; converges geometrically in
    // 1/h. Scaled by exp(x) so large x does not underflow.
    auto f = [x, anu](double t) {
        const double sh = std::sinh(0.5 * t);
        return 0.5 * std::exp(anu * t - 2.0 * x * sh * sh) * (1.0 + std::exp(-2.0 * anu * t));
    };
    auto trapezoid = [&](double h) {
        double sum = 0.5 * f(0.0);
        const double t_peak = std::asinh(anu / x);
        const double peak_exponent = anu * t_peak - x * (std::cosh(t_peak) - 1.0);
        for (int k = 1;; ++k) {
            const double t = k * h;
            const double v = f(t);
            sum += v;
            const double sh = std::sinh(0.5 * t);
            if (t > t_peak && anu * t - 2.0 * x * sh * sh < peak_exponent - 45.0) break;
            if (k > 1'000'000) throw NonConvergence("bessel_k: tail did not decay", sum * h, kInfinity, k);
        }
        return sum * h;
    };
    double h = std::min(0.125, 0.5 / std::sqrt(x));
    double coarse = trapezoid(2.0 * h);
    for (int level = 0; level < 8; ++level, h *= 0.5) {
        const double fine = trapezoid(h);
        if (std::abs(fine - coarse) <= tol * std::abs(fine)) return std::exp(-x) * fine;
        coarse = fine;
    }
    throw NonConvergence("bessel_k: step refinement stalled", std::exp(-x) * coarse, tol, 0);
}

double u_bar(double alpha, const LqgParams& p) {
    const double g = p.gamma();
    if (!(g < 2.0)) throw DomainError("u_bar: requires gamma < 2");
    const double arg = 0.5 * g * alpha - 0.25 * g * g;
    if (std::abs(arg) < kPoleTol) throw PoleHit("Gamma(g alpha/2 - g^2/4)", arg);
    if (arg < 0.0) throw DomainError("u_bar: alpha must exceed gamma/2");
    const double base = std::pow(2.0, -0.5 * g * alpha) * 2.0 * pi / std::tgamma(1.0 - 0.25 * g * g);
    return std::pow(base, 2.0 / g * (p.q_charge() - alpha)) * std::tgamma(arg);
}

double disk_length_mass(double alpha, double ell, const LqgParams& p) {
    require_disk_alpha(alpha, p, "disk_length_mass");
    if (!(ell > 0.0)) throw DomainError("disk_length_mass: ell must be positive");
    const double g = p.gamma();
    return 2.0 / g * std::pow(2.0, -0.5 * alpha * alpha) * u_bar(alpha, p) *
           std::pow(ell, 2.0 / g * (alpha - p.q_charge()) - 1.0);
}

double fzz_disk_laplace(double alpha, double ell, double mu, const LqgParams& p) {
    require_disk_alpha(alpha, p, "fzz_disk_laplace");
    if (!(ell > 0.0) || !(mu > 0.0)) throw DomainError("fzz_disk_laplace: ell and mu must be positive");
    const double g = p.gamma();
    const double s = 2.0 / g * (p.q_charge() - alpha);
    const double root = std::sqrt(mu / sin_area(p));
    return 2.0 / g * std::pow(2.0, -0.5 * alpha * alpha) * u_bar(alpha, p) / ell * 2.0 / std::tgamma(s) *
           std::pow(0.5 * root, s) * bessel_k(s, ell * root);
}

double disk_area_density(double alpha, double x, const LqgParams& p) {
    require_disk_alpha(alpha, p, "disk_area_density");
    if (!(x > 0.0)) throw DomainError("disk_area_density: x must be positive");
    const double s = 2.0 / p.gamma() * (p.q_charge() - alpha);
    const double scale = 4.0 * sin_area(p);
    return std::exp(-s * std::log(scale) - std::lgamma(s) - (s + 1.0) * std::log(x) - 1.0 / (x * scale));
}

double qa_total_mass(double a, double b, const LqgParams& p) { return qa_laplace(a, b, 0.0, p); }

double qa_laplace(double a, double b, double mu, const LqgParams& p) {
    require_simple_loops(p, "qa_laplace");
    if (!(a > 0.0 && b > 0.0)) throw DomainError("qa_laplace: boundary lengths must be positive");
    if (!(mu >= 0.0)) throw DomainError("qa_laplace: mu must be non-negative");
    const double c = std::cos(pi * (4.0 / p.kappa() - 1.0)) / pi;
    return c * std::exp(-(a + b) * std::sqrt(mu / sin_area(p))) / (std::sqrt(a * b) * (a + b));
}

double qp_constant(const LqgParams& p, double tol) {
    require_simple_loops(p, "qp_constant");
    const double g = p.gamma();
    const double k = p.kappa();
    const double q = p.q_charge();
    const double d = dozz({g, g, g}, p, tol).value.real();
    const double inner = std::pow(2.0, k / 2.0 + 4.0 / k - 2.0) * std::tgamma(4.0 / k - 1.0) *
                         std::cos(pi * (4.0 / k - 1.0)) * std::pow(sin_area(p), 2.0 / k - 0.75) / u_bar(g, p);
    return g * std::pow(q - g, 4) / std::sqrt(2.0 * pi) * d * inner * inner * inner;
}

double qp_laplace(const std::array<double, 3>& ells, double mu, const LqgParams& p, double tol) {
    require_simple_loops(p, "qp_laplace");
    for (double l : ells) {
        if (!(l > 0.0)) throw DomainError("qp_laplace: boundary lengths must be positive");
    }
    if (!(mu > 0.0)) throw DomainError("qp_laplace: mu must be positive");
    const double sum = ells[0] + ells[1] + ells[2];
    return qp_constant(p, tol) * std::pow(mu, 0.25 - 2.0 / p.kappa()) / std::sqrt(ells[0] * ells[1] * ells[2]) *
           std::exp(-sum * std::sqrt(mu / sin_area(p)));
}

double reflection_coeff(double alpha, const LqgParams& p) {
    require_disk_alpha(alpha, p, "reflection_coeff");
    const double g = p.gamma();
    if (!(g < 2.0)) throw DomainError("reflection_coeff: requires gamma < 2");
    const double x = p.q_charge() - alpha;
    const double s = 2.0 / g * x;
    const double weight = pi * std::tgamma(0.25 * g * g) / std::tgamma(1.0 - 0.25 * g * g);
    return -std::pow(weight, s) / s * std::tgamma(-0.5 * g * x) / (std::tgamma(0.5 * g * x) * std::tgamma(s));
}

double thickness_mgf_from_reflection(double lambda, const LqgParams& p) {
    const double k = p.kappa();
    const double g = p.gamma();
    const double q = p.q_charge();
    if (!(g < 2.0)) throw DomainError("thickness_mgf_from_reflection: requires gamma < 2");
    if (!(lambda > 1.0 - k / 8.0 - 2.0 / k && lambda < 1.0 - k / 8.0))
        throw DomainError("thickness_mgf_from_reflection: lambda outside (1 - k/8 - 2/k, 1 - k/8)");
    // loop mass at insertion alpha, up to a gamma-dependent constant
    auto loop_mass = [&](double alpha) {
        const double s = 2.0 / g * (q - alpha);
        const double disk = std::pow(2.0, -0.5 * alpha * alpha) * u_bar(alpha, p);
        return disk * disk * std::pow(4.0 * sin_area(p), -s) / ((q - alpha) * std::tgamma(s)) /
               reflection_coeff(alpha, p);
    };
    const double alpha = q - std::sqrt(q * q - 4.0 + 2.0 * lambda);
    return std::pow(2.0, -2.0 * lambda) * loop_mass(alpha) / loop_mass(g);
}

double ssw_cr_moment(double lambda, double kappa) {
    if (!(kappa > 8.0 / 3.0 && kappa < 8.0)) throw DomainError("ssw_cr_moment: kappa must lie in (8/3, 8)");
    if (lambda <= 3.0 * kappa / 32.0 + 2.0 / kappa - 1.0) return kInfinity;
    const double u = 1.0 - 4.0 / kappa;
    const double radicand = u * u - 8.0 * lambda / kappa;
    const double den = radicand >= 0.0 ? std::cos(pi * std::sqrt(radicand)) : std::cosh(pi * std::sqrt(-radicand));
    return -std::cos(4.0 * pi / kappa) / den;
}

double electrical_thickness_mgf(double lambda, double kappa) {
    if (!(kappa > 0.0 && kappa <= 4.0)) throw DomainError("electrical_thickness_mgf: kappa must lie in (0, 4]");
    if (std::isnan(lambda)) throw DomainError("electrical_thickness_mgf: NaN lambda");
    if (lambda >= 1.0 - kappa / 8.0) return kInfinity;
    const double u = std::abs(1.0 - kappa / 4.0);
    return sinc(pi * u) / sinc_of_root(u * u + lambda * kappa / 2.0);
}

double kw_conjectured_mgf(double lambda, double kappa) {
    if (!(kappa > 0.0)) throw DomainError("kw_conjectured_mgf: kappa must be positive");
    const double v = 1.0 - 4.0 / kappa;
    const double radicand = v * v + 8.0 * lambda / kappa;
    if (radicand >= 1.0) return kInfinity;
    const double lead = v == 0.0 ? 1.0 : std::sin(pi * v) / (pi * v);
    if (radicand >= 0.0) {
        const double r = std::sqrt(radicand);
        return r == 0.0 ? lead : lead * pi * r / std::sin(pi * r);
    }
    const double r = std::sqrt(-radicand);
    return lead * pi * r / std::sinh(pi * r);
}

double loop_soup_intensity(double kappa) {
    if (!(kappa >= 8.0 / 3.0 && kappa <= 4.0)) throw DomainError("loop_soup_intensity: kappa must lie in [8/3, 4]");
    return (3.0 * kappa - 8.0) * (6.0 - kappa) / (2.0 * kappa);
}

}  // namespace cle
