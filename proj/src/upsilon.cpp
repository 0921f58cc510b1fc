#include <algorithm>
#include <cmath>
#include <numbers>

#include "cle/quadrature.hpp"
#include "cle/specialfn.hpp"

namespace cle {
namespace {

using std::numbers::pi;

// log-Upsilon integrand at t for a = Q/2 - z. Below t = 1 the sinh form is
// used directly; above it the exponential form keeps every term decaying.
ComplexScalar log_upsilon_integrand(double t, ComplexScalar a, double g) {
    const double b = g / 4.0;
    const double c = 1.0 / g;
    const ComplexScalar a2 = a * a;
    if (t < 1e-6) {
        return a2 * (-1.0 + t * (0.5 - a2 / 12.0 + (b * b + c * c) / 6.0));
    }
    if (t < 1.0) {
        const ComplexScalar sh = std::sinh(0.5 * a * t);
        return (a2 * std::exp(-t) - sh * sh / (std::sinh(b * t) * std::sinh(c * t))) / t;
    }
    const double half_q = b + c;
    const ComplexScalar num =
        std::exp((a - half_q) * t) - 2.0 * std::exp(-half_q * t) + std::exp((-a - half_q) * t);
    const double den = -std::expm1(-2.0 * b * t) * -std::expm1(-2.0 * c * t);
    return (a2 * std::exp(-t) - num / den) / t;
}

ComplexScalar log_upsilon_strip(ComplexScalar z, const LqgParams& p, double tol) {
    const ComplexScalar a = 0.5 * p.q_charge() - z;
    const double g = p.gamma();
    quad::Options opt;
    opt.abs_tol = 0.1 * tol;
    opt.rel_tol = 0.1 * tol;
    auto f = [&](double t) { return log_upsilon_integrand(t, a, g); };
    try {
        return quad::integrate(f, {0.0, quad::inf}, opt).value;
    } catch (const NonConvergence& e) {
        throw NonConvergence("Upsilon log-integral did not reach tolerance: " + std::string(e.what()),
                             e.partial_value(), e.err_est(), e.evaluations());
    }
}

ComplexScalar cpow(double base, ComplexScalar s) { return std::exp(s * std::log(base)); }

// Upsilon(w + step) / Upsilon(w) for the two admissible steps.
ComplexScalar shift_ratio(ComplexScalar w, bool half_step, const LqgParams& p) {
    const double g = p.gamma();
    if (half_step) {
        const ComplexScalar u = 0.5 * g * w;
        return gamma_fn(u) * reciprocal_gamma(1.0 - u) * cpow(0.5 * g, 1.0 - g * w);
    }
    const ComplexScalar u = 2.0 * w / g;
    return gamma_fn(u) * reciprocal_gamma(1.0 - u) * cpow(0.5 * g, 4.0 * w / g - 1.0);
}

// Upsilon(w) / Upsilon(w + step); entire in w.
ComplexScalar inverse_shift_ratio(ComplexScalar w, bool half_step, const LqgParams& p) {
    const double g = p.gamma();
    if (half_step) {
        const ComplexScalar u = 0.5 * g * w;
        return gamma_fn(1.0 - u) * reciprocal_gamma(u) * cpow(0.5 * g, g * w - 1.0);
    }
    const ComplexScalar u = 2.0 * w / g;
    return gamma_fn(1.0 - u) * reciprocal_gamma(u) * cpow(0.5 * g, 1.0 - 4.0 * w / g);
}

}  // namespace

ComplexScalar upsilon(ComplexScalar z, const LqgParams& p, double tol) {
    if (!(tol > 0.0)) throw DomainError("upsilon: tol must be positive");
    const double q = p.q_charge();
    const double half = 0.5 * p.gamma();
    const double other = 2.0 / p.gamma();
    const double x = z.real();
    // the log-integral converges slowly near Re z = 0 and Q, so arguments
    // there are moved one gamma/2 step inward first
    const double edge = 0.1 * std::min(half, other);
    ComplexScalar factor = 1.0;
    ComplexScalar w = z;
    if (!(x > 0.0 && x < q)) {
        // fewest steps into the strip, ties toward gamma/2
        const double gap = x <= 0.0 ? -x : x - q;
        const long n_half = static_cast<long>(std::floor(gap / half)) + 1;
        const long n_other = static_cast<long>(std::floor(gap / other)) + 1;
        const bool use_half = n_half <= n_other;
        const double step = use_half ? half : other;
        const long n = use_half ? n_half : n_other;
        if (x <= 0.0) {
            for (long k = 0; k < n; ++k) {
                factor *= inverse_shift_ratio(w, use_half, p);
                w += step;
            }
        } else {
            for (long k = 0; k < n; ++k) {
                w -= step;
                factor *= shift_ratio(w, use_half, p);
            }
        }
    }
    if (w.real() < edge) {
        factor *= inverse_shift_ratio(w, true, p);
        w += half;
    } else if (w.real() > q - edge) {
        w -= half;
        factor *= shift_ratio(w, true, p);
    }
    if (factor == 0.0) return 0.0;
    return factor * std::exp(log_upsilon_strip(w, p, tol));
}

double upsilon_zero_distance(ComplexScalar z, const LqgParams& p) {
    const double half = 0.5 * p.gamma();
    const double other = 2.0 / p.gamma();
    const double q = p.q_charge();
    double best = kInfinity;
    // lower lattice -m half - n other, upper lattice Q + m half + n other
    for (int side = 0; side < 2; ++side) {
        const double depth = side == 0 ? -z.real() : z.real() - q;
        const int m_max = std::max(0, static_cast<int>(std::ceil((depth + 1.0) / half))) + 1;
        for (int m = 0; m <= m_max; ++m) {
            const double rest = depth - m * half;
            const int n0 = std::max(0, static_cast<int>(std::floor(rest / other)));
            for (int n = std::max(0, n0 - 1); n <= n0 + 1; ++n) {
                const double pos = side == 0 ? -m * half - n * other : q + m * half + n * other;
                best = std::min(best, std::abs(z - ComplexScalar(pos, 0.0)));
            }
        }
    }
    return best;
}

DozzValue dozz(const std::array<ComplexScalar, 3>& alphas, const LqgParams& p, double tol) {
    const double g = p.gamma();
    const double q = p.q_charge();
    if (!(g < 2.0)) throw DomainError("dozz: requires gamma < 2");
    const ComplexScalar total = alphas[0] + alphas[1] + alphas[2];
    const ComplexScalar half_total = 0.5 * total;

    const std::array<ComplexScalar, 4> denominators = {half_total - q, half_total - alphas[0],
                                                       half_total - alphas[1], half_total - alphas[2]};
    const char* names[4] = {"Upsilon(sum/2 - Q)", "Upsilon(sum/2 - alpha1)", "Upsilon(sum/2 - alpha2)",
                            "Upsilon(sum/2 - alpha3)"};
    for (int i = 0; i < 4; ++i) {
        if (upsilon_zero_distance(denominators[i], p) < kPoleTol) throw PoleHit(names[i], denominators[i]);
    }

    const double base = pi * std::pow(0.5 * g, 2.0 - 0.5 * g * g) * std::tgamma(0.25 * g * g) /
                        std::tgamma(1.0 - 0.25 * g * g);
    ComplexScalar value = cpow(base, (2.0 * q - total) / g);
    // Upsilon'(0) = Upsilon(gamma/2)
    value *= upsilon(0.5 * g, p, tol);
    for (const auto& a : alphas) value *= upsilon(a, p, tol);
    for (const auto& d : denominators) value /= upsilon(d, p, tol);

    DozzValue out{value, false};
    const bool all_real = std::all_of(alphas.begin(), alphas.end(), [](ComplexScalar a) { return a.imag() == 0.0; });
    const bool below_q = std::all_of(alphas.begin(), alphas.end(), [q](ComplexScalar a) { return a.real() < q; });
    out.outside_seiberg = !(all_real && total.real() > 2.0 * q && below_q);
    return out;
}

ComplexScalar kpz_alpha_from_lambda(double lambda, const LqgParams& p) {
    const double q = p.q_charge();
    const double disc = q * q - 4.0 - 2.0 * lambda;
    if (disc >= 0.0) return {q - std::sqrt(disc), 0.0};
    return {q, -std::sqrt(-disc)};
}

double cle_three_point_threshold(double kappa) { return 3.0 * kappa / 32.0 - 1.0 + 2.0 / kappa; }

namespace {

double n_gamma_prefactor(const LqgParams& p, double tol) {
    const double g = p.gamma();
    const double dozz_ggg = dozz({g, g, g}, p, tol).value.real();
    if (!(dozz_ggg > 0.0)) throw DomainError("n_gamma: DOZZ(gamma,gamma,gamma) is not positive");
    return -pi * std::cos(4.0 * pi / (g * g)) * std::tgamma(4.0 / (g * g) - 1.0) /
           std::tgamma(1.0 - 0.25 * g * g) * std::cbrt(dozz_ggg);
}

ComplexScalar n_gamma_with(ComplexScalar alpha, const LqgParams& p, double prefactor) {
    const double g = p.gamma();
    const double q = p.q_charge();
    const ComplexScalar num_arg = 0.5 * g * (alpha - 0.5 * g);
    if (gamma_pole_distance(num_arg) < kPoleTol) throw PoleHit("Gamma(g/2 (alpha - g/2))", num_arg);
    const ComplexScalar cos_term = std::cos(2.0 * pi / g * (q - alpha));
    if (std::abs(cos_term) < kPoleTol) throw PoleHit("cos(2 pi/g (Q - alpha))", alpha);
    const double weight = pi * std::tgamma(0.25 * g * g) / std::tgamma(1.0 - 0.25 * g * g);
    return prefactor * gamma_fn(num_arg) * reciprocal_gamma(2.0 / g * (q - alpha)) / cos_term *
           cpow(weight, -alpha / g);
}

// Upsilon(alpha) divided into the Gamma/cos factor of N_gamma, written with the
// zero of Upsilon at Q cancelled against the pole of Gamma(2(Q - alpha)/g).
ComplexScalar reduced_weight(ComplexScalar alpha, const LqgParams& p, double tol) {
    const double g = p.gamma();
    const ComplexScalar x = p.q_charge() - alpha;
    const ComplexScalar num_arg = 0.5 * g * alpha - 0.25 * g * g;
    if (gamma_pole_distance(num_arg) < kPoleTol) throw PoleHit("Gamma(g alpha/2 - g^2/4)", num_arg);
    const ComplexScalar cos_term = std::cos(2.0 * pi * x / g);
    if (std::abs(cos_term) < kPoleTol) throw PoleHit("cos(2 pi/g (Q - alpha))", alpha);
    const ComplexScalar r = upsilon(x + 0.5 * g, p, tol) * gamma_fn(1.0 - 0.5 * g * x) *
                            cpow(0.5 * g, g * x) * reciprocal_gamma(1.0 + 0.5 * g * x);
    return (2.0 / g) * gamma_fn(num_arg) * reciprocal_gamma(1.0 + 2.0 * x / g) / (cos_term * r);
}

}  // namespace

ComplexScalar n_gamma(ComplexScalar alpha, const LqgParams& p, double tol) {
    if (!(p.gamma() < 2.0)) throw DomainError("n_gamma: requires gamma < 2");
    return n_gamma_with(alpha, p, n_gamma_prefactor(p, tol));
}

ComplexScalar cle_three_point_reduced(const std::array<ComplexScalar, 3>& alphas, const LqgParams& p, double tol) {
    const double g = p.gamma();
    const double q = p.q_charge();
    const ComplexScalar total = alphas[0] + alphas[1] + alphas[2];
    const ComplexScalar half_total = 0.5 * total;

    ComplexScalar value = cpow(0.5 * g, (2.0 - 0.5 * g * g) * (total - 3.0 * g) / g);
    const ComplexScalar ref = reduced_weight(g, p, tol);
    for (const auto& a : alphas) value *= reduced_weight(a, p, tol) / ref;

    value *= upsilon(half_total - q, p, tol);
    for (const auto& a : alphas) value *= upsilon(half_total - a, p, tol);
    const ComplexScalar ups_half = upsilon(0.5 * g, p, tol);
    value /= upsilon(1.5 * g - q, p, tol) * ups_half * ups_half * ups_half;
    return value;
}

double cle_three_point(const std::array<double, 3>& lambdas, double kappa, double tol) {
    if (!(kappa > 8.0 / 3.0 && kappa <= 4.0)) throw DomainError("cle_three_point: kappa must lie in (8/3, 4]");
    const double threshold = cle_three_point_threshold(kappa);
    for (double l : lambdas) {
        if (std::isnan(l)) throw DomainError("cle_three_point: NaN exponent");
        if (l <= threshold) return kInfinity;
    }
    const LqgParams p = LqgParams::from_kappa(kappa);
    const double inner_tol = std::max(1e-14, 0.01 * tol);
    // sorted so that permuted arguments give bit-identical results
    std::array<double, 3> sorted = lambdas;
    std::sort(sorted.begin(), sorted.end());
    std::array<ComplexScalar, 3> alphas;
    for (int i = 0; i < 3; ++i) alphas[i] = kpz_alpha_from_lambda(sorted[i], p);

    ComplexScalar value;
    if (kappa < 4.0) {
        const double pref = n_gamma_prefactor(p, inner_tol);
        value = 1.0;
        for (const auto& a : alphas) value *= n_gamma_with(a, p, pref);
        value /= dozz(alphas, p, inner_tol).value;
    } else {
        // the literal normalization is 0 * inf at kappa = 4
        value = cle_three_point_reduced(alphas, p, inner_tol);
    }
    if (!(std::abs(value.imag()) < tol * std::abs(value.real())) && value.imag() != 0.0) {
        throw ImaginaryLeak("cle_three_point: imaginary part exceeds tolerance", value);
    }
    if (!(value.real() > 0.0)) throw ImaginaryLeak("cle_three_point: non-positive real part", value);
    return value.real();
}

double three_point_product_identity(const std::array<double, 3>& alphas, const LqgParams& p, double tol) {
    const double g = p.gamma();
    const double q = p.q_charge();
    if (!(g < 2.0)) throw DomainError("three_point_product_identity: requires gamma < 2");
    for (double a : alphas) {
        if (!(a > q - 0.25 * g && a < q)) throw DomainError("three_point_product_identity: alpha outside (Q - g/4, Q)");
    }
    const double inner_tol = std::max(1e-14, 0.01 * tol);
    const double weight = pi * std::tgamma(0.25 * g * g) / std::tgamma(1.0 - 0.25 * g * g);

    auto lhs = [&](const std::array<double, 3>& a) {
        std::array<double, 3> lambdas;
        double lambda_sum = 0.0;
        for (int i = 0; i < 3; ++i) {
            lambdas[i] = a[i] * (q - 0.5 * a[i]) - 2.0;
            lambda_sum += lambdas[i];
        }
        const double d = dozz({a[0], a[1], a[2]}, p, inner_tol).value.real();
        return std::pow(2.0, -lambda_sum - 1.0) * d * cle_three_point(lambdas, p.kappa(), tol);
    };
    auto rhs = [&](const std::array<double, 3>& a) {
        double v = 1.0;
        for (double x : a) {
            const double s = 2.0 / g * (q - x);
            v *= std::pow(2.0, 0.5 * x * x - q * x) * std::tgamma(0.5 * g * x - 0.25 * g * g) /
                 (std::tgamma(s) * std::cos(2.0 * pi / g * (q - x))) * std::pow(weight, -x / g);
        }
        return v;
    };
    const double c = lhs({g, g, g}) / rhs({g, g, g});
    const double right = c * rhs(alphas);
    return std::abs(lhs(alphas) - right) / std::abs(right);
}

}  // namespace cle
