#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "cle/specialfn.hpp"

namespace cle {
namespace {

// Lanczos g = 7, n = 9.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

bool is_real(ComplexScalar z) { return z.imag() == 0.0; }

}  // namespace

double gamma_pole_distance(ComplexScalar z) {
    const double n = std::min(std::round(z.real()), 0.0);
    return std::abs(z - ComplexScalar(n, 0.0));
}

ComplexScalar log_gamma(ComplexScalar z) {
    using std::numbers::pi;
    if (z.real() < 0.5) {
        return std::log(pi) - std::log(std::sin(pi * z)) - log_gamma(1.0 - z);
    }
    z -= 1.0;
    ComplexScalar x = kLanczos[0];
    for (int i = 1; i < 9; ++i) x += kLanczos[i] / (z + static_cast<double>(i));
    const ComplexScalar t = z + kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

ComplexScalar gamma_fn(ComplexScalar z) {
    if (is_real(z)) return std::tgamma(z.real());
    return std::exp(log_gamma(z));
}

ComplexScalar reciprocal_gamma(ComplexScalar z) {
    if (is_real(z)) {
        const double x = z.real();
        if (x <= 0.0 && x == std::round(x)) return 0.0;
        return 1.0 / std::tgamma(x);
    }
    return std::exp(-log_gamma(z));
}

}  // namespace cle
