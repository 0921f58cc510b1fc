#pragma once

#include <cmath>
#include <complex>

#include "cle/errors.hpp"

namespace cle {

using ComplexScalar = std::complex<double>;

// Coupling constants of the Liouville/CLE correspondence. Built from either
// gamma or kappa; the other constants are derived once at construction.
class LqgParams {
public:
    static LqgParams from_gamma(double gamma) {
        if (!(gamma > 0.0 && gamma <= 2.0)) throw DomainError("gamma must lie in (0, 2]");
        return LqgParams(gamma, gamma * gamma);
    }
    static LqgParams from_kappa(double kappa) {
        if (!(kappa > 0.0 && kappa <= 4.0)) throw DomainError("kappa must lie in (0, 4]");
        return LqgParams(std::sqrt(kappa), kappa);
    }

    double gamma() const { return gamma_; }
    double kappa() const { return kappa_; }
    double q_charge() const { return q_; }
    double beta() const { return beta_; }

    // beta lies in (3/2, 2) exactly when kappa lies in (8/3, 4).
    bool simple_loop_regime() const { return kappa_ > 8.0 / 3.0 && kappa_ < 4.0; }

private:
    LqgParams(double g, double k) : gamma_(g), kappa_(k), q_(g / 2.0 + 2.0 / g), beta_(4.0 / k + 0.5) {}

    double gamma_;
    double kappa_;
    double q_;
    double beta_;
};

}  // namespace cle
