#pragma once

#include <array>
#include <complex>
#include <limits>

#include "cle/params.hpp"

namespace cle {

inline constexpr double kDefaultTol = 1e-10;
inline constexpr double kPoleTol = 1e-10;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Gamma function off the real line (Lanczos, reflected for Re z < 1/2).
// `reciprocal_gamma` is entire and returns exact zeros at the poles of Gamma.
ComplexScalar log_gamma(ComplexScalar z);
ComplexScalar gamma_fn(ComplexScalar z);
ComplexScalar reciprocal_gamma(ComplexScalar z);
// Distance from z to the nearest pole of Gamma (non-positive integers).
double gamma_pole_distance(ComplexScalar z);

// Barnes-type Upsilon function. Inside 0 < Re z < Q it is the exponential of
// the log-integral; elsewhere it is continued with the two shift relations.
ComplexScalar upsilon(ComplexScalar z, const LqgParams& p, double tol = kDefaultTol);
// Distance from z to the zero lattice {-m g/2 - n 2/g} u {Q + m g/2 + n 2/g}.
double upsilon_zero_distance(ComplexScalar z, const LqgParams& p);

struct DozzValue {
    ComplexScalar value;
    bool outside_seiberg = false;
};

// Three-point constant of sphere Liouville theory at cosmological constant 1.
DozzValue dozz(const std::array<ComplexScalar, 3>& alphas, const LqgParams& p, double tol = kDefaultTol);

// Root alpha = Q - sqrt(Q^2 - 4 - 2 lambda) (principal branch) of
// alpha (Q - alpha/2) - 2 = lambda.
ComplexScalar kpz_alpha_from_lambda(double lambda, const LqgParams& p);

// Threshold below which the CLE three-point constant is infinite.
double cle_three_point_threshold(double kappa);

// CLE three-point constant for conformal-radius exponents lambdas, kappa in (8/3, 4].
double cle_three_point(const std::array<double, 3>& lambdas, double kappa, double tol = kDefaultTol);

// Same constant assembled after cancelling the normalization factors
// analytically; finite through kappa = 4. Exposed for cross-checks.
ComplexScalar cle_three_point_reduced(const std::array<ComplexScalar, 3>& alphas, const LqgParams& p,
                                      double tol = kDefaultTol);

ComplexScalar n_gamma(ComplexScalar alpha, const LqgParams& p, double tol = kDefaultTol);

// K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt.
double bessel_k(double nu, double x, double tol = kDefaultTol);

double u_bar(double alpha, const LqgParams& p);
double fzz_disk_laplace(double alpha, double ell, double mu, const LqgParams& p);
// Quantum-length total mass of the one-point disk, the mu -> 0 limit of the above.
double disk_length_mass(double alpha, double ell, const LqgParams& p);
double disk_area_density(double alpha, double x, const LqgParams& p);

double qa_total_mass(double a, double b, const LqgParams& p);
double qa_laplace(double a, double b, double mu, const LqgParams& p);
double qp_constant(const LqgParams& p, double tol = kDefaultTol);
double qp_laplace(const std::array<double, 3>& ells, double mu, const LqgParams& p, double tol = kDefaultTol);
double reflection_coeff(double alpha, const LqgParams& p);

// Thickness law reassembled from the reflection coefficient and the disk
// length law: E[exp(lambda * theta)] up to normalization at lambda = 0.
double thickness_mgf_from_reflection(double lambda, const LqgParams& p);

double ssw_cr_moment(double lambda, double kappa);
double electrical_thickness_mgf(double lambda, double kappa);
// Kenyon-Wilson form of the thickness law, written with 4/kappa and 8 lambda/kappa.
double kw_conjectured_mgf(double lambda, double kappa);
double loop_soup_intensity(double kappa);

// Relative residual of the factorized three-point identity at real alphas in
// (Q - g/4, Q).
double three_point_product_identity(const std::array<double, 3>& alphas, const LqgParams& p,
                                    double tol = kDefaultTol);

}  // namespace cle
