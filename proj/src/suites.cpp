#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "cle/cli_io.hpp"
#include "cle/quadrature.hpp"
#include "cle/specialfn.hpp"

namespace cle::cli {
namespace {

using std::numbers::pi;

enum class Rule { below, near, above, exact };

struct Builder {
    double override_tol;
    std::vector<Check> checks;

    double tol(double nominal) const { return override_tol > 0.0 ? override_tol : nominal; }
    // quadrature tolerance two digits below the check tolerance
    double quad_tol(double check_tol) const { return std::max(1e-14, 0.01 * check_tol); }

    void add(const std::string& name, Rule rule, double target, double tolerance, const std::function<double()>& f) {
        Check c;
        c.name = name;
        c.target = target;
        c.tolerance = rule == Rule::exact || rule == Rule::above ? 0.0 : tolerance;
        try {
            c.observed = f();
            switch (rule) {
                case Rule::below: c.pass = c.observed < c.tolerance; break;
                case Rule::near: c.pass = std::abs(c.observed - target) <= c.tolerance; break;
                case Rule::above: c.pass = c.observed > target; break;
                case Rule::exact: c.pass = c.observed == target; break;
            }
        } catch (const Error& e) {
            c.observed = std::nan("");
            c.pass = false;
            c.note = std::string(e.kind()) + ": " + e.what();
        }
        checks.push_back(std::move(c));
    }
};

std::string fmt(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

double rel(ComplexScalar a, ComplexScalar b) { return std::abs(a - b) / std::abs(b); }

void bessel_identities(Builder& b) {
    const double t = b.tol(1e-6);
    for (double c : {0.5, 1.0, 2.0}) {
        for (double nu : {0.0, 0.3, -0.3, 0.45}) {
            b.add("bessel identity one c=" + fmt(c) + " nu=" + fmt(nu), Rule::below, 0.0, t,
                  [&] { return quad::verify_bessel_identity_one(c, nu, b.quad_tol(t)); });
        }
    }
    for (double nu : {0.0, 0.3, -0.3}) {
        b.add("bessel identity two nu=" + fmt(nu), Rule::below, 0.0, t,
              [&] { return quad::verify_bessel_identity_two(nu, b.quad_tol(t)); });
    }
}

void upsilon_relations(Builder& b) {
    const double t = b.tol(1e-8);
    for (double g : {1.0, std::sqrt(2.0), 1.8, 1.95}) {
        const auto p = LqgParams::from_gamma(g);
        const double q = p.q_charge();
        const double ut = b.quad_tol(t);
        b.add("upsilon symmetry gamma=" + fmt(g), Rule::below, 0.0, t, [&] {
            double worst = 0.0;
            for (int k = 0; k < 10; ++k) {
                for (double im : {0.0, 0.4}) {
                    const ComplexScalar z(q * (k + 0.5) / 10.0, im);
                    worst = std::max(worst, rel(upsilon(q - z, p, ut), upsilon(z, p, ut)));
                }
            }
            return worst;
        });
        // off the real axis, so no point sits on a zero; real parts span the
        // strip and both sides of it
        std::vector<ComplexScalar> grid;
        for (int k = 0; k < 10; ++k) {
            for (double im : {0.25, 0.6}) grid.emplace_back(-2.0 + (q + 3.0) * k / 9.0, im);
        }
        const ComplexScalar half(g / 2, 0.0);
        b.add("upsilon shift by gamma/2, gamma=" + fmt(g), Rule::below, 0.0, t, [&] {
            double worst = 0.0;
            for (const auto& z : grid) {
                const ComplexScalar gz = half * z;
                const ComplexScalar f = gamma_fn(gz) / gamma_fn(1.0 - gz) * std::pow(half, 1.0 - g * z);
                worst = std::max(worst, rel(f * upsilon(z, p, ut), upsilon(z + half, p, ut)));
            }
            return worst;
        });
        b.add("upsilon shift by 2/gamma, gamma=" + fmt(g), Rule::below, 0.0, t, [&] {
            double worst = 0.0;
            for (const auto& z : grid) {
                const ComplexScalar tz = z / half;
                const ComplexScalar f = gamma_fn(tz) / gamma_fn(1.0 - tz) * std::pow(half, 4.0 * z / g - 1.0);
                worst = std::max(worst, rel(f * upsilon(z, p, ut), upsilon(z + 2.0 / g, p, ut)));
            }
            return worst;
        });
    }
}

void welding(Builder& b) {
    const auto p = LqgParams::from_gamma(std::sqrt(3.0));
    const double t = b.tol(1e-6);
    for (double a : {0.5, 1.0, 2.0}) {
        for (double mu : {0.5, 1.0, 2.0}) {
            b.add("welding convolution a=" + fmt(a) + " mu=" + fmt(mu), Rule::below, 0.0, t,
                  [&] { return quad::verify_qa_welding_identity(a, mu, p, b.quad_tol(t)); });
        }
    }
    const double tk = b.tol(1e-8);
    const double nu = 2.0 * (p.q_charge() - p.gamma()) / p.gamma();
    b.add("k integral nu=2(Q-gamma)/gamma", Rule::below, 0.0, tk,
          [&] { return quad::verify_k_integral(nu, b.quad_tol(tk)); });
}

void three_point_normalization(Builder& b) {
    for (double k : {2.8, 3.0, 3.5, 3.9, 4.0}) {
        b.add("three point at zero exponents kappa=" + fmt(k), Rule::near, 1.0, b.tol(1e-6),
              [&] { return cle_three_point({0.0, 0.0, 0.0}, k); });
    }
    const double tr = b.tol(1e-9);
    for (double k : {3.0, 3.5, 3.9}) {
        const auto p = LqgParams::from_kappa(k);
        b.add("three point root invariance kappa=" + fmt(k), Rule::below, 0.0, tr, [&] {
            double worst = 0.0;
            for (const auto& lam : {std::array<double, 3>{0.02, 0.03, 0.01}, std::array<double, 3>{0.5, 1.2, 2.0}}) {
                std::array<ComplexScalar, 3> lo, hi;
                for (int i = 0; i < 3; ++i) {
                    lo[i] = kpz_alpha_from_lambda(lam[i], p);
                    hi[i] = 2.0 * p.q_charge() - lo[i];
                }
                worst = std::max(worst, rel(cle_three_point_reduced(hi, p, b.quad_tol(tr)),
                                            cle_three_point_reduced(lo, p, b.quad_tol(tr))));
            }
            return worst;
        });
    }
    for (double k : {3.0, 4.0}) {
        b.add("three point permutation symmetry kappa=" + fmt(k), Rule::exact, 0.0, 0.0, [&] {
            const std::array<double, 3> l{0.1, 0.4, 1.5};
            const double v = cle_three_point(l, k);
            double diff = 0.0;
            std::array<double, 3> perm = l;
            while (std::next_permutation(perm.begin(), perm.end()))
                diff = std::max(diff, std::abs(cle_three_point(perm, k) - v));
            return diff;
        });
        // 4^{-sum} C(lambda) must not increase along any axis of the grid
        b.add("three point monotonicity 5x5x5 kappa=" + fmt(k), Rule::below, 0.0, b.tol(1e-9), [&] {
            const double th = cle_three_point_threshold(k);
            const double steps[5] = {0.05, 0.3, 0.8, 1.5, 3.0};
            double v[5][5][5];
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j)
                    for (int l = 0; l < 5; ++l) {
                        const std::array<double, 3> lam{th + steps[i], th + steps[j], th + steps[l]};
                        v[i][j][l] = std::pow(4.0, -(lam[0] + lam[1] + lam[2])) * cle_three_point(lam, k);
                    }
            double worst = 0.0;  // largest relative increase
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j)
                    for (int l = 0; l < 5; ++l) {
                        const double c = v[i][j][l];
                        if (i < 4) worst = std::max(worst, v[i + 1][j][l] / c - 1.0);
                        if (j < 4) worst = std::max(worst, v[i][j + 1][l] / c - 1.0);
                        if (l < 4) worst = std::max(worst, v[i][j][l + 1] / c - 1.0);
                    }
            return worst;
        });
    }
}

void product_identity(Builder& b) {
    const double t = b.tol(1e-8);
    for (double g : {std::sqrt(3.0), 1.9}) {
        const auto p = LqgParams::from_gamma(g);
        const double q = p.q_charge();
        b.add("three point product identity 3x3x3 gamma=" + fmt(g), Rule::below, 0.0, t, [&] {
            const double lo = q - g / 4;
            double worst = 0.0;
            for (double f1 : {0.2, 0.5, 0.8})
                for (double f2 : {0.2, 0.5, 0.8})
                    for (double f3 : {0.2, 0.5, 0.8}) {
                        const std::array<double, 3> al{lo + f1 * g / 4, lo + f2 * g / 4, lo + f3 * g / 4};
                        worst = std::max(worst, three_point_product_identity(al, p, b.quad_tol(t)));
                    }
            return worst;
        });
    }
}

void thickness_law(Builder& b) {
    for (double k : {1.0, 2.0, 8.0 / 3.0, 4.0}) {
        b.add("thickness mgf at zero kappa=" + fmt(k), Rule::exact, 1.0, 0.0,
              [&] { return electrical_thickness_mgf(0.0, k); });
        b.add("thickness mgf below the threshold kappa=" + fmt(k), Rule::above, 1e6, 0.0,
              [&] { return electrical_thickness_mgf(1.0 - k / 8.0 - 1e-8, k); });
    }
    const double t = b.tol(1e-10);
    b.add("thickness mgf equals the conjectured form at 16/kappa", Rule::below, 0.0, t, [&] {
        double worst = 0.0;
        for (double k : {0.7, 1.0, 2.0, 8.0 / 3.0, 3.0, 4.0}) {
            for (double lam : {-3.0, -1.0, -0.5, 0.0, 0.2, 0.4, 0.6}) {
                if (lam >= 1.0 - k / 8.0) continue;
                const double a = electrical_thickness_mgf(lam, k);
                worst = std::max(worst, std::abs(kw_conjectured_mgf(lam, 16.0 / k) - a) / a);
            }
        }
        return worst;
    });
}

const std::vector<std::pair<std::string, void (*)(Builder&)>>& groups() {
    static const std::vector<std::pair<std::string, void (*)(Builder&)>> g = {
        {"bessel-identities", bessel_identities},
        {"upsilon-relations", upsilon_relations},
        {"welding", welding},
        {"three-point-normalization", three_point_normalization},
        {"product-identity", product_identity},
        {"thickness-law", thickness_law},
    };
    return g;
}

std::vector<std::string> members(const std::string& selector) {
    if (selector == "identities") return {"bessel-identities", "welding"};
    if (selector == "shifts") return {"upsilon-relations"};
    if (selector == "factorization") return {"three-point-normalization", "product-identity", "thickness-law"};
    if (selector == "all") {
        std::vector<std::string> all;
        for (const auto& [name, fn] : groups()) all.push_back(name);
        return all;
    }
    for (const auto& [name, fn] : groups())
        if (name == selector) return {name};
    throw UsageError("unknown suite '" + selector + "'");
}

}  // namespace

std::vector<std::string> suite_names() {
    std::vector<std::string> names{"identities", "shifts", "factorization", "all"};
    for (const auto& [name, fn] : groups()) names.push_back(name);
    return names;
}

SuiteReport run_suite(const std::string& selector, double tol_override) {
    if (std::isnan(tol_override) || tol_override < 0.0) throw UsageError("tolerance override must be positive");
    const auto start = std::chrono::steady_clock::now();
    Builder b{tol_override, {}};
    for (const auto& m : members(selector)) {
        for (const auto& [name, fn] : groups())
            if (name == m) fn(b);
    }
    SuiteReport r;
    r.suite = selector;
    r.checks = std::move(b.checks);
    r.runtime_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace cle::cli
