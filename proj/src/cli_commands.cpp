#include <chrono>
#include <charconv>
#include <cmath>
#include <functional>
#include <iostream>
#include <memory>
#include <random>

#include <CLI11.hpp>

#include "cle/cle_mc.hpp"
#include "cle/cli_io.hpp"
#include "cle/levy.hpp"
#include "cle/specialfn.hpp"

namespace cle::cli {
namespace {

struct ParamSpec {
    std::string name;
    std::string fallback;  // empty: required
    std::string help;
};

// Resolved parameters of one leaf command, with typed accessors that turn
// bad input into UsageError naming the flag.
class Params {
public:
    explicit Params(std::map<std::string, std::string> v) : v_(std::move(v)) {}

    bool has(const std::string& k) const { return v_.contains(k) && !v_.at(k).empty(); }
    const std::string& str(const std::string& k) const {
        if (!has(k)) throw UsageError("missing required parameter --" + k);
        return v_.at(k);
    }
    double real(const std::string& k) const { return parse_real(str(k), k); }
    std::uint64_t count(const std::string& k) const {
        const std::string& s = str(k);
        std::uint64_t v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
            throw UsageError("--" + k + ": expected a non-negative integer, got '" + s + "'");
        return v;
    }
    std::vector<double> reals(const std::string& k, std::size_t expect) const {
        std::vector<double> out;
        const std::string& s = str(k);
        std::size_t pos = 0;
        while (pos <= s.size()) {
            const auto comma = s.find(',', pos);
            out.push_back(parse_real(s.substr(pos, comma - pos), k));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (expect && out.size() != expect)
            throw UsageError("--" + k + ": expected " + std::to_string(expect) + " comma-separated numbers");
        return out;
    }
    // "x", "x+yi", "x-yi" or "yi"
    ComplexScalar complex(const std::string& k) const {
        std::string s = str(k);
        if (s.back() != 'i') return parse_real(s, k);
        s.pop_back();
        const auto split = s.find_last_of("+-");
        if (split == std::string::npos || split == 0) return {0.0, parse_real(s.empty() ? "1" : s, k)};
        std::string im = s.substr(split);
        if (im == "+" || im == "-") im += "1";
        return {parse_real(s.substr(0, split), k), parse_real(im, k)};
    }
    geom::Point point(const std::string& k) const {
        const auto v = reals(k, 2);
        return {v[0], v[1]};
    }
    LqgParams coupling() const {
        if (has("gamma") && has("kappa")) throw UsageError("give only one of --gamma and --kappa");
        if (has("gamma")) return LqgParams::from_gamma(real("gamma"));
        if (has("kappa")) return LqgParams::from_kappa(real("kappa"));
        throw UsageError("missing coupling: give --gamma or --kappa");
    }
    const std::map<std::string, std::string>& all() const { return v_; }

private:
    static double parse_real(const std::string& s, const std::string& k) {
        const std::string t = !s.empty() && s[0] == '+' ? s.substr(1) : s;
        double v = 0.0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size())
            throw UsageError("--" + k + ": expected a number, got '" + s + "'");
        return v;
    }
    std::map<std::string, std::string> v_;
};

struct Context {
    bool strict = false;
    std::ostream& out;
};

using Handler = std::function<void(const Params&, RunRecord&)>;

struct Leaf {
    std::string command;  // e.g. "mc levy tau-ratio"
    std::vector<ParamSpec> specs;
    bool seeded = false;
    Handler run;
    std::vector<std::string> flags;  // boolean switches
};

// Aborted paths are excluded from an estimate; any abort still fails the run.
struct AbortedPaths : Error {
    AbortedPaths(std::uint64_t aborted, std::uint64_t total)
        : Error(std::to_string(aborted) + " of " + std::to_string(total) +
                " paths exceeded the event budget and were excluded") {}
    const char* kind() const noexcept override { return "BudgetExceeded"; }
};

void set_estimate(RunRecord& r, double est, double se, std::uint64_t n) {
    r.value = est;
    r.std_error = se;
    r.n = n;
}

geom::Polygon load_curve(const std::string& arg) {
    auto dims = [&](const std::string& body, std::size_t want) {
        std::vector<double> v;
        std::size_t pos = 0;
        while (true) {
            const auto x = body.find('x', pos);
            const std::string part = body.substr(pos, x - pos);
            double d = 0.0;
            const auto res = std::from_chars(part.data(), part.data() + part.size(), d);
            if (part.empty() || res.ec != std::errc{} || res.ptr != part.data() + part.size())
                throw UsageError("--curve: bad dimensions in '" + arg + "'");
            v.push_back(d);
            if (x == std::string::npos) break;
            pos = x + 1;
        }
        if (v.size() != want) throw UsageError("--curve: bad dimensions in '" + arg + "'");
        return v;
    };
    if (arg.rfind("circle:", 0) == 0) return geom::circle_polygon(0.0, dims(arg.substr(7), 1)[0], 2048);
    if (arg.rfind("rect:", 0) == 0) {
        const auto d = dims(arg.substr(5), 2);
        return geom::rectangle_polygon(0.0, d[0], d[1]);
    }
    return geom::read_polygon_csv(arg);
}

std::vector<double> log_bins(double lo, double hi, std::uint64_t count) {
    if (!(lo > 0.0 && hi > lo) || count < 1) throw UsageError("--bins: need 0 < lo < hi and count >= 1");
    std::vector<double> e(count + 1);
    for (std::uint64_t k = 0; k <= count; ++k)
        e[k] = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(count));
    return e;
}

levy::StableLevyConfig levy_config(const Params& p, double beta, std::uint64_t seed) {
    levy::StableLevyConfig cfg;
    cfg.beta = beta;
    cfg.jump_cutoff_eps = p.real("eps");
    cfg.seed = seed;
    cfg.event_budget = p.count("event-budget");
    const std::string mode = p.str("small-jumps");
    if (mode == "gaussian") {
        cfg.small_jump_mode = levy::SmallJumpMode::gaussian_match;
    } else if (mode == "drift") {
        cfg.small_jump_mode = levy::SmallJumpMode::drift_only;
    } else {
        throw UsageError("--small-jumps: expected gaussian or drift");
    }
    return cfg;
}

void eval_value(RunRecord& r, ComplexScalar v) {
    if (v.imag() == 0.0) {
        r.value = v.real();
    } else {
        r.values["re"] = v.real();
        r.values["im"] = v.imag();
    }
}

std::vector<Leaf> build_leaves() {
    std::vector<Leaf> L;
    const ParamSpec gamma{"gamma", "", "coupling gamma in (0, 2]"};
    const ParamSpec kappa{"kappa", "", "coupling kappa = gamma^2"};
    auto eval = [&](const std::string& name, std::vector<ParamSpec> specs, Handler h, bool coupling = true) {
        if (coupling) {
            specs.insert(specs.begin(), kappa);
            specs.insert(specs.begin(), gamma);
        }
        L.push_back({"eval " + name, std::move(specs), false, std::move(h), {}});
    };
    const ParamSpec lambda{"lambda", "", "exponent lambda"};
    const ParamSpec kappa_req{"kappa", "", "kappa"};

    eval("cle-three-point", {kappa_req, {"lambdas", "", "l1,l2,l3"}},
         [](const Params& p, RunRecord& r) {
             const auto l = p.reals("lambdas", 3);
             r.value = cle_three_point({l[0], l[1], l[2]}, p.real("kappa"));
         }, false);
    eval("three-point-threshold", {kappa_req},
         [](const Params& p, RunRecord& r) { r.value = cle_three_point_threshold(p.real("kappa")); }, false);
    eval("kw-mgf", {kappa_req, lambda},
         [](const Params& p, RunRecord& r) { r.value = electrical_thickness_mgf(p.real("lambda"), p.real("kappa")); },
         false);
    eval("kw-conjectured-mgf", {kappa_req, lambda},
         [](const Params& p, RunRecord& r) { r.value = kw_conjectured_mgf(p.real("lambda"), p.real("kappa")); },
         false);
    eval("thickness-mgf-reflection", {lambda},
         [](const Params& p, RunRecord& r) { r.value = thickness_mgf_from_reflection(p.real("lambda"), p.coupling()); });
    eval("ssw-moment", {kappa_req, lambda},
         [](const Params& p, RunRecord& r) { r.value = ssw_cr_moment(p.real("lambda"), p.real("kappa")); }, false);
    eval("loop-soup-intensity", {kappa_req},
         [](const Params& p, RunRecord& r) { r.value = loop_soup_intensity(p.real("kappa")); }, false);
    eval("upsilon", {{"z", "", "complex argument, e.g. 0.7 or 0.3+0.2i"}},
         [](const Params& p, RunRecord& r) { eval_value(r, upsilon(p.complex("z"), p.coupling())); });
    eval("dozz", {{"alpha1", "", "complex"}, {"alpha2", "", "complex"}, {"alpha3", "", "complex"}},
         [](const Params& p, RunRecord& r) {
             const auto d = dozz({p.complex("alpha1"), p.complex("alpha2"), p.complex("alpha3")}, p.coupling());
             eval_value(r, d.value);
             r.values["outside_seiberg"] = d.outside_seiberg ? 1.0 : 0.0;
         });
    eval("gamma", {{"z", "", "complex argument"}},
         [](const Params& p, RunRecord& r) { eval_value(r, gamma_fn(p.complex("z"))); }, false);
    eval("kpz-alpha", {lambda},
         [](const Params& p, RunRecord& r) { eval_value(r, kpz_alpha_from_lambda(p.real("lambda"), p.coupling())); });
    eval("n-gamma", {{"alpha", "", "complex"}},
         [](const Params& p, RunRecord& r) { eval_value(r, n_gamma(p.complex("alpha"), p.coupling())); });
    eval("bessel-k", {{"nu", "", "order"}, {"x", "", "argument > 0"}},
         [](const Params& p, RunRecord& r) { r.value = bessel_k(p.real("nu"), p.real("x")); }, false);
    eval("u-bar", {{"alpha", "", "insertion"}},
         [](const Params& p, RunRecord& r) { r.value = u_bar(p.real("alpha"), p.coupling()); });
    eval("fzz-disk-laplace", {{"alpha", "", ""}, {"ell", "", "boundary length"}, {"mu", "", "area weight"}},
         [](const Params& p, RunRecord& r) {
             r.value = fzz_disk_laplace(p.real("alpha"), p.real("ell"), p.real("mu"), p.coupling());
         });
    eval("disk-length-mass", {{"alpha", "", ""}, {"ell", "", "boundary length"}},
         [](const Params& p, RunRecord& r) { r.value = disk_length_mass(p.real("alpha"), p.real("ell"), p.coupling()); });
    eval("disk-area-density", {{"alpha", "", ""}, {"x", "", "area"}},
         [](const Params& p, RunRecord& r) { r.value = disk_area_density(p.real("alpha"), p.real("x"), p.coupling()); });
    eval("qa-total-mass", {{"a", "", "outer length"}, {"b", "", "inner length"}},
         [](const Params& p, RunRecord& r) { r.value = qa_total_mass(p.real("a"), p.real("b"), p.coupling()); });
    eval("qa-laplace", {{"a", "", "outer length"}, {"b", "", "inner length"}, {"mu", "", "area weight"}},
         [](const Params& p, RunRecord& r) {
             r.value = qa_laplace(p.real("a"), p.real("b"), p.real("mu"), p.coupling());
         });
    eval("qp-constant", {}, [](const Params& p, RunRecord& r) { r.value = qp_constant(p.coupling()); });
    eval("qp-laplace", {{"ells", "", "l1,l2,l3"}, {"mu", "", "area weight"}},
         [](const Params& p, RunRecord& r) {
             const auto l = p.reals("ells", 3);
             r.value = qp_laplace({l[0], l[1], l[2]}, p.real("mu"), p.coupling());
         });
    eval("reflection-coeff", {{"alpha", "", ""}},
         [](const Params& p, RunRecord& r) { r.value = reflection_coeff(p.real("alpha"), p.coupling()); });
    eval("three-point-identity", {{"alphas", "", "a1,a2,a3 in (Q - gamma/4, Q)"}},
         [](const Params& p, RunRecord& r) {
             const auto a = p.reals("alphas", 3);
             r.value = three_point_product_identity({a[0], a[1], a[2]}, p.coupling());
         });

    const ParamSpec n{"n", "", "replicates"};
    const ParamSpec threads{"threads", "0", "worker threads; 0 uses CLE_THREADS or all cores"};
    auto mc = [&](const std::string& name, std::vector<ParamSpec> specs, Handler h, std::vector<std::string> flags = {}) {
        specs.push_back(threads);
        L.push_back({"mc " + name, std::move(specs), true, std::move(h), std::move(flags)});
    };
    const ParamSpec eps{"eps", "1e-4", "jump cutoff"};
    const ParamSpec small{"small-jumps", "gaussian", "gaussian or drift"};
    const ParamSpec budget{"event-budget", "100000000", "per-path event cap"};

    mc("levy tau-ratio", {{"a", "1", ""}, {"b", "1", ""}, n},
       [](const Params& p, RunRecord& r) {
           const auto e = levy::estimate_tau_ratio(p.real("a"), p.real("b"), p.count("n"), *r.seed,
                                                   static_cast<unsigned>(p.count("threads")));
           set_estimate(r, e.estimate, e.std_error, e.n);
           r.values["target"] = p.real("a") / (p.real("a") + p.real("b"));
       });
    mc("levy inv-tau-mean", {{"a", "1", ""}, {"beta", "1.7", ""}, n},
       [](const Params& p, RunRecord& r) {
           const auto e = levy::estimate_inv_tau_mean(p.real("a"), p.real("beta"), p.count("n"), *r.seed,
                                                      static_cast<unsigned>(p.count("threads")));
           set_estimate(r, e.estimate, e.std_error, e.n);
           r.values["target"] = levy::inv_tau_mean_exact(p.real("a"), p.real("beta"));
       });
    mc("levy marked-jump",
       {{"a", "1", ""}, {"beta", "1.7", ""}, eps, small, budget, n, {"bins", "0.1,5,40", "lo,hi,count (log spaced)"},
        {"out", "marked_jump_histogram.csv", "CSV path"}},
       [](const Params& p, RunRecord& r) {
           const auto b = p.reals("bins", 3);
           if (b[2] < 1 || b[2] != std::floor(b[2])) throw UsageError("--bins: count must be a positive integer");
           const auto edges = log_bins(b[0], b[1], static_cast<std::uint64_t>(b[2]));
           const double a = p.real("a"), beta = p.real("beta");
           const auto h = levy::estimate_marked_jump_density(a, levy_config(p, beta, *r.seed), edges, p.count("n"),
                                                              static_cast<unsigned>(p.count("threads")));
           const auto table = marked_jump_table(h, a, beta);
           write_histogram_csv(table, p.str("out"));
           const auto dens = h.density();
           double worst = 0.0;
           for (std::size_t i = 0; i < dens.size(); ++i) {
               const double t = table.target[i] / (table.bin_hi[i] - table.bin_lo[i]);
               worst = std::max(worst, std::abs(dens[i] / t - 1.0));
           }
           r.value = worst;
           r.n = h.n_paths;
           r.values["sup_relative_deviation"] = worst;
           r.values["total_weight"] = h.total_weight;
           r.values["inv_tau_sum"] = h.inv_tau_sum;
           r.values["aborted_paths"] = static_cast<double>(h.aborted_paths);
           r.outputs["histogram"] = p.str("out");
           if (h.aborted_paths > 0) throw AbortedPaths(h.aborted_paths, p.count("n"));
       });
    mc("levy annulus-area", {gamma, kappa, {"a", "1", ""}, {"b", "1", ""}, {"mu", "1", ""}, eps, small, budget, n},
       [](const Params& p, RunRecord& r) {
           const auto lp = p.coupling();
           const auto e = levy::estimate_annulus_area_laplace(p.real("a"), p.real("b"), p.real("mu"), lp,
                                                              levy_config(p, lp.beta(), *r.seed), p.count("n"),
                                                              static_cast<unsigned>(p.count("threads")));
           set_estimate(r, e.estimate, e.std_error, e.n);
           r.values["aborted"] = static_cast<double>(e.aborted);
           r.values["target"] = levy::annulus_area_target(p.real("a"), p.real("b"), p.real("mu"), lp);
           if (e.aborted > 0) throw AbortedPaths(e.aborted, p.count("n"));
       });
    mc("levy qd-area", {gamma, kappa, {"s", "1", "Laplace variable"}, n},
       [](const Params& p, RunRecord& r) {
           const auto lp = p.coupling();
           const double s = p.real("s");
           const std::uint64_t count = p.count("n");
           if (count < 2) throw UsageError("--n: need at least 2");
           Rng rng(*r.seed);
           double sum = 0.0, sum2 = 0.0;
           for (std::uint64_t i = 0; i < count; ++i) {
               const double v = std::exp(-s * levy::sample_qd_area(lp, rng));
               sum += v;
               sum2 += v * v;
           }
           const double m = sum / count;
           set_estimate(r, m, std::sqrt(std::max(0.0, sum2 / count - m * m) / (count - 1.0)), count);
           r.values["target"] = levy::qd_area_laplace(s, lp);
       });

    const ParamSpec res{"resolution", "512", "lattice vertices per unit-disk diameter"};
    mc("cle ssw", {{"kappa", "4", ""}, {"lambda", "1", ""}, res, {"n", "5000", "soups"}, {"walks", "256", "walks per loop"},
                   {"min-length", "4", "shortest loop"}},
       [](const Params& p, RunRecord& r) {
           mc::SswConfig cfg;
           cfg.kappa = p.real("kappa");
           cfg.resolution = static_cast<int>(p.count("resolution"));
           cfg.n_samples = p.count("n");
           cfg.seed = *r.seed;
           cfg.threads = static_cast<unsigned>(p.count("threads"));
           cfg.walks_per_sample = p.count("walks");
           cfg.min_length = static_cast<int>(p.count("min-length"));
           const auto s = mc::ssw_moment_mc(p.real("lambda"), cfg);
           set_estimate(r, s.estimate, s.std_error, s.n);
           r.values["unresolved"] = static_cast<double>(s.unresolved);
           r.values["degenerate"] = static_cast<double>(s.degenerate);
           r.values["target"] = ssw_cr_moment(p.real("lambda"), cfg.kappa);
       });
    const ParamSpec curve{"curve", "", "polygon CSV (x,y), circle:R or rect:WxH"};
    mc("cle log-cr", {curve, {"z", "0,0", "x,y"}, {"n", "100000", "walks"}, {"delta", "0", "absorption shell"}},
       [](const Params& p, RunRecord& r) {
           Rng rng(*r.seed);
           mc::WalkConfig w;
           w.delta_stop = p.real("delta");
           w.threads = static_cast<unsigned>(p.count("threads"));
           const auto e = mc::estimate_log_cr(load_curve(p.str("curve")), p.point("z"), p.count("n"), rng, w);
           set_estimate(r, e.log_value, e.std_error, e.n_walks);
       });
    mc("cle thickness", {curve, {"n", "100000", "walks"}, {"delta", "0", "absorption shell"}, {"panels", "400", ""}},
       [](const Params& p, RunRecord& r) {
           Rng rng(*r.seed);
           mc::WalkConfig w;
           w.delta_stop = p.real("delta");
           w.threads = static_cast<unsigned>(p.count("threads"));
           geom::CapacityConfig cap;
           cap.panels = p.count("panels");
           const auto t = mc::electrical_thickness_estimate(load_curve(p.str("curve")), p.count("n"), rng, w, cap);
           set_estimate(r, t.theta, t.std_error, p.count("n"));
           r.values["log_cr"] = t.log_cr;
           r.values["log_cap"] = t.log_cap;
       });
    mc("cle soup", {{"kappa", "4", ""}, res, {"min-length", "4", ""}, {"out", "soup.bin", "snapshot path"}},
       [](const Params& p, RunRecord& r) {
           const auto d = mc::GridDomain::unit_disk(static_cast<int>(p.count("resolution")));
           const auto s = mc::sample_rw_loop_soup_seeded(d, loop_soup_intensity(p.real("kappa")),
                                                         static_cast<int>(p.count("min-length")), *r.seed);
           mc::write_soup_snapshot(s, p.str("out"));
           r.value = static_cast<double>(s.loop_count());
           r.values["vertices"] = static_cast<double>(s.vertices.size());
           r.outputs["snapshot"] = p.str("out");
       });
    mc("cle outermost", {{"kappa", "4", ""}, res, {"z", "0,0", "x,y"}, {"out", "outermost.csv", "curve CSV path"}},
       [](const Params& p, RunRecord& r) {
           const auto d = mc::GridDomain::unit_disk(static_cast<int>(p.count("resolution")));
           const auto s = mc::sample_rw_loop_soup_seeded(d, loop_soup_intensity(p.real("kappa")), 4, *r.seed);
           const auto loop = mc::outermost_cluster_around(s, p.point("z"));
           if (!loop) throw Degenerate("no cluster surrounds the point at this resolution");
           geom::write_polygon_csv(loop->outer_boundary, p.str("out"));
           r.value = loop->area;
           r.values["loops"] = static_cast<double>(loop->member_loops.size());
           r.outputs["curve"] = p.str("out");
       });
    mc("cle chain", {{"kappa", "4", ""}, res, {"depth", "2", ""}, {"out-prefix", "chain", "writes PREFIX_k.csv"}},
       [](const Params& p, RunRecord& r) {
           const auto d = mc::GridDomain::unit_disk(static_cast<int>(p.count("resolution")));
           Rng rng(*r.seed);
           const auto chain = mc::nested_loop_chain(d, p.real("kappa"), static_cast<int>(p.count("depth")), rng);
           for (std::size_t k = 0; k < chain.size(); ++k) {
               const std::string path = p.str("out-prefix") + "_" + std::to_string(k + 1) + ".csv";
               geom::write_polygon_csv(chain[k].outer_boundary, path);
               r.outputs["level_" + std::to_string(k + 1)] = path;
           }
           r.value = static_cast<double>(chain.size());
       });
    mc("cle three-point",
       {{"kappa", "4", ""}, {"lambdas", "0.5,0.5,0.5", "l1,l2,l3 >= 0"},
        {"points", "-0.15,-0.0866,0.15,-0.0866,0,0.1732", "x1,y1,x2,y2,x3,y3"}, res, {"n", "1000", "soups"},
        {"walks", "64", "walks per loop"}},
       [](const Params& p, RunRecord& r) {
           if (p.str("experimental") != "true")
               throw UsageError("mc cle three-point is experimental; pass --experimental to run it");
           mc::ThreePointConfig cfg;
           cfg.kappa = p.real("kappa");
           const auto l = p.reals("lambdas", 3);
           const auto z = p.reals("points", 6);
           for (int i = 0; i < 3; ++i) {
               cfg.lambdas[i] = l[i];
               cfg.points[i] = {z[2 * i], z[2 * i + 1]};
           }
           cfg.resolution = static_cast<int>(p.count("resolution"));
           cfg.n_samples = p.count("n");
           cfg.seed = *r.seed;
           cfg.threads = static_cast<unsigned>(p.count("threads"));
           cfg.walks_per_sample = p.count("walks");
           const auto t = mc::three_point_moment_experimental(cfg);
           set_estimate(r, t.moment, t.std_error, t.n);
           r.values["structure_constant"] = t.structure_constant;
           r.values["degenerate"] = static_cast<double>(t.degenerate);
           r.values["formula"] = cle_three_point(cfg.lambdas, cfg.kappa);
       },
       {"experimental"});
    return L;
}

std::int64_t elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
}

int run_leaf(const Leaf& leaf, const std::map<std::string, std::optional<std::string>>& given,
             const std::map<std::string, bool>& switches, const std::string& config_path, const Context& ctx) {
    const auto start = std::chrono::steady_clock::now();
    std::map<std::string, std::string> resolved;
    std::set<std::string> known;
    for (const auto& s : leaf.specs) {
        known.insert(s.name);
        if (!s.fallback.empty()) resolved[s.name] = s.fallback;
    }
    for (const auto& f : leaf.flags) {
        known.insert(f);
        resolved[f] = "false";
    }
    if (leaf.seeded) known.insert("seed");
    if (!config_path.empty()) {
        for (const auto& [k, e] : load_config(config_path, known)) resolved[k] = e.value;
    }
    for (const auto& [k, v] : given)
        if (v) resolved[k] = *v;
    for (const auto& [k, on] : switches)
        if (on) resolved[k] = "true";

    RunRecord r;
    r.command = leaf.command;
    if (leaf.seeded) {
        if (resolved.contains("seed")) {
            r.seed = Params(resolved).count("seed");
        } else if (ctx.strict) {
            throw UsageError("--seed is required in --strict mode");
        } else {
            std::random_device rd;
            r.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
            resolved["seed"] = std::to_string(*r.seed);
        }
    }
    const Params params(resolved);
    for (const auto& s : leaf.specs)
        if (s.fallback.empty() && s.name != "gamma" && s.name != "kappa") params.str(s.name);
    if (params.has("n") && params.count("n") < 1) throw UsageError("--n must be at least 1");
    r.params = resolved;
    int code = 0;
    try {
        leaf.run(params, r);
    } catch (const UsageError&) {
        throw;
    } catch (const Error& e) {
        r.error_kind = e.kind();
        r.error_message = e.what();
        if (const auto* b = dynamic_cast<const BudgetExceeded*>(&e)) {
            r.values["replicate"] = static_cast<double>(b->replicate());
            r.values["events"] = static_cast<double>(b->events());
        }
        code = 1;
    }
    r.runtime_ms = elapsed_ms(start);
    ctx.out << to_json(r) << '\n';
    return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Closed forms, identity checks and Monte Carlo for conformal loop ensembles"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);
    bool strict = false;
    app.add_flag("--strict", strict, "require --seed for Monte Carlo commands");

    const auto leaves = build_leaves();
    struct Bound {
        const Leaf* leaf;
        CLI::App* app;
        std::map<std::string, std::optional<std::string>> given;
        std::map<std::string, bool> switches;
        std::string config;
    };
    std::vector<std::unique_ptr<Bound>> bound;
    std::map<std::string, CLI::App*> groups;
    auto group = [&](const std::string& path, const std::string& help) {
        if (groups.contains(path)) return groups[path];
        const auto cut = path.rfind(' ');
        CLI::App* parent = cut == std::string::npos ? &app : groups.at(path.substr(0, cut));
        CLI::App* sub = parent->add_subcommand(path.substr(cut == std::string::npos ? 0 : cut + 1), help);
        sub->require_subcommand(1);
        groups[path] = sub;
        return sub;
    };
    group("eval", "evaluate a closed-form formula");
    group("mc", "Monte Carlo estimators");
    group("mc levy", "stable Levy process estimators");
    group("mc cle", "loop-soup and harmonic-measure estimators");

    static const std::map<std::string, std::string> summary = {
        {"eval cle-three-point", "CLE three-point constant at conformal-radius exponents"},
        {"eval three-point-threshold", "exponent below which the three-point constant is infinite"},
        {"eval kw-mgf", "E[exp(lambda theta)] for the electrical thickness"},
        {"eval kw-conjectured-mgf", "Kenyon-Wilson form of the thickness law"},
        {"eval thickness-mgf-reflection", "thickness law rebuilt from reflection and disk length laws"},
        {"eval ssw-moment", "E[CR^lambda] for the outermost loop around a point"},
        {"eval loop-soup-intensity", "loop-soup central charge c(kappa)"},
        {"eval upsilon", "Upsilon function"},
        {"eval dozz", "Liouville three-point constant"},
        {"eval gamma", "Gamma function at a complex point"},
        {"eval kpz-alpha", "insertion weight alpha for an exponent lambda"},
        {"eval n-gamma", "normalization N_gamma(alpha)"},
        {"eval bessel-k", "modified Bessel function K_nu(x)"},
        {"eval u-bar", "one-point disk constant U-bar(alpha)"},
        {"eval fzz-disk-laplace", "area Laplace transform of the one-point disk"},
        {"eval disk-length-mass", "boundary length law of the one-point disk"},
        {"eval disk-area-density", "area density of the one-point disk"},
        {"eval qa-total-mass", "quantum annulus total mass"},
        {"eval qa-laplace", "quantum annulus area Laplace transform"},
        {"eval qp-constant", "quantum pair of pants constant"},
        {"eval qp-laplace", "quantum pair of pants area Laplace transform"},
        {"eval reflection-coeff", "unit-volume reflection coefficient"},
        {"eval three-point-identity", "residual of the factorized three-point identity"},
        {"mc levy tau-ratio", "E[tau_-a / tau_-(a+b)] from exact first-passage times"},
        {"mc levy inv-tau-mean", "E[1 / tau_-a] from exact first-passage times"},
        {"mc levy marked-jump", "1/tau-weighted jump histogram against the closed-form law"},
        {"mc levy annulus-area", "area Laplace transform of the quantum annulus"},
        {"mc levy qd-area", "area Laplace transform of the quantum disk"},
        {"mc cle ssw", "E[CR^lambda] of the outermost loop-soup cluster around 0"},
        {"mc cle log-cr", "log conformal radius of a polygon by walk on spheres"},
        {"mc cle thickness", "electrical thickness of a closed curve"},
        {"mc cle soup", "sample a random-walk loop soup and write a snapshot"},
        {"mc cle outermost", "outermost cluster boundary around a point"},
        {"mc cle chain", "nested outermost loops around 0"},
        {"mc cle three-point", "three-point moment by nested soups (experimental)"},
    };
    for (const auto& leaf : leaves) {
        const auto cut = leaf.command.rfind(' ');
        auto b = std::make_unique<Bound>();
        b->leaf = &leaf;
        b->app = groups.at(leaf.command.substr(0, cut))->add_subcommand(leaf.command.substr(cut + 1),
                                                                    summary.contains(leaf.command) ? summary.at(leaf.command) : "");
        for (const auto& s : leaf.specs) {
            auto& slot = b->given[s.name];
            auto* opt = b->app->add_option("--" + s.name, slot, s.help);
            if (!s.fallback.empty()) opt->description(s.help + (s.help.empty() ? "" : "; ") + "default " + s.fallback);
        }
        for (const auto& f : leaf.flags) b->app->add_flag("--" + f, b->switches[f]);
        if (leaf.seeded) b->app->add_option("--seed", b->given["seed"], "random seed; drawn and echoed if omitted");
        b->app->add_option("--config", b->config, "key = value file; flags override it");
        bound.push_back(std::move(b));
    }

    CLI::App* verify = app.add_subcommand("verify", "run a deterministic identity suite");
    std::string selector;
    double tol = 0.0;
    verify->add_option("suite", selector, "identities, shifts, factorization or all")->required();
    verify->add_option("--tol", tol, "replace every check tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const Context ctx{strict, out};
    try {
        if (verify->parsed()) {
            if (tol < 0.0) throw UsageError("--tol must be positive");
            const auto report = run_suite(selector, tol);
            out << to_json(report) << '\n';
            if (!report.overall()) {
                for (const auto& c : report.checks)
                    if (!c.pass) err << "FAIL " << c.name << (c.note.empty() ? "" : " (" + c.note + ")") << '\n';
                return 1;
            }
            return 0;
        }
        for (const auto& b : bound)
            if (b->app->parsed()) return run_leaf(*b->leaf, b->given, b->switches, b->config, ctx);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }
    err << "no command given\n";
    return 2;
}

}  // namespace cle::cli
