#include "cle/cle_mc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cle/errors.hpp"
#include "cle/parallel.hpp"
#include "cle/specialfn.hpp"

namespace cle::mc {
namespace {

using std::numbers::pi;
constexpr std::uint64_t kWalkBlock = 512;

// log|B_T - z| for one walk-on-spheres path started at z.
double exit_log_distance(const geom::SegmentIndex& index, Point z, double delta, Rng& rng, std::uint64_t max_steps) {
    Point x = z;
    for (std::uint64_t s = 0; s < max_steps; ++s) {
        Point q;
        const double d = index.distance(x, &q);
        if (d <= delta) return std::log(std::abs(q - z));
        x += std::polar(d, 2.0 * pi * uniform_open(rng));
    }
    throw Degenerate("walk-on-spheres: no absorption within the step limit");
}

void require_curve(const Polygon& curve, Point z, const char* who) {
    if (curve.size() < 3) throw DomainError(std::string(who) + ": curve needs at least 3 vertices");
    if (!geom::contains(curve, z)) throw DomainError(std::string(who) + ": point is not inside the curve");
}

double soup_intensity(double kappa, const char* who) {
    if (!(kappa > 8.0 / 3.0 && kappa <= 4.0)) throw DomainError(std::string(who) + ": kappa must lie in (8/3, 4]");
    return loop_soup_intensity(kappa);
}

}  // namespace

CrEstimate estimate_log_cr(const Polygon& curve, Point z, std::uint64_t n_walks, Rng& rng, const WalkConfig& cfg) {
    require_curve(curve, z, "estimate_log_cr");
    if (n_walks < 2) throw DomainError("estimate_log_cr: need at least 2 walks");
    const geom::SegmentIndex index(curve, true);
    const double delta = cfg.delta_stop > 0.0 ? cfg.delta_stop : 1e-4 * index.diameter();
    if (index.distance(z) <= delta) throw DomainError("estimate_log_cr: point lies within the absorption shell");
    const std::uint64_t seed = rng();
    const std::uint64_t blocks = (n_walks + kWalkBlock - 1) / kWalkBlock;
    std::vector<std::pair<double, double>> partial(blocks);
    parallel_for(blocks, cfg.threads, [&](std::size_t b) {
        Rng r = replicate_rng(seed, b);
        const std::uint64_t end = std::min<std::uint64_t>(n_walks, (b + 1) * kWalkBlock);
        double s = 0.0, s2 = 0.0;
        for (std::uint64_t w = b * kWalkBlock; w < end; ++w) {
            const double v = exit_log_distance(index, z, delta, r, cfg.max_steps);
            s += v;
            s2 += v * v;
        }
        partial[b] = {s, s2};
    });
    double s = 0.0, s2 = 0.0;
    for (const auto& [a, b] : partial) {
        s += a;
        s2 += b;
    }
    const double n = static_cast<double>(n_walks);
    CrEstimate e;
    e.n_walks = n_walks;
    e.log_value = s / n;
    e.std_error = std::sqrt(std::max(0.0, (s2 - n * e.log_value * e.log_value) / (n - 1.0)) / n);
    return e;
}

geom::CapacityResult estimate_log_capacity(const std::vector<Point>& curve, bool closed,
                                           const geom::CapacityConfig& cfg) {
    if (curve.size() < (closed ? 3u : 2u)) throw DomainError("estimate_log_capacity: too few vertices");
    return geom::log_capacity(curve, closed, cfg);
}

ThicknessEstimate electrical_thickness_estimate(const Polygon& curve, std::uint64_t n_walks, Rng& rng,
                                                const WalkConfig& walk, const geom::CapacityConfig& cap) {
    require_curve(curve, 0.0, "electrical_thickness_estimate");
    const auto cr = estimate_log_cr(curve, 0.0, n_walks, rng, walk);
    const auto lc = estimate_log_capacity(curve, true, cap);
    ThicknessEstimate t;
    t.log_cr = cr.log_value;
    t.log_cap = lc.log_cap;
    t.theta = lc.log_cap - cr.log_value;
    t.std_error = std::hypot(cr.std_error, lc.err_est);
    return t;
}

std::vector<ClusterOutline> nested_loop_chain(const GridDomain& domain, double kappa, int depth, Rng& rng,
                                              int min_length) {
    if (depth < 1) throw DomainError("nested_loop_chain: depth must be at least 1");
    const double c = soup_intensity(kappa, "nested_loop_chain");
    std::vector<ClusterOutline> chain;
    GridDomain current = domain;
    for (int level = 0; level < depth; ++level) {
        const auto soup = sample_rw_loop_soup(current, c, min_length, rng);
        auto loop = outermost_cluster_around(soup, 0.0);
        if (!loop) throw Degenerate("nested_loop_chain: no loop around 0 at depth " + std::to_string(level + 1));
        if (level + 1 < depth) {
            current = GridDomain::from_polygon(domain.resolution, loop->outer_boundary, 0.0);
            if (current.inside_count() < 16)
                throw Degenerate("nested_loop_chain: domain below 16 cells at depth " + std::to_string(level + 1));
        }
        chain.push_back(std::move(*loop));
    }
    return chain;
}

OutermostSamples sample_outermost_log_cr(const SswConfig& cfg) {
    const double c = soup_intensity(cfg.kappa, "sample_outermost_log_cr");
    if (cfg.resolution < 8 || cfg.resolution % 2 != 0)
        throw DomainError("sample_outermost_log_cr: resolution must be even and at least 8");
    if (cfg.n_samples < 1 || cfg.walks_per_sample < 2)
        throw DomainError("sample_outermost_log_cr: need n_samples >= 1 and walks_per_sample >= 2");
    const GridDomain disk = GridDomain::unit_disk(cfg.resolution);
    const double delta = 0.5 * disk.spacing();
    std::vector<double> value(cfg.n_samples, 0.0);
    std::vector<std::uint8_t> status(cfg.n_samples, 0);  // 0 ok, 1 unresolved, 2 degenerate
    parallel_for(cfg.n_samples, cfg.threads, [&](std::size_t i) {
        Rng rng = replicate_rng(cfg.seed, i);
        try {
            const auto soup = sample_rw_loop_soup(disk, c, cfg.min_length, rng);
            const auto loop = outermost_cluster_around(soup, 0.0);
            if (!loop) {
                status[i] = 1;
                return;
            }
            const geom::SegmentIndex index(loop->outer_boundary, true);
            double s = 0.0;
            for (std::uint64_t w = 0; w < cfg.walks_per_sample; ++w)
                s += exit_log_distance(index, 0.0, delta, rng, 1'000'000);
            value[i] = s / static_cast<double>(cfg.walks_per_sample);
        } catch (const Degenerate&) {
            status[i] = 2;
        } catch (const BudgetExceeded&) {
            status[i] = 2;
        }
    });
    OutermostSamples out;
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (status[i] == 2) {
            ++out.degenerate;
            continue;
        }
        if (status[i] == 1) ++out.unresolved;
        out.log_cr.push_back(status[i] == 1 ? -HUGE_VAL : value[i]);
    }
    return out;
}

SswResult ssw_moment_from_samples(const OutermostSamples& samples, double lambda) {
    if (!(lambda >= 0.0))
        throw DomainError("ssw_moment: lambda must be >= 0; sub-lattice loops make negative moments unresolvable");
    SswResult r;
    r.lambda = lambda;
    r.unresolved = samples.unresolved;
    r.degenerate = samples.degenerate;
    r.n = samples.log_cr.size();
    if (r.n == 0) return r;
    double s = 0.0, s2 = 0.0;
    for (double l : samples.log_cr) {
        const double v = lambda == 0.0 ? 1.0 : std::exp(lambda * l);
        s += v;
        s2 += v * v;
    }
    const double n = static_cast<double>(r.n);
    r.estimate = s / n;
    r.std_error = r.n > 1 ? std::sqrt(std::max(0.0, (s2 - n * r.estimate * r.estimate) / (n - 1.0)) / n) : 0.0;
    return r;
}

SswResult ssw_moment_mc(double lambda, const SswConfig& cfg) {
    if (!(lambda >= 0.0))
        throw DomainError("ssw_moment: lambda must be >= 0; sub-lattice loops make negative moments unresolvable");
    return ssw_moment_from_samples(sample_outermost_log_cr(cfg), lambda);
}

ThreePointResult three_point_moment_experimental(const ThreePointConfig& cfg) {
    const double c = soup_intensity(cfg.kappa, "three_point_moment_experimental");
    for (double l : cfg.lambdas)
        if (!(l >= 0.0)) throw DomainError("three_point_moment_experimental: exponents must be >= 0");
    if (cfg.resolution < 8 || cfg.resolution % 2 != 0)
        throw DomainError("three_point_moment_experimental: resolution must be even and at least 8");
    if (cfg.n_samples < 2 || cfg.walks_per_sample < 2)
        throw DomainError("three_point_moment_experimental: need n_samples >= 2 and walks_per_sample >= 2");
    for (const auto& z : cfg.points)
        if (!(std::abs(z) < 0.9)) throw DomainError("three_point_moment_experimental: points must lie in |z| < 0.9");
    const GridDomain disk = GridDomain::unit_disk(cfg.resolution);
    const double delta = 0.5 * disk.spacing();
    std::vector<double> value(cfg.n_samples, 0.0);
    std::vector<std::uint8_t> failed(cfg.n_samples, 0);
    parallel_for(cfg.n_samples, cfg.threads, [&](std::size_t s) {
        Rng rng = replicate_rng(cfg.seed, s);
        std::array<double, 3> log_cr{};
        struct Level {
            GridDomain domain;
            std::vector<int> pts;
        };
        std::vector<Level> todo{{disk, {0, 1, 2}}};
        try {
            while (!todo.empty()) {
                Level level = std::move(todo.back());
                todo.pop_back();
                const auto soup = sample_rw_loop_soup(level.domain, c, 4, rng);
                std::vector<std::vector<int>> descended;
                for (int i : level.pts) {
                    const auto loop = outermost_cluster_around(soup, cfg.points[i]);
                    if (!loop) {
                        log_cr[i] = -HUGE_VAL;
                        continue;
                    }
                    std::vector<int> inside;
                    for (int j : level.pts)
                        if (loop->contains(cfg.points[j])) inside.push_back(j);
                    if (inside.size() == 1) {
                        const geom::SegmentIndex index(loop->outer_boundary, true);
                        double sum = 0.0;
                        for (std::uint64_t w = 0; w < cfg.walks_per_sample; ++w)
                            sum += exit_log_distance(index, cfg.points[i], delta, rng, 1'000'000);
                        log_cr[i] = sum / static_cast<double>(cfg.walks_per_sample);
                    } else if (std::find(descended.begin(), descended.end(), inside) == descended.end()) {
                        descended.push_back(inside);
                        GridDomain next = GridDomain::from_polygon(cfg.resolution, loop->outer_boundary, cfg.points[i]);
                        if (next.inside_count() < 16) throw Degenerate("three point: nested domain below 16 cells");
                        todo.push_back({std::move(next), inside});
                    }
                }
            }
            double v = 1.0;
            for (int i = 0; i < 3; ++i)
                if (cfg.lambdas[i] != 0.0) v *= std::exp(cfg.lambdas[i] * log_cr[i]);
            value[s] = v;
        } catch (const Degenerate&) {
            failed[s] = 1;
        } catch (const BudgetExceeded&) {
            failed[s] = 1;
        }
    });
    ThreePointResult r;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t s = 0; s < value.size(); ++s) {
        if (failed[s]) {
            ++r.degenerate;
            continue;
        }
        ++r.n;
        sum += value[s];
        sum2 += value[s] * value[s];
    }
    if (r.n == 0) return r;
    const double n = static_cast<double>(r.n);
    r.moment = sum / n;
    r.std_error = r.n > 1 ? std::sqrt(std::max(0.0, (sum2 - n * r.moment * r.moment) / (n - 1.0)) / n) : 0.0;
    double scale = 1.0;
    for (int i = 0; i < 3; ++i) {
        const double e = cfg.lambdas[i] + cfg.lambdas[(i + 1) % 3] - cfg.lambdas[(i + 2) % 3];
        scale *= std::pow(std::abs(cfg.points[i] - cfg.points[(i + 1) % 3]), e);
    }
    r.structure_constant = r.moment / scale;
    return r;
}

}  // namespace cle::mc
