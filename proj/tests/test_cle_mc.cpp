#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <set>
#include <vector>

#include "cle/cle_mc.hpp"
#include "cle/errors.hpp"
#include "cle/specialfn.hpp"
#include "doctest.h"

using namespace cle;
using namespace cle::mc;
using std::numbers::pi;

namespace {

// Schwarz-Christoffel values for the W x H rectangle centred at 0, from
// tests/oracle/reference_values.py.
constexpr double kRect4x1LogCr = -0.45159665461023370006;
constexpr double kRect4x1LogCap = 0.34743299782631878051;
constexpr double kRect4x1Thickness = 0.79902965243655248058;
constexpr double kSquareLogCr = -0.61738574535156420884;

// closed walks of length L from the origin, by brute force over 4^L step words
long count_closed_walks(int L) {
    long count = 0;
    for (long word = 0; word < (1L << (2 * L)); ++word) {
        int x = 0, y = 0;
        for (int s = 0; s < L; ++s) {
            switch ((word >> (2 * s)) & 3) {
                case 0: ++x; break;
                case 1: --x; break;
                case 2: ++y; break;
                default: --y;
            }
        }
        count += (x == 0 && y == 0);
    }
    return count;
}

// Hand-made soup on an n x n lattice from loops given as (i, j) vertex lists.
LoopSoupSample handmade(int n, const std::vector<std::vector<std::pair<int, int>>>& loops) {
    LoopSoupSample s;
    s.resolution = n;
    s.intensity = 1.0;
    for (const auto& lp : loops) {
        for (const auto& [i, j] : lp) s.vertices.push_back(j * n + i);
        s.offsets.push_back(static_cast<std::uint32_t>(s.vertices.size()));
    }
    return s;
}

// Boundary walk of the lattice square [i0, i1] x [j0, j1].
std::vector<std::pair<int, int>> square_loop(int i0, int j0, int i1, int j1) {
    std::vector<std::pair<int, int>> v;
    for (int i = i0; i < i1; ++i) v.emplace_back(i, j0);
    for (int j = j0; j < j1; ++j) v.emplace_back(i1, j);
    for (int i = i1; i > i0; --i) v.emplace_back(i, j1);
    for (int j = j1; j > j0; --j) v.emplace_back(i0, j);
    return v;
}

Point vertex_point(int n, int i, int j) { return {-1.0 + (i + 0.5) * 2.0 / n, -1.0 + (j + 0.5) * 2.0 / n}; }

std::vector<const ClusterOutline*> outermost_of(const std::vector<ClusterOutline>& cl) {
    std::vector<const ClusterOutline*> out;
    for (const auto& c : cl) {
        if (c.area <= 0.0) continue;
        bool inner = false;
        for (const auto& d : cl)
            if (&d != &c && d.area > c.area && d.contains(c.outer_boundary[0])) inner = true;
        if (!inner) out.push_back(&c);
    }
    return out;
}

}  // namespace

TEST_CASE("rooted loop mass matches enumeration of closed walks") {
    for (int L : {2, 4, 6, 8}) {
        const double oracle = count_closed_walks(L) * std::pow(4.0, -L) / (2.0 * L);
        CHECK(rooted_loop_mass(L) == doctest::Approx(oracle).epsilon(1e-13));
    }
    CHECK(count_closed_walks(4) == 36);
    CHECK(rooted_loop_mass(5) == 0.0);
}

TEST_CASE("grid domains") {
    const auto d = GridDomain::unit_disk(64);
    CHECK_NOTHROW(d.validate());
    CHECK(d.inside_count() == doctest::Approx(pi * 32 * 32).epsilon(0.03));
    for (int i = 0; i < 64; ++i) CHECK(d.boundary[32 * 64 + i] == (i == 0 || i == 63));
    GridDomain bad = d;
    bad.inside[0] = 1;  // isolated corner vertex
    CHECK_THROWS_AS(bad.validate(), DomainError);
    const auto sq = GridDomain::from_polygon(32, geom::rectangle_polygon(0.0, 1.0, 1.0), 0.0);
    CHECK_NOTHROW(sq.validate());
    CHECK(sq.inside_count() == 16 * 16);
}

TEST_CASE("length-4 loops through a deep interior vertex") {
    // oracle: every rooted closed walk of length 4 that visits v, weighted by
    // its rooted mass; enumerated over roots near v
    double oracle = 0.0;
    for (int rx = -2; rx <= 2; ++rx) {
        for (int ry = -2; ry <= 2; ++ry) {
            for (int word = 0; word < 256; ++word) {
                int x = rx, y = ry;
                bool hit = (x == 0 && y == 0);
                for (int s = 0; s < 4; ++s) {
                    const int dir = (word >> (2 * s)) & 3;
                    x += dir == 0 ? 1 : dir == 1 ? -1 : 0;
                    y += dir == 2 ? 1 : dir == 3 ? -1 : 0;
                    hit = hit || (x == 0 && y == 0);
                }
                if (x == rx && y == ry && hit) oracle += std::pow(4.0, -4) / 8.0;
            }
        }
    }
    const int n = 16;
    const auto d = GridDomain::unit_disk(n);
    const std::int32_t v = 8 * n + 8;
    for (double c : {1.0, 0.5}) {
        const int samples = 20000;
        double count = 0;
        for (int s = 0; s < samples; ++s) {
            const auto soup = sample_rw_loop_soup_seeded(d, c, 4, 1000 + s);
            for (std::size_t k = 0; k < soup.loop_count(); ++k) {
                const auto lp = soup.loop(k);
                if (lp.size() == 4 && std::find(lp.begin(), lp.end(), v) != lp.end()) ++count;
            }
        }
        const double expected = c * oracle * samples;
        CHECK(std::abs(count - expected) < 4 * std::sqrt(expected));
    }
}

TEST_CASE("loop count is linear in the intensity") {
    const auto d = GridDomain::unit_disk(24);
    const int samples = 2000;
    auto stats = [&](double c, std::uint64_t base) {
        double s = 0, s2 = 0;
        for (int i = 0; i < samples; ++i) {
            const double k = static_cast<double>(sample_rw_loop_soup_seeded(d, c, 4, base + i).loop_count());
            s += k;
            s2 += k * k;
        }
        const double m = s / samples;
        return std::pair{m, std::sqrt((s2 / samples - m * m) / samples)};
    };
    const auto [m1, e1] = stats(0.7, 1);
    const auto [m2, e2] = stats(1.4, 50000);
    CHECK(std::abs(m2 - 2 * m1) < 3 * std::hypot(e2, 2 * e1));
}

TEST_CASE("lowering min_length only adds loops") {
    const auto d = GridDomain::unit_disk(48);
    for (std::uint64_t seed : {3ULL, 4ULL, 5ULL}) {
        Rng a(seed), b(seed);
        const auto coarse = sample_rw_loop_soup(d, 1.0, 10, a);
        const auto fine = sample_rw_loop_soup(d, 1.0, 4, b);
        REQUIRE(fine.loop_count() > coarse.loop_count());
        for (std::size_t k = 0; k < coarse.loop_count(); ++k) {
            const auto x = coarse.loop(k), y = fine.loop(k);
            CHECK(std::equal(x.begin(), x.end(), y.begin(), y.end()));
        }
        for (std::size_t k = 0; k < fine.loop_count(); ++k) {
            CHECK(fine.loop(k).size() >= 4);
            CHECK(fine.loop(k).size() % 2 == 0);
        }
    }
}

TEST_CASE("sampled loops are closed nearest-neighbour walks inside the mask") {
    const auto d = GridDomain::unit_disk(40);
    const auto soup = sample_rw_loop_soup_seeded(d, 1.0, 4, 77);
    REQUIRE(soup.loop_count() > 10);
    for (std::size_t k = 0; k < soup.loop_count(); ++k) {
        const auto lp = soup.loop(k);
        for (std::size_t t = 0; t < lp.size(); ++t) {
            const int a = lp[t], b = lp[(t + 1) % lp.size()];
            CHECK(d.inside[a]);
            CHECK(std::abs(a % 40 - b % 40) + std::abs(a / 40 - b / 40) == 1);
        }
    }
    CHECK_THROWS_AS(sample_rw_loop_soup_seeded(d, 1.0, 5, 1), DomainError);
    CHECK_THROWS_AS(sample_rw_loop_soup_seeded(d, 0.0, 4, 1), DomainError);
    CHECK_THROWS_AS(sample_rw_loop_soup_seeded(d, 1.0, 4, 1, 10), BudgetExceeded);
}

TEST_CASE("clusters of hand-made loops") {
    const int n = 32;
    SUBCASE("two disjoint loops far apart") {
        const auto s = handmade(n, {square_loop(2, 2, 4, 4), square_loop(20, 20, 23, 22)});
        const auto cl = cluster_loops(s);
        REQUIRE(cl.size() == 2);
        CHECK(cl[0].member_loops.size() == 1);
        CHECK(cl[0].area == doctest::Approx(4 * (2.0 / n) * (2.0 / n)).epsilon(0.05));
    }
    SUBCASE("two loops sharing a vertex form one cluster") {
        const auto s = handmade(n, {square_loop(2, 2, 5, 5), square_loop(5, 5, 8, 7)});
        const auto cl = cluster_loops(s);
        REQUIRE(cl.size() == 1);
        CHECK(cl[0].member_loops.size() == 2);
        for (int v : s.vertices) CHECK(cl[0].contains(vertex_point(n, v % n, v / n)));
        CHECK_FALSE(geom::has_proper_self_crossing(cl[0].outer_boundary));
    }
    SUBCASE("nested loops without a shared vertex stay separate") {
        const auto s = handmade(n, {square_loop(4, 4, 20, 20), square_loop(8, 8, 12, 12)});
        const auto cl = cluster_loops(s);
        REQUIRE(cl.size() == 2);
        const auto& outer = cl[0].area > cl[1].area ? cl[0] : cl[1];
        const auto& inner = cl[0].area > cl[1].area ? cl[1] : cl[0];
        for (const auto& p : inner.outer_boundary) CHECK(outer.contains(p));
    }
    SUBCASE("a loop retracing one edge encloses nothing") {
        const auto s = handmade(n, {{{3, 3}, {4, 3}, {3, 3}, {4, 3}}});
        const auto cl = cluster_loops(s);
        REQUIRE(cl.size() == 1);
        CHECK(cl[0].area < 0.05 * (2.0 / n) * (2.0 / n));
    }
}

TEST_CASE("outermost loop around a point") {
    const int n = 32;
    const Point z = 0.0;  // centre of the face between vertices 15 and 16
    SUBCASE("single surrounding cluster") {
        const auto s = handmade(n, {square_loop(10, 10, 20, 20), square_loop(1, 1, 3, 3)});
        const auto cl = cluster_loops(s);
        const auto best = outermost_loop_around(cl, z);
        REQUIRE(best);
        CHECK(best->member_loops == std::vector<std::size_t>{0});
        const auto fast = outermost_cluster_around(s, z);
        REQUIRE(fast);
        CHECK(fast->outer_boundary == best->outer_boundary);
    }
    SUBCASE("nested chain of three") {
        const auto s = handmade(n, {square_loop(13, 13, 18, 18), square_loop(5, 5, 26, 26), square_loop(9, 9, 22, 22)});
        const auto best = outermost_loop_around(cluster_loops(s), z);
        REQUIRE(best);
        CHECK(best->member_loops == std::vector<std::size_t>{1});
        const auto fast = outermost_cluster_around(s, z);
        REQUIRE(fast);
        CHECK(fast->member_loops == std::vector<std::size_t>{1});
    }
    SUBCASE("point outside every boundary") {
        const auto s = handmade(n, {square_loop(1, 1, 6, 6), square_loop(20, 20, 30, 30)});
        CHECK_FALSE(outermost_loop_around(cluster_loops(s), z));
        CHECK_FALSE(outermost_cluster_around(s, z));
    }
}

TEST_CASE("fast outermost search agrees with full clustering on random soups") {
    const auto d = GridDomain::unit_disk(64);
    int found = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto soup = sample_rw_loop_soup_seeded(d, 1.0, 4, seed);
        const auto full = outermost_loop_around(cluster_loops(soup), 0.0);
        const auto fast = outermost_cluster_around(soup, 0.0);
        REQUIRE(full.has_value() == fast.has_value());
        if (full) {
            ++found;
            CHECK(full->member_loops == fast->member_loops);
            CHECK(full->outer_boundary == fast->outer_boundary);
        }
    }
    CHECK(found > 5);
}

TEST_CASE("outermost boundaries are simple and never cross") {
    const auto d = GridDomain::unit_disk(64);
    for (std::uint64_t seed = 100; seed < 106; ++seed) {
        const auto cl = cluster_loops(sample_rw_loop_soup_seeded(d, 1.0, 4, seed));
        const auto outer = outermost_of(cl);
        REQUIRE(outer.size() > 3);
        for (std::size_t a = 0; a < outer.size(); ++a) {
            CHECK_FALSE(geom::has_proper_self_crossing(outer[a]->outer_boundary));
            for (std::size_t b = a + 1; b < outer.size(); ++b)
                CHECK_FALSE(geom::polygons_cross(outer[a]->outer_boundary, outer[b]->outer_boundary));
        }
    }
}

TEST_CASE("outermost clusters grow with the intensity under superposition") {
    const auto d = GridDomain::unit_disk(48);
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto low = sample_rw_loop_soup_seeded(d, 0.6, 4, 10 + seed);
        const auto high = superpose(low, sample_rw_loop_soup_seeded(d, 0.4, 4, 90 + seed));
        CHECK(high.intensity == doctest::Approx(1.0));
        const auto cl_low = cluster_loops(low);
        const auto cl_high = cluster_loops(high);
        const auto outer_high = outermost_of(cl_high);
        for (const auto* c : outermost_of(cl_low)) {
            bool covered = false;
            for (const auto* h : outer_high) {
                bool all = true;
                for (std::size_t k : c->member_loops) {
                    for (int v : low.loop(k)) all = all && h->contains(vertex_point(48, v % 48, v / 48));
                }
                covered = covered || all;
            }
            CHECK(covered);
        }
    }
}

TEST_CASE("conformal radius on analytic disks") {
    const auto unit = geom::circle_polygon(0.0, 1.0, 4096);
    WalkConfig cfg;
    cfg.delta_stop = 1e-4;
    const std::uint64_t n = 100000;
    struct Case {
        geom::Polygon curve;
        Point z;
        double exact;
    };
    const Case cases[] = {{unit, 0.0, 0.0},
                          {geom::circle_polygon(0.3, 2.5, 4096), 0.3, std::log(2.5)},
                          {unit, 0.5, std::log(0.75)}};
    SUBCASE("disks with known conformal radius") {
        for (const auto& c : cases) {
            Rng rng(11);
            const auto e = estimate_log_cr(c.curve, c.z, n, rng, cfg);
            CHECK(e.n_walks == n);
            CHECK(std::abs(e.log_value - c.exact) < std::max(3 * e.std_error, 2 * cfg.delta_stop * 2.5));
        }
    }
    SUBCASE("square against the Schwarz-Christoffel value") {
        Rng rng(12);
        const auto e = estimate_log_cr(geom::rectangle_polygon(0.0, 1.0, 1.0), 0.0, n, rng, cfg);
        CHECK(std::abs(e.log_value - kSquareLogCr) < 3 * e.std_error + 2e-4);
    }
    SUBCASE("standard error halves on a four-fold ladder") {
        double prev = 0;
        for (std::uint64_t m : {4000ULL, 16000ULL, 64000ULL}) {
            Rng rng(m);
            const auto e = estimate_log_cr(unit, 0.5, m, rng, cfg);
            if (prev > 0) CHECK(prev / e.std_error == doctest::Approx(2.0).epsilon(0.1));
            prev = e.std_error;
        }
    }
    SUBCASE("halving the absorption shell moves less than one standard error") {
        Rng r1(5), r2(5);
        WalkConfig half = cfg;
        half.delta_stop = 0.5 * cfg.delta_stop;
        const auto a = estimate_log_cr(unit, 0.5, n, r1, cfg);
        const auto b = estimate_log_cr(unit, 0.5, n, r2, half);
        CHECK(std::abs(a.log_value - b.log_value) < a.std_error);
    }
    SUBCASE("thread count does not change the result") {
        Rng r1(8), r2(8);
        WalkConfig one = cfg, three = cfg;
        one.threads = 1;
        three.threads = 3;
        CHECK(estimate_log_cr(unit, 0.2, 5000, r1, one).log_value ==
              estimate_log_cr(unit, 0.2, 5000, r2, three).log_value);
    }
    SUBCASE("start outside the curve") {
        Rng rng(1);
        CHECK_THROWS_AS(estimate_log_cr(unit, 2.0, 100, rng), DomainError);
    }
}

TEST_CASE("logarithmic capacity") {
    const auto circle = geom::circle_polygon(0.0, 1.7, 2048);
    const auto c = estimate_log_capacity(circle);
    CHECK(c.log_cap == doctest::Approx(std::log(1.7)).epsilon(1e-5));
    // more edges than panels: the fine level must still refine every edge
    CHECK(c.fine != c.coarse);
    CHECK(c.err_est > 0.0);
    const auto shifted = estimate_log_capacity(geom::translated(circle, {3.0, -2.0}));
    CHECK(shifted.log_cap == doctest::Approx(c.log_cap).epsilon(1e-10));
    for (double L : {0.5, 2.0, 7.0}) {
        const auto seg = estimate_log_capacity({Point(0.1, 0.2), Point(0.1, 0.2) + std::polar(L, 0.4)}, false);
        // capacity within 1% after extrapolation
        CHECK(std::abs(seg.log_cap - std::log(L / 4)) < std::log(1.01));
        CHECK(std::abs(seg.log_cap - std::log(L / 4)) < std::abs(seg.fine - std::log(L / 4)));
    }
    const auto rect = estimate_log_capacity(geom::rectangle_polygon(0.0, 4.0, 1.0));
    CHECK(rect.log_cap == doctest::Approx(kRect4x1LogCap).epsilon(1e-5));
    CHECK(rect.err_est < 1e-4);
    CHECK_THROWS_AS(estimate_log_capacity({Point(0, 0), Point(1, 0)}, true), DomainError);
}

TEST_CASE("electrical thickness") {
    WalkConfig cfg;
    cfg.delta_stop = 1e-4;
    SUBCASE("circles are thin") {
        for (double r : {0.5, 2.0}) {
            Rng rng(21);
            const auto t = electrical_thickness_estimate(geom::circle_polygon(0.0, r, 2048), 20000, rng, cfg);
            CHECK(std::abs(t.theta) < 3 * t.std_error);
        }
    }
    SUBCASE("thin rectangle against the Schwarz-Christoffel value") {
        Rng rng(22);
        const auto t = electrical_thickness_estimate(geom::rectangle_polygon(0.0, 4.0, 1.0), 100000, rng, cfg);
        CHECK(t.theta == doctest::Approx(kRect4x1Thickness).epsilon(0.05));
        CHECK(std::abs(t.theta - kRect4x1Thickness) < 3 * t.std_error + 4e-4);
        CHECK(std::abs(t.log_cr - kRect4x1LogCr) < 3 * t.std_error + 4e-4);
    }
    SUBCASE("rotation invariance and nonnegativity") {
        const auto base = geom::translated(geom::rectangle_polygon(0.0, 2.0, 1.2), {0.2, 0.1});
        Rng r1(23), r2(24);
        const auto a = electrical_thickness_estimate(base, 40000, r1, cfg);
        const auto b = electrical_thickness_estimate(geom::rotated(base, 0.7), 40000, r2, cfg);
        CHECK(std::abs(a.theta - b.theta) < 3 * std::hypot(a.std_error, b.std_error));
        CHECK(a.theta > -3 * a.std_error);
        CHECK(b.theta > -3 * b.std_error);
    }
    SUBCASE("lattice cluster outlines") {
        const auto d = GridDomain::unit_disk(128);
        int checked = 0;
        for (std::uint64_t seed = 0; seed < 40 && checked < 3; ++seed) {
            const auto loop = outermost_cluster_around(sample_rw_loop_soup_seeded(d, 1.0, 4, seed), 0.0);
            if (!loop || loop->area < 0.01) continue;
            ++checked;
            Rng rng(seed);
            WalkConfig lattice;
            lattice.delta_stop = 0.5 * d.spacing();
            const auto t = electrical_thickness_estimate(loop->outer_boundary, 4000, rng, lattice);
            CHECK(t.theta > -3 * t.std_error);
        }
        CHECK(checked > 0);
    }
}

TEST_CASE("nested loop chains") {
    const auto d = GridDomain::unit_disk(256);
    int chains = 0;
    for (std::uint64_t seed = 0; seed < 300 && chains < 2; ++seed) {
        Rng rng(seed);
        try {
            const auto chain = nested_loop_chain(d, 4.0, 2, rng);
            REQUIRE(chain.size() == 2);
            ++chains;
            for (const auto& p : chain[1].outer_boundary) CHECK(chain[0].contains(p));
            CHECK(chain[1].area < chain[0].area);
        } catch (const Degenerate&) {
        }
    }
    CHECK(chains > 0);
    // depth one is the outermost loop of the first soup
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng a(seed), b(seed);
        std::optional<ClusterOutline> direct =
            outermost_cluster_around(sample_rw_loop_soup(d, loop_soup_intensity(3.5), 4, a), 0.0);
        try {
            const auto chain = nested_loop_chain(d, 3.5, 1, b);
            REQUIRE(direct);
            CHECK(chain[0].outer_boundary == direct->outer_boundary);
        } catch (const Degenerate&) {
            CHECK_FALSE(direct);
        }
    }
    Rng rng(0);
    CHECK_THROWS_AS(nested_loop_chain(d, 4.0, 0, rng), DomainError);
    CHECK_THROWS_AS(nested_loop_chain(d, 2.0, 1, rng), DomainError);
}

TEST_CASE("conformal radius moments of the outermost loop") {
    SswConfig cfg;
    cfg.kappa = 4.0;
    cfg.resolution = 64;
    cfg.n_samples = 600;
    cfg.seed = 5;
    cfg.walks_per_sample = 64;
    cfg.threads = 1;
    const auto samples = sample_outermost_log_cr(cfg);
    CHECK(samples.log_cr.size() + samples.degenerate == cfg.n_samples);
    CHECK(samples.unresolved > 0);
    const auto zero = ssw_moment_from_samples(samples, 0.0);
    CHECK(zero.estimate == 1.0);
    CHECK(zero.std_error == 0.0);
    double prev = 1.0;
    for (double lam : {0.25, 0.5, 1.0, 2.0}) {
        const auto r = ssw_moment_from_samples(samples, lam);
        CHECK(r.estimate < prev);
        prev = r.estimate;
    }
    for (double l : samples.log_cr) CHECK(l <= 0.0);
    cfg.threads = 3;
    const auto again = sample_outermost_log_cr(cfg);
    CHECK(again.log_cr == samples.log_cr);
    CHECK_THROWS_AS(ssw_moment_from_samples(samples, -0.1), DomainError);
    cfg.kappa = 4.5;
    CHECK_THROWS_AS(sample_outermost_log_cr(cfg), DomainError);
}

TEST_CASE("snapshot and curve files round-trip") {
    const auto d = GridDomain::unit_disk(40);
    const auto soup = sample_rw_loop_soup_seeded(d, 0.8, 4, 31);
    const std::string path = "test_soup_snapshot.bin";
    write_soup_snapshot(soup, path);
    const auto back = read_soup_snapshot(path);
    CHECK(back.resolution == soup.resolution);
    CHECK(back.intensity == soup.intensity);
    CHECK(back.min_length == soup.min_length);
    CHECK(back.seed == soup.seed);
    CHECK(back.offsets == soup.offsets);
    CHECK(back.vertices == soup.vertices);
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_soup_snapshot("does_not_exist.bin"), Error);

    const auto poly = geom::circle_polygon({0.1, -0.2}, 0.7, 37);
    const std::string csv = "test_curve.csv";
    geom::write_polygon_csv(poly, csv);
    CHECK(geom::read_polygon_csv(csv) == poly);
    std::remove(csv.c_str());
}
