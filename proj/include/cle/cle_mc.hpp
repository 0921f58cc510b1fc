#pragma once

// Desk-scale CLE on a lattice: random-walk loop soup in a grid domain,
// clusters of loops sharing a vertex, their outer boundaries, and
// harmonic-measure estimators (conformal radius, capacity, thickness).
//
// Lattice: resolution n, vertices at (-1 + (i + 1/2) h, -1 + (j + 1/2) h)
// with h = 2/n, linear index j * n + i. For even n the origin is the centre
// of a lattice face.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cle/geometry.hpp"
#include "cle/rng.hpp"

namespace cle::mc {

using geom::Point;
using geom::Polygon;

struct GridDomain {
    int resolution = 0;
    std::vector<std::uint8_t> inside;    // per vertex
    std::vector<std::uint8_t> boundary;  // inside vertices with a 4-neighbour outside

    static GridDomain unit_disk(int resolution);
    // Vertices strictly inside `curve` (farther than h/4 from it), restricted
    // to the 4-connected component nearest to z.
    static GridDomain from_polygon(int resolution, const Polygon& curve, Point z);

    double spacing() const { return 2.0 / resolution; }
    Point position(int i, int j) const;
    Point position(std::int32_t v) const { return position(v % resolution, v / resolution); }
    std::size_t inside_count() const;
    // Throws DomainError unless the mask is non-empty and 4-connected and the
    // boundary flags match the mask.
    void validate() const;
};

// Loops are closed lattice walks; a loop of length L is stored as its L
// vertices, the final step back to the first one implicit.
struct LoopSoupSample {
    int resolution = 0;
    double intensity = 0.0;
    int min_length = 4;
    std::uint64_t seed = 0;
    std::vector<std::uint32_t> offsets{0};
    std::vector<std::int32_t> vertices;

    std::size_t loop_count() const { return offsets.size() - 1; }
    std::span<const std::int32_t> loop(std::size_t k) const {
        return {vertices.data() + offsets[k], offsets[k + 1] - offsets[k]};
    }
};

// Unit-intensity mass of rooted loops of length L at one vertex of Z^2:
// (number of closed walks) 4^{-L} / (2L). Intensity c = 1 is the critical
// soup whose cluster boundaries approximate CLE_4.
double rooted_loop_mass(int length);

// Poisson soup of intensity c in the domain, loops of length >= min_length.
// All randomness derives from one 64-bit draw of `rng`, recorded as the seed.
// Soups built from equal rng states are coupled in min_length: the soup for a
// larger cutoff is a prefix of the soup for a smaller one.
LoopSoupSample sample_rw_loop_soup(const GridDomain& domain, double c, int min_length, Rng& rng,
                                   std::uint64_t step_budget = 1'000'000'000);
LoopSoupSample sample_rw_loop_soup_seeded(const GridDomain& domain, double c, int min_length, std::uint64_t seed,
                                          std::uint64_t step_budget = 1'000'000'000);

// Union of two independent soups on the same lattice: a soup of intensity
// a.intensity + b.intensity that contains `a`.
LoopSoupSample superpose(const LoopSoupSample& a, const LoopSoupSample& b);

struct ClusterOutline {
    std::vector<std::size_t> member_loops;
    Polygon outer_boundary;  // counterclockwise, weakly simple
    double area = 0.0;

    bool contains(Point z) const { return geom::contains(outer_boundary, z); }
};

// Maximal groups of loops linked through shared vertices, each with the
// outer boundary of the region it fills.
std::vector<ClusterOutline> cluster_loops(const LoopSoupSample& sample);

// Among outlines surrounding z, the one not surrounded by another.
std::optional<ClusterOutline> outermost_loop_around(const std::vector<ClusterOutline>& clusters, Point z);
// Same answer straight from a sample without tracing every cluster.
std::optional<ClusterOutline> outermost_cluster_around(const LoopSoupSample& sample, Point z);

struct CrEstimate {
    double log_value = 0.0;
    double std_error = 0.0;
    std::uint64_t n_walks = 0;
};

struct WalkConfig {
    double delta_stop = 0.0;  // absorption shell; <= 0 picks 1e-4 of the curve diameter
    unsigned threads = 0;
    std::uint64_t max_steps = 1'000'000;
};

// log CR(D, z) = E_z log|B_T - z| by walk-on-spheres inside the polygon.
CrEstimate estimate_log_cr(const Polygon& curve, Point z, std::uint64_t n_walks, Rng& rng,
                           const WalkConfig& cfg = {});

// Open curves (closed = false) such as segments are allowed.
geom::CapacityResult estimate_log_capacity(const std::vector<Point>& curve, bool closed = true,
                                           const geom::CapacityConfig& cfg = {});

struct ThicknessEstimate {
    double theta = 0.0;
    double std_error = 0.0;
    double log_cr = 0.0;
    double log_cap = 0.0;
};
// -log CR(curve, 0) + log cap(curve); the capacity term is the conformal
// radius of the inverted curve seen from 0.
ThicknessEstimate electrical_thickness_estimate(const Polygon& curve, std::uint64_t n_walks, Rng& rng,
                                                const WalkConfig& walk = {},
                                                const geom::CapacityConfig& cap = {});

// Outermost loops around 0 at depth 1..depth, each level a fresh soup inside
// the previous loop. Throws Degenerate when a level has no loop around 0 or
// the next domain has fewer than 16 vertices.
std::vector<ClusterOutline> nested_loop_chain(const GridDomain& domain, double kappa, int depth, Rng& rng,
                                              int min_length = 4);

struct SswConfig {
    double kappa = 4.0;
    int resolution = 512;
    std::uint64_t n_samples = 5000;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::uint64_t walks_per_sample = 256;
    int min_length = 4;
};

// log CR of the outermost loop around 0 for independent unit-disk soups.
// A sample with no cluster around 0 has its loop below lattice scale and is
// stored as -inf (CR = 0).
struct OutermostSamples {
    std::vector<double> log_cr;
    std::uint64_t unresolved = 0;
    std::uint64_t degenerate = 0;  // failed replicates, excluded from log_cr
};
OutermostSamples sample_outermost_log_cr(const SswConfig& cfg);

struct SswResult {
    double lambda = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
    std::uint64_t unresolved = 0;
    std::uint64_t degenerate = 0;
};
// Mean of CR^lambda, lambda >= 0 (sub-lattice loops contribute 0^lambda).
SswResult ssw_moment_from_samples(const OutermostSamples& samples, double lambda);
SswResult ssw_moment_mc(double lambda, const SswConfig& cfg);

// Experimental, not a calibrated estimator. Joint moment
// E[prod CR(eta_i, z_i)^lambda_i] for three points in the unit disk, a
// large-disk stand-in for the full plane. Soups are explored level by level:
// an outermost loop around several of the points is descended into with a
// fresh soup, and eta_i is the first loop around z_i alone. Loops
// separating z_i from the others by surrounding them instead are not
// considered, and the disk boundary biases every scale.
struct ThreePointConfig {
    double kappa = 4.0;
    std::array<double, 3> lambdas{0.0, 0.0, 0.0};
    std::array<Point, 3> points{Point(-0.15, -0.0866), Point(0.15, -0.0866), Point(0.0, 0.1732)};
    int resolution = 512;
    std::uint64_t n_samples = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::uint64_t walks_per_sample = 64;
};
struct ThreePointResult {
    double moment = 0.0;  // E[prod CR^lambda]
    double std_error = 0.0;
    double structure_constant = 0.0;  // moment / prod |z_i - z_{i+1}|^{l_i + l_{i+1} - l_{i+2}}
    std::uint64_t n = 0;
    std::uint64_t degenerate = 0;
};
ThreePointResult three_point_moment_experimental(const ThreePointConfig& cfg);

// Binary soup snapshot, little endian:
//   "CLESOUP1", u32 resolution, f64 intensity, u32 min_length, u64 seed,
//   varint loop count, then per loop: varint length, varint first vertex,
//   and length-1 zigzag varint deltas between consecutive vertex indices.
void write_soup_snapshot(const LoopSoupSample& sample, const std::string& path);
LoopSoupSample read_soup_snapshot(const std::string& path);

}  // namespace cle::mc
