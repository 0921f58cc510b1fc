#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>

#include "cle/cle_mc.hpp"
#include "cle/errors.hpp"

namespace cle::mc {
namespace {

// Tail masses of the rooted loop measure at one vertex:
// tail[k] = sum over even L >= 2k, L <= lmax of rooted_loop_mass(L).
struct LengthTable {
    int lmax = 0;
    std::vector<double> tail;
};

std::shared_ptr<const LengthTable> length_table(int resolution) {
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const LengthTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[resolution];
    if (slot) return slot;
    auto t = std::make_shared<LengthTable>();
    // a walk of 6 n^2 steps stays in the box with probability ~exp(-30)
    t->lmax = std::max(64, 6 * resolution * resolution);
    const int kmax = t->lmax / 2;
    std::vector<double> mass(kmax + 1, 0.0);
    double q = 1.0;  // C(2k, k) / 4^k
    for (int k = 1; k <= kmax; ++k) {
        q *= (2.0 * k - 1.0) / (2.0 * k);
        mass[k] = q * q / (4.0 * k);
    }
    t->tail.assign(kmax + 2, 0.0);
    for (int k = kmax; k >= 0; --k) t->tail[k] = t->tail[k + 1] + mass[k];
    slot = t;
    return slot;
}

struct UnionFind {
    std::vector<std::uint32_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

UnionFind link_loops(const LoopSoupSample& s) {
    const std::size_t nl = s.loop_count();
    UnionFind uf(nl);
    std::vector<std::int32_t> owner(static_cast<std::size_t>(s.resolution) * s.resolution, -1);
    for (std::size_t k = 0; k < nl; ++k) {
        for (std::int32_t v : s.loop(k)) {
            if (owner[v] < 0) {
                owner[v] = static_cast<std::int32_t>(k);
            } else {
                uf.unite(static_cast<std::uint32_t>(owner[v]), static_cast<std::uint32_t>(k));
            }
        }
    }
    return uf;
}

// Refined grid of size (2n+1)^2: odd/odd cells are lattice vertices, odd/even
// cells lattice edges, even/even cells faces. Vertex and edge cells are given
// a small width w so traced outlines hug the lattice curve.
constexpr double kThinFraction = 1.0 / 64.0;

double corner_coordinate(int c, int n) {
    const double h = 2.0 / n;
    const double w = kThinFraction * h;
    auto line = [&](int i) { return -1.0 + (i + 0.5) * h; };
    return (c % 2 == 1) ? line((c - 1) / 2) - 0.5 * w : line(c / 2 - 1) + 0.5 * w;
}

// Refined cell index containing coordinate x, or -1 outside the grid.
int refined_cell(double x, int n) {
    const double t = (x + 1.0) * n / 2.0 - 0.5;
    const double f = std::floor(t);
    const int r = (t == f) ? 2 * static_cast<int>(f) + 1 : 2 * static_cast<int>(f) + 2;
    return (r < 0 || r > 2 * n) ? -1 : r;
}

void flood_from_border(int W, int H, const std::vector<std::uint8_t>& wall, std::vector<std::uint8_t>& reached,
                       std::vector<std::int32_t>& stack) {
    reached.assign(static_cast<std::size_t>(W) * H, 0);
    stack.clear();
    auto push = [&](int x, int y) {
        const std::size_t c = static_cast<std::size_t>(y) * W + x;
        if (!wall[c] && !reached[c]) {
            reached[c] = 1;
            stack.push_back(static_cast<std::int32_t>(c));
        }
    };
    for (int x = 0; x < W; ++x) {
        push(x, 0);
        push(x, H - 1);
    }
    for (int y = 0; y < H; ++y) {
        push(0, y);
        push(W - 1, y);
    }
    while (!stack.empty()) {
        const std::int32_t c = stack.back();
        stack.pop_back();
        const int x = c % W, y = c / W;
        if (x > 0) push(x - 1, y);
        if (x + 1 < W) push(x + 1, y);
        if (y > 0) push(x, y - 1);
        if (y + 1 < H) push(x, y + 1);
    }
}

// Outer contour of the filled cells (fill[c] != 0) as corner coordinates,
// counterclockwise, treating diagonal contacts as disconnected.
std::vector<std::pair<int, int>> trace_contour(int W, int H, const std::vector<std::uint8_t>& fill) {
    auto filled = [&](int x, int y) {
        return x >= 0 && y >= 0 && x < W && y < H && fill[static_cast<std::size_t>(y) * W + x];
    };
    int sx = -1, sy = -1;
    for (int y = H - 1; y >= 0 && sx < 0; --y)
        for (int x = 0; x < W; ++x)
            if (filled(x, y)) {
                sx = x;
                sy = y;
                break;
            }
    if (sx < 0) return {};
    // start on the top edge of the top-left filled cell, heading west
    const int px0 = sx + 1, py0 = sy + 1, dx0 = -1, dy0 = 0;
    int px = px0, py = py0, dx = dx0, dy = dy0;
    std::vector<std::pair<int, int>> corners;
    // cell whose doubled centre is (cx, cy)
    auto cell = [&](int cx, int cy) { return filled((cx - 1) / 2, (cy - 1) / 2); };
    const std::size_t limit = 4 * static_cast<std::size_t>(W + 1) * (H + 1) + 8;
    for (std::size_t it = 0; it < limit; ++it) {
        px += dx;
        py += dy;
        const int nx = -dy, ny = dx;  // left normal
        const bool al = cell(2 * px + dx + nx, 2 * py + dy + ny);
        const bool ar = cell(2 * px + dx - nx, 2 * py + dy - ny);
        int ndx, ndy;
        if (!al) {
            ndx = nx;
            ndy = ny;
        } else if (!ar) {
            ndx = dx;
            ndy = dy;
        } else {
            ndx = -nx;
            ndy = -ny;
        }
        if (ndx != dx || ndy != dy) corners.emplace_back(px, py);
        dx = ndx;
        dy = ndy;
        if (px == px0 && py == py0 && dx == dx0 && dy == dy0) return corners;
    }
    throw Error("outline tracing did not close");
}

Polygon trace_outline(const LoopSoupSample& s, const std::vector<std::size_t>& loops) {
    const int n = s.resolution;
    int imin = n, imax = -1, jmin = n, jmax = -1;
    for (std::size_t k : loops) {
        for (std::int32_t v : s.loop(k)) {
            imin = std::min(imin, v % n);
            imax = std::max(imax, v % n);
            jmin = std::min(jmin, v / n);
            jmax = std::max(jmax, v / n);
        }
    }
    const int x0 = 2 * imin, y0 = 2 * jmin;  // refined origin of the local box
    const int W = 2 * (imax - imin) + 3, H = 2 * (jmax - jmin) + 3;
    std::vector<std::uint8_t> wall(static_cast<std::size_t>(W) * H, 0);
    auto mark = [&](int rx, int ry) { wall[static_cast<std::size_t>(ry - y0) * W + (rx - x0)] = 1; };
    for (std::size_t k : loops) {
        const auto lp = s.loop(k);
        for (std::size_t t = 0; t < lp.size(); ++t) {
            const std::int32_t a = lp[t], b = lp[(t + 1) % lp.size()];
            const int ai = a % n, aj = a / n, bi = b % n, bj = b / n;
            mark(2 * ai + 1, 2 * aj + 1);
            mark(ai + bi + 1, aj + bj + 1);
        }
    }
    std::vector<std::uint8_t> reached;
    std::vector<std::int32_t> stack;
    flood_from_border(W, H, wall, reached, stack);
    for (auto& r : reached) r = !r;
    const auto corners = trace_contour(W, H, reached);
    Polygon poly;
    poly.reserve(corners.size());
    for (const auto& [X, Y] : corners) poly.emplace_back(corner_coordinate(X + x0, n), corner_coordinate(Y + y0, n));
    return geom::merge_collinear(poly);
}

ClusterOutline make_outline(const LoopSoupSample& s, std::vector<std::size_t> loops) {
    ClusterOutline out;
    out.outer_boundary = trace_outline(s, loops);
    out.area = geom::signed_area(out.outer_boundary);
    out.member_loops = std::move(loops);
    return out;
}

void put_varint(std::string& buf, std::uint64_t v) {
    while (v >= 0x80) {
        buf.push_back(static_cast<char>((v & 0x7f) | 0x80));
        v >>= 7;
    }
    buf.push_back(static_cast<char>(v));
}

template <class T>
void put_raw(std::string& buf, T v) {
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    buf.append(b, sizeof(T));
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;
    const std::string& path;
    void need(std::size_t k) const {
        if (pos + k > buf.size()) throw Error(path + ": truncated soup snapshot");
    }
    std::uint64_t varint() {
        std::uint64_t v = 0;
        for (int shift = 0; shift < 64; shift += 7) {
            need(1);
            const auto byte = static_cast<std::uint8_t>(buf[pos++]);
            v |= static_cast<std::uint64_t>(byte & 0x7f) << shift;
            if (!(byte & 0x80)) return v;
        }
        throw Error(path + ": malformed varint");
    }
    template <class T>
    T raw() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, buf.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }
};

constexpr char kSnapshotMagic[8] = {'C', 'L', 'E', 'S', 'O', 'U', 'P', '1'};

}  // namespace

Point GridDomain::position(int i, int j) const {
    const double h = spacing();
    return {-1.0 + (i + 0.5) * h, -1.0 + (j + 0.5) * h};
}

std::size_t GridDomain::inside_count() const {
    return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
}

namespace {

void flag_boundary(GridDomain& d) {
    const int n = d.resolution;
    d.boundary.assign(d.inside.size(), 0);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const std::size_t v = static_cast<std::size_t>(j) * n + i;
            if (!d.inside[v]) continue;
            auto out = [&](int a, int b) {
                return a < 0 || b < 0 || a >= n || b >= n || !d.inside[static_cast<std::size_t>(b) * n + a];
            };
            d.boundary[v] = out(i - 1, j) || out(i + 1, j) || out(i, j - 1) || out(i, j + 1);
        }
    }
}

// Component labels of the inside mask under 4-adjacency.
std::vector<std::int32_t> components(const GridDomain& d, std::int32_t& count) {
    const int n = d.resolution;
    std::vector<std::int32_t> label(d.inside.size(), -1);
    std::vector<std::int32_t> stack;
    count = 0;
    for (std::size_t s = 0; s < d.inside.size(); ++s) {
        if (!d.inside[s] || label[s] >= 0) continue;
        label[s] = count;
        stack.push_back(static_cast<std::int32_t>(s));
        while (!stack.empty()) {
            const std::int32_t v = stack.back();
            stack.pop_back();
            const int i = v % n, j = v / n;
            const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
            for (const auto& p : nb) {
                if (p[0] < 0 || p[1] < 0 || p[0] >= n || p[1] >= n) continue;
                const std::int32_t w = p[1] * n + p[0];
                if (d.inside[w] && label[w] < 0) {
                    label[w] = count;
                    stack.push_back(w);
                }
            }
        }
        ++count;
    }
    return label;
}

}  // namespace

GridDomain GridDomain::unit_disk(int resolution) {
    if (resolution < 4) throw DomainError("GridDomain: resolution must be at least 4");
    GridDomain d;
    d.resolution = resolution;
    d.inside.assign(static_cast<std::size_t>(resolution) * resolution, 0);
    for (int j = 0; j < resolution; ++j)
        for (int i = 0; i < resolution; ++i)
            d.inside[static_cast<std::size_t>(j) * resolution + i] = std::abs(d.position(i, j)) < 1.0;
    flag_boundary(d);
    return d;
}

GridDomain GridDomain::from_polygon(int resolution, const Polygon& curve, Point z) {
    if (resolution < 4) throw DomainError("GridDomain: resolution must be at least 4");
    if (curve.size() < 3) throw DomainError("GridDomain: curve needs at least 3 vertices");
    GridDomain d;
    d.resolution = resolution;
    d.inside.assign(static_cast<std::size_t>(resolution) * resolution, 0);
    const geom::SegmentIndex index(curve, true);
    const double margin = 0.25 * d.spacing();
    for (int j = 0; j < resolution; ++j) {
        for (int i = 0; i < resolution; ++i) {
            const Point p = d.position(i, j);
            d.inside[static_cast<std::size_t>(j) * resolution + i] =
                geom::contains(curve, p) && index.distance(p) > margin;
        }
    }
    std::int32_t count = 0;
    const auto label = components(d, count);
    if (count > 1) {
        std::int32_t keep = -1;
        double best = HUGE_VAL;
        for (std::size_t v = 0; v < label.size(); ++v) {
            if (label[v] < 0) continue;
            const double dist = std::abs(d.position(static_cast<std::int32_t>(v)) - z);
            if (dist < best) {
                best = dist;
                keep = label[v];
            }
        }
        for (std::size_t v = 0; v < label.size(); ++v) d.inside[v] = label[v] == keep;
    }
    flag_boundary(d);
    return d;
}

void GridDomain::validate() const {
    const std::size_t cells = static_cast<std::size_t>(resolution) * resolution;
    if (resolution < 4 || inside.size() != cells || boundary.size() != cells)
        throw DomainError("GridDomain: mask size does not match resolution");
    std::int32_t count = 0;
    components(*this, count);
    if (count != 1) throw DomainError("GridDomain: inside mask must be non-empty and connected");
    GridDomain copy = *this;
    flag_boundary(copy);
    if (copy.boundary != boundary) throw DomainError("GridDomain: boundary flags do not match the mask");
}

double rooted_loop_mass(int length) {
    if (length < 2 || length % 2 != 0) return 0.0;
    const int k = length / 2;
    const double log_q = std::lgamma(2.0 * k + 1.0) - 2.0 * std::lgamma(k + 1.0) - 2.0 * k * std::log(2.0);
    return std::exp(2.0 * log_q) / (2.0 * length);
}

LoopSoupSample sample_rw_loop_soup(const GridDomain& domain, double c, int min_length, Rng& rng,
                                   std::uint64_t step_budget) {
    return sample_rw_loop_soup_seeded(domain, c, min_length, rng(), step_budget);
}

LoopSoupSample sample_rw_loop_soup_seeded(const GridDomain& domain, double c, int min_length, std::uint64_t seed,
                                          std::uint64_t step_budget) {
    if (!(c > 0.0)) throw DomainError("sample_rw_loop_soup: intensity must be positive");
    if (min_length < 4 || min_length % 2 != 0)
        throw DomainError("sample_rw_loop_soup: min_length must be even and at least 4");
    const int n = domain.resolution;
    std::vector<std::int32_t> sites;
    for (std::size_t v = 0; v < domain.inside.size(); ++v)
        if (domain.inside[v]) sites.push_back(static_cast<std::int32_t>(v));
    if (sites.empty()) throw DomainError("sample_rw_loop_soup: empty domain");

    LoopSoupSample s;
    s.resolution = n;
    s.intensity = c;
    s.min_length = min_length;
    s.seed = seed;
    const auto table = length_table(n);
    const int kmin = min_length / 2;
    if (min_length > table->lmax) return s;
    const double rate = c * static_cast<double>(sites.size());
    const double top = table->tail[kmin];
    if (rate * top > 1e8) throw BudgetExceeded("sample_rw_loop_soup: expected loop count too large", 0, 0);

    // Lengths arrive as a Poisson process on the mass axis, longest first, so
    // lowering min_length extends the same sequence. Loop shapes come from a
    // second stream consumed in the same order.
    Rng arrivals = replicate_rng(seed, 0);
    Rng shapes = replicate_rng(seed, 1);
    std::vector<std::int32_t> buf;
    std::uint64_t steps = 0;
    double t = 0.0;
    for (;;) {
        t += exponential(arrivals) / rate;
        if (t > top) break;
        // largest k with tail[k] >= t
        const auto it = std::upper_bound(table->tail.begin() + kmin, table->tail.end(), t,
                                         [](double v, double tail) { return v > tail; });
        const int k = static_cast<int>(it - table->tail.begin()) - 1;
        const int len = 2 * k;
        const std::int32_t root =
            sites[std::min(sites.size() - 1, static_cast<std::size_t>(uniform_open(shapes) * sites.size()))];
        // two independent +-1 bridges in the rotated coordinates x+y and x-y
        std::uint64_t up_u = k, up_v = k;
        int i = root % n, j = root / n;
        buf.clear();
        buf.push_back(root);
        bool ok = true;
        for (int step = 0; step < len - 1; ++step) {
            const std::uint64_t left = static_cast<std::uint64_t>(len - step);
            const std::uint64_t r = shapes();
            const bool du = (r & 0xffffffffULL) * left < (up_u << 32);
            const bool dv = (r >> 32) * left < (up_v << 32);
            up_u -= du;
            up_v -= dv;
            const int su = du ? 1 : -1, sv = dv ? 1 : -1;
            i += (su + sv) / 2;
            j += (su - sv) / 2;
            if (++steps > step_budget)
                throw BudgetExceeded("sample_rw_loop_soup: step budget exhausted", s.loop_count(), steps);
            if (i < 0 || j < 0 || i >= n || j >= n || !domain.inside[static_cast<std::size_t>(j) * n + i]) {
                ok = false;
                break;
            }
            buf.push_back(j * n + i);
        }
        if (!ok) continue;
        s.vertices.insert(s.vertices.end(), buf.begin(), buf.end());
        s.offsets.push_back(static_cast<std::uint32_t>(s.vertices.size()));
    }
    return s;
}

LoopSoupSample superpose(const LoopSoupSample& a, const LoopSoupSample& b) {
    if (a.resolution != b.resolution) throw DomainError("superpose: soups live on different lattices");
    LoopSoupSample s = a;
    s.intensity = a.intensity + b.intensity;
    s.min_length = std::min(a.min_length, b.min_length);
    const auto base = static_cast<std::uint32_t>(s.vertices.size());
    s.vertices.insert(s.vertices.end(), b.vertices.begin(), b.vertices.end());
    for (std::size_t k = 1; k < b.offsets.size(); ++k) s.offsets.push_back(base + b.offsets[k]);
    return s;
}

std::vector<ClusterOutline> cluster_loops(const LoopSoupSample& sample) {
    auto uf = link_loops(sample);
    std::map<std::uint32_t, std::vector<std::size_t>> groups;
    for (std::size_t k = 0; k < sample.loop_count(); ++k) groups[uf.find(static_cast<std::uint32_t>(k))].push_back(k);
    std::vector<ClusterOutline> out;
    out.reserve(groups.size());
    for (auto& [root, loops] : groups) out.push_back(make_outline(sample, std::move(loops)));
    return out;
}

std::optional<ClusterOutline> outermost_loop_around(const std::vector<ClusterOutline>& clusters, Point z) {
    const ClusterOutline* best = nullptr;
    for (const auto& c : clusters) {
        if (c.outer_boundary.size() < 3 || !c.contains(z)) continue;
        if (!best || c.area > best->area) best = &c;
    }
    if (!best) return std::nullopt;
    return *best;
}

std::optional<ClusterOutline> outermost_cluster_around(const LoopSoupSample& sample, Point z) {
    const int n = sample.resolution;
    const int zx = refined_cell(z.real(), n), zy = refined_cell(z.imag(), n);
    if (zx < 0 || zy < 0 || sample.loop_count() == 0) return std::nullopt;
    auto uf = link_loops(sample);
    const int R = 2 * n + 1;
    thread_local std::vector<std::int32_t> occ;
    thread_local std::vector<std::uint8_t> wall, reached;
    thread_local std::vector<std::int32_t> stack;
    occ.assign(static_cast<std::size_t>(R) * R, -1);
    wall.assign(occ.size(), 0);
    for (std::size_t k = 0; k < sample.loop_count(); ++k) {
        const auto root = static_cast<std::int32_t>(uf.find(static_cast<std::uint32_t>(k)));
        const auto lp = sample.loop(k);
        for (std::size_t t = 0; t < lp.size(); ++t) {
            const std::int32_t a = lp[t], b = lp[(t + 1) % lp.size()];
            const int ai = a % n, aj = a / n, bi = b % n, bj = b / n;
            const std::size_t cv = static_cast<std::size_t>(2 * aj + 1) * R + (2 * ai + 1);
            const std::size_t ce = static_cast<std::size_t>(aj + bj + 1) * R + (ai + bi + 1);
            occ[cv] = occ[ce] = root;
            wall[cv] = wall[ce] = 1;
        }
    }
    const std::size_t zc = static_cast<std::size_t>(zy) * R + zx;
    if (wall[zc]) return std::nullopt;
    flood_from_border(R, R, wall, reached, stack);
    if (reached[zc]) return std::nullopt;
    // clusters facing the outside region are the outermost ones; the first of
    // them met on a ray from z is the one whose filled region holds z
    std::vector<std::uint8_t> outer(sample.loop_count(), 0);
    for (std::size_t c = 0; c < occ.size(); ++c) {
        if (occ[c] < 0) continue;
        const int x = static_cast<int>(c % R), y = static_cast<int>(c / R);
        const bool touches = (x > 0 && reached[c - 1]) || (x + 1 < R && reached[c + 1]) ||
                             (y > 0 && reached[c - R]) || (y + 1 < R && reached[c + R]);
        if (touches) outer[occ[c]] = 1;
    }
    std::int32_t hit = -1;
    for (int x = zx + 1; x < R && hit < 0; ++x) {
        const std::int32_t o = occ[static_cast<std::size_t>(zy) * R + x];
        if (o >= 0 && outer[o]) hit = o;
    }
    if (hit < 0) throw Error("outermost_cluster_around: enclosed point with no enclosing cluster");
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < sample.loop_count(); ++k)
        if (static_cast<std::int32_t>(uf.find(static_cast<std::uint32_t>(k))) == hit) members.push_back(k);
    return make_outline(sample, std::move(members));
}

void write_soup_snapshot(const LoopSoupSample& s, const std::string& path) {
    std::string buf(kSnapshotMagic, sizeof(kSnapshotMagic));
    put_raw<std::uint32_t>(buf, static_cast<std::uint32_t>(s.resolution));
    put_raw<double>(buf, s.intensity);
    put_raw<std::uint32_t>(buf, static_cast<std::uint32_t>(s.min_length));
    put_raw<std::uint64_t>(buf, s.seed);
    put_varint(buf, s.loop_count());
    for (std::size_t k = 0; k < s.loop_count(); ++k) {
        const auto lp = s.loop(k);
        put_varint(buf, lp.size());
        put_varint(buf, static_cast<std::uint64_t>(lp[0]));
        for (std::size_t t = 1; t < lp.size(); ++t) {
            const std::int64_t d = static_cast<std::int64_t>(lp[t]) - lp[t - 1];
            put_varint(buf, (static_cast<std::uint64_t>(d) << 1) ^ static_cast<std::uint64_t>(d >> 63));
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error("write failed for " + path);
}

LoopSoupSample read_soup_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < sizeof(kSnapshotMagic) || std::memcmp(buf.data(), kSnapshotMagic, sizeof(kSnapshotMagic)) != 0)
        throw Error(path + ": not a soup snapshot");
    Reader r{buf, sizeof(kSnapshotMagic), path};
    LoopSoupSample s;
    s.resolution = static_cast<int>(r.raw<std::uint32_t>());
    s.intensity = r.raw<double>();
    s.min_length = static_cast<int>(r.raw<std::uint32_t>());
    s.seed = r.raw<std::uint64_t>();
    const std::uint64_t count = r.varint();
    const std::int64_t cells = static_cast<std::int64_t>(s.resolution) * s.resolution;
    for (std::uint64_t k = 0; k < count; ++k) {
        const std::uint64_t len = r.varint();
        if (len == 0 || len > static_cast<std::uint64_t>(cells) * 64) throw Error(path + ": bad loop length");
        std::int64_t v = static_cast<std::int64_t>(r.varint());
        for (std::uint64_t t = 0; t < len; ++t) {
            if (t > 0) {
                const std::uint64_t z = r.varint();
                v += static_cast<std::int64_t>(z >> 1) ^ -static_cast<std::int64_t>(z & 1);
            }
            if (v < 0 || v >= cells) throw Error(path + ": vertex out of range");
            s.vertices.push_back(static_cast<std::int32_t>(v));
        }
        s.offsets.push_back(static_cast<std::uint32_t>(s.vertices.size()));
    }
    if (r.pos != buf.size()) throw Error(path + ": trailing bytes in soup snapshot");
    return s;
}

}  // namespace cle::mc
