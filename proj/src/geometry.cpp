#include "cle/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "cle/errors.hpp"

namespace cle::geom {
namespace {

using std::numbers::pi;

double cross(Point a, Point b) { return a.real() * b.imag() - a.imag() * b.real(); }

double orient(Point a, Point b, Point c) { return cross(b - a, c - a); }

bool proper_cross(Point p1, Point p2, Point q1, Point q2) {
    const double o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
    const double o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
    return ((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0));
}

struct Box {
    double x0, y0, x1, y1;
};

Box edge_box(Point a, Point b) {
    return {std::min(a.real(), b.real()), std::min(a.imag(), b.imag()), std::max(a.real(), b.real()),
            std::max(a.imag(), b.imag())};
}

bool overlap(const Box& a, const Box& b) { return a.x0 <= b.x1 && b.x0 <= a.x1 && a.y0 <= b.y1 && b.y0 <= a.y1; }

std::size_t edge_count(const std::vector<Point>& pts, bool closed) {
    if (pts.size() < 2) return 0;
    return closed ? pts.size() : pts.size() - 1;
}

// int_0^len log|z - (a + t u)| dt for the segment a -> a + len u, |u| = 1.
double log_kernel_exact(Point z, Point a, Point u, double len) {
    const Point rel = (z - a) * std::conj(u);
    const double s0 = rel.real();
    const double d = std::abs(rel.imag());
    auto prim = [d](double x) {
        if (d == 0.0) return x == 0.0 ? 0.0 : x * std::log(std::abs(x)) - x;
        return 0.5 * (x * std::log(x * x + d * d) - 2.0 * x + 2.0 * d * std::atan(x / d));
    };
    return prim(len - s0) - prim(-s0);
}

double log_kernel(Point z, Point a, Point b) {
    const double len = std::abs(b - a);
    if (len == 0.0) return 0.0;
    const Point mid = 0.5 * (a + b);
    if (std::abs(z - mid) > 4.0 * len) {
        // three-point Gauss-Legendre is exact to far below the solve error here
        static const double x[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
        static const double w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += w[k] * std::log(std::abs(z - (mid + 0.5 * x[k] * (b - a))));
        return 0.5 * len * s;
    }
    return log_kernel_exact(z, a, (b - a) / len, len);
}

// `refine` multiplies every edge's panel count, so levels 1 and 2 really
// halve the panel size even when edges outnumber the target.
std::vector<std::pair<Point, Point>> make_panels(const std::vector<Point>& pts, bool closed, std::size_t target,
                                                 std::size_t refine) {
    const std::size_t ne = edge_count(pts, closed);
    double total = 0.0;
    for (std::size_t k = 0; k < ne; ++k) total += std::abs(pts[(k + 1) % pts.size()] - pts[k]);
    std::vector<std::pair<Point, Point>> panels;
    for (std::size_t k = 0; k < ne; ++k) {
        const Point a = pts[k], b = pts[(k + 1) % pts.size()];
        const double len = std::abs(b - a);
        if (len == 0.0) continue;
        const auto m =
            refine * std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(target * len / total)));
        // cosine grading resolves the singular density at corners and tips
        Point prev = a;
        for (std::size_t j = 1; j <= m; ++j) {
            const double t = 0.5 * (1.0 - std::cos(pi * static_cast<double>(j) / static_cast<double>(m)));
            const Point next = j == m ? b : a + t * (b - a);
            panels.emplace_back(prev, next);
            prev = next;
        }
    }
    return panels;
}

double solve_log_capacity(const std::vector<std::pair<Point, Point>>& panels) {
    const auto n = static_cast<Eigen::Index>(panels.size());
    Eigen::MatrixXd A(n + 1, n + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Point z = 0.5 * (panels[i].first + panels[i].second);
        for (Eigen::Index j = 0; j < n; ++j) A(i, j) = log_kernel(z, panels[j].first, panels[j].second);
        A(i, n) = -1.0;
    }
    for (Eigen::Index j = 0; j < n; ++j) A(n, j) = std::abs(panels[j].second - panels[j].first);
    A(n, n) = 0.0;
    rhs(n) = 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const Eigen::VectorXd sol = lu.solve(rhs);
    const double resid = (A * sol - rhs).norm();
    if (!std::isfinite(sol(n)) || !(resid < 1e-8 * (1.0 + sol.norm()))) {
        throw SolverFailure("log_capacity: single-layer system is singular or ill-conditioned (residual " +
                            std::to_string(resid) + ")");
    }
    return sol(n);
}

}  // namespace

double signed_area(const Polygon& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) s += cross(poly[i], poly[(i + 1) % poly.size()]);
    return 0.5 * s;
}

bool contains(const Polygon& poly, Point z) {
    int wind = 0;
    const double y = z.imag();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point a = poly[i], b = poly[(i + 1) % poly.size()];
        if (a.imag() <= y) {
            if (b.imag() > y && orient(a, b, z) > 0) ++wind;
        } else if (b.imag() <= y && orient(a, b, z) < 0) {
            --wind;
        }
    }
    return wind != 0;
}

double distance_to_segment(Point p, Point a, Point b, Point* nearest) {
    const Point ab = b - a;
    const double len2 = std::norm(ab);
    double t = len2 > 0.0 ? ((p - a) * std::conj(ab)).real() / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Point q = a + t * ab;
    if (nearest) *nearest = q;
    return std::abs(p - q);
}

Polygon circle_polygon(Point center, double r, std::size_t n) {
    Polygon p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = center + std::polar(r, 2.0 * pi * static_cast<double>(k) / n);
    return p;
}

Polygon rectangle_polygon(Point center, double width, double height, std::size_t per_side) {
    const Point corners[4] = {{-0.5 * width, -0.5 * height},
                              {0.5 * width, -0.5 * height},
                              {0.5 * width, 0.5 * height},
                              {-0.5 * width, 0.5 * height}};
    Polygon p;
    for (int c = 0; c < 4; ++c) {
        for (std::size_t k = 0; k < per_side; ++k) {
            const double t = static_cast<double>(k) / per_side;
            p.push_back(center + corners[c] + t * (corners[(c + 1) % 4] - corners[c]));
        }
    }
    return p;
}

Polygon rotated(const Polygon& poly, double angle, Point about) {
    const Point r = std::polar(1.0, angle);
    Polygon out(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) out[i] = about + r * (poly[i] - about);
    return out;
}

Polygon translated(const Polygon& poly, Point shift) {
    Polygon out(poly);
    for (auto& p : out) p += shift;
    return out;
}

Polygon merge_collinear(const Polygon& poly) {
    if (poly.size() < 4) return poly;
    Polygon out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point prev = poly[(i + n - 1) % n], cur = poly[i], next = poly[(i + 1) % n];
        const Point d1 = cur - prev, d2 = next - cur;
        const bool straight = std::abs(cross(d1, d2)) <= 1e-12 * std::abs(d1) * std::abs(d2) &&
                              (d1 * std::conj(d2)).real() > 0.0;
        if (!straight) out.push_back(cur);
    }
    return out.size() >= 3 ? out : poly;
}

bool has_proper_self_crossing(const Polygon& poly) {
    const std::size_t n = poly.size();
    std::vector<Box> boxes(n);
    for (std::size_t i = 0; i < n; ++i) boxes[i] = edge_box(poly[i], poly[(i + 1) % n]);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            if (!overlap(boxes[i], boxes[j])) continue;
            if (proper_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return true;
        }
    }
    return false;
}

bool polygons_cross(const Polygon& a, const Polygon& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Box bi = edge_box(a[i], a[(i + 1) % a.size()]);
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (!overlap(bi, edge_box(b[j], b[(j + 1) % b.size()]))) continue;
            if (proper_cross(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()])) return true;
        }
    }
    return false;
}

SegmentIndex::SegmentIndex(const std::vector<Point>& pts, bool closed) {
    const std::size_t ne = edge_count(pts, closed);
    if (ne == 0) throw DomainError("SegmentIndex: need at least one edge");
    double x0 = pts[0].real(), x1 = x0, y0 = pts[0].imag(), y1 = y0;
    for (const auto& p : pts) {
        x0 = std::min(x0, p.real());
        x1 = std::max(x1, p.real());
        y0 = std::min(y0, p.imag());
        y1 = std::max(y1, p.imag());
    }
    lo_ = {x0, y0};
    hi_ = {x1, y1};
    const double span = std::max({x1 - x0, y1 - y0, 1e-300});
    const double cells = std::clamp(static_cast<double>(ne), 1.0, 512.0 * 512.0);
    cell_ = span / std::max(1.0, std::sqrt(cells));
    nx_ = std::max(1, static_cast<int>(std::ceil((x1 - x0) / cell_)));
    ny_ = std::max(1, static_cast<int>(std::ceil((y1 - y0) / cell_)));
    auto cell_of = [&](double v, double origin, int count) {
        return std::clamp(static_cast<int>(std::floor((v - origin) / cell_)), 0, count - 1);
    };
    std::vector<std::vector<std::uint32_t>> bucket(static_cast<std::size_t>(nx_) * ny_);
    for (std::size_t k = 0; k < ne; ++k) {
        const Point a = pts[k], b = pts[(k + 1) % pts.size()];
        a_.push_back(a);
        b_.push_back(b);
        const Box bx = edge_box(a, b);
        for (int ix = cell_of(bx.x0, x0, nx_); ix <= cell_of(bx.x1, x0, nx_); ++ix)
            for (int iy = cell_of(bx.y0, y0, ny_); iy <= cell_of(bx.y1, y0, ny_); ++iy)
                bucket[static_cast<std::size_t>(iy) * nx_ + ix].push_back(static_cast<std::uint32_t>(k));
    }
    start_.assign(bucket.size() + 1, 0);
    for (std::size_t c = 0; c < bucket.size(); ++c) {
        start_[c + 1] = start_[c] + static_cast<std::uint32_t>(bucket[c].size());
        items_.insert(items_.end(), bucket[c].begin(), bucket[c].end());
    }
}

double SegmentIndex::scan_cell(int ix, int iy, Point p, double best, Point* nearest) const {
    if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return best;
    const std::size_t c = static_cast<std::size_t>(iy) * nx_ + ix;
    for (std::uint32_t k = start_[c]; k < start_[c + 1]; ++k) {
        Point q;
        const double d = distance_to_segment(p, a_[items_[k]], b_[items_[k]], &q);
        if (d < best) {
            best = d;
            if (nearest) *nearest = q;
        }
    }
    return best;
}

double SegmentIndex::distance(Point p, Point* nearest) const {
    const int cx = std::clamp(static_cast<int>(std::floor((p.real() - lo_.real()) / cell_)), 0, nx_ - 1);
    const int cy = std::clamp(static_cast<int>(std::floor((p.imag() - lo_.imag()) / cell_)), 0, ny_ - 1);
    double best = HUGE_VAL;
    const int rmax = std::max(nx_, ny_);
    for (int r = 0; r <= rmax; ++r) {
        if (r == 0) {
            best = scan_cell(cx, cy, p, best, nearest);
        } else {
            for (int i = -r; i <= r; ++i) {
                best = scan_cell(cx + i, cy - r, p, best, nearest);
                best = scan_cell(cx + i, cy + r, p, best, nearest);
            }
            for (int j = -r + 1; j <= r - 1; ++j) {
                best = scan_cell(cx - r, cy + j, p, best, nearest);
                best = scan_cell(cx + r, cy + j, p, best, nearest);
            }
        }
        // everything beyond ring r is at least r cells away
        if (best <= r * cell_) break;
    }
    return best;
}

CapacityResult log_capacity(const std::vector<Point>& pts, bool closed, const CapacityConfig& cfg) {
    if (edge_count(pts, closed) == 0) throw DomainError("log_capacity: need at least one edge");
    if (cfg.panels < 4) throw DomainError("log_capacity: need at least 4 panels");
    CapacityResult r;
    r.coarse = solve_log_capacity(make_panels(pts, closed, cfg.panels, 1));
    r.fine = solve_log_capacity(make_panels(pts, closed, cfg.panels, 2));
    // second-order panel error: the coarse-fine gap is three times the fine error
    r.log_cap = r.fine + (r.fine - r.coarse) / 3.0;
    r.err_est = std::abs(r.fine - r.coarse) / 3.0;
    return r;
}

void write_polygon_csv(const Polygon& poly, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "x,y\n" << std::setprecision(17);
    for (const auto& p : poly) out << p.real() << ',' << p.imag() << '\n';
    if (!out) throw Error("write failed for " + path);
}

Polygon read_polygon_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "x,y") throw Error(path + ": expected header x,y");
    Polygon poly;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        double x, y;
        char comma;
        if (!(ss >> x >> comma >> y) || comma != ',') throw Error(path + ": bad vertex line '" + line + "'");
        poly.emplace_back(x, y);
    }
    return poly;
}

}  // namespace cle::geom
