#pragma once

// Planar polygons and the queries the harmonic-measure estimators need.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cle::geom {

using Point = std::complex<double>;

// Closed polygon: vertices in order, last edge joins back to the first.
// Weakly simple curves (touching but not crossing) are allowed.
using Polygon = std::vector<Point>;

double signed_area(const Polygon& poly);
// Winding number test; points on an edge may go either way.
bool contains(const Polygon& poly, Point z);
double distance_to_segment(Point p, Point a, Point b, Point* nearest = nullptr);

// Regular n-gon inscribed in the circle |z - center| = r.
Polygon circle_polygon(Point center, double r, std::size_t n);
Polygon rectangle_polygon(Point center, double width, double height, std::size_t per_side = 1);
Polygon rotated(const Polygon& poly, double angle, Point about = 0.0);
Polygon translated(const Polygon& poly, Point shift);

// Drop vertices that sit on the straight line through their neighbours.
Polygon merge_collinear(const Polygon& poly);

// True if two edges of the polygon cross transversally. Touching at a vertex
// or overlapping collinear runs do not count as crossings.
bool has_proper_self_crossing(const Polygon& poly);
// True if some edge of `a` crosses some edge of `b` transversally.
bool polygons_cross(const Polygon& a, const Polygon& b);

// Nearest-edge queries on a fixed polyline through a uniform bucket grid.
class SegmentIndex {
public:
    SegmentIndex(const std::vector<Point>& pts, bool closed);

    // Exact Euclidean distance to the polyline; `nearest` receives the
    // closest point on it.
    double distance(Point p, Point* nearest = nullptr) const;
    double diameter() const { return std::abs(hi_ - lo_); }

private:
    std::vector<Point> a_, b_;
    Point lo_, hi_;
    double cell_ = 1.0;
    int nx_ = 1, ny_ = 1;
    std::vector<std::uint32_t> start_, items_;
    mutable std::vector<std::uint32_t> stamp_;
    mutable std::uint32_t epoch_ = 0;

    double scan_cell(int ix, int iy, Point p, double best, Point* nearest) const;
};

// Logarithmic capacity of a polyline by the single-layer equation
// int log|z - w| sigma(w) |dw| = log cap on the curve, int sigma = 1,
// collocated on panels graded toward every vertex. Two refinement levels
// are combined by Richardson extrapolation.
struct CapacityConfig {
    std::size_t panels = 400;  // coarse level; the fine level doubles it
};
struct CapacityResult {
    double log_cap = 0.0;
    double err_est = 0.0;
    double coarse = 0.0;
    double fine = 0.0;
};
CapacityResult log_capacity(const std::vector<Point>& pts, bool closed, const CapacityConfig& cfg = {});

// CSV with header `x,y`, one vertex per line.
void write_polygon_csv(const Polygon& poly, const std::string& path);
Polygon read_polygon_csv(const std::string& path);

}  // namespace cle::geom
