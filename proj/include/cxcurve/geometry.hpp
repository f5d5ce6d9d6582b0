#pragma once

#include <array>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "cxcurve/errors.hpp"
#include "cxcurve/polynomial.hpp"

namespace cxcurve {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Seeded generator with a platform-independent uniform draw (53 random bits).
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t next() { return eng_(); }

   private:
    std::mt19937_64 eng_;
};

/// Per-stream seed derived from a master seed (splitmix64 finaliser).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
    std::uint64_t x = master + 0x9E3779B97F4A7C15ull * (stream + 1);
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline double cross(cplx a, cplx b) noexcept { return a.real() * b.imag() - a.imag() * b.real(); }

/// Angle mapped into [0, 2pi).
inline double wrap_2pi(double a) noexcept {
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
}

/// Convex polygon with counter-clockwise vertices. Empty means no area.
class ConvexPolygon {
   public:
    ConvexPolygon() = default;
    explicit ConvexPolygon(std::vector<cplx> ccw) : v_(std::move(ccw)) { cleanup(); }

    static ConvexPolygon square(cplx centre, double half_width) {
        const double h = half_width;
        return ConvexPolygon({centre + cplx(-h, -h), centre + cplx(h, -h), centre + cplx(h, h), centre + cplx(-h, h)});
    }

    const std::vector<cplx>& vertices() const noexcept { return v_; }
    bool empty() const noexcept { return v_.size() < 3; }

    double area() const noexcept {
        double a = 0.0;
        for (std::size_t i = 0; i < v_.size(); ++i) a += cross(v_[i], v_[(i + 1) % v_.size()]);
        return 0.5 * a;
    }

    cplx centroid() const noexcept {
        if (v_.empty()) return {};
        const double a = area();
        if (std::abs(a) < 1e-300) {
            cplx s{};
            for (const auto& p : v_) s += p;
            return s / static_cast<double>(v_.size());
        }
        cplx c{};
        for (std::size_t i = 0; i < v_.size(); ++i) {
            const cplx p = v_[i], q = v_[(i + 1) % v_.size()];
            c += (p + q) * cross(p, q);
        }
        return c / (6.0 * a);
    }

    /// Inside or within `tol` of the boundary.
    bool contains(cplx z, double tol = 0.0) const noexcept {
        if (empty()) return false;
        for (std::size_t i = 0; i < v_.size(); ++i) {
            const cplx a = v_[i], e = v_[(i + 1) % v_.size()] - a;
            const double len = std::abs(e);
            if (len == 0.0) continue;
            if (cross(e, z - a) / len < -tol) return false;
        }
        return true;
    }

    bool strictly_contains(cplx z, double margin) const noexcept {
        if (empty()) return false;
        for (std::size_t i = 0; i < v_.size(); ++i) {
            const cplx a = v_[i], e = v_[(i + 1) % v_.size()] - a;
            const double len = std::abs(e);
            if (len == 0.0) continue;
            if (cross(e, z - a) / len <= margin) return false;
        }
        return true;
    }

    /// Keep the part on the left of the directed line through `a` with
    /// direction `d` (cross(d, z - a) >= 0).
    ConvexPolygon clip_left(cplx a, cplx d) const {
        std::vector<cplx> out;
        const std::size_t n = v_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const cplx p = v_[i], q = v_[(i + 1) % n];
            const double sp = cross(d, p - a), sq = cross(d, q - a);
            if (sp >= 0.0) out.push_back(p);
            if ((sp >= 0.0) != (sq >= 0.0)) {
                const double t = sp / (sp - sq);
                out.push_back(p + t * (q - p));
            }
        }
        return ConvexPolygon(std::move(out));
    }

    ConvexPolygon intersect(const ConvexPolygon& other) const {
        if (empty() || other.empty()) return {};
        ConvexPolygon out = *this;
        const auto& w = other.v_;
        for (std::size_t i = 0; i < w.size() && !out.empty(); ++i) out = out.clip_left(w[i], w[(i + 1) % w.size()] - w[i]);
        return out;
    }

    /// Halves on either side of the line through `a` with direction `d`.
    std::pair<ConvexPolygon, ConvexPolygon> split(cplx a, cplx d) const { return {clip_left(a, d), clip_left(a, -d)}; }

    std::pair<cplx, cplx> bounding_box() const noexcept {
        double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
        for (const auto& p : v_) {
            x0 = std::min(x0, p.real());
            x1 = std::max(x1, p.real());
            y0 = std::min(y0, p.imag());
            y1 = std::max(y1, p.imag());
        }
        return {cplx(x0, y0), cplx(x1, y1)};
    }

    double max_distance_from(cplx z) const noexcept {
        double m = 0.0;
        for (const auto& p : v_) m = std::max(m, std::abs(p - z));
        return m;
    }

    /// Euclidean distance from z to the polygon (0 inside).
    double distance_from(cplx z) const noexcept {
        if (contains(z)) return 0.0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < v_.size(); ++i) {
            const cplx a = v_[i], b = v_[(i + 1) % v_.size()];
            const cplx e = b - a;
            const double l2 = std::norm(e);
            double t = l2 > 0.0 ? ((z - a) * std::conj(e)).real() / l2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            best = std::min(best, std::abs(z - (a + t * e)));
        }
        return best;
    }

    /// All cross products of consecutive edges share one sign.
    bool is_convex(double tol = 1e-12) const noexcept {
        const std::size_t n = v_.size();
        if (n < 3) return true;
        const double scale = std::max(1.0, max_distance_from(centroid()));
        for (std::size_t i = 0; i < n; ++i) {
            const cplx e0 = v_[(i + 1) % n] - v_[i], e1 = v_[(i + 2) % n] - v_[(i + 1) % n];
            if (cross(e0, e1) < -tol * scale * scale) return false;
        }
        return true;
    }

   private:
    void cleanup() {
        if (v_.empty()) return;
        double scale = 0.0;
        for (const auto& p : v_) scale = std::max(scale, std::abs(p));
        const double tol = 1e-13 * std::max(1.0, scale);
        std::vector<cplx> out;
        for (const auto& p : v_)
            if (out.empty() || std::abs(p - out.back()) > tol) out.push_back(p);
        while (out.size() > 1 && std::abs(out.front() - out.back()) <= tol) out.pop_back();
        v_ = std::move(out);
        if (v_.size() < 3 || std::abs(area()) <= 1e-14 * std::max(1.0, scale * scale)) v_.clear();
    }

    std::vector<cplx> v_;
};

/// Closed wedge {apex + r e^{i theta} : theta in [theta0, theta1]} truncated to
/// a triangle reaching `far` along each ray; callers clip it to their window.
inline ConvexPolygon wedge_triangle(cplx apex, double theta0, double theta1, double far) {
    const double half = 0.5 * (theta1 - theta0);
    const double reach = far / std::cos(std::min(half, 1.5));
    return ConvexPolygon({apex, apex + std::polar(reach, theta0), apex + std::polar(reach, theta1)});
}

/// Voronoi cell {z : |z - sites[j]| <= |z - sites[i]| for all i} within `window`.
inline ConvexPolygon voronoi_cell(const std::vector<cplx>& sites, std::size_t j, const ConvexPolygon& window) {
    ConvexPolygon cell = window;
    for (std::size_t i = 0; i < sites.size() && !cell.empty(); ++i) {
        if (i == j) continue;
        const cplx mid = 0.5 * (sites[i] + sites[j]);
        const cplx normal = sites[j] - sites[i];
        // Points closer to sites[j] satisfy Re((z - mid) conj(normal)) >= 0.
        cell = cell.clip_left(mid, normal * cplx(0.0, -1.0));
    }
    return cell;
}

struct ArcCover {
    double start = 0.0;     // arc runs counter-clockwise from here
    double aperture = 0.0;  // in [0, 2pi]
};

/// Smallest circular arc containing every angle: complement of the widest gap
/// between sorted angles.
inline ArcCover minimal_arc_cover(std::vector<double> angles) {
    if (angles.empty()) return {};
    for (auto& a : angles) a = wrap_2pi(a);
    std::sort(angles.begin(), angles.end());
    double best_gap = angles.front() + kTwoPi - angles.back();
    std::size_t best = 0;  // arc starts at angles[best]
    for (std::size_t i = 1; i < angles.size(); ++i) {
        const double gap = angles[i] - angles[i - 1];
        if (gap > best_gap) {
            best_gap = gap;
            best = i;
        }
    }
    return {angles[best], std::max(0.0, kTwoPi - best_gap)};
}

/// Angular extent of a convex polygon seen from `eye`. A point interior to
/// the polygon sees the full circle.
inline ArcCover angular_span(const ConvexPolygon& poly, cplx eye) {
    if (poly.empty()) return {};
    const double scale = std::max(1.0, poly.max_distance_from(eye));
    if (poly.strictly_contains(eye, 1e-12 * scale)) return {0.0, kTwoPi};
    std::vector<double> angles;
    for (const auto& v : poly.vertices())
        if (std::abs(v - eye) > 1e-13 * scale) angles.push_back(std::arg(v - eye));
    return minimal_arc_cover(std::move(angles));
}

/// Uniform point of the polygon by rejection from its bounding box.
inline cplx sample_uniform(const ConvexPolygon& poly, Rng& rng, int max_consecutive_failures = 100000) {
    if (poly.empty()) throw Error(ErrorCode::EmptyRegion, "cannot sample an empty polygon");
    const auto [lo, hi] = poly.bounding_box();
    for (int i = 0; i < max_consecutive_failures; ++i) {
        const cplx z(rng.uniform(lo.real(), hi.real()), rng.uniform(lo.imag(), hi.imag()));
        if (poly.contains(z)) return z;
    }
    throw Error(ErrorCode::EmptyRegion, "rejection sampling failed");
}

/// Uniform points of a convex polygon by fan triangulation: a triangle is
/// picked with probability proportional to its area, then a point inside it.
/// Same distribution as rejection from the bounding box, without the misses
/// on thin slivers.
class PolygonSampler {
   public:
    explicit PolygonSampler(const ConvexPolygon& poly) {
        const auto& v = poly.vertices();
        if (poly.empty()) throw Error(ErrorCode::EmptyRegion, "cannot sample an empty polygon");
        double acc = 0.0;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            const double a = 0.5 * std::abs(cross(v[i] - v[0], v[i + 1] - v[0]));
            if (a <= 0.0) continue;
            acc += a;
            tris_.push_back({v[0], v[i], v[i + 1]});
            cum_.push_back(acc);
        }
        if (!(acc > 0.0)) throw Error(ErrorCode::EmptyRegion, "polygon has zero area");
    }

    cplx operator()(Rng& rng) const {
        const double u = rng.uniform() * cum_.back();
        const std::size_t k = std::min<std::size_t>(
            static_cast<std::size_t>(std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin()), tris_.size() - 1);
        double a = rng.uniform(), b = rng.uniform();
        if (a + b > 1.0) {
            a = 1.0 - a;
            b = 1.0 - b;
        }
        const auto& t = tris_[k];
        return t[0] + a * (t[1] - t[0]) + b * (t[2] - t[0]);
    }

   private:
    std::vector<std::array<cplx, 3>> tris_;
    std::vector<double> cum_;
};

/// Uniform point of the disk |z - centre| <= radius.
inline cplx sample_disk(cplx centre, double radius, Rng& rng) {
    const double r = radius * std::sqrt(rng.uniform());
    return centre + std::polar(r, kTwoPi * rng.uniform());
}

}  // namespace cxcurve
