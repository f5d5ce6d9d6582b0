#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <cxcurve/geometry.hpp>
#include <cxcurve/quadrature.hpp>

#include "generators.hpp"

using namespace cxcurve;
using cxtest::Gen;

namespace {

double integrate(const GaussLegendreRule& r, auto f) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(r.nodes[i]);
    return s;
}

ConvexPolygon random_convex(Gen& g, int n) {
    // Sorted angles on a circle give a convex polygon.
    std::vector<double> th;
    for (int i = 0; i < n; ++i) th.push_back(g.real(0.0, kTwoPi));
    std::sort(th.begin(), th.end());
    const cplx c = g.point(2.0);
    const double r = g.real(0.5, 3.0);
    std::vector<cplx> v;
    for (double t : th) v.push_back(c + std::polar(r, t));
    return ConvexPolygon(v);
}

}  // namespace

TEST(GaussLegendre, WeightsSumToTwo) {
    for (int n : {1, 2, 3, 7, 16, 32, 64}) {
        const auto r = gauss_legendre(n);
        EXPECT_NEAR(integrate(r, [](double) { return 1.0; }), 2.0, 1e-14) << n;
    }
}

TEST(GaussLegendre, ExactForDegreeTwoNMinusOne) {
    for (int n : {1, 2, 4, 8, 16}) {
        const auto r = gauss_legendre(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            const double want = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
            EXPECT_NEAR(integrate(r, [k](double x) { return std::pow(x, k); }), want, 1e-13) << n << " " << k;
        }
    }
}

TEST(GaussLegendre, NodesAscendingAndSymmetric) {
    const auto r = gauss_legendre(9);
    for (std::size_t i = 1; i < r.nodes.size(); ++i) EXPECT_LT(r.nodes[i - 1], r.nodes[i]);
    for (std::size_t i = 0; i < r.nodes.size(); ++i) EXPECT_DOUBLE_EQ(r.nodes[i], -r.nodes[r.nodes.size() - 1 - i]);
    EXPECT_EQ(r.nodes[4], 0.0);
}

TEST(GaussLegendre, UnitInterval) {
    const auto r = gauss_legendre_unit(12);
    EXPECT_NEAR(integrate(r, [](double x) { return std::exp(x); }), std::numbers::e - 1.0, 1e-14);
}

TEST(GaussLegendre, RejectsZeroNodes) { EXPECT_THROW(gauss_legendre(0), Error); }

TEST(Rng, Deterministic) {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
    EXPECT_NE(Rng(42).next(), c.next());
}

TEST(Rng, UniformInRange) {
    Rng r(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform(-2.0, 3.0);
        EXPECT_GE(u, -2.0);
        EXPECT_LT(u, 3.0);
    }
}

TEST(Rng, DeriveSeedSeparatesStreams) {
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    EXPECT_EQ(derive_seed(5, 9), derive_seed(5, 9));
}

TEST(WrapAngle, IntoZeroTwoPi) {
    EXPECT_NEAR(wrap_2pi(-0.5), kTwoPi - 0.5, 1e-15);
    EXPECT_NEAR(wrap_2pi(kTwoPi + 1.0), 1.0, 1e-14);
    EXPECT_EQ(wrap_2pi(0.0), 0.0);
}

TEST(Polygon, SquareAreaCentroid) {
    const auto sq = ConvexPolygon::square(cplx(1.0, -2.0), 0.5);
    EXPECT_NEAR(sq.area(), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(sq.centroid() - cplx(1.0, -2.0)), 0.0, 1e-15);
    EXPECT_TRUE(sq.is_convex());
}

TEST(Polygon, Contains) {
    const auto sq = ConvexPolygon::square(0.0, 1.0);
    EXPECT_TRUE(sq.contains(0.0));
    EXPECT_TRUE(sq.contains(cplx(1.0, 0.3)));
    EXPECT_FALSE(sq.contains(cplx(1.01, 0.0)));
    EXPECT_TRUE(sq.contains(cplx(1.01, 0.0), 0.02));
    EXPECT_FALSE(sq.strictly_contains(cplx(1.0, 0.0), 0.0));
}

TEST(Polygon, ClipHalves) {
    const auto sq = ConvexPolygon::square(0.0, 1.0);
    // keep the upper half: left of the ray along +x through 0
    const auto top = sq.clip_left(0.0, 1.0);
    EXPECT_NEAR(top.area(), 2.0, 1e-14);
    for (const auto& v : top.vertices()) EXPECT_GE(v.imag(), -1e-15);
    const auto none = sq.clip_left(cplx(0.0, 5.0), 1.0);
    EXPECT_TRUE(none.empty());
}

TEST(Polygon, IntersectSquares) {
    const auto a = ConvexPolygon::square(0.0, 1.0);
    const auto b = ConvexPolygon::square(cplx(1.0, 1.0), 1.0);
    EXPECT_NEAR(a.intersect(b).area(), 1.0, 1e-14);
    EXPECT_TRUE(a.intersect(ConvexPolygon::square(cplx(5.0, 5.0), 1.0)).empty());
}

TEST(Polygon, Distances) {
    const auto sq = ConvexPolygon::square(0.0, 1.0);
    EXPECT_NEAR(sq.distance_from(cplx(3.0, 0.0)), 2.0, 1e-15);
    EXPECT_NEAR(sq.max_distance_from(0.0), std::sqrt(2.0), 1e-15);
    const auto [lo, hi] = sq.bounding_box();
    EXPECT_EQ(lo, cplx(-1.0, -1.0));
    EXPECT_EQ(hi, cplx(1.0, 1.0));
}

TEST(PolygonProperty, ClipPartitionsArea) {
    Gen g(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = random_convex(g, 3 + g.index(10));
        const cplx a = g.point(2.0);
        const cplx d = std::polar(1.0, g.real(0.0, kTwoPi));
        const auto l = p.clip_left(a, d), r = p.clip_left(a, -d);
        EXPECT_NEAR(l.area() + r.area(), p.area(), 1e-12 * std::max(1.0, p.area()));
        if (!l.empty()) {
            EXPECT_TRUE(l.is_convex());
        }
        if (!r.empty()) {
            EXPECT_TRUE(r.is_convex());
        }
    }
}

TEST(PolygonProperty, IntersectionContainedInBoth) {
    Gen g(12);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = random_convex(g, 5), q = random_convex(g, 6);
        const auto x = p.intersect(q);
        EXPECT_LE(x.area(), std::min(p.area(), q.area()) + 1e-12);
        for (const auto& v : x.vertices()) {
            EXPECT_TRUE(p.contains(v, 1e-9));
            EXPECT_TRUE(q.contains(v, 1e-9));
        }
    }
}

TEST(Voronoi, CellsTileWindow) {
    Gen g(13);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<cplx> sites;
        const int n = 2 + g.index(6);
        for (int i = 0; i < n; ++i) sites.push_back(g.point(4.0));
        const auto window = ConvexPolygon::square(0.0, 6.0);
        double total = 0.0;
        for (int j = 0; j < n; ++j) total += voronoi_cell(sites, static_cast<std::size_t>(j), window).area();
        EXPECT_NEAR(total, window.area(), 1e-9);
    }
}

TEST(Voronoi, CellPointsNearestToSite) {
    const std::vector<cplx> sites{0.0, cplx(2.0, 0.0), cplx(0.0, 3.0)};
    const auto window = ConvexPolygon::square(0.0, 10.0);
    Rng r(3);
    for (std::size_t j = 0; j < sites.size(); ++j) {
        const auto cell = voronoi_cell(sites, j, window);
        for (int i = 0; i < 200; ++i) {
            const cplx z = sample_uniform(cell, r);
            for (const auto& s : sites) EXPECT_LE(std::abs(z - sites[j]), std::abs(z - s) + 1e-12);
        }
    }
}

TEST(ArcCover, Basic) {
    const auto a = minimal_arc_cover({0.1, 0.5, 0.3});
    EXPECT_NEAR(a.start, 0.1, 1e-15);
    EXPECT_NEAR(a.aperture, 0.4, 1e-15);
}

TEST(ArcCover, AcrossZero) {
    const auto a = minimal_arc_cover({-0.2, 0.2});
    EXPECT_NEAR(a.start, kTwoPi - 0.2, 1e-15);
    EXPECT_NEAR(a.aperture, 0.4, 1e-14);
}

TEST(ArcCover, EmptyAndSingle) {
    EXPECT_EQ(minimal_arc_cover({}).aperture, 0.0);
    EXPECT_EQ(minimal_arc_cover({1.0}).aperture, 0.0);
}

TEST(ArcCoverProperty, CoversEveryAngle) {
    Gen g(14);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> angles;
        const double c = g.real(0.0, kTwoPi), w = g.real(0.0, 3.0);
        for (int i = 0; i < 1 + g.index(20); ++i) angles.push_back(c + g.real(0.0, w));
        const auto a = minimal_arc_cover(angles);
        EXPECT_LE(a.aperture, w + 1e-12);
        for (double t : angles) EXPECT_LE(wrap_2pi(t - a.start), a.aperture + 1e-12);
    }
}

TEST(AngularSpan, InteriorEyeSeesFullCircle) {
    EXPECT_EQ(angular_span(ConvexPolygon::square(0.0, 1.0), 0.0).aperture, kTwoPi);
}

TEST(AngularSpan, ExteriorEye) {
    // near corners (0, +-1) are 45 degrees off axis
    const auto s = angular_span(ConvexPolygon::square(cplx(1.0, 0.0), 1.0), cplx(-1.0, 0.0));
    EXPECT_NEAR(s.aperture, std::numbers::pi / 2.0, 1e-14);
}

TEST(Wedge, ContainsRays) {
    const auto w = wedge_triangle(cplx(1.0, 1.0), 0.2, 0.9, 5.0);
    EXPECT_TRUE(w.contains(cplx(1.0, 1.0) + std::polar(4.0, 0.5), 1e-12));
    EXPECT_FALSE(w.contains(cplx(1.0, 1.0) + std::polar(1.0, 1.2)));
}

TEST(Sampling, UniformInsidePolygon) {
    const auto tri = ConvexPolygon({0.0, cplx(1.0, 0.0), cplx(0.0, 1.0)});
    Rng r(5);
    cplx mean = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const cplx z = sample_uniform(tri, r);
        ASSERT_TRUE(tri.contains(z));
        mean += z;
    }
    mean /= static_cast<double>(n);
    EXPECT_NEAR(std::abs(mean - tri.centroid()), 0.0, 0.01);
}

TEST(Sampling, EmptyPolygonThrows) {
    Rng r(1);
    try {
        sample_uniform(ConvexPolygon{}, r);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyRegion);
    }
}

TEST(Sampling, DiskRadius) {
    Rng r(9);
    for (int i = 0; i < 1000; ++i) EXPECT_LE(std::abs(sample_disk(cplx(2.0, 1.0), 0.5, r) - cplx(2.0, 1.0)), 0.5);
}

TEST(PolygonSampler, InsideAndUnbiased) {
    Gen g(15);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_convex(g, 3 + g.index(8));
        const PolygonSampler s(p);
        Rng r(static_cast<std::uint64_t>(trial));
        cplx mean = 0.0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            const cplx z = s(r);
            ASSERT_TRUE(p.contains(z, 1e-12));
            mean += z;
        }
        mean /= static_cast<double>(n);
        EXPECT_LT(std::abs(mean - p.centroid()), 0.05 * p.max_distance_from(p.centroid()));
    }
}

TEST(PolygonSampler, ThinSliver) {
    const ConvexPolygon sliver({0.0, cplx(10.0, 10.0), cplx(10.0, 10.001)});
    const PolygonSampler s(sliver);
    Rng r(16);
    for (int i = 0; i < 1000; ++i) EXPECT_TRUE(sliver.contains(s(r), 1e-9));
}

TEST(PolygonSampler, DegenerateThrows) {
    try {
        PolygonSampler s(ConvexPolygon({0.0, cplx(1.0, 0.0)}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyRegion);
    }
}
