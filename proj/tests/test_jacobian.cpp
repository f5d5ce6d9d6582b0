#include <gtest/gtest.h>

#include <cmath>

#include <cxcurve/curve.hpp>
#include <cxcurve/jacobian.hpp>

#include "generators.hpp"

using namespace cxcurve;
using cxtest::Gen;

namespace {

CurveGamma make(Polynomial a, Polynomial b, Polynomial c) { return CurveGamma({std::move(a), std::move(b), std::move(c)}); }

Polynomial Z(int k, cplx v = 1.0) { return Polynomial::monomial(k, v); }

double rel(cplx got, cplx want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

Triple random_triple(Gen& g, double box) {
    auto p = [&] { return cplx(g.real(-box, box), g.real(-box, box)); };
    return {p(), p(), p()};
}

// A curve of the given degree with L1, L2 zero-free near the triangle.
CurveGamma clear_curve(Gen& g, int degree, const Triple& t) {
    for (;;) {
        const CurveGamma c = g.curve(degree);
        const auto tt = torsion_triple(c);
        if (SingularSet(tt).clear_of(t, tt, 0.05)) return c;
    }
}

}  // namespace

TEST(JacobianDirect, MomentCurveClosedForm) {
    const CurveDerivative dg(moment_curve());
    Gen g(31);
    for (int i = 0; i < 200; ++i) {
        const Triple t = random_triple(g, 2.0);
        const cplx want = 6.0 * (t.z2 - t.z1) * (t.z3 - t.z1) * (t.z3 - t.z2);
        EXPECT_LE(std::abs(jacobian_direct(dg, t) - want), 1e-12 * std::max(1.0, std::abs(want)));
    }
}

TEST(JacobianDirect, MomentCurveAtZeroOneTwo) {
    EXPECT_NEAR(std::abs(jacobian_direct(moment_curve(), {0.0, 1.0, 2.0}) - cplx(12.0)), 0.0, 1e-13);
}

TEST(JacobianDirect, CoincidentPointsVanish) {
    const CurveGamma c = make(Z(1) + Z(3), Z(2), Z(4));
    EXPECT_EQ(jacobian_direct(c, {0.3, cplx(1.0, 1.0), cplx(1.0, 1.0)}), cplx(0.0));
}

TEST(JacobianDirectProperty, AntisymmetricUnderSwap) {
    Gen g(32);
    for (int i = 0; i < 100; ++i) {
        const CurveDerivative dg(g.curve(5));
        const Triple t = random_triple(g, 1.5);
        EXPECT_EQ(jacobian_direct(dg, {t.z2, t.z1, t.z3}), -jacobian_direct(dg, t));
    }
}

TEST(JacobianIntegral, MomentCurveAtZeroOneTwo) {
    QuadratureSpec q;
    q.nodes_per_segment = 16;
    const cplx v = jacobian_integral(moment_curve(), {0.0, 1.0, 2.0}, q);
    EXPECT_LE(rel(v, 12.0), 1e-10);
}

TEST(JacobianIntegral, EqualPointsGiveZero) {
    EXPECT_EQ(jacobian_integral(moment_curve(), {0.0, 1.0, 1.0}), cplx(0.0));
    EXPECT_EQ(jacobian_integral(moment_curve(), {1.0, 1.0, 3.0}), cplx(0.0));
}

TEST(JacobianIntegral, DegreeFourAtFixedTriangle) {
    const Triple t{0.1, cplx(1.0, 0.2), cplx(2.0, -0.1)};
    Gen g(33);
    for (int i = 0; i < 5; ++i) {
        const CurveGamma c = clear_curve(g, 4, t);
        EXPECT_LE(rel(jacobian_integral(c, t), jacobian_direct(c, t)), 1e-6);
    }
}

TEST(JacobianIntegral, SegmentHitsSingularity) {
    // L1 = 1 + 2z vanishes at -1/2, which lies on [z1, z2]
    const CurveGamma c = make(Z(1) + Z(2), Z(3), Z(4));
    try {
        jacobian_integral(c, {-1.0, 0.0, cplx(0.0, 1.0)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SegmentHitsSingularity);
    }
}

TEST(JacobianIntegral, RejectsTinyRule) {
    QuadratureSpec q;
    q.nodes_per_segment = 2;
    EXPECT_THROW(jacobian_integral(moment_curve(), {0.0, 1.0, 2.0}, q), Error);
}

TEST(JacobianIntegralProperty, MatchesDirect) {
    Gen g(34);
    int checked = 0;
    for (int curve = 0; curve < 10; ++curve) {
        const CurveGamma c = g.curve(3 + g.index(4));
        const JacobianIntegrand ji(c);
        const CurveDerivative dg(c);
        for (int i = 0; i < 20; ++i) {
            const Triple t = random_triple(g, 1.5);
            if (!ji.sing.clear_of(t, ji.tt)) continue;
            const cplx direct = jacobian_direct(dg, t);
            EXPECT_LE(rel(jacobian_integral_detailed(ji, t).value, direct), 1e-6) << "curve " << curve << " triple " << i;
            ++checked;
        }
    }
    EXPECT_GT(checked, 100);
}

TEST(JacobianIntegralProperty, TensorRuleAgreesAwayFromPoles) {
    const Triple t{0.1, cplx(1.0, 0.2), cplx(2.0, -0.1)};
    Gen g(35);
    for (int i = 0; i < 5; ++i) {
        const CurveGamma c = clear_curve(g, 4, t);
        const auto tt = torsion_triple(c);
        const cplx tensor = detail::jacobian_integral_gl(tt, t, gauss_legendre_unit(48));
        EXPECT_LE(rel(tensor, jacobian_integral(c, t)), 1e-6);
    }
}

TEST(JacobianIntegralProperty, NodeDoublingStable) {
    const Triple t{0.1, cplx(1.0, 0.2), cplx(2.0, -0.1)};
    Gen g(36);
    for (int i = 0; i < 5; ++i) {
        const CurveGamma c = clear_curve(g, 5, t);
        QuadratureSpec a, b;
        a.nodes_per_segment = 16;
        b.nodes_per_segment = 32;
        const cplx va = jacobian_integral(c, t, a), vb = jacobian_integral(c, t, b);
        EXPECT_LE(std::abs(va - vb) / std::max(std::abs(vb), 1e-300), 1e-8);
    }
}

TEST(JacobianIntegralProperty, LinearCollapse) {
    Gen g(37);
    const Triple base{0.1, cplx(1.0, 0.2), cplx(2.0, -0.1)};
    const CurveGamma c = clear_curve(g, 4, base);
    const cplx dir = std::polar(1.0, 0.7);
    std::vector<cplx> slope;
    for (double h : {1e-2, 1e-3, 1e-4}) slope.push_back(jacobian_integral(c, {base.z1, base.z2, base.z2 + h * dir}) / h);
    EXPECT_GT(std::abs(slope.back()), 0.0);
    // slope settles at rate O(h)
    EXPECT_LT(std::abs(slope[2] - slope[1]), std::abs(slope[1] - slope[0]));
    EXPECT_LT(std::abs(slope[2] - slope[1]) / std::abs(slope[2]), 1e-2);
}

TEST(RationalSegment, AgreesWithGaussLegendre) {
    Gen g(38);
    const auto rule = gauss_legendre_unit(64);
    for (int i = 0; i < 20; ++i) {
        const Polynomial num = g.poly(1 + g.index(4)), den = g.poly(1 + g.index(3));
        const RationalSegmentIntegral I(num, den);
        // segment well clear of every pole
        cplx a, b;
        bool ok = false;
        for (int tries = 0; tries < 100 && !ok; ++tries) {
            a = g.point(2.0);
            b = g.point(2.0);
            ok = true;
            for (const auto& p : I.poles())
                if (detail::point_segment_distance(p.rho, a, b) < 0.5) ok = false;
        }
        if (!ok) continue;
        cplx want = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            const cplx w = a + rule.nodes[k] * (b - a);
            const cplx d = den(w);
            want += rule.weights[k] * num(w) / (d * d);
        }
        want *= (b - a);
        EXPECT_LE(std::abs(I(a, b) - want), 1e-9 * std::max(1.0, std::abs(want))) << i;
    }
}

TEST(RationalSegment, PrimitiveDifferencesMatch) {
    const Polynomial num = Polynomial({1.0, 2.0, cplx(0.0, 1.0)});
    const Polynomial den = Polynomial({cplx(-1.0, -1.0), 1.0}) * Polynomial({2.0, 1.0});
    const RationalSegmentIntegral I(num, den);
    const cplx centre(0.5, -0.5), a(0.0, -0.5), b(1.0, 0.0);
    EXPECT_LE(std::abs((I.primitive(b, centre) - I.primitive(a, centre)) - I(a, b)), 1e-12);
}

TEST(Laurent, SimplePoleIsLog) {
    const cplx v = laurent_segment_integral(0.0, {1.0}, 1.0, cplx(0.0, 1.0));
    EXPECT_NEAR(std::abs(v - cplx(0.0, kTwoPi / 4)), 0.0, 1e-15);
}

TEST(Laurent, DoublePole) {
    // int_1^2 (y - 0)^{-2} = 1/2
    const cplx v = laurent_segment_integral(0.0, {0.0, 1.0}, 1.0, 2.0);
    EXPECT_NEAR(std::abs(v - 0.5), 0.0, 1e-15);
}

TEST(SeriesDivide, GeometricSeries) {
    const auto h = series_divide(Polynomial::constant(1.0), Polynomial({1.0, -1.0}), 6);
    for (const auto& c : h) EXPECT_NEAR(std::abs(c - cplx(1.0)), 0.0, 1e-15);
}

TEST(SectorContained, IdentityOnNarrowSector) {
    const auto wedge = wedge_triangle(0.0, 0.0, kTwoPi / 32, 2.0);
    const auto r = sector_contained([](cplx z) { return z; }, wedge, kTwoPi / 16, 1000, 1);
    EXPECT_TRUE(r.contained);
    EXPECT_LE(r.measured_aperture, kTwoPi / 32 + 1e-12);
    EXPECT_GT(r.measured_aperture, 0.9 * kTwoPi / 32);
    EXPECT_FALSE(r.witness.has_value());
}

TEST(SectorContained, SquareAroundOriginFails) {
    const auto r = sector_contained([](cplx z) { return z; }, ConvexPolygon::square(0.0, 1.0), 1.0, 500, 2);
    EXPECT_FALSE(r.contained);
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_TRUE(ConvexPolygon::square(0.0, 1.0).contains(*r.witness));
}

TEST(SectorContained, AllZeroThrows) {
    try {
        sector_contained([](cplx) { return cplx(0.0); }, ConvexPolygon::square(0.0, 1.0), 1.0, 10, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AllSamplesZero);
    }
}

TEST(SectorContained, Deterministic) {
    auto f = [](cplx z) { return z * z + 1.0; };
    const auto sq = ConvexPolygon::square(cplx(2.0, 2.0), 0.5);
    EXPECT_EQ(sector_contained(f, sq, 1.0, 200, 9).measured_aperture, sector_contained(f, sq, 1.0, 200, 9).measured_aperture);
}
