#include <gtest/gtest.h>

#include <cxcurve/curve.hpp>

#include "generators.hpp"

using namespace cxcurve;
using cxtest::Gen;

namespace {

CurveGamma make(Polynomial a, Polynomial b, Polynomial c) { return CurveGamma({std::move(a), std::move(b), std::move(c)}); }

Polynomial Z(int k, cplx v = 1.0) { return Polynomial::monomial(k, v); }

void expect_poly_near(const Polynomial& got, const Polynomial& want, double tol) {
    const int n = std::max(got.degree(), want.degree());
    for (int k = 0; k <= n; ++k) EXPECT_NEAR(std::abs(got.coeff(k) - want.coeff(k)), 0.0, tol) << "coefficient " << k;
}

}  // namespace

// Frozen values below come from tests/oracles/compute_oracles.py (sympy).

TEST(Torsion, MomentCurve) {
    const TorsionTriple tt = torsion_triple(moment_curve());
    EXPECT_EQ(tt.L1, Polynomial::constant(1.0));
    EXPECT_EQ(tt.L2, Polynomial::constant(2.0));
    EXPECT_EQ(tt.L3, Polynomial::constant(12.0));
    EXPECT_FALSE(tt.degenerate);
}

TEST(Torsion, PlanarCurveIsDegenerate) {
    const TorsionTriple tt = torsion_triple(make(Z(1), Z(2), Polynomial()));
    EXPECT_TRUE(tt.degenerate);
    EXPECT_TRUE(tt.L3.is_zero());
    EXPECT_EQ(lambda_weight(tt, cplx(3.0, 1.0)), 0.0);
}

TEST(Torsion, NormalizedCurveHasUnitTriple) {
    const TorsionTriple tt = torsion_triple(normalized_moment_curve());
    expect_poly_near(tt.L1, Polynomial::constant(1.0), 1e-15);
    expect_poly_near(tt.L2, Polynomial::constant(1.0), 1e-15);
    expect_poly_near(tt.L3, Polynomial::constant(1.0), 1e-15);
}

TEST(Torsion, SymbolicOracleSuite) {
    struct Case {
        CurveGamma curve;
        Polynomial L1, L2, L3;
    };
    const Case cases[] = {
        {make(Z(1), Z(2), Z(4)), Z(0), Z(0, 2.0), Z(1, 48.0)},
        {make(Z(1), Z(3), Z(5)), Z(0), Z(1, 6.0), Z(3, 240.0)},
        {make(Z(1), Z(2) + Z(3), Z(4)), Z(0), Polynomial({2.0, 6.0}), Polynomial({0.0, 48.0, 72.0})},
        {make(Z(2) + Z(1), Z(3), Z(1)), Polynomial({1.0, 2.0}), Polynomial({0.0, 6.0, 6.0}), Z(0, 12.0)},
    };
    for (const auto& c : cases) {
        const TorsionTriple tt = torsion_triple(c.curve);
        expect_poly_near(tt.L1, c.L1, 1e-12);
        expect_poly_near(tt.L2, c.L2, 1e-12);
        expect_poly_near(tt.L3, c.L3, 1e-12);
    }
}

TEST(Torsion, LambdaWeight) {
    const TorsionTriple moment = torsion_triple(moment_curve());
    EXPECT_NEAR(lambda_weight(moment, cplx(0.3, -2.0)), std::cbrt(12.0), 1e-14);
    const TorsionTriple quartic = torsion_triple(make(Z(1), Z(2), Z(4)));
    EXPECT_NEAR(lambda_weight(quartic, 1.0), std::cbrt(48.0), 1e-13);
}

TEST(Torsion, DegreeBound) {
    Gen g(21);
    for (int t = 0; t < 30; ++t) {
        const CurveGamma c = g.curve(3 + g.index(4));
        EXPECT_LE(torsion_triple(c).L3.degree(), 3 * c.degree_bound() - 6);
    }
}

TEST(Affine, IdentityLeavesCurveUnchanged) {
    const CurveGamma c = make(Z(1), Z(2) + Z(1), Z(3, 2.0));
    const CurveGamma out = affine_apply(c, AffineMap3::identity());
    for (int i = 0; i < 3; ++i) EXPECT_EQ(out[i], c[i]);
}

TEST(Affine, DiagonalNormalizesMoment) {
    Mat3 d{};
    d[0][0] = 1.0;
    d[1][1] = 0.5;
    d[2][2] = 1.0 / 6.0;
    const CurveGamma out = affine_apply(moment_curve(), AffineMap3(d, Vec3{}));
    expect_poly_near(torsion_triple(out).L3, Polynomial::constant(1.0), 1e-14);
}

TEST(Affine, DoubleScalesTorsionByEight) {
    Mat3 d{};
    for (int i = 0; i < 3; ++i) d[i][i] = 2.0;
    const AffineMap3 a(d, Vec3{});
    EXPECT_EQ(a.determinant(), cplx(8.0));
    const CurveGamma c = make(Z(1), Z(2) + Z(1), Z(4));
    const TorsionTriple before = torsion_triple(c), after = torsion_triple(affine_apply(c, a));
    Gen g(3);
    for (int k = 0; k < 20; ++k) {
        const cplx z = g.point(2.0);
        EXPECT_NEAR(std::abs(after.L3(z) - 8.0 * before.L3(z)), 0.0, 1e-11 * (1.0 + std::abs(before.L3(z))));
    }
}

TEST(Affine, CachedDeterminant) {
    Gen g(8);
    for (int t = 0; t < 20; ++t) {
        const Mat3 m = g.invertible_matrix();
        const AffineMap3 a(m, Vec3{});
        EXPECT_LE(std::abs(a.determinant() - det(m)), 1e-12 * std::abs(det(m)));
        const Mat3 back = matmul(m, inverse(m));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) EXPECT_NEAR(std::abs(back[i][j] - (i == j ? 1.0 : 0.0)), 0.0, 1e-12);
    }
}

TEST(Normalize, MomentCurve) {
    const NormalizedCurve n = normalize_at_origin(moment_curve());
    const CurveGamma want = normalized_moment_curve();
    for (int i = 0; i < 3; ++i) expect_poly_near(n.curve[i], want[i], 1e-15);
}

TEST(Normalize, FixedPoint) {
    const NormalizedCurve n = normalize_at_origin(normalized_moment_curve());
    for (int i = 0; i < 3; ++i) expect_poly_near(n.curve[i], normalized_moment_curve()[i], 1e-15);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(std::abs(n.map.offset()[i]), 0.0, 1e-15);
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(std::abs(n.map.matrix()[i][j] - (i == j ? 1.0 : 0.0)), 0.0, 1e-15);
    }
}

TEST(Normalize, ShiftedCurvePostconditions) {
    const NormalizedCurve n = normalize_at_origin(make(Z(1) + Z(0), Z(2), Z(3)));
    EXPECT_NEAR(std::abs(n.curve(0.0)[0]), 0.0, 1e-12);
    const Vec3 d1 = n.curve.derivative_at(0.0, 1);
    EXPECT_NEAR(std::abs(d1[0] - 1.0), 0.0, 1e-9);
    EXPECT_NEAR(std::abs(d1[1]), 0.0, 1e-9);
    EXPECT_NEAR(std::abs(d1[2]), 0.0, 1e-9);
}

TEST(Normalize, SingularAtOrigin) {
    try {
        normalize_at_origin(make(Z(1), Z(2), Z(4)));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularAtOrigin);
    }
}

TEST(Offspring, TrivialCases) {
    const CurveGamma c = moment_curve();
    const cplx zero[] = {0.0, 0.0};
    const CurveGamma one = offspring_curve(c, std::span<const cplx>(zero, 1), 1);
    const CurveGamma two = offspring_curve(c, zero, 2);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(one[i], c[i]);
        EXPECT_EQ(two[i], c[i]);
    }
    EXPECT_THROW(offspring_curve(c, zero, 3), Error);
}

TEST(Offspring, MomentCurveBinomialShift) {
    const cplx h[] = {0.0, 1.0};
    const CurveGamma o = offspring_curve(moment_curve(), h, 2);
    expect_poly_near(o[0], Polynomial({0.5, 1.0}), 1e-15);
    expect_poly_near(o[1], Polynomial({0.5, 1.0, 1.0}), 1e-15);
    expect_poly_near(o[2], Polynomial({0.5, 1.5, 1.5, 1.0}), 1e-15);
}

// -- properties ------------------------------------------------------------

TEST(CurveProperty, TorsionScalesByDeterminant) {
    Gen g(31);
    for (int t = 0; t < 50; ++t) {
        const CurveGamma c = g.curve(3 + g.index(3));
        Vec3 off{g.point(1.0), g.point(1.0), g.point(1.0)};
        const AffineMap3 a(g.invertible_matrix(), off);
        const TorsionTriple before = torsion_triple(c), after = torsion_triple(affine_apply(c, a));
        for (int k = 0; k < 20; ++k) {
            const cplx z = g.point(2.0);
            const cplx want = a.determinant() * before.L3(z);
            EXPECT_LE(std::abs(after.L3(z) - want), 1e-8 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST(CurveProperty, NormalizeIsIdempotent) {
    Gen g(32);
    int tested = 0;
    for (int t = 0; t < 50; ++t) {
        const CurveGamma c = g.curve(3 + g.index(3));
        if (std::abs(torsion_triple(c).L3(0.0)) < 1e-3) continue;
        const NormalizedCurve once = normalize_at_origin(c);
        const NormalizedCurve twice = normalize_at_origin(once.curve);
        for (int i = 0; i < 3; ++i) expect_poly_near(twice.curve[i], once.curve[i], 1e-9 * std::max(1.0, once.curve.max_abs_coeff()));
        ++tested;
    }
    EXPECT_GT(tested, 30);
}

TEST(CurveProperty, EqualShiftsReparametrize) {
    Gen g(33);
    for (int t = 0; t < 30; ++t) {
        const CurveGamma c = g.curve(4);
        const int K = 1 + g.index(4);
        const cplx h0(static_cast<double>(g.index(5)) - 2.0, static_cast<double>(g.index(3)) - 1.0);
        std::vector<cplx> h(static_cast<std::size_t>(K), h0);
        const CurveGamma o = offspring_curve(c, h, K);
        for (int i = 0; i < 3; ++i) {
            const Polynomial want = taylor_shift(c[i], h0);
            // integer shifts and power-of-two K keep this exact; other K round once
            expect_poly_near(o[i], want, 4.0 * kMachineEps * std::max(1.0, want.max_abs_coeff()));
        }
    }
}

TEST(CurveProperty, OffspringTorsionDegreeDoesNotGrow) {
    Gen g(34);
    for (int t = 0; t < 30; ++t) {
        const CurveGamma c = g.curve(3 + g.index(4));
        const int K = 1 + g.index(4);
        std::vector<cplx> h;
        for (int j = 0; j < K; ++j) h.push_back(g.point(1.0));
        const CurveGamma o = offspring_curve(c, h, K);
        EXPECT_LE(torsion_triple(o).L3.degree(), 3 * c.degree_bound() - 6);
    }
}
