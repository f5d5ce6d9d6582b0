#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <cxcurve/curve.hpp>
#include <cxcurve/operators.hpp>

#include "generators.hpp"

using namespace cxcurve;
using cxtest::Gen;

namespace {

constexpr double kPi = std::numbers::pi;

CurveGamma make(Polynomial a, Polynomial b, Polynomial c) { return CurveGamma({std::move(a), std::move(b), std::move(c)}); }

Polynomial Z(int k, cplx v = 1.0) { return Polynomial::monomial(k, v); }

MeasurableSet unit_ball() { return MeasurableSet::ball(Vec3{}, 1.0); }

}  // namespace

// Frozen values below come from tests/oracles/compute_oracles.py (mpmath).

TEST(MeasurableSet, Volumes) {
    EXPECT_NEAR(MeasurableSet::ball(Vec3{}, 1.0).volume, kPi * kPi * kPi / 6.0, 1e-13);
    EXPECT_NEAR(MeasurableSet::ball(Vec3{}, 2.0).volume, 64.0 * kPi * kPi * kPi / 6.0, 1e-11);
    EXPECT_EQ(MeasurableSet::box(Vec3{}, 0.5).volume, 1.0);
    EXPECT_THROW(MeasurableSet::ball(Vec3{}, -1.0), Error);
}

TEST(MeasurableSet, SamplesInside) {
    Rng r(1);
    const Vec3 c{cplx(1.0, 2.0), 0.0, cplx(-1.0, 0.0)};
    for (const auto& s : {MeasurableSet::ball(c, 0.7), MeasurableSet::box(c, 0.7)})
        for (int i = 0; i < 2000; ++i) EXPECT_TRUE(s.contains(s.sample(r)));
}

TEST(MeasurableSet, BallSamplingUniformRadius) {
    // P(|x - c| <= r/2) = 2^{-6} for a uniform point of a 6-ball
    Rng r(2);
    const auto b = unit_ball();
    int inner = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const Vec3 z = b.sample(r);
        double d2 = 0.0;
        for (const auto& v : z) d2 += std::norm(v);
        if (d2 <= 0.25) ++inner;
    }
    EXPECT_NEAR(static_cast<double>(inner) / n, 1.0 / 64.0, 1.5e-3);
}

TEST(PQPair, FromTheta) {
    const auto pq = PQPair::from_theta(0.5);
    EXPECT_DOUBLE_EQ(pq.p, 6.0 / 3.5);
    EXPECT_DOUBLE_EQ(pq.q, 6.0 / 2.5);
    EXPECT_TRUE(pq.valid());
    EXPECT_THROW(PQPair::from_theta(0.0), Error);
    EXPECT_THROW(PQPair::from_theta(1.0), Error);
}

TEST(PQPair, ExtensionPair) {
    const auto pq = PQPair::extension_pair(12.0);
    EXPECT_DOUBLE_EQ(pq.p, 2.0);
    EXPECT_THROW(PQPair::extension_pair(7.0), Error);
}

TEST(BallSpec, Examples) {
    const auto a = BallSpec::make(1.0, 0);
    EXPECT_NEAR(a.radius, 0.199471140200716339, 1e-15);
    EXPECT_NEAR(ball_measure_check(a).sigma_measure, 0.125, 1e-15);
    const auto b = BallSpec::make(8.0, 3);
    EXPECT_NEAR(b.radius, 0.781592641796772030, 1e-15);
    EXPECT_NEAR(ball_measure_check(b).sigma_measure, 1.0, 1e-14);
}

TEST(BallSpec, MeasureIsXOverEight) {
    for (int k = 0; k <= 6; ++k)
        for (double x : {0.25, 1.0, 8.0}) {
            const auto m = ball_measure_check(BallSpec::make(x, k));
            EXPECT_EQ(m.target, x / 8.0);
            EXPECT_LE(std::abs(m.sigma_measure - m.target) / m.target, 1e-12) << "k'=" << k << " x=" << x;
        }
}

TEST(BallSpec, RejectsBadInput) {
    EXPECT_THROW(BallSpec::make(0.0, 1), Error);
    EXPECT_THROW(BallSpec::make(1.0, -1), Error);
}

TEST(Convolve, ConstantFunctionOnMomentCurve) {
    const auto r = convolve(moment_curve(), [](const Vec3&) { return cplx(1.0); }, Vec3{}, 1.0, 1000, 5);
    EXPECT_NEAR(r.value.real(), std::cbrt(12.0) * kPi, 3.0 * r.stderr_ + 1e-12);
    EXPECT_NEAR(r.value.imag(), 0.0, 1e-15);
}

TEST(Convolve, ZeroFunction) {
    const auto r = convolve(make(Z(1), Z(2), Z(4)), [](const Vec3&) { return cplx(0.0); }, Vec3{}, 1.0, 100, 5);
    EXPECT_EQ(r.value, cplx(0.0));
    EXPECT_EQ(r.stderr_, 0.0);
}

TEST(Convolve, WithinStderrOfExact) {
    // f = 1 on (z, z^2, z^4): int_{|w|<=1} |48 w|^{1/3} dw = 2 pi 48^{1/3} / (7/3)
    const auto r = convolve(make(Z(1), Z(2), Z(4)), [](const Vec3&) { return cplx(1.0); }, Vec3{}, 1.0, 20000, 6);
    const double exact = kTwoPi * std::cbrt(48.0) * 3.0 / 7.0;
    EXPECT_NEAR(r.value.real(), exact, 4.0 * r.stderr_);
}

TEST(Pairing, Identities) {
    const auto E = unit_ball(), F = MeasurableSet::ball(Vec3{}, 2.0);
    const auto w = pairing(moment_curve(), E, F, 1.0, 20000, 8);
    EXPECT_GT(w.pairing, 0.0);
    EXPECT_DOUBLE_EQ(w.alpha * F.volume, w.pairing);
    EXPECT_DOUBLE_EQ(w.beta * E.volume, w.pairing);
    EXPECT_EQ(w.mc_samples, 20000);
}

TEST(Pairing, StderrHalvesPerFourTimesSamples) {
    const auto E = unit_ball();
    const auto a = pairing(moment_curve(), E, E, 1.0, 10000, 9);
    const auto b = pairing(moment_curve(), E, E, 1.0, 40000, 9);
    const double f = a.mc_stderr / b.mc_stderr;
    EXPECT_GT(f, 1.0);
    EXPECT_LT(f, 4.0);
}

TEST(Pairing, TranslationInvariant) {
    const auto E = unit_ball(), F = unit_ball();
    const Vec3 v{cplx(0.3, -1.0), cplx(2.0, 0.5), cplx(-0.7, 0.1)};
    const auto a = pairing(moment_curve(), E, F, 1.0, 20000, 10);
    const auto b = pairing(moment_curve(), E.translated(v), F.translated(v), 1.0, 20000, 10);
    EXPECT_NEAR(a.pairing, b.pairing, 3.0 * std::hypot(a.mc_stderr, b.mc_stderr));
}

TEST(Pairing, DisjointSetsGiveZero) {
    const Vec3 far{cplx(100.0, 0.0), 0.0, 0.0};
    const auto w = pairing(moment_curve(), unit_ball(), MeasurableSet::ball(far, 1.0), 1.0, 5000, 11);
    EXPECT_EQ(w.pairing, 0.0);
}

TEST(Pairing, ZeroVolume) {
    try {
        pairing(moment_curve(), MeasurableSet::ball(Vec3{}, 0.0), unit_ball(), 1.0, 100, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroVolume);
    }
}

TEST(Pairing, Deterministic) {
    const auto a = pairing(moment_curve(), unit_ball(), unit_ball(), 1.0, 3000, 12);
    const auto b = pairing(moment_curve(), unit_ball(), unit_ball(), 1.0, 3000, 12);
    EXPECT_EQ(a.pairing, b.pairing);
    EXPECT_EQ(a.mc_stderr, b.mc_stderr);
}

TEST(Extension, IndicatorAtOrigin) {
    const auto fam = standard_test_functions();
    const auto v = extension_detailed(moment_curve(), fam[0].f, 1.0, Vec3{}, 16);
    EXPECT_NEAR(std::abs(v.value - cplx(std::cbrt(12.0) * kPi)), 0.0, 1e-9);
    EXPECT_NEAR(v.l1_norm, std::cbrt(12.0) * kPi, 1e-9);
}

TEST(Extension, ZeroFunction) {
    EXPECT_EQ(extension(moment_curve(), [](cplx) { return cplx(0.0); }, 1.0, Vec3{cplx(1.0, 1.0), 0.0, 2.0}, 16), cplx(0.0));
}

TEST(ExtensionProperty, BoundedByL1Norm) {
    Gen g(51);
    const auto fam = standard_test_functions();
    for (int c = 0; c < 2; ++c) {
        const CurveGamma curve = g.curve(4);
        for (const auto& tf : fam)
            for (int i = 0; i < 5; ++i) {
                Vec3 z{};
                for (auto& v : z) v = cplx(g.real(-3.0, 3.0), g.real(-3.0, 3.0));
                const auto e = extension_detailed(curve, tf.f, tf.support_radius, z, 16);
                EXPECT_LE(std::abs(e.value), e.l1_norm * (1.0 + 1e-12)) << tf.name;
            }
    }
}

TEST(Scan, ShapeAndSupBound) {
    GridSpec grid;
    grid.points_per_axis = 3;
    const std::vector<PQPair> pqs{PQPair::from_theta(0.5), PQPair{1.0, kInfExponent, std::nullopt}};
    const auto fam = standard_test_functions();
    const auto t = norm_ratio_scan(moment_curve(), pqs, fam, grid, {1.0, 2.0}, 16);
    EXPECT_EQ(t.rows.size(), fam.size() * 2 * pqs.size());
    EXPECT_EQ(t.flatness.size(), fam.size() * pqs.size());
    for (const auto& r : t.rows) {
        EXPECT_TRUE(std::isfinite(r.ratio));
        EXPECT_GT(r.norm_f, 0.0);
        if (std::isinf(r.pq.q)) {
            // sup |E f| <= ||f||_{L1(lambda)}
            EXPECT_LE(r.ratio, 1.0 + 1e-9) << r.function;
        }
    }
}
