#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "cxcurve/errors.hpp"
#include "cxcurve/polynomial.hpp"

namespace cxcurve {

using Vec3 = std::array<cplx, 3>;
using Mat3 = std::array<std::array<cplx, 3>, 3>;

inline constexpr double kDegenerateRelTol = 1e-10;
inline constexpr double kSingularAtOriginTol = 1e-12;

inline cplx det(const Mat3& m) noexcept {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline Mat3 identity3() noexcept {
    Mat3 m{};
    for (int i = 0; i < 3; ++i) m[i][i] = 1.0;
    return m;
}

inline Mat3 matmul(const Mat3& a, const Mat3& b) noexcept {
    Mat3 out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) out[i][j] += a[i][k] * b[k][j];
    return out;
}

inline Vec3 matvec(const Mat3& a, const Vec3& v) noexcept {
    Vec3 out{};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) out[i] += a[i][k] * v[k];
    return out;
}

/// Inverse by the adjugate; throws on an exactly singular matrix.
inline Mat3 inverse(const Mat3& m) {
    const cplx d = det(m);
    if (d == cplx{}) throw Error(ErrorCode::InvalidArgument, "singular 3x3 matrix");
    Mat3 inv{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
            inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / d;
        }
    return inv;
}

/// z -> matrix * z + offset on C^3, with the matrix determinant cached.
class AffineMap3 {
   public:
    AffineMap3() : AffineMap3(identity3(), Vec3{}) {}
    AffineMap3(const Mat3& matrix, const Vec3& offset) : m_(matrix), b_(offset), det_(cxcurve::det(matrix)) {}

    static AffineMap3 identity() { return {}; }

    const Mat3& matrix() const noexcept { return m_; }
    const Vec3& offset() const noexcept { return b_; }
    cplx determinant() const noexcept { return det_; }

    Vec3 operator()(const Vec3& v) const noexcept {
        Vec3 out = matvec(m_, v);
        for (int i = 0; i < 3; ++i) out[i] += b_[i];
        return out;
    }

    /// (this ∘ inner)(z) = this(inner(z)).
    AffineMap3 compose(const AffineMap3& inner) const {
        Vec3 off = matvec(m_, inner.b_);
        for (int i = 0; i < 3; ++i) off[i] += b_[i];
        return {matmul(m_, inner.m_), off};
    }

   private:
    Mat3 m_;
    Vec3 b_;
    cplx det_;
};

/// Gamma(z) = (P1(z), P2(z), P3(z)) with degree bound N.
class CurveGamma {
   public:
    CurveGamma() = default;
    CurveGamma(std::array<Polynomial, 3> components, int degree_bound)
        : p_(std::move(components)), n_(degree_bound) {
        require(n_ >= 1, "degree bound must be positive");
        for (const auto& c : p_) require(c.degree() <= n_, "component degree exceeds the degree bound");
    }
    /// Degree bound taken as the largest component degree (at least 1).
    explicit CurveGamma(std::array<Polynomial, 3> components) : p_(std::move(components)), n_(1) {
        for (const auto& c : p_) n_ = std::max(n_, c.degree());
    }

    const Polynomial& operator[](int i) const noexcept { return p_[static_cast<std::size_t>(i)]; }
    const std::array<Polynomial, 3>& components() const noexcept { return p_; }
    int degree_bound() const noexcept { return n_; }

    double max_abs_coeff() const noexcept {
        double m = 0.0;
        for (const auto& c : p_) m = std::max(m, c.max_abs_coeff());
        return m;
    }

    Vec3 operator()(cplx z) const noexcept { return {p_[0](z), p_[1](z), p_[2](z)}; }

    /// j-th derivative evaluated at z.
    Vec3 derivative_at(cplx z, int order) const {
        return {derivative(p_[0], order)(z), derivative(p_[1], order)(z), derivative(p_[2], order)(z)};
    }

   private:
    std::array<Polynomial, 3> p_;
    int n_ = 1;
};

inline CurveGamma moment_curve() {
    return CurveGamma({Polynomial::monomial(1), Polynomial::monomial(2), Polynomial::monomial(3)}, 3);
}

inline CurveGamma normalized_moment_curve() {
    return CurveGamma({Polynomial::monomial(1), Polynomial::monomial(2, 0.5), Polynomial::monomial(3, 1.0 / 6.0)}, 3);
}

/// L1 = P1', L2 = P1'P2'' - P1''P2', L3 = det(Gamma', Gamma'', Gamma''').
struct TorsionTriple {
    Polynomial L1;
    Polynomial L2;
    Polynomial L3;
    bool degenerate = false;  // L3 identically zero up to the relative tolerance

    const Polynomial& operator[](int i) const noexcept { return i == 0 ? L1 : (i == 1 ? L2 : L3); }

    int max_degree() const noexcept { return std::max({0, L1.degree(), L2.degree(), L3.degree()}); }
};

inline TorsionTriple torsion_triple(const CurveGamma& curve) {
    std::array<std::array<Polynomial, 3>, 3> d{};  // d[order-1][component]
    for (int i = 0; i < 3; ++i) {
        d[0][static_cast<std::size_t>(i)] = derivative(curve[i]);
        d[1][static_cast<std::size_t>(i)] = derivative(d[0][static_cast<std::size_t>(i)]);
        d[2][static_cast<std::size_t>(i)] = derivative(d[1][static_cast<std::size_t>(i)]);
    }
    TorsionTriple tt;
    tt.L1 = d[0][0];
    tt.L2 = det2({{{d[0][0], d[1][0]}, {d[0][1], d[1][1]}}});
    // Rows are components, columns are Gamma', Gamma'', Gamma'''.
    PolyMatrix3 m;
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) m[r][c] = d[c][r];
    tt.L3 = det3(m);
    const double scale = std::max(curve.max_abs_coeff(), std::numeric_limits<double>::min());
    tt.degenerate = is_negligible(tt.L3, scale, kDegenerateRelTol);
    if (tt.degenerate) tt.L3 = Polynomial{};
    return tt;
}

/// Affine arclength weight |L3(z)|^{1/3}.
inline double lambda_weight(const TorsionTriple& tt, cplx z) noexcept { return std::cbrt(std::abs(tt.L3(z))); }

inline CurveGamma affine_apply(const CurveGamma& curve, const AffineMap3& a) {
    std::array<Polynomial, 3> out;
    for (int i = 0; i < 3; ++i) {
        Polynomial acc = Polynomial::constant(a.offset()[static_cast<std::size_t>(i)]);
        for (int k = 0; k < 3; ++k) acc += a.matrix()[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] * curve[k];
        out[static_cast<std::size_t>(i)] = std::move(acc);
    }
    return CurveGamma(std::move(out), curve.degree_bound());
}

struct NormalizedCurve {
    CurveGamma curve;
    AffineMap3 map;
};

/// Moves Gamma(0) to the origin and sends Gamma^{(j)}(0) to e_j for j = 1,2,3
/// using the inverse of the derivative column matrix.
inline NormalizedCurve normalize_at_origin(const CurveGamma& curve) {
    const TorsionTriple tt = torsion_triple(curve);
    if (tt.degenerate || std::abs(tt.L3(0.0)) < kSingularAtOriginTol)
        throw Error(ErrorCode::SingularAtOrigin, "|L3(0)| below threshold; recentre the curve first");
    Mat3 cols{};
    for (int order = 1; order <= 3; ++order) {
        const Vec3 d = curve.derivative_at(0.0, order);
        for (int r = 0; r < 3; ++r) cols[static_cast<std::size_t>(r)][static_cast<std::size_t>(order - 1)] = d[static_cast<std::size_t>(r)];
    }
    const Mat3 inv = inverse(cols);
    Vec3 off = matvec(inv, curve(0.0));
    for (auto& v : off) v = -v;
    AffineMap3 map(inv, off);
    CurveGamma out = affine_apply(curve, map);

    // Derivative columns at 0 must be the standard basis.
    for (int order = 1; order <= 3; ++order) {
        const Vec3 d = out.derivative_at(0.0, order);
        for (int r = 0; r < 3; ++r) {
            const double want = (r == order - 1) ? 1.0 : 0.0;
            if (std::abs(d[static_cast<std::size_t>(r)] - want) > 1e-9)
                throw Error(ErrorCode::NonConvergence, "normalisation postcondition failed (ill-conditioned derivative matrix)");
        }
    }
    return {std::move(out), std::move(map)};
}

/// (1/K) sum_j Gamma(z + h_j), computed by exact Taylor shifts.
inline CurveGamma offspring_curve(const CurveGamma& curve, std::span<const cplx> h, int K) {
    require(K >= 1, "K must be positive");
    require(static_cast<int>(h.size()) == K, "offspring shift count must equal K");
    std::array<Polynomial, 3> out;
    for (int i = 0; i < 3; ++i) {
        Polynomial acc;
        for (const auto& hj : h) acc += taylor_shift(curve[i], hj);
        out[static_cast<std::size_t>(i)] = acc * cplx(1.0 / K);
    }
    return CurveGamma(std::move(out), curve.degree_bound());
}

}  // namespace cxcurve
