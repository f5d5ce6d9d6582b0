#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "cxcurve/curve.hpp"
#include "cxcurve/decomposition.hpp"
#include "cxcurve/errors.hpp"
#include "cxcurve/geometry.hpp"
#include "cxcurve/quadrature.hpp"

namespace cxcurve {

struct Triple {
    cplx z1, z2, z3;

    cplx operator[](int i) const noexcept { return i == 0 ? z1 : (i == 1 ? z2 : z3); }
    bool pairwise_distinct() const noexcept { return z1 != z2 && z1 != z3 && z2 != z3; }
};

enum class QuadratureScheme { GaussLegendre };

struct QuadratureSpec {
    int nodes_per_segment = 16;
    QuadratureScheme scheme = QuadratureScheme::GaussLegendre;
    int max_nodes = 1 << 16;
    double rel_tol = 1e-6;  // NonConvergence above this on node doubling

    void validate() const {
        require(nodes_per_segment >= 4, "nodes_per_segment must be at least 4");
        require(max_nodes >= nodes_per_segment, "max_nodes below nodes_per_segment");
    }
};

inline constexpr double kSegmentMargin = 1e-6;

inline Vec3 phi_sum(const CurveGamma& curve, const Triple& t) {
    Vec3 out{};
    for (int s = 0; s < 3; ++s) {
        const Vec3 g = curve(t[s]);
        for (std::size_t i = 0; i < 3; ++i) out[i] += g[i];
    }
    return out;
}

/// -Gamma(z1) + Gamma(z2) - Gamma(z3).
inline Vec3 phi_alt(const CurveGamma& curve, const Triple& t) {
    const Vec3 a = curve(t.z1), b = curve(t.z2), c = curve(t.z3);
    Vec3 out{};
    for (std::size_t i = 0; i < 3; ++i) out[i] = -a[i] + b[i] - c[i];
    return out;
}

/// First derivatives of the components, computed once for repeated Jacobians.
struct CurveDerivative {
    std::array<Polynomial, 3> d;

    explicit CurveDerivative(const CurveGamma& c) : d{derivative(c[0]), derivative(c[1]), derivative(c[2])} {}

    Vec3 operator()(cplx z) const noexcept { return {d[0](z), d[1](z), d[2](z)}; }
};

inline cplx jacobian_direct(const CurveDerivative& dg, const Triple& t) noexcept {
    Mat3 m{};
    for (int s = 0; s < 3; ++s) {
        const Vec3 col = dg(t[s]);
        for (std::size_t r = 0; r < 3; ++r) m[r][static_cast<std::size_t>(s)] = col[r];
    }
    return det(m);
}

/// det(Gamma'(z1), Gamma'(z2), Gamma'(z3)), the complex Jacobian.
inline cplx jacobian_direct(const CurveGamma& curve, const Triple& t) { return jacobian_direct(CurveDerivative(curve), t); }

namespace detail {

inline double point_segment_distance(cplx p, cplx a, cplx b) noexcept {
    const cplx e = b - a;
    const double l2 = std::norm(e);
    double s = l2 > 0.0 ? ((p - a) * std::conj(e)).real() / l2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return std::abs(p - (a + s * e));
}

inline double point_triangle_distance(cplx p, const Triple& t) noexcept {
    const double c1 = cross(t.z2 - t.z1, p - t.z1), c2 = cross(t.z3 - t.z2, p - t.z2), c3 = cross(t.z1 - t.z3, p - t.z3);
    const bool has_neg = c1 < 0 || c2 < 0 || c3 < 0, has_pos = c1 > 0 || c2 > 0 || c3 > 0;
    if (!(has_neg && has_pos) && cross(t.z2 - t.z1, t.z3 - t.z1) != 0.0) return 0.0;
    return std::min({point_segment_distance(p, t.z1, t.z2), point_segment_distance(p, t.z2, t.z3),
                     point_segment_distance(p, t.z3, t.z1)});
}

}  // namespace detail

/// Roots of L1 and L2 for the singularity pre-check.
struct SingularSet {
    std::vector<cplx> l1, l2;

    explicit SingularSet(const TorsionTriple& tt, double cluster_tol = kDefaultClusterTol) {
        if (tt.L1.degree() >= 1)
            for (const auto& r : roots(tt.L1, cluster_tol).roots) l1.push_back(r.location);
        if (tt.L2.degree() >= 1)
            for (const auto& r : roots(tt.L2, cluster_tol).roots) l2.push_back(r.location);
    }

    /// L1 divides along [z1,z2] and [z2,z3]; L2 along every [w1,w2], which
    /// sweep the triangle. Zero polynomials are singular everywhere.
    bool clear_of(const Triple& t, const TorsionTriple& tt, double margin = kSegmentMargin) const {
        if (tt.L1.is_zero() || tt.L2.is_zero()) return false;
        for (const auto& r : l1)
            if (detail::point_segment_distance(r, t.z1, t.z2) < margin || detail::point_segment_distance(r, t.z2, t.z3) < margin)
                return false;
        for (const auto& r : l2)
            if (detail::point_triangle_distance(r, t) < margin) return false;
        return true;
    }
};

/// int_a^b sum_l c[l-1] (y - rho)^{-l} dy along a segment that avoids rho.
inline cplx laurent_segment_integral(cplx rho, const std::vector<cplx>& c, cplx a, cplx b) {
    if (c.empty()) return {};
    const cplx da = a - rho, db = b - rho;
    cplx acc = c[0] * std::log(db / da);
    cplx pa = 1.0, pb = 1.0;
    for (std::size_t l = 2; l <= c.size(); ++l) {
        pa /= da;
        pb /= db;
        acc += c[l - 1] * (pa - pb) / static_cast<double>(l - 1);
    }
    return acc;
}

/// First `count` Taylor coefficients of n/d at 0 from their coefficient lists.
inline std::vector<cplx> series_divide(const Polynomial& n, const Polynomial& d, int count) {
    std::vector<cplx> h(static_cast<std::size_t>(std::max(count, 0)), 0.0);
    for (int j = 0; j < count; ++j) {
        cplx acc = n.coeff(j);
        for (int i = 1; i <= j; ++i) acc -= d.coeff(i) * h[static_cast<std::size_t>(j - i)];
        h[static_cast<std::size_t>(j)] = acc / d.coeff(0);
    }
    return h;
}

/// Closed-form line integral of the rational function N / D^2 along straight
/// segments: polynomial part plus partial fractions at the roots of D. The
/// simple-pole term integrates to the principal Log((b - rho)/(a - rho)),
/// which is exact because a segment that avoids rho subtends less than pi.
class RationalSegmentIntegral {
   public:
    RationalSegmentIntegral(const Polynomial& num, const Polynomial& den, double cluster_tol = kDefaultClusterTol) {
        require(!den.is_zero(), "denominator must be nonzero");
        const Polynomial den2 = den * den;
        poly_ = antiderivative(divmod(num, den2).first);
        if (den.degree() < 1) return;
        const RootSet rs = roots(den, cluster_tol);
        const cplx lead2 = den.leading() * den.leading();
        for (std::size_t k = 0; k < rs.roots.size(); ++k) {
            const cplx rho = rs.roots[k].location;
            const int order = 2 * rs.roots[k].multiplicity;
            // q = den^2 / (y - rho)^order built from the other roots
            Polynomial q = Polynomial::constant(lead2);
            for (std::size_t j = 0; j < rs.roots.size(); ++j) {
                if (j == k) continue;
                for (int e = 0; e < 2 * rs.roots[j].multiplicity; ++e) q = q * Polynomial({-rs.roots[j].location, 1.0});
            }
            const std::vector<cplx> h = series_divide(taylor_shift(num, rho), taylor_shift(q, rho), order);
            Pole pole;
            pole.rho = rho;
            pole.a.resize(static_cast<std::size_t>(order));
            for (int l = 1; l <= order; ++l) pole.a[static_cast<std::size_t>(l - 1)] = h[static_cast<std::size_t>(order - l)];
            poles_.push_back(std::move(pole));
        }
    }

    /// int_a^b num/den^2 dy along the segment.
    cplx operator()(cplx a, cplx b) const {
        cplx acc = poly_(b) - poly_(a);
        for (const auto& p : poles_) acc += laurent_segment_integral(p.rho, p.a, a, b);
        return acc;
    }

    /// A primitive of num/den^2 whose log branch cuts run from each pole
    /// away from `centre`. It is continuous on any convex set that contains
    /// `centre` and no pole, so differences give integrals along any path
    /// inside such a set.
    cplx primitive(cplx y, cplx centre) const {
        cplx acc = poly_(y);
        for (const auto& p : poles_) {
            const cplx dy = y - p.rho;
            cplx away = p.rho - centre;
            away /= std::abs(away);
            acc += p.a[0] * std::log(-dy / away);
            cplx py = 1.0;
            for (std::size_t l = 2; l <= p.a.size(); ++l) {
                py /= dy;
                acc -= p.a[l - 1] * py / static_cast<double>(l - 1);
            }
        }
        return acc;
    }

    struct Pole {
        cplx rho;
        std::vector<cplx> a;  // a[l-1] multiplies (y - rho)^{-l}
    };
    const std::vector<Pole>& poles() const noexcept { return poles_; }

   private:
    Polynomial poly_;
    std::vector<Pole> poles_;
};

namespace detail {

struct AdaptiveResult {
    cplx value;
    int nodes = 0;
    double error = 0.0;  // sum of |2n-point - n-point| over panels
    bool converged = true;
};

/// Value plus the magnitude of the terms summed to form it.
struct IntegrandSample {
    cplx value;
    double magnitude;
};

/// Adaptive bisection of [0,1] comparing an n-point and a 2n-point
/// Gauss-Legendre panel. Panels near a close pole of f shrink geometrically
/// toward it. A panel is accepted when the difference is below
/// abs_tol * width or at the rounding level of the sample magnitudes.
template <class F>
AdaptiveResult adaptive_segment(const F& f, int n, int node_budget, double abs_tol) {
    const GaussLegendreRule lo = gauss_legendre_unit(n), hi = gauss_legendre_unit(2 * n);
    struct PanelSum {
        cplx value;
        double magnitude;
    };
    auto panel = [&](const GaussLegendreRule& g, double a, double b) {
        PanelSum p{cplx{}, 0.0};
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const IntegrandSample v = f(a + (b - a) * g.nodes[i]);
            p.value += g.weights[i] * v.value;
            p.magnitude += g.weights[i] * v.magnitude;
        }
        p.value *= (b - a);
        p.magnitude *= (b - a);
        return p;
    };
    AdaptiveResult out;
    struct Span {
        double a, b;
    };
    std::vector<Span> stack{{0.0, 1.0}};
    while (!stack.empty()) {
        const Span p = stack.back();
        stack.pop_back();
        const PanelSum c = panel(lo, p.a, p.b), f2 = panel(hi, p.a, p.b);
        out.nodes += 3 * n;
        const double width = p.b - p.a, diff = std::abs(f2.value - c.value);
        if (diff <= abs_tol * width || diff <= 64 * 2.2e-16 * f2.magnitude || width < 1e-14) {
            out.value += f2.value;
            out.error += diff;
            continue;
        }
        if (out.nodes >= node_budget) {
            out.value += f2.value;
            out.error += diff;
            out.converged = false;
            continue;
        }
        const double m = 0.5 * (p.a + p.b);
        stack.push_back({m, p.b});
        stack.push_back({p.a, m});
    }
    return out;
}

/// Pure Gauss-Legendre on all three levels (n^3 nodes); an independent
/// cross-check of the separated evaluation.
inline cplx jacobian_integral_gl(const TorsionTriple& tt, const Triple& t, const GaussLegendreRule& g) {
    const cplx e1 = t.z2 - t.z1, e2 = t.z3 - t.z2;
    cplx outer{};
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const cplx w1 = t.z1 + g.nodes[i] * e1;
        const cplx l1a = tt.L1(w1);
        cplx mid{};
        for (std::size_t j = 0; j < g.nodes.size(); ++j) {
            const cplx w2 = t.z2 + g.nodes[j] * e2;
            const cplx l1b = tt.L1(w2);
            const cplx seg = w2 - w1;
            cplx in{};
            for (std::size_t k = 0; k < g.nodes.size(); ++k) {
                const cplx y = w1 + g.nodes[k] * seg;
                const cplx l2 = tt.L2(y);
                in += g.weights[k] * tt.L1(y) * tt.L3(y) / (l2 * l2);
            }
            mid += g.weights[j] * tt.L2(w2) / (l1b * l1b) * in * seg;
        }
        outer += g.weights[i] * tt.L2(w1) / (l1a * l1a) * mid;
    }
    return tt.L1(t.z1) * tt.L1(t.z2) * tt.L1(t.z3) * outer * e1 * e2;
}

}  // namespace detail

struct JacobianIntegralResult {
    cplx value;
    int nodes_used = 0;
    double last_rel_change = 0.0;  // estimated relative error of the quadrature
};

/// Everything the identity needs that depends on the curve only.
struct JacobianIntegrand {
    TorsionTriple tt;
    SingularSet sing;
    RationalSegmentIntegral inner;  // L1 L3 / L2^2
    RationalSegmentIntegral outer;  // L2 / L1^2
    Polynomial inner_num, inner_den2;

    explicit JacobianIntegrand(const CurveGamma& curve) : JacobianIntegrand(torsion_triple(curve)) {}
    explicit JacobianIntegrand(const TorsionTriple& t)
        : tt(t),
          sing(t),
          inner(t.L1 * t.L3, t.L2.is_zero() ? Polynomial::constant(1.0) : t.L2),
          outer(t.L2, t.L1.is_zero() ? Polynomial::constant(1.0) : t.L1),
          inner_num(t.L1 * t.L3),
          inner_den2(t.L2 * t.L2) {}
};

struct SingularPart {
    cplx rho;
    std::vector<cplx> b;  // b[s-1] multiplies (w - rho)^{-s}
};

namespace detail {

/// Singular parts of g F at zeros of L1 close to the edge [from, to], where
/// g = L2/L1^2 and F is the primitive of L1 L3/L2^2 used on the triangle.
/// F is expanded at rho by continuing it from the nearest edge point along
/// a segment inside the disc around rho that is free of L2 zeros.
inline std::vector<SingularPart> edge_singular_parts(const JacobianIntegrand& ji, cplx from, cplx to, cplx centre) {
    std::vector<SingularPart> out;
    const cplx e = to - from;
    for (const auto& pole : ji.outer.poles()) {
        const cplx rho = pole.rho;
        double free_radius = kInf;
        for (const auto& r : ji.sing.l2) free_radius = std::min(free_radius, std::abs(r - rho));
        const double s = std::clamp(((rho - from) * std::conj(e)).real() / std::norm(e), 0.0, 1.0);
        const cplx p = from + s * e;
        const double d = std::abs(rho - p);
        if (!(d < 0.5 * free_radius) || d > 0.5 * std::abs(e)) continue;
        const int order = static_cast<int>(pole.a.size());
        // Taylor coefficients f_j of F at rho for j < order
        std::vector<cplx> f(static_cast<std::size_t>(order), 0.0);
        f[0] = ji.inner.primitive(p, centre) + ji.inner(p, rho);
        const std::vector<cplx> dF =
            series_divide(taylor_shift(ji.inner_num, rho), taylor_shift(ji.inner_den2, rho), order - 1);
        for (int j = 1; j < order; ++j) f[static_cast<std::size_t>(j)] = dF[static_cast<std::size_t>(j - 1)] / static_cast<double>(j);
        SingularPart part{rho, std::vector<cplx>(static_cast<std::size_t>(order), 0.0)};
        for (int sidx = 1; sidx <= order; ++sidx)
            for (int l = sidx; l <= order; ++l)
                part.b[static_cast<std::size_t>(sidx - 1)] += pole.a[static_cast<std::size_t>(l - 1)] * f[static_cast<std::size_t>(l - sidx)];
        out.push_back(std::move(part));
    }
    return out;
}

}  // namespace detail

/// With g = L2/L1^2 and F a primitive of L1 L3/L2^2 that is continuous on the
/// triangle, the nested integral separates:
///   int int g(w1) g(w2) (F(w2) - F(w1)) = A1 B2 - B1 A2,
/// A_k = int g and B_k = int g F over the two edges. A_k are exact; B_k use
/// adaptive Gauss-Legendre panels of `nodes_per_segment` points, with at most
/// `max_nodes` evaluations per edge. Fails if the panels run out before the
/// estimated relative error reaches `rel_tol`.
inline JacobianIntegralResult jacobian_integral_detailed(const JacobianIntegrand& ji, const Triple& t,
                                                         const QuadratureSpec& q = {}) {
    q.validate();
    if (t.z2 == t.z3 || t.z1 == t.z2) return {cplx{}, 0, 0.0};
    if (!ji.sing.clear_of(t, ji.tt))
        throw Error(ErrorCode::SegmentHitsSingularity, "a zero of L1 or L2 lies within the margin of an integration segment");
    const cplx centre = (t.z1 + t.z2 + t.z3) / 3.0;
    const cplx a1 = ji.outer(t.z1, t.z2), a2 = ji.outer(t.z2, t.z3);
    auto edge = [&](cplx from, cplx to, double tol) {
        const std::vector<SingularPart> parts = detail::edge_singular_parts(ji, from, to, centre);
        const cplx e = to - from;
        auto f = [&](double s) {
            const cplx w = from + s * e;
            const cplx l1 = ji.tt.L1(w);
            cplx v = ji.tt.L2(w) / (l1 * l1) * ji.inner.primitive(w, centre);
            double mag = std::abs(v);
            for (const auto& p : parts) {
                const cplx inv = 1.0 / (w - p.rho);
                cplx pw = inv;
                for (const auto& c : p.b) {
                    const cplx term = c * pw;
                    v -= term;
                    mag += std::abs(term);
                    pw *= inv;
                }
            }
            return detail::IntegrandSample{v, mag};
        };
        auto r = detail::adaptive_segment(f, q.nodes_per_segment, q.max_nodes, tol);
        r.value *= e;
        for (const auto& p : parts) r.value += laurent_segment_integral(p.rho, p.b, from, to);
        return r;
    };
    // coarse pass fixes the absolute scale for the adaptive tolerance
    const auto c1 = edge(t.z1, t.z2, kInf), c2 = edge(t.z2, t.z3, kInf);
    const double scale = std::max(std::abs(a1 * c2.value), std::abs(c1.value * a2)) + 1e-300;
    const double tol = 1e-13 * scale;
    const auto b1 = edge(t.z1, t.z2, tol / (std::abs(a2) * std::abs(t.z2 - t.z1) + 1e-300));
    const auto b2 = edge(t.z2, t.z3, tol / (std::abs(a1) * std::abs(t.z3 - t.z2) + 1e-300));
    const cplx value = ji.tt.L1(t.z1) * ji.tt.L1(t.z2) * ji.tt.L1(t.z3) * (a1 * b2.value - b1.value * a2);
    const double err = std::abs(ji.tt.L1(t.z1) * ji.tt.L1(t.z2) * ji.tt.L1(t.z3)) *
                       (std::abs(a1) * b2.error + b1.error * std::abs(a2));
    JacobianIntegralResult out{value, b1.nodes + b2.nodes, err / std::max(std::abs(value), 1e-300)};
    if ((!b1.converged || !b2.converged) && out.last_rel_change > q.rel_tol)
        throw Error(ErrorCode::NonConvergence, "edge quadrature ran out of nodes before settling");
    return out;
}

inline cplx jacobian_integral(const CurveGamma& curve, const Triple& t, const QuadratureSpec& q = {}) {
    return jacobian_integral_detailed(JacobianIntegrand(curve), t, q).value;
}

// ---------------------------------------------------------------------------
// Sector containment

struct SectorCheck {
    bool contained = false;
    double measured_aperture = 0.0;
    std::optional<cplx> witness;
    int zero_samples = 0;
};

/// Samples the polygon and measures the smallest arc holding every arg f(z).
inline SectorCheck sector_contained(const std::function<cplx(cplx)>& f, const ConvexPolygon& poly, double aperture_budget,
                                    int n_samples, std::uint64_t seed) {
    require(n_samples >= 1, "n_samples must be positive");
    const PolygonSampler sample(poly);
    Rng rng(seed);
    std::vector<double> args;
    std::vector<cplx> pts;
    SectorCheck out;
    for (int i = 0; i < n_samples; ++i) {
        const cplx z = sample(rng);
        const cplx v = f(z);
        if (v == cplx{}) {
            ++out.zero_samples;
            continue;
        }
        args.push_back(std::arg(v));
        pts.push_back(z);
    }
    if (args.empty()) throw Error(ErrorCode::AllSamplesZero, "f vanished at every sample");
    const ArcCover arc = minimal_arc_cover(args);
    out.measured_aperture = arc.aperture;
    out.contained = arc.aperture <= aperture_budget;
    if (!out.contained) {
        // the sample sitting at the far end of the arc
        const double end = wrap_2pi(arc.start + arc.aperture);
        double best = kInf;
        for (std::size_t i = 0; i < args.size(); ++i) {
            const double dd = std::abs(wrap_2pi(args[i]) - end);
            if (dd < best) {
                best = dd;
                out.witness = pts[i];
            }
        }
    }
    return out;
}

inline SectorCheck sector_contained(const std::function<cplx(cplx)>& f, const Region& region, double aperture_budget,
                                    int n_samples, std::uint64_t seed) {
    return sector_contained(f, region.working_polygon, aperture_budget, n_samples, seed);
}

}  // namespace cxcurve
