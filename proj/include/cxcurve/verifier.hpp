#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cxcurve/curve.hpp"
#include "cxcurve/decomposition.hpp"
#include "cxcurve/errors.hpp"
#include "cxcurve/geometry.hpp"
#include "cxcurve/jacobian.hpp"
#include "cxcurve/quadrature.hpp"

namespace cxcurve {

struct RatioSample {
    Triple triple{};
    double jacobian_mod = 0.0;
    double bound_value = 0.0;
    double ratio = 0.0;
};

/// Evaluates |J| / (prod |L3(z_i)|^{1/3} prod |z_j - z_i|) with the
/// derivative and torsion polynomials built once.
class GeometricRatio {
   public:
    explicit GeometricRatio(const CurveGamma& curve) : dg_(curve), l3_(torsion_triple(curve).L3) {}

    RatioSample operator()(const Triple& t) const {
        if (!t.pairwise_distinct()) throw Error(ErrorCode::DegenerateTriple, "triple points must be pairwise distinct");
        double lam = 1.0;
        for (int s = 0; s < 3; ++s) {
            const double a = std::abs(l3_(t[s]));
            if (a == 0.0) throw Error(ErrorCode::DegenerateTriple, "torsion vanishes at a triple point");
            lam *= a;
        }
        RatioSample r;
        r.triple = t;
        r.jacobian_mod = std::abs(jacobian_direct(dg_, t));
        r.bound_value = std::cbrt(lam) * std::abs(t.z2 - t.z1) * std::abs(t.z3 - t.z1) * std::abs(t.z3 - t.z2);
        r.ratio = r.jacobian_mod / r.bound_value;
        return r;
    }

   private:
    CurveDerivative dg_;
    Polynomial l3_;
};

inline RatioSample geometric_ratio(const CurveGamma& curve, const Triple& t) { return GeometricRatio(curve)(t); }

enum class VerifyMode { Strict, Exploratory };

struct VerificationReport {
    int region_id = 0;
    int n_samples = 0;
    double min_ratio = 0.0, median_ratio = 0.0, max_ratio = 0.0;
    RatioSample worst_witness;
    int excluded_count = 0;
    bool admissible = true;
    bool skipped = false;      // inadmissible region in strict mode
    bool exploratory = false;  // inadmissible region sampled for information only
    std::uint64_t seed = 0;
};

/// Draws n triples uniformly from the region polygon and
/// aggregates the geometric ratio. Inadmissible regions are skipped unless
/// `mode` is Exploratory, in which case the report is marked as such.
inline VerificationReport verify_region(const CurveGamma& curve, const Region& region, const SigmaExponents& sig, int n,
                                        std::uint64_t seed, VerifyMode mode = VerifyMode::Strict) {
    require(n >= 1, "n must be at least 1");
    VerificationReport rep;
    rep.region_id = region.id;
    rep.seed = seed;
    rep.admissible = region_admissible(sig);
    if (!rep.admissible && mode == VerifyMode::Strict) {
        rep.skipped = true;
        return rep;
    }
    rep.exploratory = !rep.admissible;
    const GeometricRatio ratio(curve);
    const PolygonSampler sample(region.working_polygon);
    Rng rng(seed);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const cplx z1 = sample(rng), z2 = sample(rng), z3 = sample(rng);
        const Triple t{z1, z2, z3};
        RatioSample s;
        try {
            s = ratio(t);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateTriple) throw;
            ++rep.excluded_count;
            continue;
        }
        if (values.empty() || s.ratio < rep.worst_witness.ratio) rep.worst_witness = s;
        values.push_back(s.ratio);
    }
    rep.n_samples = static_cast<int>(values.size());
    if (values.empty()) return rep;
    std::sort(values.begin(), values.end());
    rep.min_ratio = values.front();
    rep.max_ratio = values.back();
    const std::size_t m = values.size() / 2;
    rep.median_ratio = values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
    return rep;
}

struct BoundCheck {
    double lhs = 0.0, rhs = 0.0, ratio = 0.0;
};

/// lhs = |int_{z1}^{z2} |int_{z2}^{z3} |w2 - w1| dw2| dw1|, which reduces to
/// |z2-z1||z3-z2| times the mean of |w2 - w1| over the two segments.
/// The cone kink at w1 = w2 slows Gauss-Legendre down, so nodes double
/// until 1e-12 relative agreement or 1024 nodes.
inline BoundCheck triple_integral_bound_check(const Triple& t, const QuadratureSpec& q = {}) {
    q.validate();
    if (!t.pairwise_distinct()) throw Error(ErrorCode::DegenerateTriple, "triple points must be pairwise distinct");
    const cplx e1 = t.z2 - t.z1, e2 = t.z3 - t.z2;
    auto mean_distance = [&](int n) {
        const GaussLegendreRule g = gauss_legendre_unit(n);
        double acc = 0.0;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const cplx w1 = t.z1 + g.nodes[i] * e1;
            double inner = 0.0;
            for (std::size_t j = 0; j < g.nodes.size(); ++j) inner += g.weights[j] * std::abs(t.z2 + g.nodes[j] * e2 - w1);
            acc += g.weights[i] * inner;
        }
        return acc;
    };
    int n = q.nodes_per_segment;
    double prev = mean_distance(n);
    const int cap = 1024;
    while (n < cap) {
        n *= 2;
        const double cur = mean_distance(n);
        const bool done = std::abs(cur - prev) <= 1e-12 * cur;
        prev = cur;
        if (done) break;
    }
    BoundCheck out;
    out.lhs = std::abs(e1) * std::abs(e2) * prev;
    out.rhs = std::abs(t.z3 - t.z1) * std::abs(e2) * std::abs(e1);
    out.ratio = out.lhs / out.rhs;
    return out;
}

struct ComparabilityCheck {
    double lhs = 0.0, rhs = 0.0;
};

/// lhs = |J|; rhs = the nested integral with every factor in modulus:
/// prod |L1(z_s)| int int prod |L2(w_s)|/|L1(w_s)|^2 int |L1 L3|/|L2|^2 |dy| |dw2| |dw1|.
inline ComparabilityCheck lemma21_comparability_check(const CurveGamma& curve, const Region& /*region*/, const Triple& t,
                                                      const QuadratureSpec& q = {}) {
    q.validate();
    const TorsionTriple tt = torsion_triple(curve);
    ComparabilityCheck out;
    out.lhs = std::abs(jacobian_direct(curve, t));
    if (t.z1 == t.z2 || t.z2 == t.z3) return out;
    const SingularSet sing(tt);
    if (!sing.clear_of(t, tt)) throw Error(ErrorCode::SegmentHitsSingularity, "a zero of L1 or L2 lies within the margin of an integration segment");
    const cplx e1 = t.z2 - t.z1, e2 = t.z3 - t.z2;
    auto eval = [&](int n) {
        const GaussLegendreRule g = gauss_legendre_unit(n);
        double outer = 0.0;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const cplx w1 = t.z1 + g.nodes[i] * e1;
            const double f1 = std::abs(tt.L2(w1)) / std::norm(tt.L1(w1));
            double mid = 0.0;
            for (std::size_t j = 0; j < g.nodes.size(); ++j) {
                const cplx w2 = t.z2 + g.nodes[j] * e2;
                const double f2 = std::abs(tt.L2(w2)) / std::norm(tt.L1(w2));
                const cplx seg = w2 - w1;
                double inner = 0.0;
                for (std::size_t k = 0; k < g.nodes.size(); ++k) {
                    const cplx y = w1 + g.nodes[k] * seg;
                    inner += g.weights[k] * std::abs(tt.L1(y) * tt.L3(y)) / std::norm(tt.L2(y));
                }
                mid += g.weights[j] * f2 * inner * std::abs(seg);
            }
            outer += g.weights[i] * f1 * mid;
        }
        return std::abs(tt.L1(t.z1) * tt.L1(t.z2) * tt.L1(t.z3)) * outer * std::abs(e1) * std::abs(e2);
    };
    // n^3 evaluations per pass, so the doubling stops at 128 nodes
    const int cap = std::min(q.max_nodes, 128);
    int n = std::min(q.nodes_per_segment, cap);
    double prev = eval(n);
    while (n < cap) {
        n = std::min(2 * n, cap);
        const double cur = eval(n);
        const bool done = std::abs(cur - prev) <= 1e-8 * cur;
        prev = cur;
        if (done) break;
    }
    out.rhs = prev;
    return out;
}

}  // namespace cxcurve
