#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cxcurve/curve.hpp"
#include "cxcurve/decomposition.hpp"
#include "cxcurve/geometry.hpp"
#include "cxcurve/jacobian.hpp"
#include "cxcurve/operators.hpp"
#include "cxcurve/verifier.hpp"

namespace cxcurve {

struct AnalyzeOptions {
    DecompositionOptions decomposition;
    int samples = 1000;        // triples per admissible region
    int sector_samples = 500;  // points per region and L_i for the aperture check
    std::uint64_t seed = 0;
    VerifyMode mode = VerifyMode::Strict;
    bool retry = false;  // run affine_retry when some region is inadmissible
};

struct RegionAudit {
    VerificationReport verification;
    std::array<SectorCheck, 3> sector{};
    std::array<double, 3> sector_budget{};  // (deg L_i + 1) eps
    bool sector_ok = true;
};

struct AnalysisResult {
    CurveGamma curve;  // the analysed curve (after any affine retry)
    AffineMap3 map;
    TorsionTriple tt;
    DecompositionReport report;
    std::vector<RegionAudit> audits;

    bool sector_failure() const {
        for (const auto& a : audits)
            if (!a.sector_ok) return true;
        return false;
    }
    /// An admissible region whose sampled ratio reached zero.
    bool positivity_failure() const {
        for (const auto& a : audits)
            if (a.verification.admissible && !a.verification.skipped && a.verification.n_samples > 0 &&
                !(a.verification.min_ratio > 0.0))
                return true;
        return false;
    }
};

/// Seed of stream `slot` for region `id`: slot 0 drives triple sampling,
/// slots 1..3 the aperture check of L1..L3.
inline std::uint64_t region_seed(std::uint64_t master, int id, int slot) {
    return derive_seed(master, 4 * static_cast<std::uint64_t>(id) + static_cast<std::uint64_t>(slot));
}

/// Aperture of each L_i over sampled points, flagged against (deg L_i + 1) eps.
inline RegionAudit audit_sectors(const TorsionTriple& tt, const Region& region, double eps, int n, std::uint64_t master) {
    RegionAudit a;
    for (int i = 0; i < 3; ++i) {
        const Polynomial& p = tt[i];
        const int d = std::max(p.degree(), 0);
        a.sector_budget[static_cast<std::size_t>(i)] = (d + 1) * eps;
        const auto f = [&p](cplx z) { return p(z); };
        try {
            a.sector[static_cast<std::size_t>(i)] =
                sector_contained(f, region, a.sector_budget[static_cast<std::size_t>(i)], n, region_seed(master, region.id, i + 1));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::AllSamplesZero) throw;
            a.sector[static_cast<std::size_t>(i)] = SectorCheck{false, kInf, std::nullopt, n};
        }
        if (!a.sector[static_cast<std::size_t>(i)].contained) a.sector_ok = false;
    }
    return a;
}

/// classify_regions, optional affine retry, then per-region verification
/// and aperture audit. Nothing is written; callers decide what to emit.
inline AnalysisResult analyze(const CurveGamma& curve, const AnalyzeOptions& opt) {
    require(opt.samples >= 1, "samples must be at least 1");
    require(opt.sector_samples >= 1, "sector samples must be at least 1");
    AnalysisResult out{curve, AffineMap3::identity(), torsion_triple(curve), {}, {}};
    out.report = classify_regions(out.tt, opt.decomposition);
    if (opt.retry && !out.report.all_admissible()) {
        AffineRetryResult r = affine_retry(curve, out.report, opt.decomposition);
        out.curve = std::move(r.curve);
        out.map = r.map;
        out.report = std::move(r.report);
        out.tt = torsion_triple(out.curve);
    }
    out.audits.reserve(out.report.regions.size());
    for (const auto& region : out.report.regions) {
        RegionAudit a = audit_sectors(out.tt, region, out.report.epsilon_used, opt.sector_samples, opt.seed);
        a.verification = verify_region(out.curve, region, region.sig, opt.samples, region_seed(opt.seed, region.id, 0), opt.mode);
        out.audits.push_back(std::move(a));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Jacobian identity trials

struct JacobianCheckOptions {
    int trials = 100;
    std::uint64_t seed = 0;
    double box = 1.5;  // triples drawn uniformly from [-box, box]^2
    QuadratureSpec quadrature;
    double tolerance = 1e-6;  // |integral - direct| <= tolerance max(1, |direct|)
    int max_attempts_per_trial = 1000;
};

struct JacobianCheckReport {
    int trials = 0;
    int passes = 0;
    int failures = 0;        // deviation above tolerance
    int nonconvergence = 0;  // quadrature gave up
    int excluded_count = 0;  // singularity pre-check rejections
    double worst_rel_deviation = 0.0;
    Triple worst_triple{};
    int max_nodes_used = 0;

    bool all_pass() const noexcept { return passes == trials; }
};

/// Draws `trials` triples that pass the singularity pre-check and compares
/// the integral identity with the determinant.
inline JacobianCheckReport jacobian_check(const CurveGamma& curve, const JacobianCheckOptions& opt) {
    require(opt.trials >= 1, "trials must be at least 1");
    require(opt.box > 0.0, "box must be positive");
    const JacobianIntegrand ji(curve);
    const CurveDerivative dg(curve);
    Rng rng(opt.seed);
    auto point = [&] { return cplx(rng.uniform(-opt.box, opt.box), rng.uniform(-opt.box, opt.box)); };
    JacobianCheckReport rep;
    rep.trials = opt.trials;
    for (int t = 0; t < opt.trials; ++t) {
        Triple tri{};
        int attempts = 0;
        for (;;) {
            tri = {point(), point(), point()};
            if (ji.sing.clear_of(tri, ji.tt)) break;
            ++rep.excluded_count;
            if (++attempts >= opt.max_attempts_per_trial)
                throw Error(ErrorCode::SegmentHitsSingularity, "no triple in the sample box clears the singularity pre-check");
        }
        const cplx direct = jacobian_direct(dg, tri);
        try {
            const JacobianIntegralResult r = jacobian_integral_detailed(ji, tri, opt.quadrature);
            rep.max_nodes_used = std::max(rep.max_nodes_used, r.nodes_used);
            const double dev = std::abs(r.value - direct) / std::max(1.0, std::abs(direct));
            if (dev >= rep.worst_rel_deviation) {
                rep.worst_rel_deviation = dev;
                rep.worst_triple = tri;
            }
            if (dev <= opt.tolerance) ++rep.passes;
            else ++rep.failures;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NonConvergence) throw;
            ++rep.nonconvergence;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Extension endpoint

struct ExtensionPoint {
    std::string function;
    Vec3 z{};
    cplx value;
    double modulus = 0.0;
    double l1_norm = 0.0;
    int nodes = 0;
    bool within_bound = true;  // |E f(z)| <= ||f||_{L1(lambda)}
};

/// |E f(z)| against ||f||_{L1(lambda)} for each test function at n points z
/// drawn from the box [-z_box, z_box]^6 (the first point is z = 0).
inline std::vector<ExtensionPoint> extension_check(const CurveGamma& curve, const std::vector<TestFunction>& family, int n,
                                                   std::uint64_t seed, int n_quad = 16, double z_box = 3.0) {
    require(n >= 1, "number of points must be at least 1");
    Rng rng(seed);
    std::vector<Vec3> zs;
    zs.push_back(Vec3{});
    while (static_cast<int>(zs.size()) < n) {
        Vec3 z{};
        for (auto& c : z) {
            const double re = rng.uniform(-z_box, z_box);
            c = cplx(re, rng.uniform(-z_box, z_box));
        }
        zs.push_back(z);
    }
    std::vector<ExtensionPoint> out;
    for (const auto& tf : family)
        for (const auto& z : zs) {
            const ExtensionValue v = extension_detailed(curve, tf.f, tf.support_radius, z, n_quad);
            ExtensionPoint p{tf.name, z, v.value, std::abs(v.value), v.l1_norm, v.nodes, true};
            p.within_bound = p.modulus <= p.l1_norm * (1.0 + 1e-12);
            out.push_back(std::move(p));
        }
    return out;
}

}  // namespace cxcurve
