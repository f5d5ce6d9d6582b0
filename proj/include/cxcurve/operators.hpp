#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cxcurve/curve.hpp"
#include "cxcurve/errors.hpp"
#include "cxcurve/geometry.hpp"
#include "cxcurve/quadrature.hpp"

namespace cxcurve {

// ---------------------------------------------------------------------------
// Sets in C^3 = R^6

enum class SetKind { Ball, Box };

struct MeasurableSet {
    SetKind kind = SetKind::Ball;
    Vec3 center{};
    double size = 0.0;    // radius or half-width
    double volume = 0.0;  // Lebesgue measure in R^6

    static MeasurableSet ball(const Vec3& c, double r) {
        require(r >= 0.0, "radius must be nonnegative");
        const double pi = std::numbers::pi;
        return {SetKind::Ball, c, r, pi * pi * pi * std::pow(r, 6) / 6.0};
    }
    static MeasurableSet box(const Vec3& c, double s) {
        require(s >= 0.0, "half-width must be nonnegative");
        return {SetKind::Box, c, s, std::pow(2.0 * s, 6)};
    }

    bool contains(const Vec3& z) const noexcept {
        if (kind == SetKind::Ball) {
            double d2 = 0.0;
            for (std::size_t i = 0; i < 3; ++i) d2 += std::norm(z[i] - center[i]);
            return d2 <= size * size;
        }
        for (std::size_t i = 0; i < 3; ++i) {
            const cplx d = z[i] - center[i];
            if (std::abs(d.real()) > size || std::abs(d.imag()) > size) return false;
        }
        return true;
    }

    MeasurableSet translated(const Vec3& v) const {
        MeasurableSet out = *this;
        for (std::size_t i = 0; i < 3; ++i) out.center[i] += v[i];
        return out;
    }

    /// Uniform point. Balls use a Box-Muller direction and an r U^{1/6} radius.
    Vec3 sample(Rng& rng) const {
        std::array<double, 6> x{};
        if (kind == SetKind::Box) {
            for (auto& v : x) v = rng.uniform(-size, size);
        } else {
            double n2 = 0.0;
            for (std::size_t i = 0; i < 6; i += 2) {
                const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
                const double rad = std::sqrt(-2.0 * std::log(u1));
                x[i] = rad * std::cos(kTwoPi * u2);
                x[i + 1] = rad * std::sin(kTwoPi * u2);
                n2 += x[i] * x[i] + x[i + 1] * x[i + 1];
            }
            const double r = size * std::pow(rng.uniform(), 1.0 / 6.0) / std::sqrt(n2);
            for (auto& v : x) v *= r;
        }
        return {center[0] + cplx(x[0], x[1]), center[1] + cplx(x[2], x[3]), center[2] + cplx(x[4], x[5])};
    }
};

// ---------------------------------------------------------------------------
// Exponent bookkeeping

struct PQPair {
    double p = 1.0;
    double q = 1.0;
    std::optional<double> theta;

    /// (6/(3+theta), 6/(2+theta)).
    static PQPair from_theta(double theta) {
        require(theta > 0.0 && theta < 1.0, "theta must lie in (0, 1)");
        return {6.0 / (3.0 + theta), 6.0 / (2.0 + theta), theta};
    }
    /// Extension pair with dual exponent p' = q/6, so p = q/(q - 6).
    static PQPair extension_pair(double q) {
        require(q > 7.0, "extension pair needs q > 7");
        return {q / (q - 6.0), q, std::nullopt};
    }
    bool valid() const noexcept {
        if (p < 1.0 || q < 1.0) return false;
        if (theta) return std::abs(p - 6.0 / (3.0 + *theta)) <= 1e-12 && std::abs(q - 6.0 / (2.0 + *theta)) <= 1e-12;
        return true;
    }
};

struct BallSpec {
    double x = 1.0;
    int k_prime = 0;
    double nu = 0.5;
    double radius = 0.0;

    /// nu = 3/(k'+6), radius = (16 pi nu)^{-nu} x^nu.
    static BallSpec make(double x, int k_prime) {
        require(x > 0.0, "x must be positive");
        require(k_prime >= 0, "k' must be nonnegative");
        BallSpec s;
        s.x = x;
        s.k_prime = k_prime;
        s.nu = 3.0 / (k_prime + 6.0);
        s.radius = std::pow(16.0 * std::numbers::pi * s.nu, -s.nu) * std::pow(x, s.nu);
        return s;
    }
};

struct BallMeasure {
    double sigma_measure = 0.0;
    double target = 0.0;
};

/// sigma(B_x) = int_{|z|<R} |z|^{k'/3} dz = 2 pi R^{k'/3+2} / (k'/3+2).
inline BallMeasure ball_measure_check(const BallSpec& spec) {
    const double e = spec.k_prime / 3.0 + 2.0;
    return {kTwoPi * std::pow(spec.radius, e) / e, spec.x / 8.0};
}

// ---------------------------------------------------------------------------
// Convolution and pairing

using FieldFn = std::function<cplx(const Vec3&)>;

struct McEstimate {
    cplx value;
    double stderr_ = 0.0;
};

/// Monte Carlo for int_D f(z - Gamma(w)) lambda(w) dw over |w| <= disk_radius.
inline McEstimate convolve(const CurveGamma& curve, const FieldFn& f, const Vec3& z, double disk_radius, int n_mc,
                           std::uint64_t seed) {
    require(disk_radius > 0.0, "disk radius must be positive");
    require(n_mc >= 2, "n_mc must be at least 2");
    const Polynomial l3 = torsion_triple(curve).L3;
    const double area = std::numbers::pi * disk_radius * disk_radius;
    Rng rng(seed);
    cplx sum{};
    double sum2 = 0.0;
    for (int i = 0; i < n_mc; ++i) {
        const cplx w = sample_disk(0.0, disk_radius, rng);
        const double lam = std::cbrt(std::abs(l3(w)));
        cplx v{};
        if (lam != 0.0) {
            const Vec3 g = curve(w);
            v = f({z[0] - g[0], z[1] - g[1], z[2] - g[2]}) * lam;
        }
        sum += v;
        sum2 += std::norm(v);
    }
    const double n = n_mc;
    const cplx mean = sum / n;
    const double var = std::max(0.0, (sum2 / n - std::norm(mean)) * n / (n - 1.0));
    return {area * mean, area * std::sqrt(var / n)};
}

struct WeakTypeReport {
    double pairing = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double rwt_ratio = 0.0;  // pairing / (|E|^{1/2} |F|^{2/3})
    double target_form = 0.0;  // alpha^4 beta^2 / |E|
    int mc_samples = 0;
    double mc_stderr = 0.0;
    double volume_E = 0.0, volume_F = 0.0;
};

/// <T chi_E, chi_F> by joint Monte Carlo over (z, w) in F x D: the
/// integrand chi_E(z - Gamma(w)) lambda(w) scaled by |F| |D|.
inline WeakTypeReport pairing(const CurveGamma& curve, const MeasurableSet& E, const MeasurableSet& F, double disk_radius,
                              int n_mc, std::uint64_t seed) {
    if (!(E.volume > 0.0) || !(F.volume > 0.0)) throw Error(ErrorCode::ZeroVolume, "E and F need positive volume");
    require(disk_radius > 0.0, "disk radius must be positive");
    require(n_mc >= 2, "n_mc must be at least 2");
    const Polynomial l3 = torsion_triple(curve).L3;
    const double scale = F.volume * std::numbers::pi * disk_radius * disk_radius;
    Rng rng(seed);
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n_mc; ++i) {
        const Vec3 z = F.sample(rng);
        const cplx w = sample_disk(0.0, disk_radius, rng);
        const Vec3 g = curve(w);
        const Vec3 y{z[0] - g[0], z[1] - g[1], z[2] - g[2]};
        if (!E.contains(y)) continue;
        const double v = std::cbrt(std::abs(l3(w)));
        sum += v;
        sum2 += v * v;
    }
    const double n = n_mc;
    const double mean = sum / n;
    const double var = std::max(0.0, (sum2 / n - mean * mean) * n / (n - 1.0));
    WeakTypeReport r;
    r.pairing = scale * mean;
    r.mc_samples = n_mc;
    r.mc_stderr = scale * std::sqrt(var / n);
    r.volume_E = E.volume;
    r.volume_F = F.volume;
    r.alpha = r.pairing / F.volume;
    r.beta = r.pairing / E.volume;
    r.rwt_ratio = r.pairing / (std::sqrt(E.volume) * std::pow(F.volume, 2.0 / 3.0));
    r.target_form = std::pow(r.alpha, 4) * r.beta * r.beta / E.volume;
    return r;
}

// ---------------------------------------------------------------------------
// Extension operator

using PlaneFn = std::function<cplx(cplx)>;

/// z . Gamma(w) as the real pairing on R^6.
inline double real_pairing(const Vec3& z, const Vec3& g) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) s += z[i].real() * g[i].real() + z[i].imag() * g[i].imag();
    return s;
}

/// Polar tensor rule on the disk |w| <= R: Gauss-Legendre in r, trapezoid
/// (spectrally accurate for periodic integrands) in theta.
class DiskRule {
   public:
    DiskRule(const CurveGamma& curve, double R, int n) {
        require(R > 0.0, "support radius must be positive");
        require(n >= 2, "quadrature size must be at least 2");
        const GaussLegendreRule g = gauss_legendre_unit(n);
        const int nt = 2 * n;
        const Polynomial l3 = torsion_triple(curve).L3;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const double r = R * g.nodes[i];
            for (int j = 0; j < nt; ++j) {
                const cplx w = std::polar(r, kTwoPi * j / nt);
                nodes_.push_back(w);
                weights_.push_back(g.weights[i] * R * r * kTwoPi / nt);
                lambda_.push_back(std::cbrt(std::abs(l3(w))));
                gamma_.push_back(curve(w));
            }
        }
    }

    std::size_t size() const noexcept { return nodes_.size(); }

    /// Extension value and the L1(lambda) norm of f from the same nodes, so
    /// the triangle inequality holds for the discrete sums as well.
    std::pair<cplx, double> apply(const PlaneFn& f, const Vec3& z) const {
        cplx acc{};
        double norm1 = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const cplx fv = f(nodes_[i]);
            if (fv == cplx{}) continue;
            const double wl = weights_[i] * lambda_[i];
            acc += wl * fv * std::polar(1.0, real_pairing(z, gamma_[i]));
            norm1 += wl * std::abs(fv);
        }
        return {acc, norm1};
    }

    double lp_norm(const PlaneFn& f, double p) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * lambda_[i] * std::pow(std::abs(f(nodes_[i])), p);
        return std::pow(s, 1.0 / p);
    }

   private:
    std::vector<cplx> nodes_;
    std::vector<double> weights_, lambda_;
    std::vector<Vec3> gamma_;
};

struct ExtensionValue {
    cplx value;
    double l1_norm = 0.0;  // int |f| lambda on the same rule
    int nodes = 0;
};

/// E f(z) = int e^{i z.Gamma(w)} f(w) lambda(w) dw over |w| <= R, doubling
/// the rule until the value moves by at most rel_tol of the L1(lambda) norm.
/// Zeros of L3 inside the disk put |w - w0|^{1/3} cusps into lambda, which
/// stall the tensor rule near 1e-8, hence the default.
inline ExtensionValue extension_detailed(const CurveGamma& curve, const PlaneFn& f, double R, const Vec3& z, int n_quad,
                                         int max_quad = 512, double rel_tol = 1e-6) {
    require(n_quad >= 2, "n_quad must be at least 2");
    int n = n_quad;
    auto [prev, norm] = DiskRule(curve, R, n).apply(f, z);
    while (n < max_quad) {
        n *= 2;
        auto [cur, cur_norm] = DiskRule(curve, R, n).apply(f, z);
        const bool done = std::abs(cur - prev) <= rel_tol * std::max(cur_norm, 1e-300);
        prev = cur;
        norm = cur_norm;
        if (done || cur_norm == 0.0) return {prev, norm, n};
    }
    throw Error(ErrorCode::NonConvergence, "extension quadrature did not settle under node doubling");
}

inline cplx extension(const CurveGamma& curve, const PlaneFn& f, double R, const Vec3& z, int n_quad) {
    return extension_detailed(curve, f, R, z, n_quad).value;
}

// ---------------------------------------------------------------------------
// Norm-ratio scans

struct TestFunction {
    std::string name;
    PlaneFn f;
    double support_radius = 1.0;
};

/// Three compactly supported functions on the unit disk: the indicator, a
/// smooth bump and a modulated Gaussian.
inline std::vector<TestFunction> standard_test_functions() {
    return {
        {"indicator", [](cplx w) { return std::norm(w) <= 1.0 ? cplx(1.0) : cplx(0.0); }, 1.0},
        {"bump",
         [](cplx w) {
             const double t = 1.0 - std::norm(w);
             return t > 0.0 ? cplx(t * t) : cplx(0.0);
         },
         1.0},
        {"modulated_gaussian",
         [](cplx w) {
             const double n = std::norm(w);
             return n <= 1.0 ? std::exp(-2.0 * n) * std::polar(1.0, 3.0 * w.real()) : cplx(0.0);
         },
         1.0},
    };
}

/// Tensor grid over the cube [-h, h]^6 with m points per axis.
struct GridSpec {
    double half_width = 2.0;
    int points_per_axis = 4;
};

struct ScanRow {
    std::string function;
    double dilation = 1.0;
    PQPair pq;
    double norm_extension = 0.0;  // discretised L^q over the grid (sup for q = inf)
    double norm_f = 0.0;          // L^p(lambda)
    double ratio = 0.0;
};

struct ScanTable {
    std::vector<ScanRow> rows;
    // max/min ratio across dilates, per (function, pq) in first-seen order
    std::vector<std::pair<std::string, double>> flatness;
};

inline constexpr double kInfExponent = std::numeric_limits<double>::infinity();

/// For every test function and dilate f(s w) and every (p, q), the ratio
/// ||E f||_{L^q(grid)} / ||f||_{L^p(lambda)}. Nothing is asserted.
inline ScanTable norm_ratio_scan(const CurveGamma& curve, const std::vector<PQPair>& pqs,
                                 const std::vector<TestFunction>& family, const GridSpec& grid,
                                 const std::vector<double>& dilations = {1.0}, int n_quad = 24) {
    require(grid.points_per_axis >= 2, "grid needs at least two points per axis");
    const int m = grid.points_per_axis;
    const double h = grid.half_width;
    const double step = 2.0 * h / (m - 1);
    const double cell = std::pow(step, 6);
    std::vector<Vec3> pts;
    std::array<int, 6> idx{};
    const auto total = static_cast<std::size_t>(std::pow(m, 6));
    pts.reserve(total);
    for (std::size_t c = 0; c < total; ++c) {
        std::size_t r = c;
        for (auto& v : idx) {
            v = static_cast<int>(r % static_cast<std::size_t>(m));
            r /= static_cast<std::size_t>(m);
        }
        auto x = [&](int i) { return -h + step * idx[static_cast<std::size_t>(i)]; };
        pts.push_back({cplx(x(0), x(1)), cplx(x(2), x(3)), cplx(x(4), x(5))});
    }
    ScanTable table;
    for (const auto& tf : family) {
        for (const auto& pq : pqs) table.flatness.push_back({tf.name + " p=" + std::to_string(pq.p) + " q=" + std::to_string(pq.q), 0.0});
    }
    std::vector<std::vector<double>> per_key(table.flatness.size());
    for (std::size_t fi = 0; fi < family.size(); ++fi) {
        const auto& tf = family[fi];
        for (double s : dilations) {
            require(s > 0.0, "dilations must be positive");
            const PlaneFn g = [&tf, s](cplx w) { return tf.f(s * w); };
            const double R = tf.support_radius / s;
            const DiskRule rule(curve, R, n_quad);
            std::vector<double> mags;
            mags.reserve(pts.size());
            for (const auto& z : pts) mags.push_back(std::abs(rule.apply(g, z).first));
            for (std::size_t pi = 0; pi < pqs.size(); ++pi) {
                const auto& pq = pqs[pi];
                ScanRow row;
                row.function = tf.name;
                row.dilation = s;
                row.pq = pq;
                if (std::isinf(pq.q)) {
                    row.norm_extension = *std::max_element(mags.begin(), mags.end());
                } else {
                    double acc = 0.0;
                    for (double v : mags) acc += std::pow(v, pq.q);
                    row.norm_extension = std::pow(acc * cell, 1.0 / pq.q);
                }
                row.norm_f = rule.lp_norm(g, pq.p);
                row.ratio = row.norm_f > 0.0 ? row.norm_extension / row.norm_f : 0.0;
                per_key[fi * pqs.size() + pi].push_back(row.ratio);
                table.rows.push_back(std::move(row));
            }
        }
    }
    for (std::size_t k = 0; k < per_key.size(); ++k) {
        const auto& v = per_key[k];
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        table.flatness[k].second = (v.empty() || *lo <= 0.0) ? kInfExponent : *hi / *lo;
    }
    return table;
}

}  // namespace cxcurve
