#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cxcurve/curve.hpp"
#include "cxcurve/errors.hpp"
#include "cxcurve/geometry.hpp"
#include "cxcurve/polynomial.hpp"

namespace cxcurve {

inline constexpr double kThickeningB = 1.1;
inline constexpr double kMaxConvexAperture = std::numbers::pi / 8.0;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Sigma exponents

enum class RegionType { T00, T01, T10, T11 };

constexpr std::string_view to_string(RegionType t) noexcept {
    switch (t) {
        case RegionType::T00: return "T00";
        case RegionType::T01: return "T01";
        case RegionType::T10: return "T10";
        case RegionType::T11: return "T11";
    }
    return "?";
}

/// The four-row exponent table. `k` belongs to L3, `k_sub` to L1 (k0 or k1)
/// and `k_mid` to L2 (k00, k01, k10 or k11).
constexpr std::array<int, 3> sigma_table(RegionType t, int k, int k_sub, int k_mid) noexcept {
    switch (t) {
        case RegionType::T00: return {k_sub, k_mid - 2 * k_sub, k + k_sub - 2 * k_mid};
        case RegionType::T01: return {0, k_mid, -2 * k_mid};
        case RegionType::T10: return {k_sub, k_mid - 2 * k_sub, k_sub - 2 * k_mid};
        case RegionType::T11: return {0, k_mid, -2 * k_mid};
    }
    return {0, 0, 0};
}

struct SigmaExponents {
    RegionType region_type = RegionType::T11;
    int k = 0;
    int k_sub = 0;
    int k_mid = 0;
    std::array<int, 3> sigma{};

    static SigmaExponents make(RegionType t, int k, int k_sub, int k_mid) {
        require(k >= 0 && k_sub >= 0 && k_mid >= 0, "exponents must be nonnegative");
        return {t, k, k_sub, k_mid, sigma_table(t, k, k_sub, k_mid)};
    }
    bool table_consistent() const noexcept { return sigma == sigma_table(region_type, k, k_sub, k_mid); }
};

/// sigma3 != -1 and sigma2 + sigma3/2 outside [-2, 0). Doubled to stay in
/// integers: 2*sigma2 + sigma3 < -4 or >= 0.
constexpr bool admissible(const std::array<int, 3>& s) noexcept {
    const int twice = 2 * s[1] + s[2];
    return s[2] != -1 && (twice < -4 || twice >= 0);
}
constexpr bool admissible(const SigmaExponents& sig) noexcept { return admissible(sig.sigma); }

/// Extra exponent exclusions on T10 / T00 regions. The T10 rule as printed,
/// k10 != (-1 - k1)/2, can never bind for nonnegative exponents; the T00 rule
/// is the same condition as sigma3 != -1.
constexpr bool passes_exclusions(const SigmaExponents& sig) noexcept {
    if (sig.region_type == RegionType::T10 && 2 * sig.k_mid == -1 - sig.k_sub) return false;
    if (sig.region_type == RegionType::T00 && 2 * sig.k_mid == sig.k + sig.k_sub + 1) return false;
    return true;
}

inline bool region_admissible(const SigmaExponents& sig) noexcept { return admissible(sig) && passes_exclusions(sig); }

// ---------------------------------------------------------------------------
// Comparability models: |Q(z)| ~ c |z - b|^k with a constant computed from
// the cell geometry.

struct ComparabilityModel {
    enum class Kind { Constant, D1, Gap };
    Kind kind = Kind::Constant;
    cplx b{};
    int k = 0;
    double c = 0.0;
    // D1: roots counted into k (near) and those folded into c (far).
    std::vector<Root> near, far;
    // Gap: Taylor coefficient moduli of Q(z + b).
    std::vector<double> coeff_mag;

    /// Rigorous C* >= 1 with |Q(z)|/(c|z-b|^k) in [1/C*, C*] on the polygon.
    double bound(const ConvexPolygon& p) const {
        if (p.empty()) return 1.0;
        switch (kind) {
            case Kind::Constant: return 1.0;
            case Kind::D1: {
                double lo = 1.0, hi = 1.0;
                const double dmin = p.distance_from(b);
                for (const auto& r : near) {
                    const double d = std::abs(r.location - b);
                    if (d == 0.0) continue;
                    // z lies in the Voronoi cell of b, so |z - eta| >= |z - b|.
                    if (dmin <= 0.0) return kInf;
                    hi *= std::pow(1.0 + d / dmin, r.multiplicity);
                }
                for (const auto& r : far) {
                    const double d = std::abs(r.location - b);
                    lo *= std::pow(p.distance_from(r.location) / d, r.multiplicity);
                    hi *= std::pow(p.max_distance_from(r.location) / d, r.multiplicity);
                }
                if (lo <= 0.0) return kInf;
                return std::max(hi, 1.0 / lo);
            }
            case Kind::Gap: {
                const double rmin = p.distance_from(b), rmax = p.max_distance_from(b);
                const double cj = coeff_mag[static_cast<std::size_t>(k)];
                auto tail = [&](double r) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < coeff_mag.size(); ++i) {
                        if (static_cast<int>(i) == k || coeff_mag[i] == 0.0) continue;
                        const int e = static_cast<int>(i) - k;
                        if (e < 0 && r == 0.0) return kInf;
                        s += coeff_mag[i] * std::pow(r, e);
                    }
                    return s / cj;
                };
                // each r^e is convex in log r, so the sum peaks at an endpoint
                const double s = std::max(tail(rmin), tail(rmax));
                if (!(s < 1.0)) return kInf;
                return std::max(1.0 + s, 1.0 / (1.0 - s));
            }
        }
        return kInf;
    }
};

struct Comparability {
    cplx b{};
    int k = 0;
    double c = 0.0;
    double C = 1.0;
};

// ---------------------------------------------------------------------------
// Cells and regions

/// A convex piece of the plane. `shape` is truncated to the working square;
/// `unbounded` records whether the untruncated piece is infinite. The sector
/// fields describe the innermost annular sector {apex + r e^{i t}} the piece
/// was cut from.
struct Cell {
    ConvexPolygon shape;
    bool unbounded = false;
    bool has_sector = false;
    cplx apex{};
    double theta0 = 0.0, theta1 = kTwoPi;
    double r_lo = 0.0, r_hi = kInf;
    int voronoi = -1;
};

struct Region {
    int id = 0;
    cplx center_b{};
    double theta0 = 0.0, theta1 = kTwoPi;
    double r_lo = 0.0, r_hi = kInf;
    bool unbounded = false;
    ConvexPolygon polygon;          // empty when unbounded
    ConvexPolygon working_polygon;  // truncated to the working square
    int parent_voronoi = -1;
    SigmaExponents sig;
    std::array<Comparability, 3> comparability{};  // L1, L2, L3
    std::array<ComparabilityModel, 3> models{};
    std::array<double, 3> aperture_bound{};  // rigorous argument spread of each L_i
    bool sector_contained = true;

    bool contains(cplx z, double tol) const { return working_polygon.contains(z, tol); }
};

struct DecompositionOptions {
    double eps = 0.0;  // 0: choose from the torsion degrees
    double B = kThickeningB;
    double cluster_tol = kDefaultClusterTol;
    double working_radius = 0.0;  // 0: 10x the largest root modulus, at least 10
    std::size_t region_budget = 0;  // 0: derived from degrees and eps
    int max_refine_depth = 24;
};

struct DecompositionReport {
    std::vector<Region> regions;
    double epsilon_used = 0.0;
    double thickening_B = kThickeningB;
    double cluster_tol = kDefaultClusterTol;
    double working_radius = 0.0;
    std::size_t region_budget = 0;
    std::vector<std::string> excluded_exponents_log;

    bool all_admissible() const {
        return std::all_of(regions.begin(), regions.end(), [](const Region& r) { return region_admissible(r.sig); });
    }
    bool within_budget() const { return regions.size() <= region_budget; }
};

// ---------------------------------------------------------------------------
// Epsilon

/// Largest 2pi/n not exceeding pi/(14(d+1)).
inline double default_epsilon(int d) {
    const int n = static_cast<int>(std::ceil(28.0 * (std::max(d, 0) + 1)));
    return kTwoPi / n;
}

inline int sector_count(double eps) {
    require(eps > 0.0, "eps must be positive");
    const double n = kTwoPi / eps;
    const double r = std::round(n);
    if (r < 1.0 || std::abs(n - r) > 1e-9 * r) throw Error(ErrorCode::EpsNotDivisor, "2pi/eps is not an integer");
    return static_cast<int>(r);
}

// ---------------------------------------------------------------------------
// Convexification

/// Convex polygon containing the annular sector {theta0 <= t <= theta1,
/// r_lo <= r <= r_hi} around `apex`, every point of which has radius in
/// [r_lo/B, B r_hi]. Inner vertices sit at r_lo/(B cos(a/2)) so the inner
/// chord stays at r_lo/B; outer vertices at B r_hi lie beyond the tangent
/// line as long as B cos(a/2) >= 1. r_lo = 0 yields a triangle. An infinite
/// r_hi yields an empty polygon; use `far` to get a truncated version.
inline ConvexPolygon convexify(cplx apex, double theta0, double theta1, double r_lo, double r_hi,
                               double B = kThickeningB, double far = kInf) {
    const double a = theta1 - theta0;
    require(a > 0.0, "sector aperture must be positive");
    if (a > kMaxConvexAperture * (1.0 + 1e-12)) throw Error(ErrorCode::ApertureTooWide, "sector aperture exceeds pi/8");
    require(B * std::cos(0.5 * a) >= 1.0, "thickening factor too small for the aperture");
    double outer = B * r_hi;
    if (!std::isfinite(outer)) {
        if (!std::isfinite(far)) return {};
        outer = far;
    }
    const cplx u0 = std::polar(1.0, theta0), u1 = std::polar(1.0, theta1);
    if (r_lo <= 0.0) return ConvexPolygon({apex, apex + outer * u0, apex + outer * u1});
    const double inner = r_lo / (B * std::cos(0.5 * a));
    if (inner >= outer) return {};
    return ConvexPolygon({apex + inner * u0, apex + outer * u0, apex + outer * u1, apex + inner * u1});
}

namespace detail {

struct Frame {
    ConvexPolygon square;
    double half_width = 0.0;
    double B = kThickeningB;
    double eps = 0.0;
    int n_sectors = 0;
    double cluster_tol = kDefaultClusterTol;

    double far_from(cplx apex) const { return 3.0 * (half_width + std::abs(apex)) + 1.0; }
};

/// Sector indices m (sector [m eps, (m+1) eps]) meeting an arc.
inline std::vector<int> sectors_meeting(const ArcCover& arc, const Frame& f) {
    std::vector<int> out;
    if (arc.aperture >= kTwoPi - 1e-12) {
        for (int m = 0; m < f.n_sectors; ++m) out.push_back(m);
        return out;
    }
    const double slack = 1e-9;
    const int first = static_cast<int>(std::floor((arc.start - slack) / f.eps));
    const int last = static_cast<int>(std::floor((arc.start + arc.aperture + slack) / f.eps));
    for (int m = first; m <= last && static_cast<int>(out.size()) < f.n_sectors; ++m)
        out.push_back(((m % f.n_sectors) + f.n_sectors) % f.n_sectors);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline Cell sector_cell(const Cell& parent, cplx apex, int m, double r_lo, double r_hi, const Frame& f,
                        const ConvexPolygon& clip) {
    Cell c;
    c.has_sector = true;
    c.apex = apex;
    c.theta0 = m * f.eps;
    c.theta1 = (m + 1) * f.eps;
    c.r_lo = r_lo;
    c.r_hi = r_hi;
    c.voronoi = parent.voronoi;
    c.shape = convexify(apex, c.theta0, c.theta1, r_lo, r_hi, f.B, f.far_from(apex)).intersect(clip);
    c.unbounded = parent.unbounded && !std::isfinite(r_hi);
    return c;
}

/// Splits a cell into the eps-sectors around `apex` it meets.
inline std::vector<Cell> split_into_sectors(const Cell& cell, cplx apex, const Frame& f) {
    std::vector<Cell> out;
    for (int m : sectors_meeting(angular_span(cell.shape, apex), f)) {
        Cell c = sector_cell(cell, apex, m, 0.0, kInf, f, cell.shape);
        if (!c.shape.empty()) out.push_back(std::move(c));
    }
    return out;
}

/// Q with Taylor coefficients at b whose size is pure rounding set to zero.
inline std::vector<cplx> clean_taylor(const Polynomial& q, cplx b) {
    const Polynomial s = taylor_shift(q, b);
    const auto mag = taylor_shift_magnitude(q, b);
    std::vector<cplx> c(static_cast<std::size_t>(std::max(0, q.degree())) + 1, 0.0);
    for (int i = 0; i <= s.degree(); ++i) {
        const auto u = static_cast<std::size_t>(i);
        c[u] = std::abs(s.coeff(i)) <= 1e-9 * mag[u] ? cplx{} : s.coeff(i);
    }
    return c;
}

struct Interval {
    double lo, hi;
};

/// Radial interval where |c_j| r^j >= 2 sum_{i != j} |c_i| r^i. In t = log r
/// the log-ratio is concave, so the set is an interval; golden-section finds
/// its peak and bisection its ends. `t_lo`/`t_hi` bracket the root scales.
inline std::optional<Interval> dominance_interval(const std::vector<double>& mag, int j, double t_lo, double t_hi) {
    const auto uj = static_cast<std::size_t>(j);
    if (mag[uj] == 0.0) return std::nullopt;  // a vanishing coefficient has no gap
    bool lower_exists = false, higher_exists = false;
    for (std::size_t i = 0; i < mag.size(); ++i) {
        if (i == uj || mag[i] == 0.0) continue;
        (i < uj ? lower_exists : higher_exists) = true;
    }
    if (!lower_exists && !higher_exists) return Interval{0.0, kInf};
    auto g = [&](double t) {
        double mx = -kInf;
        for (std::size_t i = 0; i < mag.size(); ++i)
            if (i != uj && mag[i] > 0.0) mx = std::max(mx, std::log(mag[i]) + static_cast<double>(i) * t);
        double s = 0.0;
        for (std::size_t i = 0; i < mag.size(); ++i)
            if (i != uj && mag[i] > 0.0) s += std::exp(std::log(mag[i]) + static_cast<double>(i) * t - mx);
        return std::log(mag[uj]) + j * t - (std::log(2.0) + mx + std::log(s));
    };
    double a = t_lo, bnd = t_hi;
    if (!lower_exists) a = t_lo - 60.0;
    if (!higher_exists) bnd = t_hi + 60.0;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = bnd - phi * (bnd - a), x2 = a + phi * (bnd - a);
    double f1 = g(x1), f2 = g(x2);
    for (int it = 0; it < 200 && bnd - a > 1e-12; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (bnd - a);
            f2 = g(x2);
        } else {
            bnd = x2;
            x2 = x1;
            f2 = f1;
            x1 = bnd - phi * (bnd - a);
            f1 = g(x1);
        }
    }
    const double tp = 0.5 * (a + bnd);
    if (g(tp) < 0.0) return std::nullopt;
    auto edge = [&](double inside, double outside) {
        for (int it = 0; it < 200 && std::abs(outside - inside) > 1e-13 * std::max(1.0, std::abs(inside)); ++it) {
            const double mid = 0.5 * (inside + outside);
            (g(mid) >= 0.0 ? inside : outside) = mid;
        }
        return inside;
    };
    Interval out{0.0, kInf};
    if (lower_exists) {
        double o = tp - 1.0;
        while (g(o) >= 0.0) o -= 2.0 * (tp - o);
        out.lo = std::exp(edge(tp, o));
    }
    if (higher_exists) {
        double o = tp + 1.0;
        while (g(o) >= 0.0) o += 2.0 * (o - tp);
        out.hi = std::exp(edge(tp, o));
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// D1

struct D1Piece {
    Cell cell;
    ComparabilityModel model;  // D1 or Constant
};

/// Voronoi cells of Q's roots, cut into eps-sectors around each root and into
/// half-distance layers. On the layer between half the distances to the i-th
/// and (i+1)-th nearest roots, the first i roots are near (counted into k)
/// and the rest far (folded into c).
inline std::vector<D1Piece> d1_decompose(const Polynomial& q, const Cell& domain, double eps,
                                         const DecompositionOptions& opt = {}, const ConvexPolygon* square = nullptr) {
    detail::Frame f;
    f.eps = eps;
    f.n_sectors = sector_count(eps);
    f.B = opt.B;
    f.cluster_tol = opt.cluster_tol;
    if (square) {
        f.square = *square;
        f.half_width = 0.5 * (square->bounding_box().second.real() - square->bounding_box().first.real());
    } else {
        f.half_width = std::max(domain.shape.max_distance_from(0.0), 1.0);
        f.square = ConvexPolygon::square(0.0, f.half_width);
    }
    std::vector<D1Piece> out;
    if (q.is_zero()) throw Error(ErrorCode::InvalidArgument, "D1 of the zero polynomial");
    if (q.is_constant()) {
        ComparabilityModel m;
        m.kind = ComparabilityModel::Kind::Constant;
        m.b = domain.has_sector ? domain.apex : cplx{};
        m.c = std::abs(q.coeff(0));
        out.push_back({domain, std::move(m)});
        return out;
    }
    RootSet rs;
    try {
        rs = roots(q, opt.cluster_tol);
    } catch (const Error& e) {
        throw Error(ErrorCode::RootFindingFailed, e.what());
    }
    std::vector<cplx> sites;
    for (const auto& r : rs.roots) sites.push_back(r.location);
    const double A = std::abs(q.leading());

    for (std::size_t j = 0; j < sites.size(); ++j) {
        const ConvexPolygon vor = voronoi_cell(sites, j, domain.shape);
        if (vor.empty()) continue;
        const cplx eta = sites[j];
        std::vector<std::pair<double, std::size_t>> by_dist;
        for (std::size_t i = 0; i < sites.size(); ++i)
            if (i != j) by_dist.push_back({std::abs(sites[i] - eta), i});
        std::stable_sort(by_dist.begin(), by_dist.end(), [](auto& a, auto& b) { return a.first < b.first; });
        std::vector<double> breaks{0.0};
        for (const auto& [d, i] : by_dist)
            if (0.5 * d > breaks.back() * (1.0 + 1e-12)) breaks.push_back(0.5 * d);
        breaks.push_back(kInf);

        Cell base = domain;
        base.voronoi = domain.voronoi;
        const ArcCover arc = angular_span(vor, eta);
        for (int m : detail::sectors_meeting(arc, f)) {
            for (std::size_t layer = 0; layer + 1 < breaks.size(); ++layer) {
                const double lo = breaks[layer], hi = breaks[layer + 1];
                if (lo > 0.0 && lo > vor.max_distance_from(eta)) break;
                Cell c = detail::sector_cell(base, eta, m, lo, hi, f, vor);
                if (c.shape.empty()) continue;
                if (domain.voronoi < 0) c.voronoi = static_cast<int>(j);
                ComparabilityModel model;
                model.kind = ComparabilityModel::Kind::D1;
                model.b = eta;
                double cc = A;
                model.near.push_back(rs.roots[j]);
                int k = rs.roots[j].multiplicity;
                for (const auto& [d, i] : by_dist) {
                    if (0.5 * d <= lo * (1.0 + 1e-12)) {
                        model.near.push_back(rs.roots[i]);
                        k += rs.roots[i].multiplicity;
                    } else {
                        model.far.push_back(rs.roots[i]);
                        cc *= std::pow(d, rs.roots[i].multiplicity);
                    }
                }
                model.k = k;
                model.c = cc;
                out.push_back({std::move(c), std::move(model)});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// D2

enum class D2Kind { Dyadic, Gap };

struct D2Piece {
    Cell cell;
    D2Kind kind = D2Kind::Gap;
    int k = 0;        // gap exponent; 0 for dyadic cells
    double c = 0.0;   // |c_k| for gaps
    ComparabilityModel model;  // Gap model, or Constant for dyadic cells
    std::vector<double> root_moduli;  // |z_j - b| inside a dyadic cell
};

/// Radial split of a sector around b into gap annuli (one Taylor monomial of
/// Q(z+b) dominates the rest by a factor 2, shrunk by B at both ends) and the
/// dyadic annuli between them. A constant Q is a single dyadic cell.
inline std::vector<D2Piece> d2_decompose(const Polynomial& q, cplx b, const Cell& domain, double eps,
                                         const DecompositionOptions& opt = {}, const ConvexPolygon* square = nullptr) {
    detail::Frame f;
    f.eps = eps;
    f.n_sectors = sector_count(eps);
    f.B = opt.B;
    if (square) {
        f.square = *square;
        f.half_width = 0.5 * (square->bounding_box().second.real() - square->bounding_box().first.real());
    } else {
        f.half_width = std::max(domain.shape.max_distance_from(0.0), 1.0);
        f.square = ConvexPolygon::square(0.0, f.half_width);
    }
    if (q.is_zero()) throw Error(ErrorCode::InvalidArgument, "D2 of the zero polynomial");
    std::vector<D2Piece> out;
    if (q.is_constant()) {
        D2Piece p;
        p.cell = domain;
        p.kind = D2Kind::Dyadic;
        out.push_back(std::move(p));
        return out;
    }
    std::vector<Cell> sectors;
    if (domain.has_sector && std::abs(domain.apex - b) <= 1e-12 * std::max(1.0, std::abs(b)))
        sectors.push_back(domain);
    else
        sectors = detail::split_into_sectors(domain, b, f);

    const std::vector<cplx> tc = detail::clean_taylor(q, b);
    std::vector<double> mag;
    for (const auto& v : tc) mag.push_back(std::abs(v));

    RootSet rs;
    try {
        rs = roots(q, opt.cluster_tol);
    } catch (const Error& e) {
        throw Error(ErrorCode::RootFindingFailed, e.what());
    }
    std::vector<double> dists;
    for (const auto& r : rs.roots) {
        const double d = std::abs(r.location - b);
        if (d > 0.0) dists.push_back(d);
    }
    const double dmin = dists.empty() ? 1.0 : *std::min_element(dists.begin(), dists.end());
    const double dmax = dists.empty() ? 1.0 : *std::max_element(dists.begin(), dists.end());
    const double t_lo = std::log(dmin) - 4.0, t_hi = std::log(dmax) + 4.0;

    struct Band {
        double lo, hi;
        bool gap;
        int k;
    };
    std::vector<Band> gaps;
    for (int j = 0; j < static_cast<int>(mag.size()); ++j) {
        const auto iv = detail::dominance_interval(mag, j, t_lo, t_hi);
        if (!iv) continue;
        const double lo = iv->lo * opt.B, hi = iv->hi / opt.B;
        if (lo < hi) gaps.push_back({lo, hi, true, j});
    }
    std::sort(gaps.begin(), gaps.end(), [](const Band& x, const Band& y) { return x.lo < y.lo; });
    std::vector<Band> bands;
    double cursor = 0.0;
    for (const auto& g : gaps) {
        if (g.lo > cursor) bands.push_back({cursor, g.lo, false, 0});
        bands.push_back(g);
        cursor = g.hi;
    }
    if (std::isfinite(cursor)) bands.push_back({cursor, kInf, false, 0});

    for (const auto& sec : sectors) {
        const double reach = sec.shape.max_distance_from(b);
        const double inner = sec.shape.distance_from(b);
        for (const auto& band : bands) {
            if (band.lo > reach * opt.B || band.hi < inner / opt.B) continue;
            Cell c = sec;
            c.has_sector = true;
            c.apex = b;
            c.r_lo = band.lo;
            c.r_hi = band.hi;
            c.shape = convexify(b, sec.theta0, sec.theta1, band.lo, band.hi, opt.B, f.far_from(b)).intersect(sec.shape);
            c.unbounded = sec.unbounded && !std::isfinite(band.hi);
            if (c.shape.empty()) continue;
            D2Piece p;
            p.cell = std::move(c);
            if (band.gap) {
                p.kind = D2Kind::Gap;
                p.k = band.k;
                p.c = mag[static_cast<std::size_t>(band.k)];
                p.model.kind = ComparabilityModel::Kind::Gap;
                p.model.b = b;
                p.model.k = band.k;
                p.model.c = p.c;
                p.model.coeff_mag = mag;
            } else {
                p.kind = D2Kind::Dyadic;
                for (double d : dists)
                    if (d >= band.lo && d <= band.hi) p.root_moduli.push_back(d);
            }
            out.push_back(std::move(p));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Full classification

namespace detail {

struct Partial {
    Cell cell;
    int k = 0, k_sub = 0, k_mid = 0;
    bool sub_dyadic = false, mid_dyadic = false;
    std::array<ComparabilityModel, 3> models{};
};

struct RootList {
    std::vector<Root> roots;
    int degree = 0;
};

inline double aperture_bound(const RootList& rl, const ConvexPolygon& p) {
    double s = 0.0;
    for (const auto& r : rl.roots) s += r.multiplicity * angular_span(p, r.location).aperture;
    return s;
}

/// Splits cells until each L_i's argument spread bound is within
/// (deg L_i + 1) eps: the root contributing most is made an apex of
/// eps-wedges, which caps its own contribution at eps.
inline void refine_sectors(std::vector<Partial>& parts, const std::array<RootList, 3>& rl, const Frame& f,
                           int max_depth, std::vector<bool>& ok) {
    std::vector<std::pair<Partial, int>> stack;
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) stack.push_back({std::move(*it), 0});
    parts.clear();
    ok.clear();
    while (!stack.empty()) {
        auto [p, depth] = std::move(stack.back());
        stack.pop_back();
        const Root* worst = nullptr;
        double worst_share = 0.0;
        for (int i = 0; i < 3; ++i) {
            const auto& list = rl[static_cast<std::size_t>(i)];
            if (list.degree < 1) continue;
            if (aperture_bound(list, p.cell.shape) <= (list.degree + 1) * f.eps) continue;
            for (const auto& r : list.roots) {
                const double span = angular_span(p.cell.shape, r.location).aperture;
                const double share = r.multiplicity * span;
                if (span > f.eps * (1.0 + 1e-9) && share > worst_share) {
                    worst_share = share;
                    worst = &r;
                }
            }
        }
        if (!worst) {
            ok.push_back(true);
            parts.push_back(std::move(p));
            continue;
        }
        if (depth >= max_depth) {
            ok.push_back(false);
            parts.push_back(std::move(p));
            continue;
        }
        const cplx eta = worst->location;
        std::vector<int> ms = sectors_meeting(angular_span(p.cell.shape, eta), f);
        for (auto it = ms.rbegin(); it != ms.rend(); ++it) {
            const double t0 = *it * f.eps;
            const ConvexPolygon wedge = wedge_triangle(eta, t0, t0 + f.eps, f.far_from(eta));
            Partial child = p;
            child.cell.shape = p.cell.shape.intersect(wedge);
            if (!child.cell.shape.empty()) stack.push_back({std::move(child), depth + 1});
        }
    }
}

}  // namespace detail

/// D1 on L3, then D2/D1 on L1 around the current centre (gap -> T0, dyadic
/// -> T1), then D2/D1 on L2 around the updated centre. Every region ends in
/// one of T00/T01/T10/T11 with sigma filled from the table.
inline DecompositionReport classify_regions(const TorsionTriple& tt, const DecompositionOptions& opt = {}) {
    if (tt.degenerate || tt.L3.is_zero()) throw Error(ErrorCode::DegenerateTorsion, "L3 vanishes identically");
    const int d = tt.max_degree();
    const double eps = opt.eps > 0.0 ? opt.eps : default_epsilon(d);
    detail::Frame f;
    f.eps = eps;
    f.n_sectors = sector_count(eps);
    if (eps > kMaxConvexAperture * (1.0 + 1e-12)) throw Error(ErrorCode::ApertureTooWide, "eps exceeds pi/8");
    f.B = opt.B;
    f.cluster_tol = opt.cluster_tol;

    std::array<detail::RootList, 3> rl;
    double max_mod = 0.0;
    for (int i = 0; i < 3; ++i) {
        const Polynomial& L = tt[i];
        auto& list = rl[static_cast<std::size_t>(i)];
        list.degree = std::max(0, L.degree());
        if (L.degree() >= 1) {
            try {
                list.roots = roots(L, opt.cluster_tol).roots;
            } catch (const Error& e) {
                throw Error(ErrorCode::RootFindingFailed, e.what());
            }
            for (const auto& r : list.roots) max_mod = std::max(max_mod, std::abs(r.location));
        }
    }
    const double R = opt.working_radius > 0.0 ? opt.working_radius : std::max(10.0, 10.0 * max_mod);
    f.half_width = 1.05 * R;
    f.square = ConvexPolygon::square(0.0, f.half_width);

    DecompositionReport rep;
    rep.epsilon_used = eps;
    rep.thickening_B = opt.B;
    rep.cluster_tol = opt.cluster_tol;
    rep.working_radius = R;
    rep.region_budget = opt.region_budget > 0
                            ? opt.region_budget
                            : static_cast<std::size_t>(64) * static_cast<std::size_t>((d + 1) * (d + 1) * (d + 1)) *
                                  static_cast<std::size_t>(f.n_sectors);

    Cell plane;
    plane.shape = f.square;
    plane.unbounded = true;

    std::vector<detail::Partial> parts;
    for (auto& p3 : d1_decompose(tt.L3, plane, eps, opt, &f.square)) {
        const cplx b = p3.model.b;
        const int k = p3.model.k;
        for (auto& p1 : d2_decompose(tt.L1, b, p3.cell, eps, opt, &f.square)) {
            std::vector<std::pair<detail::Partial, cplx>> stage1;
            if (p1.kind == D2Kind::Gap) {
                detail::Partial part;
                part.cell = std::move(p1.cell);
                part.k = k;
                part.k_sub = p1.k;
                part.models[2] = p3.model;
                part.models[0] = p1.model;
                stage1.push_back({std::move(part), b});
            } else {
                for (auto& q1 : d1_decompose(tt.L1, p1.cell, eps, opt, &f.square)) {
                    detail::Partial part;
                    part.cell = std::move(q1.cell);
                    part.k = k;
                    part.k_sub = q1.model.k;
                    part.sub_dyadic = true;
                    part.models[2] = p3.model;
                    if (q1.model.kind == ComparabilityModel::Kind::Constant) q1.model.b = b;
                    const cplx centre = q1.model.b;
                    part.models[0] = std::move(q1.model);
                    stage1.push_back({std::move(part), centre});
                }
            }
            for (auto& [part, centre] : stage1) {
                for (auto& p2 : d2_decompose(tt.L2, centre, part.cell, eps, opt, &f.square)) {
                    if (p2.kind == D2Kind::Gap) {
                        detail::Partial out = part;
                        out.cell = std::move(p2.cell);
                        out.k_mid = p2.k;
                        out.models[1] = p2.model;
                        parts.push_back(std::move(out));
                    } else {
                        for (auto& q2 : d1_decompose(tt.L2, p2.cell, eps, opt, &f.square)) {
                            detail::Partial out = part;
                            out.cell = std::move(q2.cell);
                            out.k_mid = q2.model.k;
                            out.mid_dyadic = true;
                            if (q2.model.kind == ComparabilityModel::Kind::Constant) q2.model.b = centre;
                            out.models[1] = std::move(q2.model);
                            parts.push_back(std::move(out));
                        }
                    }
                }
            }
        }
    }

    std::vector<bool> ok;
    detail::refine_sectors(parts, rl, f, opt.max_refine_depth, ok);

    const double tiny = 1e-13 * f.half_width * f.half_width;
    int id = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        auto& p = parts[i];
        if (std::abs(p.cell.shape.area()) <= tiny) continue;
        Region r;
        r.id = id++;
        r.center_b = p.cell.has_sector ? p.cell.apex : p.models[0].b;
        r.theta0 = p.cell.theta0;
        r.theta1 = p.cell.theta1;
        r.r_lo = p.cell.r_lo;
        r.r_hi = p.cell.r_hi;
        r.unbounded = p.cell.unbounded;
        r.working_polygon = p.cell.shape;
        if (!r.unbounded) r.polygon = p.cell.shape;
        r.parent_voronoi = p.cell.voronoi;
        const RegionType type = p.sub_dyadic ? (p.mid_dyadic ? RegionType::T11 : RegionType::T10)
                                             : (p.mid_dyadic ? RegionType::T01 : RegionType::T00);
        r.sig = SigmaExponents::make(type, p.k, p.k_sub, p.k_mid);
        r.models = p.models;
        for (std::size_t li = 0; li < 3; ++li) {
            const auto& m = r.models[li];
            r.comparability[li] = {m.b, m.k, m.c, m.bound(r.working_polygon)};
            r.aperture_bound[li] = detail::aperture_bound(rl[li], r.working_polygon);
        }
        r.sector_contained = ok[i];
        rep.regions.push_back(std::move(r));
    }
    return rep;
}

inline DecompositionReport classify_regions(const TorsionTriple& tt, double eps) {
    DecompositionOptions opt;
    opt.eps = eps;
    return classify_regions(tt, opt);
}

// ---------------------------------------------------------------------------
// Affine retry

struct AffineRetryResult {
    CurveGamma curve;
    AffineMap3 map;
    DecompositionReport report;
};

namespace detail {

/// Unimodular map (row permutation, eliminations, one sign flip) making the
/// component degrees strictly increasing.
inline Mat3 degree_separating_reduction(const CurveGamma& curve) {
    std::array<Polynomial, 3> p = curve.components();
    Mat3 m = identity3();
    const double scale = std::max(curve.max_abs_coeff(), 1e-300);
    auto chop = [&](Polynomial& q) {
        std::vector<cplx> c(q.coeffs().begin(), q.coeffs().end());
        for (auto& v : c)
            if (std::abs(v) <= 1e-12 * scale) v = 0.0;
        q = Polynomial(std::move(c));
    };
    for (int guard = 0; guard < 64; ++guard) {
        std::array<int, 3> ord{0, 1, 2};
        std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) { return p[static_cast<std::size_t>(a)].degree() < p[static_cast<std::size_t>(b)].degree(); });
        bool changed = false;
        for (int s = 0; s + 1 < 3 && !changed; ++s) {
            const auto lo = static_cast<std::size_t>(ord[static_cast<std::size_t>(s)]);
            const auto hi = static_cast<std::size_t>(ord[static_cast<std::size_t>(s + 1)]);
            if (p[lo].degree() != p[hi].degree() || p[lo].degree() < 1) continue;
            const cplx f = p[hi].leading() / p[lo].leading();
            p[hi] -= f * p[lo];
            chop(p[hi]);
            for (int c = 0; c < 3; ++c) m[hi][static_cast<std::size_t>(c)] -= f * m[lo][static_cast<std::size_t>(c)];
            changed = true;
        }
        if (!changed) break;
    }
    std::array<int, 3> ord{0, 1, 2};
    std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) { return p[static_cast<std::size_t>(a)].degree() < p[static_cast<std::size_t>(b)].degree(); });
    Mat3 out{};
    for (std::size_t r = 0; r < 3; ++r) out[r] = m[static_cast<std::size_t>(ord[r])];
    if (det(out).real() < 0.0)
        for (auto& v : out[0]) v = -v;
    return out;
}

inline CurveGamma apply_clean(const CurveGamma& curve, const AffineMap3& a) {
    CurveGamma raw = affine_apply(curve, a);
    std::array<Polynomial, 3> comps;
    const double scale = std::max(raw.max_abs_coeff(), 1e-300);
    for (int i = 0; i < 3; ++i) {
        std::vector<cplx> c(raw[i].coeffs().begin(), raw[i].coeffs().end());
        for (auto& v : c)
            if (std::abs(v) <= 1e-13 * scale) v = 0.0;
        comps[static_cast<std::size_t>(i)] = Polynomial(std::move(c));
    }
    return CurveGamma(std::move(comps), curve.degree_bound());
}

inline std::string describe_inadmissible(const DecompositionReport& rep) {
    int bad = 0;
    for (const auto& r : rep.regions) bad += region_admissible(r.sig) ? 0 : 1;
    return std::to_string(bad) + " inadmissible of " + std::to_string(rep.regions.size());
}

}  // namespace detail

/// Tries, in a fixed order, a degree-separating unimodular reduction and then
/// shears I + delta E_ij (delta in {1e-2, 1e-1, 1, 10}) with and without
/// that reduction, until every region is admissible.
inline AffineRetryResult affine_retry(const CurveGamma& curve, const DecompositionReport& report,
                                      const DecompositionOptions& opt = {}) {
    if (report.all_admissible()) return {curve, AffineMap3::identity(), report};
    std::vector<std::pair<std::string, Mat3>> candidates;
    const Mat3 red = detail::degree_separating_reduction(curve);
    candidates.push_back({"degree-separating reduction", red});
    for (double delta : {1e-2, 1e-1, 1.0, 10.0})
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                Mat3 e = identity3();
                e[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] += delta;
                const std::string tag = "I+" + std::to_string(delta) + "*E" + std::to_string(i + 1) + std::to_string(j + 1);
                candidates.push_back({tag + " after reduction", matmul(e, red)});
                candidates.push_back({tag, e});
            }
    std::vector<std::string> log = report.excluded_exponents_log;
    log.push_back("initial: " + detail::describe_inadmissible(report));
    for (const auto& [tag, m] : candidates) {
        const AffineMap3 a(m, Vec3{});
        if (std::abs(a.determinant()) < 1e-12) continue;
        const CurveGamma c = detail::apply_clean(curve, a);
        const TorsionTriple tt = torsion_triple(c);
        if (tt.degenerate) continue;
        DecompositionReport rep;
        try {
            rep = classify_regions(tt, opt);
        } catch (const Error& e) {
            log.push_back(tag + ": " + e.what());
            continue;
        }
        log.push_back(tag + ": " + detail::describe_inadmissible(rep));
        if (rep.all_admissible()) {
            rep.excluded_exponents_log = std::move(log);
            return {c, a, std::move(rep)};
        }
    }
    throw Error(ErrorCode::RetriesExhausted, "no perturbation in the deterministic family gave an admissible report");
}

}  // namespace cxcurve
