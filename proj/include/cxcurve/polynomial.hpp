#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "cxcurve/errors.hpp"

namespace cxcurve {

using cplx = std::complex<double>;

inline constexpr double kMachineEps = std::numeric_limits<double>::epsilon();
inline constexpr double kDefaultClusterTol = 1e-7;

/// Dense polynomial over C, constant term first. Exact zeros above the
/// leading term are trimmed on construction, so `coeffs().back()` is nonzero
/// unless the polynomial is identically zero (empty coefficient list).
class Polynomial {
   public:
    static constexpr int kZeroDegree = -1;

    Polynomial() = default;
    explicit Polynomial(std::vector<cplx> coeffs) : c_(std::move(coeffs)) { trim(); }
    Polynomial(std::initializer_list<cplx> coeffs) : c_(coeffs) { trim(); }

    static Polynomial constant(cplx v) { return Polynomial({v}); }
    static Polynomial monomial(int power, cplx v = 1.0) {
        std::vector<cplx> c(static_cast<std::size_t>(power) + 1, 0.0);
        c.back() = v;
        return Polynomial(std::move(c));
    }

    int degree() const noexcept { return c_.empty() ? kZeroDegree : static_cast<int>(c_.size()) - 1; }
    bool is_zero() const noexcept { return c_.empty(); }
    bool is_constant() const noexcept { return c_.size() <= 1; }
    std::span<const cplx> coeffs() const noexcept { return c_; }

    cplx coeff(int k) const noexcept {
        return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[static_cast<std::size_t>(k)] : cplx{};
    }
    cplx leading() const noexcept { return c_.empty() ? cplx{} : c_.back(); }

    double max_abs_coeff() const noexcept {
        double m = 0.0;
        for (const auto& v : c_) m = std::max(m, std::abs(v));
        return m;
    }

    /// Horner evaluation.
    cplx operator()(cplx z) const noexcept {
        cplx acc{};
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
        return acc;
    }

    Polynomial& operator+=(const Polynomial& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
        for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
        trim();
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
        for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
        trim();
        return *this;
    }
    Polynomial& operator*=(cplx s) {
        for (auto& v : c_) v *= s;
        trim();
        return *this;
    }

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator-(Polynomial a) { return a *= -1.0; }
    friend Polynomial operator*(Polynomial a, cplx s) { return a *= s; }
    friend Polynomial operator*(cplx s, Polynomial a) { return a *= s; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<cplx> out(a.c_.size() + b.c_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
        return Polynomial(std::move(out));
    }
    friend bool operator==(const Polynomial&, const Polynomial&) = default;

   private:
    void trim() {
        while (!c_.empty() && c_.back() == cplx{}) c_.pop_back();
    }

    std::vector<cplx> c_;
};

inline cplx eval(const Polynomial& p, cplx z) noexcept { return p(z); }

struct EvalWithBound {
    cplx value;
    double error_bound;  // running rounding-error bound of the Horner sum
};

/// Horner evaluation with the standard running error bound.
inline EvalWithBound eval_with_bound(const Polynomial& p, cplx z) noexcept {
    const auto c = p.coeffs();
    cplx acc{};
    double mu = 0.0;
    const double az = std::abs(z);
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        acc = acc * z + *it;
        mu = mu * az + std::abs(acc);
    }
    return {acc, 4.0 * kMachineEps * mu};
}

inline Polynomial derivative(const Polynomial& p) {
    if (p.degree() < 1) return {};
    const auto c = p.coeffs();
    std::vector<cplx> out(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) out[k - 1] = c[k] * static_cast<double>(k);
    return Polynomial(std::move(out));
}

inline Polynomial derivative(const Polynomial& p, int order) {
    Polynomial d = p;
    for (int i = 0; i < order; ++i) d = derivative(d);
    return d;
}

/// Antiderivative vanishing at 0.
inline Polynomial antiderivative(const Polynomial& p) {
    if (p.is_zero()) return {};
    const auto c = p.coeffs();
    std::vector<cplx> out(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) out[k + 1] = c[k] / static_cast<double>(k + 1);
    return Polynomial(std::move(out));
}

/// Quotient and remainder of a / b by long division.
inline std::pair<Polynomial, Polynomial> divmod(const Polynomial& a, const Polynomial& b) {
    if (b.is_zero()) throw Error(ErrorCode::InvalidArgument, "division by the zero polynomial");
    if (a.degree() < b.degree()) return {Polynomial{}, a};
    std::vector<cplx> r(a.coeffs().begin(), a.coeffs().end());
    const auto bc = b.coeffs();
    const std::size_t nb = bc.size();
    std::vector<cplx> q(r.size() - nb + 1, 0.0);
    for (std::size_t k = q.size(); k-- > 0;) {
        const cplx f = r[k + nb - 1] / bc.back();
        q[k] = f;
        for (std::size_t j = 0; j < nb; ++j) r[k + j] -= f * bc[j];
        r[k + nb - 1] = 0.0;
    }
    r.resize(nb - 1);
    return {Polynomial(std::move(q)), Polynomial(std::move(r))};
}

/// Coefficients of q(z) = p(z + h) by repeated synthetic division.
inline Polynomial taylor_shift(const Polynomial& p, cplx h) {
    std::vector<cplx> a(p.coeffs().begin(), p.coeffs().end());
    const std::size_t n = a.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t k = n - 1; k > i; --k) a[k - 1] += h * a[k];
    return Polynomial(std::move(a));
}

/// Taylor shift of the coefficient moduli: entry j bounds the size of the
/// terms summed into coefficient j of p(z + h). Used to recognise coefficients
/// that are pure cancellation noise.
inline std::vector<double> taylor_shift_magnitude(const Polynomial& p, cplx h) {
    std::vector<double> a;
    for (const auto& v : p.coeffs()) a.push_back(std::abs(v));
    const std::size_t n = a.size();
    const double ah = std::abs(h);
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t k = n - 1; k > i; --k) a[k - 1] += ah * a[k];
    return a;
}

/// True when every coefficient is below `rel_tol * scale` in modulus.
inline bool is_negligible(const Polynomial& p, double scale, double rel_tol = 1e-10) noexcept {
    for (const auto& v : p.coeffs())
        if (std::abs(v) >= rel_tol * scale) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Determinants over the polynomial ring

using PolyMatrix2 = std::array<std::array<Polynomial, 2>, 2>;
using PolyMatrix3 = std::array<std::array<Polynomial, 3>, 3>;

namespace detail {

// Coefficient-wise moduli, used to track the size of the summands in a
// cofactor expansion.
inline std::vector<double> magnitudes(const Polynomial& p) {
    std::vector<double> m;
    for (const auto& v : p.coeffs()) m.push_back(std::abs(v));
    return m;
}

inline std::vector<double> mag_mul(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

inline void mag_add(std::vector<double>& acc, const std::vector<double>& b) {
    if (b.size() > acc.size()) acc.resize(b.size(), 0.0);
    for (std::size_t k = 0; k < b.size(); ++k) acc[k] += b[k];
}

// Zero every coefficient that is indistinguishable from rounding of the
// summands that produced it.
inline Polynomial drop_cancellation_noise(const Polynomial& value, const std::vector<double>& mag) {
    std::vector<cplx> c(value.coeffs().begin(), value.coeffs().end());
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double m = k < mag.size() ? mag[k] : 0.0;
        if (std::abs(c[k]) <= 32.0 * kMachineEps * m) c[k] = 0.0;
    }
    return Polynomial(std::move(c));
}

struct TrackedDet {
    Polynomial value;
    std::vector<double> magnitude;
};

inline TrackedDet det2_tracked(const Polynomial& a, const Polynomial& b, const Polynomial& c,
                               const Polynomial& d) {
    auto mag = mag_mul(magnitudes(a), magnitudes(d));
    mag_add(mag, mag_mul(magnitudes(b), magnitudes(c)));
    return {a * d - b * c, std::move(mag)};
}

}  // namespace detail

inline Polynomial det2(const PolyMatrix2& m) {
    auto t = detail::det2_tracked(m[0][0], m[0][1], m[1][0], m[1][1]);
    return detail::drop_cancellation_noise(t.value, t.magnitude);
}

/// Cofactor expansion along the first row.
inline Polynomial det3(const PolyMatrix3& m) {
    Polynomial value;
    std::vector<double> mag;
    for (int j = 0; j < 3; ++j) {
        const int c0 = j == 0 ? 1 : 0;
        const int c1 = j == 2 ? 1 : 2;
        auto minor = detail::det2_tracked(m[1][c0], m[1][c1], m[2][c0], m[2][c1]);
        const Polynomial term = m[0][j] * minor.value;
        if (j == 1)
            value -= term;
        else
            value += term;
        detail::mag_add(mag, detail::mag_mul(detail::magnitudes(m[0][j]), minor.magnitude));
    }
    return detail::drop_cancellation_noise(value, mag);
}

// ---------------------------------------------------------------------------
// Roots

struct Root {
    cplx location;
    int multiplicity;
};

struct RootSet {
    std::vector<Root> roots;  // sorted by modulus, ties by principal argument
    double residual = 0.0;    // max |p| over the returned locations
    double cluster_tol = kDefaultClusterTol;

    int total_multiplicity() const noexcept {
        int s = 0;
        for (const auto& r : roots) s += r.multiplicity;
        return s;
    }
};

/// Orders roots by modulus; equal moduli (to 1e-12 relative) fall back to the
/// principal argument in (-pi, pi].
inline bool root_order_less(cplx a, cplx b) noexcept {
    const double ma = std::abs(a), mb = std::abs(b);
    if (std::abs(ma - mb) > 1e-12 * std::max(1.0, std::max(ma, mb))) return ma < mb;
    return std::arg(a) < std::arg(b);
}

namespace detail {

inline std::size_t uf_find(std::vector<std::size_t>& parent, std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
}

// Aberth-Ehrlich simultaneous iteration on a polynomial with nonzero constant
// term. Returns the approximations; throws NonConvergence when the iteration
// never brings every residual down to its rounding level.
inline std::vector<cplx> aberth(const Polynomial& p) {
    const int n = p.degree();
    const Polynomial dp = derivative(p);
    const double radius = std::pow(std::abs(p.coeff(0) / p.leading()), 1.0 / n);
    std::vector<cplx> z(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        z[static_cast<std::size_t>(k)] = std::polar(radius, 2.0 * std::numbers::pi * k / n + 0.4);

    std::vector<bool> done(z.size(), false);
    constexpr int kMaxIter = 2000;
    for (int iter = 0; iter < kMaxIter; ++iter) {
        bool all_done = true;
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (done[i]) continue;
            const auto [pv, err] = eval_with_bound(p, z[i]);
            if (std::abs(pv) <= err) {
                done[i] = true;
                continue;
            }
            all_done = false;
            const cplx ratio = pv / dp(z[i]);
            cplx sum{};
            for (std::size_t j = 0; j < z.size(); ++j)
                if (j != i && z[i] != z[j]) sum += 1.0 / (z[i] - z[j]);
            const cplx step = ratio / (1.0 - ratio * sum);
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) {
                z[i] += std::polar(1e-8 * std::max(1.0, std::abs(z[i])), 0.7 * static_cast<double>(i + 1));
                continue;
            }
            z[i] -= step;
            if (std::abs(step) <= 2.0 * kMachineEps * std::abs(z[i])) done[i] = true;
        }
        if (all_done) return z;
    }
    for (const auto& zi : z) {
        const auto [pv, err] = eval_with_bound(p, zi);
        if (std::abs(pv) > 1e3 * err) throw Error(ErrorCode::NonConvergence, "Aberth iteration did not converge");
    }
    return z;
}

// Newton refinement of a root of `f`, accepted only while it stays within
// `max_move` of the start.
inline cplx polish(const Polynomial& f, cplx start, double max_move) {
    const Polynomial df = derivative(f);
    cplx x = start;
    for (int it = 0; it < 50; ++it) {
        const cplx d = df(x);
        if (d == cplx{}) break;
        const cplx step = f(x) / d;
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
        const cplx next = x - step;
        if (std::abs(next - start) > max_move) return start;
        x = next;
        if (std::abs(step) <= kMachineEps * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

}  // namespace detail

/// All distinct roots with multiplicities. Approximations from an Aberth
/// iteration are grouped into clusters whenever their inclusion disks
/// D(z_i, n|W_i|) overlap or they lie within `cluster_tol` of each other; each
/// cluster becomes one root whose multiplicity is the cluster size.
inline RootSet roots(const Polynomial& p, double cluster_tol = kDefaultClusterTol) {
    if (p.degree() < 1) throw Error(ErrorCode::DegreeZero, "root finding needs a nonconstant polynomial");
    require(cluster_tol >= 0.0, "cluster tolerance must be nonnegative");

    const auto c = p.coeffs();
    int zeros = 0;
    while (c[static_cast<std::size_t>(zeros)] == cplx{}) ++zeros;
    const Polynomial reduced(std::vector<cplx>(c.begin() + zeros, c.end()));

    std::vector<cplx> approx(static_cast<std::size_t>(zeros), cplx{});
    std::vector<double> radius(static_cast<std::size_t>(zeros), 0.0);
    if (reduced.degree() >= 1) {
        const auto z = detail::aberth(reduced);
        const int n = reduced.degree();
        for (std::size_t i = 0; i < z.size(); ++i) {
            const auto [pv, err] = eval_with_bound(reduced, z[i]);
            cplx denom = reduced.leading();
            for (std::size_t j = 0; j < z.size(); ++j)
                if (j != i && z[j] != z[i]) denom *= z[i] - z[j];
            radius.push_back(n * (std::abs(pv) + err) / std::abs(denom));
            approx.push_back(z[i]);
        }
    }

    const std::size_t m = approx.size();
    std::vector<std::size_t> parent(m);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const double d = std::abs(approx[i] - approx[j]);
            if (d <= cluster_tol || d <= radius[i] + radius[j])
                parent[detail::uf_find(parent, i)] = detail::uf_find(parent, j);
        }

    struct Cluster {
        cplx sum{};
        int count = 0;
        double spread = 0.0;
        bool has_exact_zero = false;
    };
    std::vector<Cluster> clusters(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto& cl = clusters[detail::uf_find(parent, i)];
        cl.sum += approx[i];
        cl.count += 1;
        cl.has_exact_zero = cl.has_exact_zero || i < static_cast<std::size_t>(zeros);
    }
    for (std::size_t i = 0; i < m; ++i) {
        auto& cl = clusters[detail::uf_find(parent, i)];
        cl.spread = std::max(cl.spread, std::abs(approx[i] - cl.sum / static_cast<double>(cl.count)) + radius[i]);
    }

    RootSet out;
    out.cluster_tol = cluster_tol;
    for (const auto& cl : clusters) {
        if (cl.count == 0) continue;
        cplx centre = cl.sum / static_cast<double>(cl.count);
        if (cl.has_exact_zero && cl.count == zeros) {
            centre = 0.0;
        } else {
            // An m-fold root is a simple root of the (m-1)-th derivative.
            const Polynomial f = derivative(p, cl.count - 1);
            centre = detail::polish(f, centre, std::max(cl.spread, cluster_tol) + 1e-14);
        }
        out.roots.push_back({centre, cl.count});
    }

    // Centres can drift together after polishing; merge until separated.
    for (bool merged = true; merged;) {
        merged = false;
        for (std::size_t i = 0; i < out.roots.size() && !merged; ++i)
            for (std::size_t j = i + 1; j < out.roots.size() && !merged; ++j)
                if (std::abs(out.roots[i].location - out.roots[j].location) <= cluster_tol) {
                    auto& a = out.roots[i];
                    const auto& b = out.roots[j];
                    const int total = a.multiplicity + b.multiplicity;
                    a.location = (a.location * static_cast<double>(a.multiplicity) +
                                  b.location * static_cast<double>(b.multiplicity)) /
                                 static_cast<double>(total);
                    a.multiplicity = total;
                    out.roots.erase(out.roots.begin() + static_cast<std::ptrdiff_t>(j));
                    merged = true;
                }
    }

    std::sort(out.roots.begin(), out.roots.end(),
              [](const Root& a, const Root& b) { return root_order_less(a.location, b.location); });
    for (const auto& r : out.roots) out.residual = std::max(out.residual, std::abs(p(r.location)));
    return out;
}

/// A * prod (z - eta_j)^alpha_j.
inline Polynomial from_roots(cplx leading, const RootSet& rs) {
    Polynomial acc = Polynomial::constant(leading);
    for (const auto& r : rs.roots)
        for (int k = 0; k < r.multiplicity; ++k) acc = acc * Polynomial({-r.location, 1.0});
    return acc;
}

/// Order of vanishing of p at `at` (coefficients of p(z + at) below
/// `rel_tol` times their summand size count as zero). Zero polynomial -> -1.
inline int vanishing_order(const Polynomial& p, cplx at, double rel_tol = 1e-9) {
    if (p.is_zero()) return -1;
    const Polynomial q = taylor_shift(p, at);
    const auto mag = taylor_shift_magnitude(p, at);
    for (int k = 0; k <= q.degree(); ++k)
        if (std::abs(q.coeff(k)) > rel_tol * mag[static_cast<std::size_t>(k)]) return k;
    return q.degree();
}

}  // namespace cxcurve
