#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cxcurve/curve.hpp"
#include "cxcurve/decomposition.hpp"
#include "cxcurve/errors.hpp"
#include "cxcurve/jacobian.hpp"
#include "cxcurve/operators.hpp"
#include "cxcurve/polynomial.hpp"
#include "cxcurve/verifier.hpp"

namespace cxcurve::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Header shared by every report document.
inline Json document(const std::string& schema) {
    Json j;
    j["schema"] = schema;
    j["schema_version"] = kSchemaVersion;
    return j;
}

// ---------------------------------------------------------------------------
// Scalars

inline Json to_json(cplx z) { return Json::array({z.real(), z.imag()}); }

/// Infinite values serialise as null.
inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline double number_from(const Json& j, const char* what) {
    if (!j.is_number()) throw Error(ErrorCode::ParseError, std::string(what) + " must be a number");
    return j.get<double>();
}

inline cplx complex_from(const Json& j, const char* what = "complex value") {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::ParseError, std::string(what) + " must be [re, im]");
    return {number_from(j[0], what), number_from(j[1], what)};
}

inline Json to_json(const Vec3& v) { return Json::array({to_json(v[0]), to_json(v[1]), to_json(v[2])}); }

inline Vec3 vec3_from(const Json& j, const char* what = "vector") {
    if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::ParseError, std::string(what) + " must have three entries");
    return {complex_from(j[0], what), complex_from(j[1], what), complex_from(j[2], what)};
}

// ---------------------------------------------------------------------------
// Polynomials and curves

/// [[re, im], ...], constant term first. The zero polynomial is [].
inline Json to_json(const Polynomial& p) {
    Json j = Json::array();
    for (const auto& c : p.coeffs()) j.push_back(to_json(c));
    return j;
}

inline Polynomial polynomial_from(const Json& j) {
    if (!j.is_array()) throw Error(ErrorCode::ParseError, "polynomial must be an array of [re, im] pairs");
    std::vector<cplx> c;
    c.reserve(j.size());
    for (const auto& e : j) c.push_back(complex_from(e, "polynomial coefficient"));
    return Polynomial(std::move(c));
}

inline Json to_json(const CurveGamma& c) {
    Json j;
    j["N"] = c.degree_bound();
    j["components"] = Json::array({to_json(c[0]), to_json(c[1]), to_json(c[2])});
    return j;
}

inline CurveGamma curve_from(const Json& j) {
    if (!j.is_object() || !j.contains("components"))
        throw Error(ErrorCode::ParseError, "curve must be an object with \"components\"");
    const Json& comps = j["components"];
    if (!comps.is_array() || comps.size() != 3) throw Error(ErrorCode::ParseError, "curve needs exactly three components");
    std::array<Polynomial, 3> p{polynomial_from(comps[0]), polynomial_from(comps[1]), polynomial_from(comps[2])};
    if (!j.contains("N")) return CurveGamma(std::move(p));
    if (!j["N"].is_number_integer() || j["N"].get<int>() < 1)
        throw Error(ErrorCode::ParseError, "\"N\" must be a positive integer");
    const int n = j["N"].get<int>();
    for (const auto& c : p)
        if (c.degree() > n) throw Error(ErrorCode::ParseError, "component degree exceeds \"N\"");
    return CurveGamma(std::move(p), n);
}

inline Json to_json(const TorsionTriple& tt) {
    Json j;
    j["L1"] = to_json(tt.L1);
    j["L2"] = to_json(tt.L2);
    j["L3"] = to_json(tt.L3);
    return j;
}

inline Json to_json(const AffineMap3& a) {
    Json j;
    Json m = Json::array();
    for (const auto& row : a.matrix()) m.push_back(Json::array({to_json(row[0]), to_json(row[1]), to_json(row[2])}));
    j["matrix"] = std::move(m);
    j["offset"] = to_json(a.offset());
    j["determinant"] = to_json(a.determinant());
    return j;
}

inline AffineMap3 affine_from(const Json& j) {
    if (!j.is_object() || !j.contains("matrix")) throw Error(ErrorCode::ParseError, "affine map needs \"matrix\"");
    const Json& m = j["matrix"];
    if (!m.is_array() || m.size() != 3) throw Error(ErrorCode::ParseError, "matrix must have three rows");
    Mat3 out{};
    for (std::size_t r = 0; r < 3; ++r) out[r] = vec3_from(m[r], "matrix row");
    return {out, j.contains("offset") ? vec3_from(j["offset"], "offset") : Vec3{}};
}

// ---------------------------------------------------------------------------
// Decomposition

inline Json to_json(const ConvexPolygon& p) {
    Json j = Json::array();
    for (const auto& v : p.vertices()) j.push_back(to_json(v));
    return j;
}

inline Json to_json(const SigmaExponents& s) {
    Json j;
    j["region_type"] = std::string(to_string(s.region_type));
    j["k"] = s.k;
    j["k_sub"] = s.k_sub;
    j["k_mid"] = s.k_mid;
    j["sigma"] = Json::array({s.sigma[0], s.sigma[1], s.sigma[2]});
    return j;
}

inline Json to_json(const Comparability& c) {
    Json j;
    j["b"] = to_json(c.b);
    j["k"] = c.k;
    j["c"] = c.c;
    j["C"] = finite_or_null(c.C);
    return j;
}

inline Json to_json(const Region& r) {
    Json j;
    j["id"] = r.id;
    j["center_b"] = to_json(r.center_b);
    j["theta_range"] = Json::array({r.theta0, r.theta1});
    j["radial_range"] = Json::array({r.r_lo, finite_or_null(r.r_hi)});
    j["unbounded"] = r.unbounded;
    j["polygon"] = to_json(r.polygon);
    j["working_polygon"] = to_json(r.working_polygon);
    j["parent_voronoi"] = r.parent_voronoi;
    j["sigma_exponents"] = to_json(r.sig);
    j["admissible"] = region_admissible(r.sig);
    j["comparability"] = {{"L1", to_json(r.comparability[0])},
                          {"L2", to_json(r.comparability[1])},
                          {"L3", to_json(r.comparability[2])}};
    j["aperture_bound"] = Json::array({r.aperture_bound[0], r.aperture_bound[1], r.aperture_bound[2]});
    j["sector_contained"] = r.sector_contained;
    return j;
}

inline Json to_json(const DecompositionReport& rep) {
    Json j = document("cxcurve.decomposition");
    j["epsilon_used"] = rep.epsilon_used;
    j["thickening_B"] = rep.thickening_B;
    j["cluster_tol"] = rep.cluster_tol;
    j["working_radius"] = rep.working_radius;
    j["region_budget"] = rep.region_budget;
    j["region_count"] = rep.regions.size();
    j["excluded_exponents_log"] = rep.excluded_exponents_log;
    Json regions = Json::array();
    for (const auto& r : rep.regions) regions.push_back(to_json(r));
    j["regions"] = std::move(regions);
    return j;
}

// ---------------------------------------------------------------------------
// Verification

inline Json to_json(const Triple& t) { return Json::array({to_json(t.z1), to_json(t.z2), to_json(t.z3)}); }

inline Triple triple_from(const Json& j) {
    const Vec3 v = vec3_from(j, "triple");
    return {v[0], v[1], v[2]};
}

inline Json to_json(const RatioSample& s) {
    Json j;
    j["triple"] = to_json(s.triple);
    j["jacobian_mod"] = s.jacobian_mod;
    j["bound_value"] = s.bound_value;
    j["ratio"] = s.ratio;
    return j;
}

inline Json to_json(const VerificationReport& r) {
    Json j;
    j["region_id"] = r.region_id;
    j["seed"] = r.seed;
    j["admissible"] = r.admissible;
    j["skipped"] = r.skipped;
    j["exploratory"] = r.exploratory;
    j["n_samples"] = r.n_samples;
    j["excluded_count"] = r.excluded_count;
    if (r.skipped || r.n_samples == 0) {
        j["min_ratio"] = nullptr;
        j["median_ratio"] = nullptr;
        j["max_ratio"] = nullptr;
        j["worst_witness"] = nullptr;
    } else {
        j["min_ratio"] = r.min_ratio;
        j["median_ratio"] = r.median_ratio;
        j["max_ratio"] = r.max_ratio;
        j["worst_witness"] = to_json(r.worst_witness);
    }
    return j;
}

// ---------------------------------------------------------------------------
// Operators

inline Json to_json(const MeasurableSet& s) {
    Json j;
    j["kind"] = s.kind == SetKind::Ball ? "Ball" : "Box";
    j["center"] = to_json(s.center);
    j["size"] = s.size;
    j["volume"] = s.volume;
    return j;
}

inline Json to_json(const WeakTypeReport& w) {
    Json j;
    j["pairing"] = w.pairing;
    j["alpha"] = w.alpha;
    j["beta"] = w.beta;
    j["rwt_ratio"] = w.rwt_ratio;
    j["target_form"] = w.target_form;
    j["mc_samples"] = w.mc_samples;
    j["mc_stderr"] = w.mc_stderr;
    j["volume_E"] = w.volume_E;
    j["volume_F"] = w.volume_F;
    return j;
}

inline Json to_json(const BallSpec& b) {
    Json j;
    j["x"] = b.x;
    j["k_prime"] = b.k_prime;
    j["nu"] = b.nu;
    j["radius"] = b.radius;
    return j;
}

inline Json to_json(const PQPair& pq) {
    Json j;
    j["p"] = pq.p;
    j["q"] = finite_or_null(pq.q);
    j["theta"] = pq.theta ? Json(*pq.theta) : Json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------
// Errors

inline int exit_code_for(ErrorCode code) noexcept {
    switch (category_of(code)) {
        case ErrorCategory::Usage: return 2;
        case ErrorCategory::Input: return 3;
        case ErrorCategory::Numerical: return 4;
    }
    return 4;
}

inline Json error_json(const std::string& code, const std::string& message, int exit_code) {
    Json j = document("cxcurve.error");
    j["error"] = code;
    j["message"] = message;
    j["exit_code"] = exit_code;
    return j;
}

inline Json error_json(const Error& e) { return error_json(std::string(to_string(e.code())), e.what(), exit_code_for(e.code())); }

}  // namespace cxcurve::io
