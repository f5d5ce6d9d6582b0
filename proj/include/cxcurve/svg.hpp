#pragma once

#include <cstdio>
#include <string>
#include <string_view>

#include "cxcurve/decomposition.hpp"

namespace cxcurve::svg {

inline std::string_view fill_for(RegionType t) noexcept {
    switch (t) {
        case RegionType::T00: return "#d95f02";
        case RegionType::T01: return "#7570b3";
        case RegionType::T10: return "#1b9e77";
        case RegionType::T11: return "#e6ab02";
    }
    return "#999999";
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

/// Region map: one closed path per region (working polygon, y flipped so
/// the imaginary axis points up), coloured by region type, with the sigma
/// triple in a <title>. Inadmissible regions get a dashed black outline.
inline std::string render(const DecompositionReport& rep) {
    const double r = rep.working_radius > 0.0 ? rep.working_radius : 1.0;
    const double stroke = r / 400.0;
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" + fmt(-r) + " " + fmt(-r) + " " + fmt(2 * r) + " " +
           fmt(2 * r) + "\" width=\"800\" height=\"800\">\n";
    for (const auto& reg : rep.regions) {
        const auto& verts = reg.working_polygon.vertices();
        std::string d;
        for (std::size_t i = 0; i < verts.size(); ++i) {
            d += (i == 0 ? "M" : " L");
            d += fmt(verts[i].real()) + "," + fmt(-verts[i].imag());
        }
        if (!verts.empty()) d += " Z";
        const bool ok = region_admissible(reg.sig);
        const auto& s = reg.sig.sigma;
        out += "<path id=\"region-" + std::to_string(reg.id) + "\" d=\"" + d + "\" fill=\"" + std::string(fill_for(reg.sig.region_type)) +
               "\" fill-opacity=\"0.55\" stroke=\"" + (ok ? "#333333" : "#000000") + "\" stroke-width=\"" +
               fmt(ok ? stroke : 3 * stroke) + "\"" + (ok ? "" : " stroke-dasharray=\"" + fmt(6 * stroke) + "\"") +
               "><title>region " + std::to_string(reg.id) + " " + std::string(to_string(reg.sig.region_type)) + " sigma=(" +
               std::to_string(s[0]) + "," + std::to_string(s[1]) + "," + std::to_string(s[2]) + ")" +
               (ok ? "" : " inadmissible") + "</title></path>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace cxcurve::svg
