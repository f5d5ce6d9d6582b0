// cxcurve: decomposition, verification and operator estimates for complex
// polynomial curves in C^3. Run `cxcurve --help` for the command list.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cxcurve/curve.hpp"
#include "cxcurve/decomposition.hpp"
#include "cxcurve/errors.hpp"
#include "cxcurve/jacobian.hpp"
#include "cxcurve/json.hpp"
#include "cxcurve/operators.hpp"
#include "cxcurve/pipeline.hpp"
#include "cxcurve/svg.hpp"
#include "cxcurve/verifier.hpp"

namespace fs = std::filesystem;
using namespace cxcurve;
using io::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitVerification = 5;

struct Global {
    std::string out_dir;
};

fs::path output_dir(const Global& g) {
    fs::path dir = ".";
    if (const char* env = std::getenv("CXCURVE_OUT_DIR"); env && *env) dir = env;
    if (!g.out_dir.empty()) dir = g.out_dir;
    return dir;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json(const std::string& path) {
    try {
        return Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
}

/// A curve file, or any report that embeds the analysed curve under "curve".
CurveGamma load_curve(const std::string& path) {
    const Json j = read_json(path);
    if (j.is_object() && !j.contains("components") && j.contains("curve")) return io::curve_from(j["curve"]);
    return io::curve_from(j);
}

/// Outputs are staged in memory and written only once every one is ready.
class Outputs {
   public:
    void add(std::string name, std::string body) { files_.push_back({std::move(name), std::move(body)}); }
    void add(std::string name, const Json& j) { add(std::move(name), j.dump(2) + "\n"); }

    void flush(const fs::path& dir) const {
        fs::create_directories(dir);
        for (const auto& [name, body] : files_) {
            std::ofstream out(dir / name, std::ios::binary);
            if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + (dir / name).string());
            out << body;
        }
    }

   private:
    std::vector<std::pair<std::string, std::string>> files_;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

cplx parse_complex(const std::string& s) {
    const auto comma = s.find(',');
    try {
        if (comma == std::string::npos) return {std::stod(s), 0.0};
        return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "expected RE or RE,IM but got '" + s + "'");
    }
}

Vec3 vec3_from_reals(const std::vector<double>& v, const char* what) {
    if (v.empty()) return Vec3{};
    if (v.size() != 6) throw Error(ErrorCode::InvalidArgument, std::string(what) + " needs six real numbers");
    return {cplx(v[0], v[1]), cplx(v[2], v[3]), cplx(v[4], v[5])};
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
    std::string curve;
    double eps = 0.0;
    double working_radius = 0.0;
    int samples = 1000;
    int sector_samples = 500;
    std::uint64_t seed = 0;
    bool exploratory = false;
    bool retry = false;
};

Json sector_json(const RegionAudit& a) {
    Json arr = Json::array();
    for (int i = 0; i < 3; ++i) {
        const auto& s = a.sector[static_cast<std::size_t>(i)];
        Json j;
        j["polynomial"] = "L" + std::to_string(i + 1);
        j["budget"] = a.sector_budget[static_cast<std::size_t>(i)];
        j["measured_aperture"] = io::finite_or_null(s.measured_aperture);
        j["contained"] = s.contained;
        j["zero_samples"] = s.zero_samples;
        j["witness"] = s.witness ? io::to_json(*s.witness) : Json(nullptr);
        arr.push_back(std::move(j));
    }
    return arr;
}

int run_analyze(const Global& g, const AnalyzeArgs& a) {
    const CurveGamma curve = load_curve(a.curve);
    AnalyzeOptions opt;
    opt.decomposition.eps = a.eps;
    opt.decomposition.working_radius = a.working_radius;
    opt.samples = a.samples;
    opt.sector_samples = a.sector_samples;
    opt.seed = a.seed;
    opt.mode = a.exploratory ? VerifyMode::Exploratory : VerifyMode::Strict;
    opt.retry = a.retry;
    const AnalysisResult res = analyze(curve, opt);

    Json dec = io::to_json(res.report);
    dec["input_curve"] = io::to_json(curve);
    dec["curve"] = io::to_json(res.curve);
    dec["affine_map"] = io::to_json(res.map);
    dec["torsion"] = io::to_json(res.tt);

    Json ver = io::document("cxcurve.verification");
    ver["seed"] = a.seed;
    ver["samples_per_region"] = a.samples;
    ver["sector_samples"] = a.sector_samples;
    ver["mode"] = a.exploratory ? "exploratory" : "strict";
    int admissible = 0, skipped = 0, exploratory = 0, sector_failures = 0;
    double floor = kInf;
    Json regions = Json::array();
    for (const auto& audit : res.audits) {
        const auto& v = audit.verification;
        admissible += v.admissible;
        skipped += v.skipped;
        exploratory += v.exploratory;
        sector_failures += !audit.sector_ok;
        if (v.admissible && v.n_samples > 0) floor = std::min(floor, v.min_ratio);
        Json r = io::to_json(v);
        r["sector_check"] = sector_json(audit);
        r["sector_ok"] = audit.sector_ok;
        regions.push_back(std::move(r));
    }
    Json summary;
    summary["region_count"] = res.audits.size();
    summary["admissible"] = admissible;
    summary["skipped"] = skipped;
    summary["exploratory"] = exploratory;
    summary["sector_failures"] = sector_failures;
    summary["min_ratio_admissible"] = io::finite_or_null(floor);
    summary["positivity_ok"] = !res.positivity_failure();
    ver["summary"] = summary;
    ver["regions"] = std::move(regions);

    Outputs out;
    out.add("decomposition.json", dec);
    out.add("verification.json", ver);
    out.add("regions.svg", svg::render(res.report));
    out.flush(output_dir(g));

    std::printf("regions=%zu admissible=%d skipped=%d sector_failures=%d min_ratio=%s\n", res.audits.size(), admissible,
                skipped, sector_failures, std::isfinite(floor) ? num(floor).c_str() : "n/a");
    return (res.sector_failure() || res.positivity_failure()) ? kExitVerification : kExitOk;
}

// ---------------------------------------------------------------------------
// jacobian-check

struct JacobianArgs {
    std::string curve;
    int trials = 100;
    std::uint64_t seed = 0;
    double box = 1.5;
    int nodes = 16;
};

int run_jacobian_check(const Global& g, const JacobianArgs& a) {
    const CurveGamma curve = load_curve(a.curve);
    JacobianCheckOptions opt;
    opt.trials = a.trials;
    opt.seed = a.seed;
    opt.box = a.box;
    opt.quadrature.nodes_per_segment = a.nodes;
    const JacobianCheckReport rep = jacobian_check(curve, opt);

    Json j = io::document("cxcurve.jacobian_check");
    j["curve"] = io::to_json(curve);
    j["seed"] = a.seed;
    j["box"] = a.box;
    j["nodes_per_segment"] = a.nodes;
    j["tolerance"] = opt.tolerance;
    j["trials"] = rep.trials;
    j["passes"] = rep.passes;
    j["failures"] = rep.failures;
    j["nonconvergence"] = rep.nonconvergence;
    j["excluded_count"] = rep.excluded_count;
    j["worst_rel_deviation"] = rep.worst_rel_deviation;
    j["worst_triple"] = io::to_json(rep.worst_triple);
    j["max_nodes_used"] = rep.max_nodes_used;

    Outputs out;
    out.add("jacobian_check.json", j);
    out.flush(output_dir(g));
    std::printf("trials=%d passes=%d failures=%d nonconvergence=%d excluded=%d worst=%s\n", rep.trials, rep.passes,
                rep.failures, rep.nonconvergence, rep.excluded_count, num(rep.worst_rel_deviation).c_str());
    return rep.all_pass() ? kExitOk : kExitVerification;
}

// ---------------------------------------------------------------------------
// operator

struct BallArgs {
    int k_prime = 0;
    double x = 1.0;
};

int run_ball_measure(const Global& g, const BallArgs& a) {
    const BallSpec spec = BallSpec::make(a.x, a.k_prime);
    const BallMeasure m = ball_measure_check(spec);
    const double rel = std::abs(m.sigma_measure - m.target) / m.target;
    Json j = io::document("cxcurve.ball_measure");
    j["spec"] = io::to_json(spec);
    j["sigma_measure"] = m.sigma_measure;
    j["target"] = m.target;
    j["rel_deviation"] = rel;
    Outputs out;
    out.add("ball_measure.json", j);
    out.flush(output_dir(g));
    std::printf("sigma=%s target=%s\n", num(m.sigma_measure).c_str(), num(m.target).c_str());
    return rel <= 1e-12 ? kExitOk : kExitVerification;
}

struct PairingArgs {
    std::string curve;
    std::uint64_t seed = 0;
    int samples = 100000;
    double disk_radius = 1.0;
    std::string kind = "ball";
    double e_size = 1.0, f_size = 1.0;
    std::string anchor = "0.5,0";
    std::vector<double> f_shift, translate;
};

int run_pairing(const Global& g, const PairingArgs& a) {
    const CurveGamma curve = load_curve(a.curve);
    const Vec3 centre = curve(parse_complex(a.anchor));
    const Vec3 shift = vec3_from_reals(a.f_shift, "--f-shift");
    const Vec3 move = vec3_from_reals(a.translate, "--translate");
    auto make = [&](double size) { return a.kind == "box" ? MeasurableSet::box(centre, size) : MeasurableSet::ball(centre, size); };
    const MeasurableSet E = make(a.e_size).translated(move);
    const MeasurableSet F = make(a.f_size).translated(shift).translated(move);
    const WeakTypeReport w = pairing(curve, E, F, a.disk_radius, a.samples, a.seed);

    Json j = io::document("cxcurve.pairing");
    j["curve"] = io::to_json(curve);
    j["seed"] = a.seed;
    j["disk_radius"] = a.disk_radius;
    j["E"] = io::to_json(E);
    j["F"] = io::to_json(F);
    j["report"] = io::to_json(w);
    Outputs out;
    out.add("pairing.json", j);
    out.flush(output_dir(g));
    std::printf("pairing=%s stderr=%s rwt_ratio=%s\n", num(w.pairing).c_str(), num(w.mc_stderr).c_str(), num(w.rwt_ratio).c_str());
    return kExitOk;
}

struct ScanArgs {
    std::string curve;
    std::vector<double> thetas{0.25, 0.5, 0.75};
    std::vector<double> q_ext{8.0};
    bool no_inf = false;
    std::vector<double> dilations{1.0};
    double grid_half_width = 2.0;
    int grid_points = 4;
    int n_quad = 24;
};

int run_scan(const Global& g, const ScanArgs& a) {
    const CurveGamma curve = load_curve(a.curve);
    std::vector<PQPair> pqs;
    for (double t : a.thetas) pqs.push_back(PQPair::from_theta(t));
    for (double q : a.q_ext) pqs.push_back(PQPair::extension_pair(q));
    if (!a.no_inf) pqs.push_back(PQPair{1.0, kInfExponent, std::nullopt});
    const ScanTable table = norm_ratio_scan(curve, pqs, standard_test_functions(), GridSpec{a.grid_half_width, a.grid_points},
                                           a.dilations, a.n_quad);

    std::string csv = "function,dilation,p,q,theta,norm_extension,norm_f,ratio\n";
    Json rows = Json::array();
    for (const auto& r : table.rows) {
        csv += r.function + "," + num(r.dilation) + "," + num(r.pq.p) + "," + (std::isinf(r.pq.q) ? "inf" : num(r.pq.q)) + "," +
               (r.pq.theta ? num(*r.pq.theta) : "") + "," + num(r.norm_extension) + "," + num(r.norm_f) + "," + num(r.ratio) + "\n";
        Json row;
        row["function"] = r.function;
        row["dilation"] = r.dilation;
        row["pq"] = io::to_json(r.pq);
        row["norm_extension"] = r.norm_extension;
        row["norm_f"] = r.norm_f;
        row["ratio"] = r.ratio;
        rows.push_back(std::move(row));
    }
    Json j = io::document("cxcurve.scan");
    j["curve"] = io::to_json(curve);
    j["grid"] = {{"half_width", a.grid_half_width}, {"points_per_axis", a.grid_points}};
    j["n_quad"] = a.n_quad;
    j["rows"] = std::move(rows);
    Json flat = Json::array();
    for (const auto& [key, v] : table.flatness) flat.push_back({{"key", key}, {"max_over_min", io::finite_or_null(v)}});
    j["flatness"] = std::move(flat);

    Outputs out;
    out.add("scan.csv", csv);
    out.add("scan.json", j);
    out.flush(output_dir(g));
    std::printf("rows=%zu\n", table.rows.size());
    return kExitOk;
}

struct ExtensionArgs {
    std::string curve;
    std::uint64_t seed = 0;
    int points = 50;
    int n_quad = 16;
    double z_box = 3.0;
};

int run_extension(const Global& g, const ExtensionArgs& a) {
    const CurveGamma curve = load_curve(a.curve);
    const auto pts = extension_check(curve, standard_test_functions(), a.points, a.seed, a.n_quad, a.z_box);
    Json rows = Json::array();
    int violations = 0;
    for (const auto& p : pts) {
        violations += !p.within_bound;
        Json r;
        r["function"] = p.function;
        r["z"] = io::to_json(p.z);
        r["value"] = io::to_json(p.value);
        r["modulus"] = p.modulus;
        r["l1_norm"] = p.l1_norm;
        r["nodes"] = p.nodes;
        r["within_bound"] = p.within_bound;
        rows.push_back(std::move(r));
    }
    Json j = io::document("cxcurve.extension");
    j["curve"] = io::to_json(curve);
    j["seed"] = a.seed;
    j["points"] = a.points;
    j["violations"] = violations;
    j["rows"] = std::move(rows);
    Outputs out;
    out.add("extension.json", j);
    out.flush(output_dir(g));
    std::printf("evaluations=%zu violations=%d\n", pts.size(), violations);
    return violations == 0 ? kExitOk : kExitVerification;
}

// ---------------------------------------------------------------------------
// replay

struct ReplayArgs {
    std::string curve;
    std::string verification;
    int region = -1;
    std::vector<double> triple;
};

int run_replay(const Global& g, const ReplayArgs& a) {
    const CurveGamma curve = load_curve(a.curve);
    Triple t{};
    std::optional<double> stored;
    int region_id = a.region;
    if (!a.triple.empty()) {
        const Vec3 v = vec3_from_reals(a.triple, "--triple");
        t = {v[0], v[1], v[2]};
    } else {
        if (a.verification.empty()) throw Error(ErrorCode::InvalidArgument, "replay needs --verification or --triple");
        const Json ver = read_json(a.verification);
        if (!ver.contains("regions") || !ver["regions"].is_array())
            throw Error(ErrorCode::ParseError, "verification report has no regions");
        const Json* pick = nullptr;
        double best = kInf;
        for (const auto& r : ver["regions"]) {
            if (!r.contains("worst_witness") || r["worst_witness"].is_null()) continue;
            const int id = r["region_id"].get<int>();
            const double ratio = r["worst_witness"]["ratio"].get<double>();
            if (a.region >= 0 ? id == a.region : ratio < best) {
                pick = &r;
                best = ratio;
                if (a.region >= 0) break;
            }
        }
        if (!pick) throw Error(ErrorCode::InvalidArgument, "no witness found for the requested region");
        region_id = (*pick)["region_id"].get<int>();
        t = io::triple_from((*pick)["worst_witness"]["triple"]);
        stored = best;
    }
    const RatioSample s = geometric_ratio(curve, t);
    Json j = io::document("cxcurve.replay");
    j["region_id"] = region_id;
    j["sample"] = io::to_json(s);
    j["stored_ratio"] = stored ? Json(*stored) : Json(nullptr);
    const bool match = !stored || std::abs(s.ratio - *stored) <= 1e-12 * std::max(1.0, std::abs(*stored));
    j["match"] = match;
    Outputs out;
    out.add("replay.json", j);
    out.flush(output_dir(g));
    std::printf("ratio=%s stored=%s match=%s\n", num(s.ratio).c_str(), stored ? num(*stored).c_str() : "n/a", match ? "yes" : "no");
    return match ? kExitOk : kExitVerification;
}

int fail(const Json& err) {
    std::cerr << err.dump() << "\n";
    return err["exit_code"].get<int>();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decomposition, verification and operator estimates for complex polynomial curves in C^3.\n"
                 "Output directory: --out-dir, else $CXCURVE_OUT_DIR, else the current directory.",
                 "cxcurve"};
    app.require_subcommand(1);
    Global g;
    app.add_option("--out-dir", g.out_dir, "Directory for report files");

    auto seed_opt = [](CLI::App* sub, std::uint64_t& seed) {
        sub->add_option("--seed", seed, "Random seed (required)")->required();
    };

    AnalyzeArgs aa;
    auto* analyze_cmd = app.add_subcommand("analyze", "Decompose the plane, verify each region, write decomposition.json, "
                                                      "verification.json and regions.svg");
    analyze_cmd->add_option("--curve", aa.curve, "Curve JSON file")->required()->check(CLI::ExistingFile);
    seed_opt(analyze_cmd, aa.seed);
    analyze_cmd->add_option("--eps", aa.eps, "Sector angle; must divide 2 pi (default from the torsion degrees)")
        ->check(CLI::PositiveNumber);
    analyze_cmd->add_option("--working-radius", aa.working_radius, "Truncation radius for unbounded regions")
        ->check(CLI::PositiveNumber);
    analyze_cmd->add_option("--samples", aa.samples, "Triples per region")->check(CLI::PositiveNumber)->capture_default_str();
    analyze_cmd->add_option("--sector-samples", aa.sector_samples, "Points per region for the aperture check")
        ->check(CLI::PositiveNumber)->capture_default_str();
    analyze_cmd->add_flag("--exploratory", aa.exploratory, "Also sample inadmissible regions (reported, never asserted)");
    analyze_cmd->add_flag("--retry", aa.retry, "Apply affine_retry when some region is inadmissible");

    JacobianArgs ja;
    auto* jac_cmd = app.add_subcommand("jacobian-check", "Compare the integral identity with the determinant on random triples");
    jac_cmd->add_option("--curve", ja.curve, "Curve JSON file")->required()->check(CLI::ExistingFile);
    seed_opt(jac_cmd, ja.seed);
    jac_cmd->add_option("--trials", ja.trials, "Number of accepted triples")->check(CLI::PositiveNumber)->capture_default_str();
    jac_cmd->add_option("--box", ja.box, "Half-width of the square the points are drawn from")->check(CLI::PositiveNumber)->capture_default_str();
    jac_cmd->add_option("--nodes", ja.nodes, "Gauss-Legendre points per panel")->check(CLI::Range(4, 512))->capture_default_str();

    auto* op_cmd = app.add_subcommand("operator", "Operator estimates");
    op_cmd->require_subcommand(1);

    BallArgs ba;
    auto* ball_cmd = op_cmd->add_subcommand("ball-measure", "sigma(B_x) against x/8");
    ball_cmd->add_option("--k-prime", ba.k_prime, "Exponent k'")->check(CLI::NonNegativeNumber)->capture_default_str();
    ball_cmd->add_option("--x", ba.x, "Ball parameter x")->check(CLI::PositiveNumber)->capture_default_str();

    PairingArgs pa;
    auto* pair_cmd = op_cmd->add_subcommand("pairing", "Monte Carlo <T chi_E, chi_F> and the weak-type quantities");
    pair_cmd->add_option("--curve", pa.curve, "Curve JSON file")->required()->check(CLI::ExistingFile);
    seed_opt(pair_cmd, pa.seed);
    pair_cmd->add_option("--samples", pa.samples, "Monte Carlo samples")->check(CLI::Range(2, 1 << 30))->capture_default_str();
    pair_cmd->add_option("--disk-radius", pa.disk_radius, "Radius of the parameter disk")->check(CLI::PositiveNumber)->capture_default_str();
    pair_cmd->add_option("--kind", pa.kind, "Set shape")->check(CLI::IsMember({"ball", "box"}))->capture_default_str();
    pair_cmd->add_option("--e-size", pa.e_size, "Radius or half-width of E")->check(CLI::PositiveNumber)->capture_default_str();
    pair_cmd->add_option("--f-size", pa.f_size, "Radius or half-width of F")->check(CLI::PositiveNumber)->capture_default_str();
    pair_cmd->add_option("--anchor", pa.anchor, "Sets are centred at Gamma(anchor); RE or RE,IM")->capture_default_str();
    pair_cmd->add_option("--f-shift", pa.f_shift, "Offset of F from E (six reals)")->expected(6);
    pair_cmd->add_option("--translate", pa.translate, "Common shift of E and F (six reals)")->expected(6);

    ScanArgs sa;
    auto* scan_cmd = op_cmd->add_subcommand("scan", "Norm-ratio table for the extension operator (scan.csv, scan.json)");
    scan_cmd->add_option("--curve", sa.curve, "Curve JSON file")->required()->check(CLI::ExistingFile);
    scan_cmd->add_option("--thetas", sa.thetas, "theta values for the (6/(3+theta), 6/(2+theta)) pairs")
        ->check(CLI::Range(0.0, 1.0))->capture_default_str();
    scan_cmd->add_option("--q", sa.q_ext, "q values for extension pairs (p = q/(q-6))")->capture_default_str();
    scan_cmd->add_flag("--no-inf", sa.no_inf, "Omit the (1, inf) row");
    scan_cmd->add_option("--dilations", sa.dilations, "Dilations s for f(s w)")->check(CLI::PositiveNumber)->capture_default_str();
    scan_cmd->add_option("--grid-half-width", sa.grid_half_width, "Half-width of the R^6 grid")->check(CLI::PositiveNumber)->capture_default_str();
    scan_cmd->add_option("--grid-points", sa.grid_points, "Points per grid axis")->check(CLI::Range(2, 12))->capture_default_str();
    scan_cmd->add_option("--n-quad", sa.n_quad, "Radial quadrature nodes")->check(CLI::Range(2, 512))->capture_default_str();

    ExtensionArgs ea;
    auto* ext_cmd = op_cmd->add_subcommand("extension", "|E f(z)| against ||f||_{L1(lambda)} for the test functions");
    ext_cmd->add_option("--curve", ea.curve, "Curve JSON file")->required()->check(CLI::ExistingFile);
    seed_opt(ext_cmd, ea.seed);
    ext_cmd->add_option("--points", ea.points, "Evaluation points per function")->check(CLI::PositiveNumber)->capture_default_str();
    ext_cmd->add_option("--n-quad", ea.n_quad, "Starting radial quadrature nodes")->check(CLI::Range(2, 512))->capture_default_str();
    ext_cmd->add_option("--z-box", ea.z_box, "Half-width of the box z is drawn from")->check(CLI::PositiveNumber)->capture_default_str();

    ReplayArgs ra;
    auto* replay_cmd = app.add_subcommand("replay", "Recompute the geometric ratio at a stored witness");
    replay_cmd->add_option("--curve", ra.curve, "Curve JSON file or decomposition.json")->required()->check(CLI::ExistingFile);
    replay_cmd->add_option("--verification", ra.verification, "verification.json to take the witness from")
        ->check(CLI::ExistingFile);
    replay_cmd->add_option("--region", ra.region, "Region id (default: smallest witness ratio)");
    replay_cmd->add_option("--triple", ra.triple, "Explicit triple (six reals)")->expected(6);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(io::error_json("UsageError", e.what(), kExitUsage));
    }

    try {
        if (*analyze_cmd) return run_analyze(g, aa);
        if (*jac_cmd) return run_jacobian_check(g, ja);
        if (*ball_cmd) return run_ball_measure(g, ba);
        if (*pair_cmd) return run_pairing(g, pa);
        if (*scan_cmd) return run_scan(g, sa);
        if (*ext_cmd) return run_extension(g, ea);
        if (*replay_cmd) return run_replay(g, ra);
    } catch (const Error& e) {
        return fail(io::error_json(e));
    } catch (const Json::exception& e) {
        return fail(io::error_json("ParseError", e.what(), kExitInput));
    } catch (const std::exception& e) {
        return fail(io::error_json("InternalError", e.what(), kExitNumerical));
    }
    return kExitUsage;
}
