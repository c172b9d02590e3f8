#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "esbgk/iteration.hpp"

namespace esbgk::io {

using json = nlohmann::ordered_json;

inline std::string format_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// Writes the full content to <path>.tmp and renames it into place, so a
/// partially written file is never observable under the final name.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw config_error("cannot open output file " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw config_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                                const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw config_error("unknown key \"" + it.key() + "\" in " + context);
}

inline double require_number(const json& obj, const std::string& key, const std::string& context) {
    if (!obj.contains(key)) throw config_error("missing key \"" + key + "\" in " + context);
    if (!obj[key].is_number()) throw config_error("\"" + key + "\" in " + context + " must be a number");
    return obj[key].get<double>();
}

inline double optional_number(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw config_error("\"" + key + "\" must be a number");
    return obj[key].get<double>();
}

} // namespace detail

struct RunConfig {
    SolveSettings settings;
    double cutoff = 8.0;
    std::array<int, 3> velocity_counts{24, 16, 16};
    int spatial_intervals = 32;
    Regime regime = Regime::Inflow;
    std::array<double, 3> delta{1.0, 0.0, 0.0};
    double tw0 = 1.0, tw1 = 1.0;
    json left_data, right_data; // resolved descriptors (file references loaded)
    std::uint64_t verify_seed = 20240817ull;
};

inline json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("malformed JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

/// Validates one boundary-data descriptor (already file-resolved) and checks
/// its optional "side" tag against the side it is being used for.
inline void validate_data_descriptor(const json& d, const std::string& side,
                                     const std::string& context) {
    if (!d.is_object()) throw config_error(context + " must be a JSON object");
    if (!d.contains("type") || !d["type"].is_string())
        throw config_error(context + " needs a string \"type\"");
    const std::string type = d["type"].get<std::string>();
    if (d.contains("side")) {
        if (!d["side"].is_string() || d["side"].get<std::string>() != side)
            throw config_error(context + ": \"side\" tag does not match its position (" + side + ")");
    }
    if (type == "maxwellian") {
        detail::reject_unknown_keys(d, {"type", "side", "temperature", "rho", "flux", "drift"},
                                    context);
        const double t = detail::require_number(d, "temperature", context);
        if (!(t > 0.0)) throw config_error(context + ": temperature must be positive");
        const bool has_rho = d.contains("rho"), has_flux = d.contains("flux");
        if (has_rho == has_flux)
            throw config_error(context + ": give exactly one of \"rho\" or \"flux\"");
    } else if (type == "table") {
        detail::reject_unknown_keys(d, {"type", "side", "values", "nodes", "mass"}, context);
        if (!d.contains("values") || !d["values"].is_array())
            throw config_error(context + ": table needs a \"values\" array");
        if (d.contains("nodes")) {
            if (!d["nodes"].is_array() || d["nodes"].size() != d["values"].size())
                throw config_error(context + ": \"nodes\" must parallel \"values\"");
        }
    } else {
        throw config_error(context + ": unknown data type \"" + type + "\"");
    }
}

/// Materializes a boundary-data descriptor as a full-grid vector supported on
/// the incoming half space of the given side (left: v1 > 0, right: v1 < 0).
inline std::vector<double> build_boundary_data(const VelocityGrid& g, const json& d,
                                               const std::string& side) {
    const bool left = side == "left";
    auto incoming = [&](int i) { return left ? g.v1[i] > 0.0 : g.v1[i] < 0.0; };
    std::vector<double> f(g.n(), 0.0);
    const std::string type = d["type"].get<std::string>();

    if (type == "maxwellian") {
        const double t = d["temperature"].get<double>();
        const double drift = detail::optional_number(d, "drift", 0.0);
        for (int i = 0, nn = g.n(); i < nn; ++i) {
            if (!incoming(i)) continue;
            const double dv1 = g.v1[i] - drift;
            const double e = dv1 * dv1 + g.v2[i] * g.v2[i] + g.v3[i] * g.v3[i];
            f[i] = std::exp(-e / (2.0 * t));
        }
        if (d.contains("rho")) {
            const double rho = d["rho"].get<double>();
            if (!(rho > 0.0)) throw config_error("boundary data rho must be positive");
            const double amp = rho / std::pow(2.0 * M_PI * t, 1.5);
            for (double& x : f) x *= amp;
        } else {
            const double target = d["flux"].get<double>();
            if (!(target > 0.0)) throw config_error("boundary data flux must be positive");
            double flux = 0.0;
            for (int i = 0, nn = g.n(); i < nn; ++i) flux += g.w[i] * f[i] * std::abs(g.v1[i]);
            if (!(flux > 0.0)) throw degenerate_data_error("boundary data has zero grid flux");
            const double amp = target / flux;
            for (double& x : f) x *= amp;
        }
        return f;
    }

    // Tabulated data: either aligned with the grid's incoming half (in node
    // order) or carrying its own nodes, resampled by nearest node, with an
    // optional total-mass renormalization.
    const auto& values = d["values"];
    if (!d.contains("nodes")) {
        std::vector<int> half;
        for (int i = 0, nn = g.n(); i < nn; ++i)
            if (incoming(i)) half.push_back(i);
        if (values.size() != half.size())
            throw config_error("table \"values\" length " + std::to_string(values.size()) +
                               " does not match the incoming half-space node count " +
                               std::to_string(half.size()));
        for (size_t k = 0; k < half.size(); ++k) f[half[k]] = values[k].get<double>();
    } else {
        const auto& nodes = d["nodes"];
        std::vector<std::array<double, 3>> pts(nodes.size());
        for (size_t k = 0; k < nodes.size(); ++k) {
            if (!nodes[k].is_array() || nodes[k].size() != 3)
                throw config_error("table node " + std::to_string(k) + " must be [v1,v2,v3]");
            for (int c = 0; c < 3; ++c) pts[k][c] = nodes[k][c].get<double>();
        }
        if (pts.empty()) throw config_error("table \"nodes\" must be nonempty");
        for (int i = 0, nn = g.n(); i < nn; ++i) {
            if (!incoming(i)) continue;
            size_t best = 0;
            double best_d2 = std::numeric_limits<double>::infinity();
            for (size_t k = 0; k < pts.size(); ++k) {
                const double d1 = g.v1[i] - pts[k][0], d2 = g.v2[i] - pts[k][1],
                             d3 = g.v3[i] - pts[k][2];
                const double r2 = d1 * d1 + d2 * d2 + d3 * d3;
                if (r2 < best_d2) {
                    best_d2 = r2;
                    best = k;
                }
            }
            f[i] = values[best].get<double>();
        }
    }
    if (d.contains("mass")) {
        const double target = d["mass"].get<double>();
        if (!(target > 0.0)) throw config_error("table mass must be positive");
        double mass = 0.0;
        for (int i = 0, nn = g.n(); i < nn; ++i) mass += g.w[i] * f[i];
        if (!(mass > 0.0)) throw degenerate_data_error("table data has zero grid mass");
        const double scale = target / mass;
        for (double& x : f) x *= scale;
    }
    return f;
}

inline RunConfig parse_config_json(json j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw config_error("config root must be a JSON object");
    detail::reject_unknown_keys(
        j,
        {"schema_version", "nu", "kappa", "tolerance", "max_iterations", "initial_guess",
         "init_rho", "init_temperature", "grid", "boundary", "verify_seed"},
        "config");
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
        j["schema_version"].get<int>() != 1)
        throw config_error("config needs \"schema_version\": 1");

    RunConfig rc;
    rc.settings.nu = detail::require_number(j, "nu", "config");
    rc.settings.kappa = detail::require_number(j, "kappa", "config");
    rc.settings.tolerance = detail::optional_number(j, "tolerance", rc.settings.tolerance);
    if (j.contains("max_iterations")) {
        if (!j["max_iterations"].is_number_integer())
            throw config_error("\"max_iterations\" must be an integer");
        rc.settings.max_iterations = j["max_iterations"].get<int>();
    }
    if (j.contains("initial_guess")) {
        const std::string ig = j["initial_guess"].get<std::string>();
        if (ig == "equilibrium-fit")
            rc.settings.init = InitialGuess::EquilibriumFit;
        else if (ig == "wall-blend")
            rc.settings.init = InitialGuess::WallBlend;
        else
            throw config_error("initial_guess must be \"equilibrium-fit\" or \"wall-blend\"");
    }
    rc.settings.init_rho = detail::optional_number(j, "init_rho", 0.0);
    rc.settings.init_temperature = detail::optional_number(j, "init_temperature", 0.0);
    if (j.contains("verify_seed")) {
        if (!j["verify_seed"].is_number_unsigned())
            throw config_error("\"verify_seed\" must be a nonnegative integer");
        rc.verify_seed = j["verify_seed"].get<std::uint64_t>();
    }

    if (!j.contains("grid") || !j["grid"].is_object())
        throw config_error("config needs a \"grid\" object");
    const json& gj = j["grid"];
    detail::reject_unknown_keys(gj, {"cutoff", "velocity_counts", "spatial_intervals"}, "grid");
    rc.cutoff = detail::require_number(gj, "cutoff", "grid");
    if (!gj.contains("velocity_counts") || !gj["velocity_counts"].is_array() ||
        gj["velocity_counts"].size() != 3)
        throw config_error("grid needs \"velocity_counts\": [N1, N2, N3]");
    for (int c = 0; c < 3; ++c) {
        if (!gj["velocity_counts"][c].is_number_integer())
            throw config_error("velocity_counts entries must be integers");
        rc.velocity_counts[c] = gj["velocity_counts"][c].get<int>();
    }
    if (!gj.contains("spatial_intervals") || !gj["spatial_intervals"].is_number_integer())
        throw config_error("grid needs integer \"spatial_intervals\"");
    rc.spatial_intervals = gj["spatial_intervals"].get<int>();

    if (!j.contains("boundary") || !j["boundary"].is_object())
        throw config_error("config needs a \"boundary\" object");
    const json& bj = j["boundary"];
    detail::reject_unknown_keys(bj, {"regime", "delta", "wall_temperatures", "left", "right"},
                                "boundary");
    if (!bj.contains("regime") || !bj["regime"].is_string())
        throw config_error("boundary needs a string \"regime\"");
    const std::string regime = bj["regime"].get<std::string>();
    if (regime == "inflow")
        rc.regime = Regime::Inflow;
    else if (regime == "diffusive")
        rc.regime = Regime::Diffusive;
    else
        throw config_error("regime must be \"inflow\" or \"diffusive\"");
    if (!bj.contains("delta") || !bj["delta"].is_array() || bj["delta"].size() != 3)
        throw config_error("boundary needs \"delta\": [d1, d2, d3]");
    for (int c = 0; c < 3; ++c) rc.delta[c] = bj["delta"][c].get<double>();
    if (!bj.contains("wall_temperatures") || !bj["wall_temperatures"].is_array() ||
        bj["wall_temperatures"].size() != 2)
        throw config_error("boundary needs \"wall_temperatures\": [T_left, T_right]");
    rc.tw0 = bj["wall_temperatures"][0].get<double>();
    rc.tw1 = bj["wall_temperatures"][1].get<double>();

    auto resolve = [&](const char* key) {
        if (!bj.contains(key) || !bj[key].is_object())
            throw config_error(std::string("boundary needs a \"") + key + "\" data object");
        json d = bj[key];
        if (d.contains("file")) {
            detail::reject_unknown_keys(d, {"file"}, std::string("boundary.") + key);
            const std::filesystem::path p = d["file"].get<std::string>();
            d = load_json_file(p.is_absolute() ? p : base_dir / p);
        }
        validate_data_descriptor(d, key, std::string("boundary.") + key);
        return d;
    };
    rc.left_data = resolve("left");
    rc.right_data = resolve("right");
    return rc;
}

inline RunConfig parse_config_file(const std::filesystem::path& path) {
    return parse_config_json(load_json_file(path), path.parent_path());
}

struct Problem {
    VelocityGrid grid;
    SpatialGrid sgrid;
    BoundarySpec spec;
};

inline Problem build_problem(const RunConfig& rc) {
    Problem p;
    p.grid = build_velocity_grid(rc.cutoff, rc.velocity_counts);
    p.sgrid = build_spatial_grid(rc.spatial_intervals);
    std::vector<double> fl = build_boundary_data(p.grid, rc.left_data, "left");
    std::vector<double> fr = build_boundary_data(p.grid, rc.right_data, "right");
    p.spec = make_boundary_spec(p.grid, rc.regime, rc.delta[0], rc.delta[1], rc.delta[2], rc.tw0,
                                rc.tw1, std::move(fl), std::move(fr));
    return p;
}

inline constexpr const char* kProfileHeader =
    "x,rho,u1,u2,u3,temperature,theta11,theta12,theta13,theta22,theta23,theta33,"
    "lambda1,lambda2,lambda3,flux";

struct ProfileRow {
    double x = 0, rho = 0;
    Vec3 u{0, 0, 0};
    double temperature = 0;
    Mat3Sym theta{};
    Vec3 lambda{0, 0, 0};
    double flux = 0;
};

inline std::vector<ProfileRow> profile_rows(const VelocityGrid& g, const SpatialGrid& sg,
                                            const DistributionField& f, const SliceState& st) {
    std::vector<ProfileRow> rows(static_cast<size_t>(f.nx));
    for (int k = 0; k < f.nx; ++k) {
        ProfileRow& r = rows[static_cast<size_t>(k)];
        const MacroFields& m = st.moments[static_cast<size_t>(k)];
        r.x = sg.x(k);
        r.rho = m.rho;
        r.u = m.U;
        r.temperature = m.T;
        r.theta = m.Theta;
        r.lambda = st.tensors[static_cast<size_t>(k)].lambda;
        const auto row = f.row(k);
        double flux = 0.0;
        for (int i = 0, nn = g.n(); i < nn; ++i) flux += g.w[i] * row[i] * g.v1[i];
        r.flux = flux;
    }
    return rows;
}

inline void write_profile_csv(const std::filesystem::path& path,
                              const std::vector<ProfileRow>& rows) {
    std::string out(kProfileHeader);
    out += '\n';
    for (const ProfileRow& r : rows) {
        const double cols[16] = {r.x,        r.rho,      r.u[0],     r.u[1],
                                 r.u[2],     r.temperature, r.theta.a11, r.theta.a12,
                                 r.theta.a13, r.theta.a22, r.theta.a23, r.theta.a33,
                                 r.lambda[0], r.lambda[1], r.lambda[2], r.flux};
        for (int c = 0; c < 16; ++c) {
            if (c) out += ',';
            out += format_g17(cols[c]);
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

inline std::vector<ProfileRow> read_profile_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kProfileHeader)
        throw config_error("unexpected profile header in " + path.string());
    std::vector<ProfileRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double cols[16];
        const char* p = line.c_str();
        for (int c = 0; c < 16; ++c) {
            char* end = nullptr;
            cols[c] = std::strtod(p, &end);
            if (end == p) throw config_error("malformed profile row in " + path.string());
            p = end;
            if (c < 15) {
                if (*p != ',') throw config_error("malformed profile row in " + path.string());
                ++p;
            }
        }
        ProfileRow r;
        r.x = cols[0];
        r.rho = cols[1];
        r.u = {cols[2], cols[3], cols[4]};
        r.temperature = cols[5];
        r.theta = {cols[6], cols[7], cols[8], cols[9], cols[10], cols[11]};
        r.lambda = {cols[12], cols[13], cols[14]};
        r.flux = cols[15];
        rows.push_back(r);
    }
    return rows;
}

namespace detail {

inline json finite_or_null(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

inline json omega_json(const OmegaLedger& led) {
    json checks = json::array();
    for (const OmegaCheck& c : led.checks) {
        json e;
        e["name"] = c.name;
        e["measured"] = finite_or_null(c.measured);
        e["bound"] = finite_or_null(c.bound);
        e["display_bound"] = finite_or_null(c.display_bound);
        e["is_lower"] = c.is_lower;
        e["pass"] = c.pass;
        checks.push_back(std::move(e));
    }
    json out;
    out["all_pass"] = led.all_pass;
    out["checks"] = std::move(checks);
    return out;
}

} // namespace detail

inline const char* termination_name(Termination t) {
    switch (t) {
        case Termination::Converged: return "converged";
        case Termination::MaxIter: return "max_iterations";
        default: return "hypothesis_violation";
    }
}

inline json report_json(const SolveReport& rep, const RunConfig& rc) {
    json j;
    j["schema_version"] = 1;
    j["termination"] = termination_name(rep.termination);
    if (!rep.detail.empty()) j["detail"] = rep.detail;
    j["iterations"] = rep.iterations;
    j["nu"] = rc.settings.nu;
    j["kappa"] = rc.settings.kappa;
    j["tau"] = rep.tau;
    j["delta"] = {rc.delta[0], rc.delta[1], rc.delta[2]};
    j["regime"] = rc.regime == Regime::Inflow ? "inflow" : "diffusive";
    j["residual"] = detail::finite_or_null(rep.residual);
    j["flux_compat"] = rep.flux_compat;
    j["warnings"] = rep.warnings;

    const BoundaryConstants& c = rep.constants;
    json cj;
    cj["a_l1"] = c.a_l1;
    cj["a_l2"] = c.a_l2;
    cj["gamma_l1"] = c.gamma_l1;
    cj["gamma_l2"] = c.gamma_l2;
    cj["a_half_1"] = c.a_half_1;
    cj["a_half_2"] = c.a_half_2;
    cj["c_lr1"] = c.c_lr1;
    cj["c_lr2"] = c.c_lr2;
    cj["c_lm2"] = c.c_lm2;
    cj["flux_left"] = c.flux_left;
    cj["flux_right"] = c.flux_right;
    cj["data_flux_norm"] = c.data_flux_norm;
    cj["data_energy_norm"] = c.data_energy_norm;
    cj["wall_flux_norm"] = c.wall_flux_norm;
    cj["wall_energy_norm"] = c.wall_energy_norm;
    j["constants"] = std::move(cj);

    json fj;
    fj["rate"] = detail::finite_or_null(rep.fit.rate);
    fj["rate_scale"] = rep.fit.rate_scale;
    fj["implied_constant"] = detail::finite_or_null(rep.fit.implied_constant);
    fj["monotone"] = rep.fit.monotone;
    fj["points_used"] = rep.fit.points_used;
    j["contraction"] = std::move(fj);

    if (!rep.records.empty()) {
        j["omega_ledger"] = detail::omega_json(rep.records.back().omega);
        const VelocityCheck& v = rep.records.back().velocity;
        json vj;
        vj["u1_max"] = v.u1_max;
        vj["u1_bound"] = v.u1_bound;
        vj["u1_pass"] = v.u1_pass;
        vj["u23_max"] = v.u23_max;
        vj["u23_base"] = v.u23_base;
        j["velocity_control"] = std::move(vj);
    }

    json hist = json::array();
    for (const IterationRecord& r : rep.records) {
        json e;
        e["iter"] = r.iter;
        e["diff_composite"] = r.diff.composite();
        e["diff_sup_l12"] = r.diff.sup_l12;
        e["s_left"] = detail::finite_or_null(r.s_left);
        e["s_right"] = detail::finite_or_null(r.s_right);
        e["omega_all_pass"] = r.omega.all_pass;
        e["min_density"] = r.min_density;
        e["max_energy"] = r.max_energy;
        e["min_lambda"] = r.min_lambda;
        e["max_lambda"] = r.max_lambda;
        e["u1_max"] = r.velocity.u1_max;
        e["outflux_left"] = r.flux.outflux0;
        e["outflux_right"] = r.flux.outflux1;
        hist.push_back(std::move(e));
    }
    j["iterations_log"] = std::move(hist);
    return j;
}

inline void write_report_json(const std::filesystem::path& path, const SolveReport& rep,
                              const RunConfig& rc) {
    write_file_atomic(path, report_json(rep, rc).dump(2) + "\n");
}

inline constexpr char kFieldMagic[8] = {'E', 'S', 'B', 'G', 'K', 'F', 'L', 'D'};

inline void write_field_binary(const std::filesystem::path& path, const DistributionField& f) {
    std::string out;
    out.reserve(16 + f.data.size() * sizeof(double));
    out.append(kFieldMagic, 8);
    const std::uint32_t dims[2] = {static_cast<std::uint32_t>(f.nx),
                                   static_cast<std::uint32_t>(f.nv)};
    out.append(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.append(reinterpret_cast<const char*>(f.data.data()), f.data.size() * sizeof(double));
    write_file_atomic(path, out);
}

inline DistributionField read_field_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot read " + path.string());
    char magic[8];
    std::uint32_t dims[2];
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in || std::memcmp(magic, kFieldMagic, 8) != 0)
        throw config_error("not a field dump: " + path.string());
    DistributionField f;
    f.nx = static_cast<int>(dims[0]);
    f.nv = static_cast<int>(dims[1]);
    f.data.resize(static_cast<size_t>(f.nx) * f.nv);
    in.read(reinterpret_cast<char*>(f.data.data()),
            static_cast<std::streamsize>(f.data.size() * sizeof(double)));
    if (!in) throw config_error("truncated field dump: " + path.string());
    return f;
}

} // namespace esbgk::io
