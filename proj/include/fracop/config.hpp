#pragma once

#include <array>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracop/coefficients.hpp"
#include "fracop/errors.hpp"
#include "fracop/field_io.hpp"
#include "fracop/frac_power.hpp"
#include "fracop/grid.hpp"
#include "fracop/solve.hpp"

namespace fracop {

/// Parsed problem definition: grid, boundary data, the three coefficients,
/// solver and quadrature settings. Coefficient slots accept
///   constant:<v>
///   affine:<c0>,<cx>,<cy>,<cz>
///   sinusoidal:<base>,<amp>,<axis 0|1|2>,<freq>,<phase>
///   gaussian-decay:<base>,<amp>,<rate>,<x0>,<y0>,<z0>
///   file:<path to a COEFF csv>
struct ProblemConfig {
    Grid grid;
    std::shared_ptr<CoefficientSet> coeffs;
    SolveOptions solver;
    QuadratureSpec quadrature;
    std::optional<double> trace_constant;
    std::string canonical;  // round-trippable serialized form, hashed into manifests
};

namespace config_detail {

using nlohmann::json;

inline std::vector<double> parse_params(const std::string& body, std::size_t expect,
                                        const std::string& path) {
    std::vector<double> out;
    std::stringstream ss(body);
    std::string tok;
    while (std::getline(ss, tok, ','))
        out.push_back(io_detail::parse_double(tok, "coefficient spec at " + path));
    if (out.size() != expect)
        throw ConfigError(path, "expected " + std::to_string(expect) + " parameters, got " +
                                    std::to_string(out.size()));
    return out;
}

inline ScalarFunction parse_scalar_function(const std::string& spec, const std::string& path) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "constant") {
        const auto p = parse_params(body, 1, path);
        return make_constant(p[0]);
    }
    if (kind == "affine") {
        const auto p = parse_params(body, 4, path);
        return make_affine(p[0], p[1], p[2], p[3]);
    }
    if (kind == "sinusoidal") {
        const auto p = parse_params(body, 5, path);
        const int axis = static_cast<int>(p[2]);
        if (axis < 0 || axis > 2) throw ConfigError(path, "sinusoidal axis must be 0, 1 or 2");
        return make_sinusoidal(p[0], p[1], axis, p[3], p[4]);
    }
    if (kind == "gaussian-decay") {
        const auto p = parse_params(body, 6, path);
        return make_gaussian_decay(p[0], p[1], p[2], {p[3], p[4], p[5]});
    }
    throw ConfigError(path, "unknown builtin '" + kind +
                                "' (known: constant, affine, sinusoidal, gaussian-decay, file)");
}

/// Fill one coefficient slot from its spec; file-backed fields get
/// second-order numeric gradients.
inline void apply_coeff_spec(CoefficientSet& cs, int slot, const std::string& spec,
                             const std::string& path) {
    if (spec.rfind("file:", 0) == 0) {
        const std::string fname = spec.substr(5);
        Eigen::VectorXd f;
        try {
            f = load_coeff_field(fname, cs.grid);
        } catch (const IoError& e) {
            throw ConfigError(path, e.what());
        }
        cs.a[slot] = f;
        const auto g = numeric_gradients(f, cs.grid);
        for (int i = 0; i < 3; ++i) cs.da[i][slot] = g[i];
        return;
    }
    set_coefficient(cs, slot, parse_scalar_function(spec, path));
}

inline Eigen::VectorXd sample_spec(const std::string& spec, const Grid& g,
                                   const std::string& path) {
    if (spec.rfind("file:", 0) == 0) {
        try {
            return load_coeff_field(spec.substr(5), g);
        } catch (const IoError& e) {
            throw ConfigError(path, e.what());
        }
    }
    return sample_on_grid(parse_scalar_function(spec, path), g);
}

template <typename T>
T get_field(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) throw ConfigError(path + "." + key, "missing required field");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + "." + key, "wrong type");
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, const std::string& path, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + "." + key, "wrong type");
    }
}

}  // namespace config_detail

inline Quaternion parse_axis(const std::string& spec) {
    if (spec == "e1") return Quaternion::e1();
    if (spec == "e2") return Quaternion::e2();
    if (spec == "e3") return Quaternion::e3();
    if (spec.rfind("random:", 0) == 0) {
        std::mt19937_64 rng(std::stoull(spec.substr(7)));
        std::normal_distribution<double> d(0, 1);
        Quaternion q{0, d(rng), d(rng), d(rng)};
        const double n = q.vec_norm();
        if (n < 1e-12) return Quaternion::e1();
        return Quaternion{0, q.x / n, q.y / n, q.z / n};
    }
    throw ConfigError("axis", "expected e1|e2|e3|random:<seed>, got '" + spec + "'");
}

inline ProblemConfig parse_config_json(const nlohmann::json& j) {
    using namespace config_detail;
    ProblemConfig cfg;

    const json jg = get_field<json>(j, "grid", "config");
    const int nx = get_field<int>(jg, "nx", "config.grid");
    const int ny = get_field<int>(jg, "ny", "config.grid");
    const int nz = get_field<int>(jg, "nz", "config.grid");
    const double h = get_field<double>(jg, "h", "config.grid");
    std::array<double, 3> origin{0, 0, 0};
    if (jg.contains("origin")) {
        const auto o = get_field<std::vector<double>>(jg, "origin", "config.grid");
        if (o.size() != 3) throw ConfigError("config.grid.origin", "expected 3 components");
        origin = {o[0], o[1], o[2]};
    }

    const json jb = get_field<json>(j, "boundary", "config");
    const std::string kind = get_field<std::string>(jb, "kind", "config.boundary");
    BoundaryKind bk;
    if (kind == "dirichlet")
        bk = BoundaryKind::dirichlet;
    else if (kind == "robin_type")
        bk = BoundaryKind::robin_type;
    else
        throw ConfigError("config.boundary.kind", "expected dirichlet|robin_type");
    try {
        cfg.grid = Grid(nx, ny, nz, h, origin, bk);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("config.grid", e.what());
    }

    cfg.coeffs = std::make_shared<CoefficientSet>(cfg.grid);
    const json jc = get_field<json>(j, "coefficients", "config");
    const char* names[3] = {"a1", "a2", "a3"};
    for (int l = 0; l < 3; ++l)
        apply_coeff_spec(*cfg.coeffs, l,
                         get_field<std::string>(jc, names[l], "config.coefficients"),
                         std::string("config.coefficients.") + names[l]);

    if (jb.contains("a_robin"))
        cfg.coeffs->a_robin = sample_spec(get_field<std::string>(jb, "a_robin", "config.boundary"),
                                          cfg.grid, "config.boundary.a_robin");
    if (jb.contains("b_phys"))
        cfg.coeffs->b_phys = sample_spec(get_field<std::string>(jb, "b_phys", "config.boundary"),
                                         cfg.grid, "config.boundary.b_phys");
    if (jb.contains("mu")) cfg.coeffs->mu = get_field<double>(jb, "mu", "config.boundary");

    if (j.contains("solver")) {
        const json js = j.at("solver");
        const std::string m = get_or<std::string>(js, "method", "config.solver", "direct-lu");
        if (m == "direct-lu")
            cfg.solver.method = SolveOptions::Method::direct_lu;
        else if (m == "iterative-krylov")
            cfg.solver.method = SolveOptions::Method::krylov;
        else
            throw ConfigError("config.solver.method", "expected direct-lu|iterative-krylov");
        cfg.solver.rel_tol = get_or<double>(js, "rel_tol", "config.solver", 1e-10);
        if (!(cfg.solver.rel_tol > 0)) throw ConfigError("config.solver.rel_tol", "must be > 0");
        cfg.solver.max_iter = get_or<int>(js, "max_iter", "config.solver", 2000);
        cfg.solver.mean_zero_enforce =
            get_or<bool>(js, "mean_zero_enforce", "config.solver", true);
    }

    if (j.contains("quadrature")) {
        const json jq = j.at("quadrature");
        cfg.quadrature.alpha = get_or<double>(jq, "alpha", "config.quadrature", 0.5);
        cfg.quadrature.n_nodes = get_or<int>(jq, "nodes", "config.quadrature", 400);
        cfg.quadrature.trunc = get_or<double>(jq, "trunc", "config.quadrature", 30.0);
        const std::string side = get_or<std::string>(jq, "side", "config.quadrature", "right");
        if (side == "left")
            cfg.quadrature.side = IntegralSide::left;
        else if (side == "right")
            cfg.quadrature.side = IntegralSide::right;
        else
            throw ConfigError("config.quadrature.side", "expected left|right");
        cfg.quadrature.axis =
            parse_axis(get_or<std::string>(jq, "axis", "config.quadrature", "e1"));
        try {
            cfg.quadrature.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("config.quadrature", e.what());
        }
    }

    if (j.contains("trace_constant"))
        cfg.trace_constant = get_field<double>(j, "trace_constant", "config");

    cfg.canonical = j.dump();
    return cfg;
}

inline ProblemConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config", "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config_json(j);
}

}  // namespace fracop
