#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hydropencil/sim.hpp"

namespace hydropencil {

/// Problem description parsed from a JSON manifest. All symbolic entries are
/// expression strings in the expr grammar; schema violations carry the field
/// path.
struct Manifest {
    nlohmann::ordered_json raw;

    ContextPtr ctx;
    std::optional<ContraMetric> eta;
    std::map<std::string, ContraMetric> metrics;
    std::optional<VectorField> h;
    std::map<std::string, VectorField> vector_fields;
    std::optional<Expr> tau;
    std::optional<Expr> degree;
    std::optional<Expr> c;
    std::map<std::string, CoordinateMap> coordinate_maps;

    struct Sim {
        std::size_t m = 256;
        double L = 2.0 * std::numbers::pi;
        double dt = 1e-3;
        double t_end = 0.5;
        DerivScheme scheme = DerivScheme::Spectral;
        std::size_t stride = 10;
        double tau = 1e-2;
        // per field: list of (mode, cos coefficient, sin coefficient)
        std::vector<std::vector<std::array<double, 3>>> initial;
    };
    std::optional<Sim> sim;

    GridState initial_state() const {
        if (!sim) throw ManifestError("sim", "section required for this command");
        GridState s;
        s.m = sim->m;
        s.L = sim->L;
        s.time = 0.0;
        s.fields.assign(sim->initial.size(), std::vector<Real>(s.m, 0.0L));
        for (std::size_t f = 0; f < sim->initial.size(); ++f)
            for (std::size_t p = 0; p < s.m; ++p) {
                double x = s.x(p);
                double acc = 0.0;
                for (const auto& mode : sim->initial[f]) {
                    double w = 2.0 * std::numbers::pi * mode[0] * x / s.L;
                    acc += mode[1] * std::cos(w) + mode[2] * std::sin(w);
                }
                s.fields[f][p] = acc;
            }
        return s;
    }
};

namespace detail {

inline mpq_class parse_rational(const nlohmann::ordered_json& j, const std::string& path) {
    try {
        if (j.is_number_integer()) return mpq_class(static_cast<long>(j.get<long long>()));
        if (j.is_string()) {
            std::string s = j.get<std::string>();
            mpq_class q(s);
            q.canonicalize();
            return q;
        }
    } catch (const std::exception&) {
        throw ManifestError(path, "not a rational (use an integer or a string like \"1/2\")");
    }
    throw ManifestError(path, "not a rational (use an integer or a string like \"1/2\")");
}

inline Expr parse_expr_field(const nlohmann::ordered_json& j, const ContextPtr& ctx,
                             const std::string& path) {
    if (!j.is_string()) throw ManifestError(path, "expected an expression string");
    try {
        return parse(j.get<std::string>(), ctx);
    } catch (const Error& e) {
        throw ManifestError(path, e.what());
    }
}

inline ExprMatrix parse_matrix(const nlohmann::ordered_json& j, const ContextPtr& ctx,
                               std::uint32_t n, const std::string& path, bool rational_only) {
    if (!j.is_array() || j.size() != n) throw ManifestError(path, "expected an NxN array");
    ExprMatrix m(ctx, n);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (!j[i].is_array() || j[i].size() != n)
            throw ManifestError(path + "[" + std::to_string(i) + "]", "expected a row of N entries");
        for (std::uint32_t k = 0; k < n; ++k) {
            std::string p = path + "[" + std::to_string(i) + "][" + std::to_string(k) + "]";
            m(i, k) = rational_only ? Expr::constant(ctx, parse_rational(j[i][k], p))
                                    : parse_expr_field(j[i][k], ctx, p);
        }
    }
    return m;
}

inline std::vector<Expr> parse_vector(const nlohmann::ordered_json& j, const ContextPtr& ctx,
                                      std::uint32_t n, const std::string& path) {
    if (!j.is_array() || j.size() != n)
        throw ManifestError(path, "expected an array of N expression strings");
    std::vector<Expr> v;
    for (std::uint32_t i = 0; i < n; ++i)
        v.push_back(parse_expr_field(j[i], ctx, path + "[" + std::to_string(i) + "]"));
    return v;
}

}  // namespace detail

inline Manifest load_manifest(const nlohmann::ordered_json& j) {
    Manifest m;
    m.raw = j;
    if (!j.is_object()) throw ManifestError("", "manifest must be a JSON object");
    if (!j.contains("dimension") || !j["dimension"].is_number_integer())
        throw ManifestError("dimension", "required positive integer");
    long n_long = j["dimension"].get<long>();
    if (n_long < 1 || n_long > 16) throw ManifestError("dimension", "must be in 1..16");
    auto n = static_cast<std::uint32_t>(n_long);

    std::vector<std::string> coords;
    if (j.contains("coordinates")) {
        if (!j["coordinates"].is_array() || j["coordinates"].size() != n)
            throw ManifestError("coordinates", "expected N coordinate names");
        for (const auto& c : j["coordinates"]) {
            if (!c.is_string()) throw ManifestError("coordinates", "names must be strings");
            coords.push_back(c.get<std::string>());
        }
    } else {
        for (std::uint32_t i = 1; i <= n; ++i) coords.push_back("v" + std::to_string(i));
    }
    try {
        m.ctx = Context::make(coords, {});
    } catch (const Error& e) {
        throw ManifestError("coordinates", e.what());
    }

    if (j.contains("eta")) {
        ExprMatrix eta = detail::parse_matrix(j["eta"], m.ctx, n, "eta", true);
        ContraMetric em{eta};
        if (!eta.is_symmetric() || eta.det().is_zero())
            throw ManifestError("eta", "must be symmetric and nondegenerate");
        m.eta = em;
    }
    if (j.contains("metrics")) {
        if (!j["metrics"].is_object()) throw ManifestError("metrics", "expected an object");
        for (const auto& [name, val] : j["metrics"].items()) {
            ContraMetric g{detail::parse_matrix(val, m.ctx, n, "metrics." + name, false)};
            if (!g.g.is_symmetric()) throw ManifestError("metrics." + name, "must be symmetric");
            m.metrics.emplace(name, std::move(g));
        }
    }
    if (j.contains("h"))
        m.h = VectorField{detail::parse_vector(j["h"], m.ctx, n, "h")};
    if (j.contains("vector_fields")) {
        if (!j["vector_fields"].is_object())
            throw ManifestError("vector_fields", "expected an object");
        for (const auto& [name, val] : j["vector_fields"].items())
            m.vector_fields.emplace(
                name, VectorField{detail::parse_vector(val, m.ctx, n, "vector_fields." + name)});
    }
    if (j.contains("tau")) m.tau = detail::parse_expr_field(j["tau"], m.ctx, "tau");
    if (j.contains("degree"))
        m.degree = Expr::constant(m.ctx, detail::parse_rational(j["degree"], "degree"));
    if (j.contains("c")) m.c = Expr::constant(m.ctx, detail::parse_rational(j["c"], "c"));

    if (j.contains("coordinate_maps")) {
        if (!j["coordinate_maps"].is_object())
            throw ManifestError("coordinate_maps", "expected an object");
        for (const auto& [name, val] : j["coordinate_maps"].items()) {
            std::string base = "coordinate_maps." + name;
            if (!val.is_object() || !val.contains("forward") || !val.contains("inverse"))
                throw ManifestError(base, "expected {forward: [...], inverse: [...]}");
            CoordinateMap map{detail::parse_vector(val["forward"], m.ctx, n, base + ".forward"),
                              detail::parse_vector(val["inverse"], m.ctx, n, base + ".inverse")};
            try {
                map.validate();
            } catch (const InvalidMap& e) {
                throw ManifestError(base, e.what());
            }
            m.coordinate_maps.emplace(name, std::move(map));
        }
    }

    if (j.contains("sim")) {
        const auto& js = j["sim"];
        if (!js.is_object()) throw ManifestError("sim", "expected an object");
        Manifest::Sim s;
        auto num = [&](const char* key, double dflt, bool required = false) {
            if (!js.contains(key)) {
                if (required) throw ManifestError(std::string("sim.") + key, "required");
                return dflt;
            }
            if (!js[key].is_number())
                throw ManifestError(std::string("sim.") + key, "expected a number");
            return js[key].get<double>();
        };
        s.m = static_cast<std::size_t>(num("m", 256));
        if (s.m < 16 || s.m % 2 != 0) throw ManifestError("sim.m", "grid size must be even, >= 16");
        s.L = num("L", 2.0 * std::numbers::pi);
        s.dt = num("dt", 1e-3, true);
        s.t_end = num("t_end", 0.5, true);
        if (s.dt <= 0 || s.t_end < 0)
            throw ManifestError("sim.dt", "need dt > 0 and t_end >= 0");
        s.stride = static_cast<std::size_t>(num("stride", 10));
        if (s.stride == 0) throw ManifestError("sim.stride", "must be positive");
        s.tau = num("tau", 1e-2);
        if (js.contains("scheme")) {
            std::string sch = js["scheme"].get<std::string>();
            if (sch == "spectral")
                s.scheme = DerivScheme::Spectral;
            else if (sch == "central4")
                s.scheme = DerivScheme::Central4;
            else
                throw ManifestError("sim.scheme", "expected \"spectral\" or \"central4\"");
        }
        if (!js.contains("initial") || !js["initial"].is_array() || js["initial"].size() != n)
            throw ManifestError("sim.initial", "expected one Fourier mode list per field");
        for (std::size_t f = 0; f < n; ++f) {
            std::vector<std::array<double, 3>> modes;
            for (const auto& mj : js["initial"][f]) {
                if (!mj.is_array() || mj.size() != 3)
                    throw ManifestError("sim.initial", "each mode is [mode, cos, sin]");
                modes.push_back({mj[0].get<double>(), mj[1].get<double>(), mj[2].get<double>()});
            }
            s.initial.push_back(std::move(modes));
        }
        m.sim = std::move(s);
    }
    return m;
}

inline Manifest load_manifest_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ManifestError("", "cannot open manifest file '" + path + "'");
    nlohmann::ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ManifestError("", std::string("JSON parse error: ") + e.what());
    }
    return load_manifest(j);
}

}  // namespace hydropencil
