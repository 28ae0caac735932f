#pragma once

#include <chrono>
#include <ctime>
#include <functional>
#include <string>

#include "hydropencil/manifest.hpp"

namespace hydropencil {

/// Exit codes: 0 verdict true / run complete, 1 verdict false (with witness),
/// 2 input error, 3 internal limit (NotExact, BlowUp, Undecided).
enum ExitCode : int {
    kExitTrue = 0,
    kExitFalse = 1,
    kExitInputError = 2,
    kExitLimit = 3,
};

struct RunOptions {
    std::string command;
    std::string manifest_path;
    unsigned steps = 1;
    bool no_timestamp = false;
};

struct RunResult {
    nlohmann::ordered_json report;
    int exit_code = kExitTrue;
    std::string csv;  // simulate: conservation log
};

namespace detail {

inline nlohmann::ordered_json witness_json(const std::vector<Witness>& ws) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& w : ws) {
        nlohmann::ordered_json o;
        o["what"] = w.what;
        if (!w.value.empty()) o["value"] = w.value;
        arr.push_back(o);
    }
    return arr;
}

inline nlohmann::ordered_json matrix_json(const ExprMatrix& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::uint32_t i = 0; i < m.size(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (std::uint32_t k = 0; k < m.size(); ++k) row.push_back(m(i, k).str());
        rows.push_back(row);
    }
    return rows;
}

inline nlohmann::ordered_json vector_json(const std::vector<Expr>& v) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& e : v) arr.push_back(e.str());
    return arr;
}

inline nlohmann::ordered_json tensor3_json(const Tensor3& t) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const auto& p : t) {
        nlohmann::ordered_json b = nlohmann::ordered_json::array();
        for (const auto& q : p) b.push_back(vector_json(q));
        a.push_back(b);
    }
    return a;
}

/// The manifest's operator: h-form when eta and h are present, otherwise the
/// Levi-Civita operator of the metric named "g" (or the only metric).
inline DNOperator manifest_operator(const Manifest& m, std::string& source) {
    if (m.eta && m.h) {
        source = "from_h(eta, h)";
        return from_h(*m.eta, *m.h);
    }
    const ContraMetric* g = nullptr;
    if (auto it = m.metrics.find("g"); it != m.metrics.end())
        g = &it->second;
    else if (m.metrics.size() == 1)
        g = &m.metrics.begin()->second;
    if (!g) throw ManifestError("metrics", "need eta+h, or a metric named \"g\"");
    source = "from_metric(g)";
    return from_metric(*g);
}

inline const ContraMetric& named_metric(const Manifest& m, const std::string& name) {
    auto it = m.metrics.find(name);
    if (it == m.metrics.end()) throw ManifestError("metrics." + name, "missing");
    return it->second;
}

inline const VectorField& named_field(const Manifest& m, const std::string& name) {
    auto it = m.vector_fields.find(name);
    if (it == m.vector_fields.end()) throw ManifestError("vector_fields." + name, "missing");
    return it->second;
}

inline MonitorSpec monitor_spec(const Manifest& m) {
    MonitorSpec spec;
    if (m.eta) {
        std::uint32_t n = m.eta->dim();
        ExprMatrix low = invert_metric(*m.eta);
        spec.eta_low.assign(n, std::vector<double>(n, 0.0));
        for (std::uint32_t i = 0; i < n; ++i)
            for (std::uint32_t j = 0; j < n; ++j)
                spec.eta_low[i][j] = low(i, j).constant_value().get_d();
    }
    if (m.h) spec.h = m.h->c;
    return spec;
}

}  // namespace detail

inline RunResult run(const RunOptions& opt) {
    using clock = std::chrono::steady_clock;
    RunResult out;
    nlohmann::ordered_json& rep = out.report;
    rep["command"] = opt.command;

    auto t0 = clock::now();
    auto finish = [&](int code) {
        if (!opt.no_timestamp) {
            rep["timings_ms"] =
                std::chrono::duration<double, std::milli>(clock::now() - t0).count();
            std::time_t now = std::time(nullptr);
            char buf[32];
            std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
            rep["timestamp"] = buf;
        }
        out.exit_code = code;
        return out;
    };

    Manifest m;
    try {
        m = load_manifest_file(opt.manifest_path);
    } catch (const ManifestError& e) {
        rep["error"] = e.what();
        return finish(kExitInputError);
    }
    rep["inputs"] = m.raw;

    try {
        const std::string& cmd = opt.command;

        if (cmd == "check-operator") {
            std::string source;
            DNOperator P = detail::manifest_operator(m, source);
            HamiltonianReport hr = is_hamiltonian(P);
            rep["operator"] = source;
            rep["verdicts"] = {{"skew_ok", hr.skew_ok},
                               {"nondegenerate", hr.nondegenerate},
                               {"torsionless_compatible", hr.torsionless_compatible},
                               {"flat", hr.flat},
                               {"hamiltonian", to_string(hr.verdict)}};
            rep["witnesses"] = detail::witness_json(hr.witnesses);
            if (hr.verdict == Verdict::Undecided) return finish(kExitLimit);
            return finish(hr.verdict == Verdict::True ? kExitTrue : kExitFalse);
        }

        if (cmd == "residuals") {
            if (!m.eta || !m.h) throw ManifestError("h", "residuals needs eta and h");
            HResiduals res = mokhov_residuals(*m.eta, *m.h);
            rep["verdicts"] = {{"all_zero", res.all_zero}};
            nlohmann::ordered_json ws = nlohmann::ordered_json::array();
            std::uint32_t n = m.eta->dim();
            for (std::uint32_t i = 0; i < n && ws.size() < 8; ++i)
                for (std::uint32_t j = 0; j < n; ++j)
                    for (std::uint32_t k = 0; k < n; ++k) {
                        for (std::uint32_t l = 0; l < n; ++l)
                            if (!res.r17[i][j][k][l].is_zero() && ws.size() < 8)
                                ws.push_back({{"what", "r17[" + std::to_string(i + 1) + "," +
                                                           std::to_string(j + 1) + "," +
                                                           std::to_string(k + 1) + "," +
                                                           std::to_string(l + 1) + "]"},
                                              {"value", res.r17[i][j][k][l].str()}});
                        if (!res.r18[i][j][k].is_zero() && ws.size() < 8)
                            ws.push_back({{"what", "r18[" + std::to_string(i + 1) + "," +
                                                       std::to_string(j + 1) + "," +
                                                       std::to_string(k + 1) + "]"},
                                          {"value", res.r18[i][j][k].str()}});
                    }
            rep["witnesses"] = ws;
            return finish(res.all_zero ? kExitTrue : kExitFalse);
        }

        if (cmd == "check-compat") {
            if (!m.eta || !m.h) throw ManifestError("h", "check-compat needs eta and h");
            DNOperator P1 = from_h(*m.eta, *m.h);
            HResiduals res = mokhov_residuals(*m.eta, *m.h);
            bool route_residuals = res.all_zero;
            rep["verdicts"]["residuals"] = route_residuals;

            bool g1_nondegenerate = !P1.g.det().is_zero();
            rep["verdicts"]["g1_nondegenerate"] = g1_nondegenerate;

            std::optional<bool> route_pencil, route_lie;
            if (g1_nondegenerate) {
                PencilReport pr = compat_pencil_check(ContraMetric{P1.g}, *m.eta);
                route_pencil = pr.verdict;
                rep["verdicts"]["pencil"] = pr.verdict;
                rep["witnesses"] = detail::witness_json(pr.witnesses);

                bool lie_ok = false;
                try {
                    HRecovery rec = h_from_operator(P1, *m.eta);
                    VectorField minus_h{rec.h.c};
                    for (auto& e : minus_h.c) e = -e;
                    lie_ok = lie_operator(constant_operator(*m.eta), minus_h) == P1 &&
                             is_hamiltonian(P1).verdict == Verdict::True;
                } catch (const NotIntegrable&) {
                    lie_ok = false;
                } catch (const GMismatch&) {
                    lie_ok = false;
                }
                route_lie = lie_ok;
                rep["verdicts"]["lie_reconstruction"] = lie_ok;
            } else {
                rep["verdicts"]["pencil"] = "skipped (g1 degenerate)";
                rep["verdicts"]["lie_reconstruction"] = "skipped (g1 degenerate)";
            }

            bool agree = (!route_pencil || *route_pencil == route_residuals) &&
                         (!route_lie || *route_lie == route_residuals);
            rep["verdicts"]["criteria_agree"] = agree;
            rep["verdicts"]["compatible"] = route_residuals;
            if (!agree) {
                rep["bug_report"] = "criteria disagree; canonical inputs echoed above";
                return finish(kExitLimit);
            }
            return finish(route_residuals ? kExitTrue : kExitFalse);
        }

        if (cmd == "lie") {
            std::string source;
            DNOperator P = detail::manifest_operator(m, source);
            const VectorField& xi = detail::named_field(m, "xi");
            DNOperator L = lie_operator(P, xi);
            rep["operator"] = source;
            rep["lie_g"] = detail::matrix_json(L.g);
            rep["lie_b"] = detail::tensor3_json(L.b);
            rep["verdicts"] = {{"lie2_vanishes", lie2_vanishes(P, xi)}};
            return finish(kExitTrue);
        }

        if (cmd == "flat-pencil") {
            const ContraMetric& g2 = m.metrics.count("g2") ? detail::named_metric(m, "g2")
                                     : m.eta ? *m.eta
                                             : throw ManifestError("metrics.g2", "missing");
            const VectorField& f = detail::named_field(m, "f");
            Expr c = m.c ? *m.c : Expr::zero(m.ctx);
            FlatPencilResult res = flat_pencil_from_f(g2, f, c);
            rep["g1"] = detail::matrix_json(res.g1.g);
            rep["verdicts"] = {{"eq26", res.eq26_ok},
                               {"eq28", res.eq28_ok},
                               {"g2_flat", res.g2_flat}};
            rep["witnesses"] = detail::witness_json(res.witnesses);
            bool verdict = res.eq26_ok && res.eq28_ok;
            if (verdict && !res.g1.g.det().is_zero()) {
                PencilReport pr = compat_pencil_check(res.g1, g2);
                rep["verdicts"]["pencil"] = pr.verdict;
                verdict = verdict && pr.verdict;
                DubrovinDelta dd = dubrovin_delta(res.g1, g2);
                CovariantHessianResult hess = covariant_hessian(g2, f);
                bool delta_match = true;
                std::uint32_t n = g2.dim();
                for (std::uint32_t i = 0; i < n && delta_match; ++i)
                    for (std::uint32_t j = 0; j < n && delta_match; ++j)
                        for (std::uint32_t k = 0; k < n; ++k)
                            if (!(dd.upper[i][j][k] - hess.upper[i][j][k]).is_zero()) {
                                delta_match = false;
                                break;
                            }
                rep["verdicts"]["delta_matches_hessian"] = delta_match;
                verdict = verdict && delta_match;
            }
            return finish(verdict ? kExitTrue : kExitFalse);
        }

        if (cmd == "quasihom") {
            const ContraMetric& g1 = detail::named_metric(m, "g1");
            const ContraMetric& g2 = m.metrics.count("g2") ? detail::named_metric(m, "g2")
                                     : m.eta ? *m.eta
                                             : throw ManifestError("metrics.g2", "missing");
            if (!m.tau) throw ManifestError("tau", "required for quasihom");
            if (!m.degree) throw ManifestError("degree", "required for quasihom");
            QuasihomReport qr = quasihomogeneous_check(g1, g2, *m.tau, *m.degree);
            rep["e"] = detail::vector_json(qr.e.c);
            rep["E"] = detail::vector_json(qr.E.c);
            rep["verdicts"] = {{"cond1_bracket", qr.cond1},
                               {"cond2_scaling", qr.cond2},
                               {"cond3_pencil", qr.cond3},
                               {"cond4_killing", qr.cond4},
                               {"quasihomogeneous", qr.verdict}};
            rep["witnesses"] = detail::witness_json(qr.witnesses);
            return finish(qr.verdict ? kExitTrue : kExitFalse);
        }

        if (cmd == "hierarchy") {
            if (!m.eta || !m.h) throw ManifestError("h", "hierarchy needs eta and h");
            HierarchyResult hres = build_hierarchy(*m.eta, *m.h, opt.steps);
            nlohmann::ordered_json flows = nlohmann::ordered_json::array();
            bool all_ok = true;
            for (std::size_t s = 0; s < hres.flows.size(); ++s) {
                nlohmann::ordered_json fj;
                fj["step"] = s + 1;
                fj["M"] = detail::matrix_json(hres.flows[s].M);
                if (hres.flows[s].potential)
                    fj["potential"] = detail::vector_json(hres.flows[s].potential->c);
                if (hres.flows[s].potential) {
                    BiHamiltonianReport br = bihamiltonian_check(hres.flows[s], *m.eta, *m.h);
                    fj["bihamiltonian"] = {{"is_first_flow", br.is_first_flow},
                                           {"via_p1", br.via_p1},
                                           {"via_p2", br.via_p2},
                                           {"density_found", br.density_found},
                                           {"verdict", br.verdict}};
                    if (br.h2_density) fj["density"] = br.h2_density->rho.str();
                    all_ok = all_ok && br.verdict;
                }
                flows.push_back(fj);
            }
            rep["flows"] = flows;
            if (hres.failed_step) {
                rep["verdicts"] = {{"not_exact_at_step", *hres.failed_step}};
                return finish(kExitLimit);
            }
            rep["verdicts"] = {{"bihamiltonian_all", all_ok}};
            return finish(all_ok ? kExitTrue : kExitFalse);
        }

        if (cmd == "recover-h") {
            if (!m.eta) throw ManifestError("eta", "recover-h needs eta");
            const ContraMetric& g1 = detail::named_metric(m, "g1");
            DNOperator P1 = from_metric(g1);
            try {
                HRecovery rec = h_from_operator(P1, *m.eta);
                rep["h"] = detail::vector_json(rec.h.c);
                rep["verdicts"] = {{"recovered", true},
                                   {"null_dimension", rec.null_dimension}};
                return finish(kExitTrue);
            } catch (const NotIntegrable& e) {
                rep["verdicts"] = {{"recovered", false}};
                rep["witnesses"] = nlohmann::ordered_json::array({{{"what", e.what()}}});
                return finish(kExitFalse);
            } catch (const GMismatch& e) {
                rep["verdicts"] = {{"recovered", false}};
                rep["witnesses"] = nlohmann::ordered_json::array({{{"what", e.what()}}});
                return finish(kExitFalse);
            }
        }

        if (cmd == "simulate") {
            if (!m.eta || !m.h) throw ManifestError("h", "simulate needs eta and h");
            if (!m.sim) throw ManifestError("sim", "simulate needs a sim section");
            HierarchyResult hres = build_hierarchy(*m.eta, *m.h, opt.steps ? opt.steps : 1);
            if (hres.failed_step) {
                rep["verdicts"] = {{"not_exact_at_step", *hres.failed_step}};
                return finish(kExitLimit);
            }
            const HydroFlow& flow = hres.flows.back();
            SimConfig cfg{m.sim->dt, m.sim->t_end, m.sim->scheme, m.sim->stride};
            EvolveResult er = evolve(flow, m.initial_state(), cfg, detail::monitor_spec(m));
            out.csv = er.log.csv(m.ctx->dimension());
            const auto& first = er.log.rows.front();
            const auto& last = er.log.rows.back();
            auto rel = [](Real a, Real b) {
                Real denom = std::max(std::abs(a), Real(1e-300L));
                return double(std::abs(b - a) / denom);
            };
            rep["flow"] = detail::matrix_json(flow.M);
            rep["verdicts"] = {{"t_end", last.t},
                               {"H1_rel_drift", rel(first.H1, last.H1)},
                               {"H2_rel_drift", rel(first.H2, last.H2)}};
            nlohmann::ordered_json cas = nlohmann::ordered_json::array();
            for (std::size_t i = 0; i < first.casimirs.size(); ++i)
                cas.push_back(rel(first.casimirs[i], last.casimirs[i]));
            rep["verdicts"]["casimir_rel_drift"] = cas;
            return finish(kExitTrue);
        }

        if (cmd == "commute") {
            if (!m.eta || !m.h) throw ManifestError("h", "commute needs eta and h");
            if (!m.sim) throw ManifestError("sim", "commute needs a sim section");
            HierarchyResult hres = build_hierarchy(*m.eta, *m.h, 2);
            if (hres.failed_step) {
                rep["verdicts"] = {{"not_exact_at_step", *hres.failed_step}};
                return finish(kExitLimit);
            }
            CommutatorDefect d = commutator_test(hres.flows[0], hres.flows[1], m.initial_state(),
                                                 m.sim->tau, m.sim->scheme);
            rep["verdicts"] = {{"tau", m.sim->tau},
                               {"defect", d.defect},
                               {"defect_half", d.defect_half},
                               {"ratio", d.defect_half > 0 ? d.defect / d.defect_half : 0.0}};
            return finish(kExitTrue);
        }

        rep["error"] = "unknown command '" + cmd + "'";
        return finish(kExitInputError);
    } catch (const ManifestError& e) {
        rep["error"] = e.what();
        return finish(kExitInputError);
    } catch (const NotExact& e) {
        rep["error"] = e.what();
        return finish(kExitLimit);
    } catch (const BlowUp& e) {
        rep["error"] = e.what();
        return finish(kExitLimit);
    } catch (const NonPolynomial& e) {
        rep["error"] = e.what();
        return finish(kExitLimit);
    } catch (const NumericPole& e) {
        rep["error"] = e.what();
        return finish(kExitLimit);
    } catch (const Error& e) {
        rep["error"] = e.what();
        return finish(kExitInputError);
    }
}

}  // namespace hydropencil
