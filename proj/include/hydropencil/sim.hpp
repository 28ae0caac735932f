#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "hydropencil/hierarchy.hpp"

namespace hydropencil {

// Grid arithmetic runs in extended precision so that conservation drifts of a
// well-resolved run stay measurable above the round-off floor.
using Real = long double;

/// N real-valued fields sampled on a uniform periodic grid.
struct GridState {
    std::size_t m = 0;
    double L = 2.0 * std::numbers::pi;
    std::vector<std::vector<Real>> fields;
    double time = 0.0;

    std::size_t nfields() const { return fields.size(); }
    double x(std::size_t p) const { return L * double(p) / double(m); }
};

enum class DerivScheme { Spectral, Central4 };

struct SimConfig {
    double dt = 1e-3;
    double t_end = 0.0;
    DerivScheme scheme = DerivScheme::Spectral;
    std::size_t monitor_stride = 1;
};

namespace detail {

/// Trigonometric differentiation matrix for an even periodic grid: the exact
/// derivative of the trigonometric interpolant, with the Nyquist mode dropped.
/// Cached per grid size; the period enters as a scale factor at apply time.
class SpectralDiff {
  public:
    static std::shared_ptr<const SpectralDiff> get(std::size_t m) {
        static std::mutex mu;
        static std::map<std::size_t, std::shared_ptr<const SpectralDiff>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(m);
        if (it != cache.end()) return it->second;
        auto made = std::shared_ptr<const SpectralDiff>(new SpectralDiff(m));
        cache.emplace(m, made);
        return made;
    }

    // out = d/dx of the interpolant of `in` on a grid of period L
    void apply(const std::vector<Real>& in, std::vector<Real>& out, double L) const {
        std::size_t m = in.size();
        out.assign(m, 0.0L);
        Real scale = Real(2.0L) * std::numbers::pi_v<Real> / Real(L);
        for (std::size_t i = 0; i < m; ++i) {
            Real acc = 0.0L;
            for (std::size_t j = 0; j < m; ++j) {
                if (i == j) continue;
                acc += row_[(i - j + m) % m] * in[j];
            }
            out[i] = acc * scale;
        }
    }

  private:
    explicit SpectralDiff(std::size_t m) : row_(m, 0.0L) {
        // D_{ij} = (-1)^{i-j} / (2 tan((i-j) pi / m)), circulant in i-j.
        // Antisymmetry is imposed bit-exactly so the discrete quadratic
        // invariants see a skew operator, not one skew only up to rounding.
        for (std::size_t d = 1; d <= m / 2; ++d) {
            Real angle = std::numbers::pi_v<Real> * Real(d) / Real(m);
            Real value = 0.5L / std::tan(angle);
            row_[d] = (d % 2 == 0) ? value : -value;
            row_[m - d] = -row_[d];
        }
        if (m % 2 == 0) row_[m / 2] = 0.0L;  // Nyquist
    }

    std::vector<Real> row_;  // row_[d] = D_{i,i-d} for the 2*pi grid
};

inline void spectral_derivative(const std::vector<Real>& in, std::vector<Real>& out, double L) {
    SpectralDiff::get(in.size())->apply(in, out, L);
}

inline void central4_derivative(const std::vector<Real>& in, std::vector<Real>& out, double L) {
    std::size_t m = in.size();
    Real h = Real(L) / Real(m);
    out.resize(m);
    for (std::size_t p = 0; p < m; ++p) {
        std::size_t p1 = (p + 1) % m, p2 = (p + 2) % m;
        std::size_t m1 = (p + m - 1) % m, m2 = (p + m - 2) % m;
        out[p] = (-in[p2] + 8.0L * in[p1] - 8.0L * in[m1] + in[m2]) / (12.0L * h);
    }
}

/// Expression flattened for fast pointwise evaluation on grid data.
struct CompiledExpr {
    struct Term {
        Real c;
        std::vector<std::uint32_t> e;
    };
    std::vector<Term> num, den;
    double pole_eps = 1e-12;

    static std::vector<Term> flatten(const Poly& p) {
        std::vector<Term> out;
        out.reserve(p.terms().size());
        for (const auto& t : p.terms()) out.push_back({Real(t.c.get_d()), t.e});
        return out;
    }

    explicit CompiledExpr(const Expr& ex) : num(flatten(ex.num())), den(flatten(ex.den())) {}

    static Real eval_terms(const std::vector<Term>& ts, const Real* v) {
        Real sum = 0.0L;
        for (const auto& t : ts) {
            Real mono = t.c;
            for (std::size_t i = 0; i < t.e.size(); ++i) {
                Real p = 1.0L;
                for (std::uint32_t k = 0; k < t.e[i]; ++k) p *= v[i];
                mono *= p;
            }
            sum += mono;
        }
        return sum;
    }

    Real operator()(const Real* v) const {
        Real d = eval_terms(den, v);
        if (std::abs(double(d)) <= pole_eps) throw NumericPole(double(d));
        return eval_terms(num, v) / d;
    }
};

struct CompiledFlow {
    std::size_t n;
    std::vector<CompiledExpr> entries;  // row-major M^i_k

    explicit CompiledFlow(const HydroFlow& flow) : n(flow.dim()) {
        for (std::uint32_t i = 0; i < flow.dim(); ++i)
            for (std::uint32_t k = 0; k < flow.dim(); ++k) entries.emplace_back(flow.M(i, k));
    }
};

}  // namespace detail

inline std::vector<std::vector<Real>> x_derivative(const GridState& s, DerivScheme scheme) {
    if (scheme == DerivScheme::Spectral && s.m % 2 != 0) throw OddGridSpectral();
    std::vector<std::vector<Real>> out(s.nfields());
    for (std::size_t f = 0; f < s.nfields(); ++f) {
        if (scheme == DerivScheme::Spectral)
            detail::spectral_derivative(s.fields[f], out[f], s.L);
        else
            detail::central4_derivative(s.fields[f], out[f], s.L);
    }
    return out;
}

inline std::vector<std::vector<Real>> x_derivative(const GridState& s) {
    return x_derivative(s, DerivScheme::Spectral);
}

/// (dv^i/dt)(x_p) = sum_k M^i_k(v(x_p)) (v^k_x)(x_p), grid-pointwise.
inline std::vector<std::vector<Real>> rhs(const HydroFlow& flow, const GridState& s,
                                          DerivScheme scheme = DerivScheme::Spectral) {
    detail::CompiledFlow cf(flow);
    auto vx = x_derivative(s, scheme);
    std::size_t n = s.nfields();
    std::vector<std::vector<Real>> out(n, std::vector<Real>(s.m, 0.0L));
    std::vector<Real> point(n);
    for (std::size_t p = 0; p < s.m; ++p) {
        for (std::size_t f = 0; f < n; ++f) point[f] = s.fields[f][p];
        for (std::size_t i = 0; i < n; ++i) {
            Real acc = 0.0L;
            for (std::size_t k = 0; k < n; ++k)
                acc += cf.entries[i * n + k](point.data()) * vx[k][p];
            out[i][p] = acc;
        }
    }
    return out;
}

struct ConservationRow {
    double t;
    Real H1;
    Real H2;
    std::vector<Real> casimirs;
    Real max_vx;
};

struct ConservationLog {
    std::vector<ConservationRow> rows;

    /// CSV with header t,H1,H2,C1..CN,max_vx; floats at 17 significant digits.
    std::string csv(std::size_t nfields) const {
        std::string out = "t,H1,H2";
        for (std::size_t i = 1; i <= nfields; ++i) out += ",C" + std::to_string(i);
        out += ",max_vx\n";
        char buf[64];
        auto put = [&](double v, char sep) {
            std::snprintf(buf, sizeof buf, "%.17g%c", v, sep);
            out += buf;
        };
        for (const auto& r : rows) {
            put(r.t, ',');
            put(double(r.H1), ',');
            put(double(r.H2), ',');
            for (Real c : r.casimirs) put(double(c), ',');
            put(double(r.max_vx), '\n');
        }
        return out;
    }
};

/// Numeric data for the monitored functionals: the constant metric inverse
/// and the h components. Either may be absent, in which case H1/H2 log zero.
struct MonitorSpec {
    std::vector<std::vector<double>> eta_low;  // eta_{ij}
    std::vector<Expr> h;
};

struct EvolveResult {
    GridState state;
    ConservationLog log;
};

namespace detail {

inline Real trapezoid(const std::vector<Real>& f, double L) {
    Real s = 0.0L;
    for (Real v : f) s += v;  // fixed left-to-right order
    return s * Real(L) / Real(f.size());
}

inline Real max_abs(const std::vector<std::vector<Real>>& fields) {
    Real mx = 0.0L;
    for (const auto& f : fields)
        for (Real v : f) mx = std::max(mx, std::abs(v));
    return mx;
}

inline ConservationRow monitor(const GridState& s, const MonitorSpec& spec, DerivScheme scheme) {
    ConservationRow row;
    row.t = s.time;
    std::size_t n = s.nfields();
    row.casimirs.resize(n);
    for (std::size_t i = 0; i < n; ++i) row.casimirs[i] = trapezoid(s.fields[i], s.L);

    row.H1 = 0.0L;
    row.H2 = 0.0L;
    if (!spec.eta_low.empty()) {
        std::vector<Real> h1(s.m, 0.0L);
        for (std::size_t p = 0; p < s.m; ++p) {
            Real acc = 0.0L;
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t l = 0; l < n; ++l)
                    acc += Real(spec.eta_low[j][l]) * s.fields[j][p] * s.fields[l][p];
            h1[p] = 0.5L * acc;
        }
        row.H1 = trapezoid(h1, s.L);
        if (!spec.h.empty()) {
            std::vector<detail::CompiledExpr> hc;
            for (const auto& e : spec.h) hc.emplace_back(e);
            std::vector<Real> h2(s.m, 0.0L);
            std::vector<Real> point(n);
            for (std::size_t p = 0; p < s.m; ++p) {
                for (std::size_t f = 0; f < n; ++f) point[f] = s.fields[f][p];
                Real acc = 0.0L;
                for (std::size_t j = 0; j < n; ++j)
                    for (std::size_t k = 0; k < n; ++k)
                        acc += Real(spec.eta_low[j][k]) * hc[k](point.data()) * s.fields[j][p];
                h2[p] = acc;
            }
            row.H2 = trapezoid(h2, s.L);
        }
    }

    row.max_vx = max_abs(x_derivative(s, scheme));
    return row;
}

}  // namespace detail

/// Classical RK4. Aborts with BlowUp when max|v_x| exceeds 1000x its initial
/// value or stops being finite (hydrodynamic flows steepen into gradient
/// catastrophe; only the smooth regime is validated).
inline EvolveResult evolve(const HydroFlow& flow, const GridState& s0, const SimConfig& cfg,
                           const MonitorSpec& spec = {}) {
    if (cfg.dt <= 0.0 || cfg.t_end < 0.0) throw Error("need dt > 0 and t_end >= 0");
    GridState s = s0;
    std::size_t n = s.nfields();
    std::size_t steps = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));

    Real guard = detail::max_abs(x_derivative(s, cfg.scheme));
    guard = 1000.0L * std::max(guard, Real(1e-12L));

    EvolveResult result;
    result.log.rows.push_back(detail::monitor(s, spec, cfg.scheme));

    Real dt = Real(cfg.dt);
    auto axpy = [n, &s](const GridState& base, Real a, const std::vector<std::vector<Real>>& k) {
        GridState out = base;
        for (std::size_t f = 0; f < n; ++f)
            for (std::size_t p = 0; p < s.m; ++p) out.fields[f][p] += a * k[f][p];
        return out;
    };

    for (std::size_t step = 1; step <= steps; ++step) {
        auto k1 = rhs(flow, s, cfg.scheme);
        auto k2 = rhs(flow, axpy(s, 0.5L * dt, k1), cfg.scheme);
        auto k3 = rhs(flow, axpy(s, 0.5L * dt, k2), cfg.scheme);
        auto k4 = rhs(flow, axpy(s, dt, k3), cfg.scheme);
        for (std::size_t f = 0; f < n; ++f)
            for (std::size_t p = 0; p < s.m; ++p)
                s.fields[f][p] +=
                    dt / 6.0L * (k1[f][p] + 2.0L * k2[f][p] + 2.0L * k3[f][p] + k4[f][p]);
        s.time = s0.time + double(step) * cfg.dt;

        Real mx = detail::max_abs(x_derivative(s, cfg.scheme));
        if (!std::isfinite(double(mx)) || mx > guard) throw BlowUp(s.time);
        if ((step % cfg.monitor_stride == 0) || step == steps)
            result.log.rows.push_back(detail::monitor(s, spec, cfg.scheme));
    }
    result.state = std::move(s);
    return result;
}

struct CommutatorDefect {
    double defect;       // at tau
    double defect_half;  // at tau/2
};

/// Max-norm defect of the two composition orders of the time-tau maps,
/// integrated with 64 RK4 substeps each.
inline CommutatorDefect commutator_test(const HydroFlow& A, const HydroFlow& B,
                                        const GridState& s0, double tau,
                                        DerivScheme scheme = DerivScheme::Spectral) {
    auto flow_map = [&](const HydroFlow& f, const GridState& s, double t) {
        SimConfig cfg;
        cfg.dt = t / 64.0;
        cfg.t_end = t;
        cfg.scheme = scheme;
        cfg.monitor_stride = 1u << 30;  // endpoints only
        return evolve(f, s, cfg).state;
    };
    auto defect_at = [&](double t) {
        GridState ab = flow_map(B, flow_map(A, s0, t), t);
        GridState ba = flow_map(A, flow_map(B, s0, t), t);
        Real d = 0.0L;
        for (std::size_t f = 0; f < ab.nfields(); ++f)
            for (std::size_t p = 0; p < ab.m; ++p)
                d = std::max(d, std::abs(ab.fields[f][p] - ba.fields[f][p]));
        return double(d);
    };
    return {defect_at(tau), defect_at(tau / 2.0)};
}

}  // namespace hydropencil
