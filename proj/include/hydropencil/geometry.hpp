#pragma once

#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "hydropencil/linalg.hpp"
#include "hydropencil/parser.hpp"

namespace hydropencil {

using Tensor3 = std::vector<std::vector<std::vector<Expr>>>;
using Tensor4 = std::vector<std::vector<std::vector<std::vector<Expr>>>>;

inline Tensor3 make_tensor3(const ContextPtr& ctx, std::uint32_t n) {
    return Tensor3(n, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n, Expr::zero(ctx))));
}

inline Tensor4 make_tensor4(const ContextPtr& ctx, std::uint32_t n) {
    return Tensor4(n, make_tensor3(ctx, n));
}

/// Contravariant metric g^{ij}.
struct ContraMetric {
    ExprMatrix g;

    std::uint32_t dim() const { return g.size(); }
    const ContextPtr& context() const { return g.context(); }
};

/// Levi-Civita data: low[i][j][k] = Gamma^i_{jk}, contra[i][j][k] = Gamma^{ij}_k.
struct Connection {
    Tensor3 low;
    Tensor3 contra;
};

/// R[i][j][k][l] = R^i_{jkl}, antisymmetric in k,l.
struct Curvature {
    Tensor4 R;
};

struct VectorField {
    std::vector<Expr> c;

    std::uint32_t dim() const { return static_cast<std::uint32_t>(c.size()); }
    const ContextPtr& context() const { return c.front().context(); }
};

/// User-supplied invertible change of coordinates. Both charts reuse the
/// context's variable names: forward[i] expresses the old coordinate u^i in
/// terms of the new ones, inverse[i] the new coordinate v^i in terms of the
/// old ones.
struct CoordinateMap {
    std::vector<Expr> forward;
    std::vector<Expr> inverse;

    std::uint32_t dim() const { return static_cast<std::uint32_t>(forward.size()); }
    const ContextPtr& context() const { return forward.front().context(); }

    void validate() const {
        const ContextPtr& ctx = context();
        std::uint32_t n = ctx->dimension();
        std::map<std::string, Expr> fwd, inv;
        for (std::uint32_t k = 0; k < n; ++k) {
            fwd[ctx->coordinates()[k]] = forward[k];
            inv[ctx->coordinates()[k]] = inverse[k];
        }
        for (std::uint32_t i = 0; i < n; ++i) {
            Expr vi = Expr::variable(ctx, i);
            if (!(forward[i].substitute(inv) - vi).is_zero())
                throw InvalidMap("forward(inverse) != identity in component " + std::to_string(i + 1));
            if (!(inverse[i].substitute(fwd) - vi).is_zero())
                throw InvalidMap("inverse(forward) != identity in component " + std::to_string(i + 1));
        }
        ExprMatrix jac(ctx, n);
        for (std::uint32_t i = 0; i < n; ++i)
            for (std::uint32_t j = 0; j < n; ++j) jac(i, j) = forward[i].diff(j);
        if (jac.det().is_zero()) throw InvalidMap("Jacobian is singular");
    }

    std::map<std::string, Expr> forward_bindings() const {
        std::map<std::string, Expr> b;
        for (std::uint32_t k = 0; k < dim(); ++k) b[context()->coordinates()[k]] = forward[k];
        return b;
    }

    std::map<std::string, Expr> inverse_bindings() const {
        std::map<std::string, Expr> b;
        for (std::uint32_t k = 0; k < dim(); ++k) b[context()->coordinates()[k]] = inverse[k];
        return b;
    }
};

inline void require_symmetric(const ContraMetric& m) {
    if (!m.g.is_symmetric()) throw Error("metric is not symmetric");
}

/// Covariant metric g_{ij} with g^{is} g_{sj} = delta^i_j.
inline ExprMatrix invert_metric(const ContraMetric& m) { return m.g.inverse(); }

inline Connection christoffel(const ContraMetric& m) {
    const ContextPtr& ctx = m.context();
    std::uint32_t n = m.dim();
    ExprMatrix low_g = invert_metric(m);
    Tensor3 dlow(n, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n, Expr::zero(ctx))));
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t k = 0; k < n; ++k) dlow[i][j][k] = low_g(i, j).diff(k);

    Connection conn;
    conn.low = make_tensor3(ctx, n);
    conn.contra = make_tensor3(ctx, n);
    Expr half = Expr::constant(ctx, mpq_class(1, 2));
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t k = 0; k < n; ++k) {
                Expr sum = Expr::zero(ctx);
                for (std::uint32_t s = 0; s < n; ++s)
                    sum += m.g(i, s) * (dlow[s][k][j] + dlow[s][j][k] - dlow[j][k][s]);
                conn.low[i][j][k] = half * sum;
            }
    // contravariant connection Gamma^{ij}_k = g^{is} Gamma^j_{sk}
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t k = 0; k < n; ++k) {
                Expr sum = Expr::zero(ctx);
                for (std::uint32_t s = 0; s < n; ++s) sum += m.g(i, s) * conn.low[j][s][k];
                conn.contra[i][j][k] = sum;
            }
    return conn;
}

/// R^i_{jkl} = d_k Gamma^i_{lj} - d_l Gamma^i_{kj}
///           + Gamma^i_{ks} Gamma^s_{lj} - Gamma^i_{ls} Gamma^s_{kj}.
inline Curvature riemann_from(const ContextPtr& ctx, const Tensor3& gamma) {
    auto n = static_cast<std::uint32_t>(gamma.size());
    Curvature curv{make_tensor4(ctx, n)};
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t k = 0; k < n; ++k)
                for (std::uint32_t l = k + 1; l < n; ++l) {
                    Expr r = gamma[i][l][j].diff(k) - gamma[i][k][j].diff(l);
                    for (std::uint32_t s = 0; s < n; ++s)
                        r += gamma[i][k][s] * gamma[s][l][j] - gamma[i][l][s] * gamma[s][k][j];
                    curv.R[i][j][k][l] = r;
                    curv.R[i][j][l][k] = -r;
                }
    return curv;
}

inline Curvature riemann(const ContraMetric& m) {
    return riemann_from(m.context(), christoffel(m).low);
}

struct FlatnessReport {
    bool flat = true;
    // first nonzero curvature component in (i,j,k,l) index order
    std::optional<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t, Expr>> witness;
};

inline FlatnessReport is_flat(const ContraMetric& m) {
    Curvature curv = riemann(m);
    std::uint32_t n = m.dim();
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t k = 0; k < n; ++k)
                for (std::uint32_t l = 0; l < n; ++l)
                    if (!curv.R[i][j][k][l].is_zero())
                        return {false, std::make_tuple(i, j, k, l, curv.R[i][j][k][l])};
    return {true, std::nullopt};
}

/// (L_X g)^{ij} = X^s d_s g^{ij} - g^{sj} d_s X^i - g^{is} d_s X^j.
inline ExprMatrix lie_metric(const ContraMetric& m, const VectorField& X) {
    const ContextPtr& ctx = m.context();
    std::uint32_t n = m.dim();
    ExprMatrix r(ctx, n);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j) {
            Expr sum = Expr::zero(ctx);
            for (std::uint32_t s = 0; s < n; ++s)
                sum += X.c[s] * m.g(i, j).diff(s) - m.g(s, j) * X.c[i].diff(s) -
                       m.g(i, s) * X.c[j].diff(s);
            r(i, j) = sum;
        }
    return r;
}

inline VectorField lie_bracket(const VectorField& X, const VectorField& Y) {
    const ContextPtr& ctx = X.context();
    std::uint32_t n = X.dim();
    VectorField r{std::vector<Expr>(n, Expr::zero(ctx))};
    for (std::uint32_t i = 0; i < n; ++i) {
        Expr sum = Expr::zero(ctx);
        for (std::uint32_t s = 0; s < n; ++s)
            sum += X.c[s] * Y.c[i].diff(s) - Y.c[s] * X.c[i].diff(s);
        r.c[i] = sum;
    }
    return r;
}

/// Pushes a contravariant metric given in the context chart along the map:
/// g~^{sr} = (du^s/dv^i)(du^r/dv^j) g^{ij}, re-expressed in the new chart
/// through the inverse.
inline ContraMetric pushforward_metric(const ContraMetric& m, const CoordinateMap& map) {
    map.validate();
    const ContextPtr& ctx = m.context();
    std::uint32_t n = m.dim();
    ExprMatrix jac(ctx, n);  // jac(s,i) = du^s/dv^i, a function of the old chart
    for (std::uint32_t s = 0; s < n; ++s)
        for (std::uint32_t i = 0; i < n; ++i) jac(s, i) = map.forward[s].diff(i);
    auto bind = map.inverse_bindings();
    ExprMatrix out(ctx, n);
    for (std::uint32_t s = 0; s < n; ++s)
        for (std::uint32_t r = 0; r < n; ++r) {
            Expr sum = Expr::zero(ctx);
            for (std::uint32_t i = 0; i < n; ++i)
                for (std::uint32_t j = 0; j < n; ++j) sum += jac(s, i) * jac(r, j) * m.g(i, j);
            out(s, r) = sum.substitute(bind);
        }
    return {out};
}

inline VectorField pushforward_vector(const VectorField& X, const CoordinateMap& map) {
    const ContextPtr& ctx = X.context();
    std::uint32_t n = X.dim();
    auto bind = map.inverse_bindings();
    VectorField r{std::vector<Expr>(n, Expr::zero(ctx))};
    for (std::uint32_t s = 0; s < n; ++s) {
        Expr sum = Expr::zero(ctx);
        for (std::uint32_t i = 0; i < n; ++i) sum += map.forward[s].diff(i) * X.c[i];
        r.c[s] = sum.substitute(bind);
    }
    return r;
}

/// Lowered second covariant derivative D[s][p][k] = nabla_s nabla_p f^k
/// (outer index first) for the Levi-Civita connection of the given metric.
inline Tensor3 second_covariant_derivative(const Connection& conn, const VectorField& f) {
    const ContextPtr& ctx = f.context();
    std::uint32_t n = f.dim();
    // first derivative C[k][p] = d_p f^k + Gamma^k_{ps} f^s
    std::vector<std::vector<Expr>> C(n, std::vector<Expr>(n, Expr::zero(ctx)));
    for (std::uint32_t k = 0; k < n; ++k)
        for (std::uint32_t p = 0; p < n; ++p) {
            Expr sum = f.c[k].diff(p);
            for (std::uint32_t s = 0; s < n; ++s) sum += conn.low[k][p][s] * f.c[s];
            C[k][p] = sum;
        }
    Tensor3 D = make_tensor3(ctx, n);
    for (std::uint32_t s = 0; s < n; ++s)
        for (std::uint32_t p = 0; p < n; ++p)
            for (std::uint32_t k = 0; k < n; ++k) {
                Expr sum = C[k][p].diff(s);
                for (std::uint32_t q = 0; q < n; ++q)
                    sum += conn.low[k][s][q] * C[q][p] - conn.low[q][s][p] * C[k][q];
                D[s][p][k] = sum;
            }
    return D;
}

struct CovariantHessianResult {
    Tensor3 upper;    // upper[i][j][k] = nabla^i nabla^j f^k
    Tensor3 lowered;  // lowered[s][p][k] = nabla_s nabla_p f^k
    bool metric_flat = true;
};

/// Full contravariant second covariant derivative of a vector field in the
/// geometry of g2. Non-flat g2 is reported, not rejected: the same formulas
/// get evaluated on candidate data before flatness is established.
inline CovariantHessianResult covariant_hessian(const ContraMetric& g2, const VectorField& f) {
    const ContextPtr& ctx = g2.context();
    std::uint32_t n = g2.dim();
    Connection conn = christoffel(g2);
    CovariantHessianResult res;
    res.lowered = second_covariant_derivative(conn, f);
    res.metric_flat = is_flat(g2).flat;
    res.upper = make_tensor3(ctx, n);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t k = 0; k < n; ++k) {
                Expr sum = Expr::zero(ctx);
                for (std::uint32_t s = 0; s < n; ++s)
                    for (std::uint32_t p = 0; p < n; ++p)
                        sum += g2.g(i, s) * g2.g(j, p) * res.lowered[s][p][k];
                res.upper[i][j][k] = sum;
            }
    return res;
}

}  // namespace hydropencil
