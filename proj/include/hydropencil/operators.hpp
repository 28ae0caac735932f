#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hydropencil/geometry.hpp"

namespace hydropencil {

/// First-order matrix differential operator g^{ij} d/dx + b^{ij}_k u^k_x.
/// No invariants are imposed at construction; verification is explicit.
struct DNOperator {
    ExprMatrix g;
    Tensor3 b;  // b[i][j][k] = b^{ij}_k

    std::uint32_t dim() const { return g.size(); }
    const ContextPtr& context() const { return g.context(); }

    bool is_zero() const {
        if (!g.is_zero()) return false;
        for (const auto& p : b)
            for (const auto& q : p)
                for (const auto& e : q)
                    if (!e.is_zero()) return false;
        return true;
    }

    friend bool operator==(const DNOperator& a, const DNOperator& b2) {
        if (!(a.g == b2.g)) return false;
        std::uint32_t n = a.dim();
        for (std::uint32_t i = 0; i < n; ++i)
            for (std::uint32_t j = 0; j < n; ++j)
                for (std::uint32_t k = 0; k < n; ++k)
                    if (!(a.b[i][j][k] == b2.b[i][j][k])) return false;
        return true;
    }
};

inline DNOperator zero_operator(const ContextPtr& ctx, std::uint32_t n) {
    return {ExprMatrix(ctx, n), make_tensor3(ctx, n)};
}

/// Operator eta d/dx for a constant symmetric nondegenerate matrix.
inline DNOperator constant_operator(const ContraMetric& eta) {
    return {eta.g, make_tensor3(eta.context(), eta.dim())};
}

inline void require_constant_eta(const ContraMetric& eta) {
    if (!eta.g.is_constant() || !eta.g.is_symmetric() || eta.g.det().is_zero())
        throw NonConstantEta();
}

struct Witness {
    std::string what;
    std::string value;  // canonical expression text of the failing identity
};

enum class Verdict { True, False, Undecided };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::True: return "true";
        case Verdict::False: return "false";
        default: return "undecided";
    }
}

// --- construction -----------------------------------------------------------

/// b^{ij}_k = -g^{is} Gamma^j_{sk}; Hamiltonian exactly when g is flat.
inline DNOperator from_metric(const ContraMetric& m) {
    require_symmetric(m);
    const ContextPtr& ctx = m.context();
    std::uint32_t n = m.dim();
    Connection conn = christoffel(m);  // throws DegenerateMetric when det g == 0
    DNOperator op{m.g, make_tensor3(ctx, n)};
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t k = 0; k < n; ++k) {
                Expr sum = Expr::zero(ctx);
                for (std::uint32_t s = 0; s < n; ++s) sum += m.g(i, s) * conn.low[j][s][k];
                op.b[i][j][k] = -sum;
            }
    return op;
}

/// Canonical compatible-with-eta form:
/// g^{ij} = eta^{is} dh^j/dv^s + eta^{js} dh^i/dv^s,
/// b^{ij}_k = eta^{is} d2h^j/dv^s dv^k.
inline DNOperator from_h(const ContraMetric& eta, const VectorField& h) {
    require_constant_eta(eta);
    const ContextPtr& ctx = eta.context();
    std::uint32_t n = eta.dim();
    DNOperator op = zero_operator(ctx, n);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j) {
            Expr sum = Expr::zero(ctx);
            for (std::uint32_t s = 0; s < n; ++s)
                sum += eta.g(i, s) * h.c[j].diff(s) + eta.g(j, s) * h.c[i].diff(s);
            op.g(i, j) = sum;
            for (std::uint32_t k = 0; k < n; ++k) {
                Expr b = Expr::zero(ctx);
                for (std::uint32_t s = 0; s < n; ++s) b += eta.g(i, s) * h.c[j].diff(s).diff(k);
                op.b[i][j][k] = b;
            }
        }
    return op;
}

// --- Hamiltonian verification -------------------------------------------------

struct HamiltonianReport {
    bool skew_ok = false;
    bool nondegenerate = false;
    bool flat = false;
    bool torsionless_compatible = false;
    Verdict verdict = Verdict::False;
    std::vector<Witness> witnesses;
};

/// Dubrovin-Novikov criterion for nondegenerate operators. Degenerate input
/// yields an undecided verdict; callers with operators in h-form should use
/// mokhov_residuals instead.
inline HamiltonianReport is_hamiltonian(const DNOperator& P) {
    const ContextPtr& ctx = P.context();
    std::uint32_t n = P.dim();
    HamiltonianReport rep;

    rep.skew_ok = true;
    if (!P.g.is_symmetric()) {
        rep.skew_ok = false;
        rep.witnesses.push_back({"g not symmetric", ""});
    }
    for (std::uint32_t i = 0; i < n && rep.skew_ok; ++i)
        for (std::uint32_t j = 0; j < n && rep.skew_ok; ++j)
            for (std::uint32_t k = 0; k < n; ++k) {
                Expr d = P.b[i][j][k] + P.b[j][i][k] - P.g(i, j).diff(k);
                if (!d.is_zero()) {
                    rep.skew_ok = false;
                    rep.witnesses.push_back(
                        {"b^{" + std::to_string(i + 1) + std::to_string(j + 1) + "}_" +
                             std::to_string(k + 1) + " + b^{ji}_k - dg/dv^k",
                         d.str()});
                    break;
                }
            }

    rep.nondegenerate = !P.g.det().is_zero();
    if (!rep.nondegenerate) {
        rep.verdict = Verdict::Undecided;
        rep.witnesses.push_back(
            {"det g == 0: criterion undecided by this test (use the h-form residuals)", ""});
        return rep;
    }

    ContraMetric m{P.g};
    Connection conn = christoffel(m);
    rep.torsionless_compatible = true;
    for (std::uint32_t i = 0; i < n && rep.torsionless_compatible; ++i)
        for (std::uint32_t j = 0; j < n && rep.torsionless_compatible; ++j)
            for (std::uint32_t k = 0; k < n; ++k) {
                Expr expected = Expr::zero(ctx);
                for (std::uint32_t s = 0; s < n; ++s) expected += m.g(i, s) * conn.low[j][s][k];
                Expr d = P.b[i][j][k] + expected;
                if (!d.is_zero()) {
                    rep.torsionless_compatible = false;
                    rep.witnesses.push_back(
                        {"b^{" + std::to_string(i + 1) + std::to_string(j + 1) + "}_" +
                             std::to_string(k + 1) + " != -g^{is} Gamma^j_{sk}",
                         d.str()});
                    break;
                }
            }

    FlatnessReport fl = is_flat(m);
    rep.flat = fl.flat;
    if (!fl.flat) {
        const auto& [i, j, k, l, w] = *fl.witness;
        rep.witnesses.push_back({"curvature R^" + std::to_string(i + 1) + "_{" +
                                     std::to_string(j + 1) + std::to_string(k + 1) +
                                     std::to_string(l + 1) + "}",
                                 w.str()});
    }

    rep.verdict = (rep.skew_ok && rep.nondegenerate && rep.torsionless_compatible && rep.flat)
                      ? Verdict::True
                      : Verdict::False;
    return rep;
}

// --- Lie derivative -----------------------------------------------------------

/// Lie derivative of a hydrodynamic-type operator along a vector field:
/// g-part: xi^s d_s g^{ij} - g^{sj} d_s xi^i - g^{is} d_s xi^j
/// b-part: xi^s d_s b^{ij}_k - b^{sj}_k d_s xi^i - b^{is}_k d_s xi^j
///         + b^{ij}_s d_k xi^s - g^{is} d2 xi^j / dv^s dv^k.
inline DNOperator lie_operator(const DNOperator& P, const VectorField& xi) {
    const ContextPtr& ctx = P.context();
    std::uint32_t n = P.dim();
    DNOperator out = zero_operator(ctx, n);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j) {
            Expr gsum = Expr::zero(ctx);
            for (std::uint32_t s = 0; s < n; ++s)
                gsum += xi.c[s] * P.g(i, j).diff(s) - P.g(s, j) * xi.c[i].diff(s) -
                        P.g(i, s) * xi.c[j].diff(s);
            out.g(i, j) = gsum;
            for (std::uint32_t k = 0; k < n; ++k) {
                Expr bsum = Expr::zero(ctx);
                for (std::uint32_t s = 0; s < n; ++s)
                    bsum += xi.c[s] * P.b[i][j][k].diff(s) - P.b[s][j][k] * xi.c[i].diff(s) -
                            P.b[i][s][k] * xi.c[j].diff(s) + P.b[i][j][s] * xi.c[s].diff(k) -
                            P.g(i, s) * xi.c[j].diff(s).diff(k);
                out.b[i][j][k] = bsum;
            }
        }
    return out;
}

inline bool lie2_vanishes(const DNOperator& P, const VectorField& xi) {
    return lie_operator(lie_operator(P, xi), xi).is_zero();
}

// --- compatibility criteria -----------------------------------------------------

/// Residuals of the two Hamiltonicity equations for the h-form operator.
/// all_zero decides Hamiltonicity of from_h(eta, h) and hence compatibility
/// with eta d/dx.
struct HResiduals {
    Tensor4 r17;                          // indexed [i][j][k][l]
    std::vector<std::vector<std::vector<Expr>>> r18;  // indexed [i][j][r]
    bool all_zero = true;
};

inline HResiduals mokhov_residuals(const ContraMetric& eta, const VectorField& h) {
    require_constant_eta(eta);
    const ContextPtr& ctx = eta.context();
    std::uint32_t n = eta.dim();

    // hess[a][b][c] = d2 h^a / dv^b dv^c, grad[a][b] = d h^a / dv^b
    Tensor3 hess = make_tensor3(ctx, n);
    std::vector<std::vector<Expr>> grad(n, std::vector<Expr>(n, Expr::zero(ctx)));
    for (std::uint32_t a = 0; a < n; ++a)
        for (std::uint32_t b = 0; b < n; ++b) {
            grad[a][b] = h.c[a].diff(b);
            for (std::uint32_t c = 0; c < n; ++c) hess[a][b][c] = grad[a][b].diff(c);
        }

    HResiduals res{make_tensor4(ctx, n), make_tensor3(ctx, n), true};
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t k = 0; k < n; ++k)
                for (std::uint32_t l = 0; l < n; ++l) {
                    Expr sum = Expr::zero(ctx);
                    for (std::uint32_t s = 0; s < n; ++s)
                        for (std::uint32_t r = 0; r < n; ++r)
                            sum += eta.g(s, r) *
                                   (hess[j][s][i] * hess[k][l][r] - hess[k][s][i] * hess[j][l][r]);
                    res.r17[i][j][k][l] = sum;
                    if (!sum.is_zero()) res.all_zero = false;
                }
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t r = 0; r < n; ++r) {
                Expr sum = Expr::zero(ctx);
                for (std::uint32_t s = 0; s < n; ++s)
                    for (std::uint32_t p = 0; p < n; ++p)
                        for (std::uint32_t l = 0; l < n; ++l) {
                            Expr left = (eta.g(i, p) * grad[s][p] + eta.g(s, p) * grad[i][p]) *
                                        eta.g(j, l) * hess[r][l][s];
                            Expr right = (eta.g(j, p) * grad[s][p] + eta.g(s, p) * grad[j][p]) *
                                         eta.g(i, l) * hess[r][l][s];
                            sum += left - right;
                        }
                res.r18[i][j][r] = sum;
                if (!sum.is_zero()) res.all_zero = false;
            }
    return res;
}

/// Flat-pencil criterion with one symbolic pencil parameter: flatness of
/// g1 + lambda*g2 identically in lambda, and linearity of the contravariant
/// connection in lambda.
struct PencilReport {
    bool lambda_flat = false;
    bool gamma_linear = false;
    bool verdict = false;
    std::vector<Witness> witnesses;
};

inline ContextPtr pencil_context(const ContextPtr& ctx) {
    for (const char* name : {"lambda", "pencil_lambda", "pencil_lambda_"}) {
        auto idx = ctx->find(name);
        if (!idx) return ctx->with_parameter(name);
        if (ctx->is_parameter(*idx)) return ctx;
    }
    throw Error("no free name for the pencil parameter");
}

// the parameter pencil_context settled on
inline std::string pencil_parameter(const ContextPtr& ext) {
    for (const char* name : {"lambda", "pencil_lambda", "pencil_lambda_"}) {
        auto idx = ext->find(name);
        if (idx && ext->is_parameter(*idx)) return name;
    }
    throw Error("context carries no pencil parameter");
}

inline PencilReport compat_pencil_check(const ContraMetric& g1, const ContraMetric& g2) {
    require_symmetric(g1);
    require_symmetric(g2);
    const ContextPtr& ctx = g1.context();
    std::uint32_t n = g1.dim();
    ContextPtr ext = pencil_context(ctx);
    Expr lambda = Expr::variable(ext, pencil_parameter(ext));

    ExprMatrix pencil = g1.g.lift_to(ext) + g2.g.lift_to(ext) * lambda;
    ContraMetric gp{pencil};
    if (pencil.det().is_zero()) throw DegeneratePencil();

    PencilReport rep;
    Connection pconn = christoffel(gp);

    rep.lambda_flat = true;
    const Tensor3& gam = pconn.low;
    for (std::uint32_t i = 0; i < n && rep.lambda_flat; ++i)
        for (std::uint32_t j = 0; j < n && rep.lambda_flat; ++j)
            for (std::uint32_t k = 0; k < n && rep.lambda_flat; ++k)
                for (std::uint32_t l = k + 1; l < n; ++l) {
                    Expr r = gam[i][l][j].diff(k) - gam[i][k][j].diff(l);
                    for (std::uint32_t s = 0; s < n; ++s)
                        r += gam[i][k][s] * gam[s][l][j] - gam[i][l][s] * gam[s][k][j];
                    if (!r.is_zero()) {
                        rep.lambda_flat = false;
                        rep.witnesses.push_back(
                            {"pencil curvature R^" + std::to_string(i + 1) + "_{" +
                                 std::to_string(j + 1) + std::to_string(k + 1) +
                                 std::to_string(l + 1) + "}(lambda)",
                             r.str()});
                        break;
                    }
                }

    rep.gamma_linear = true;
    const Tensor3& cp = pconn.contra;
    Tensor3 c1 = christoffel(g1).contra;
    Tensor3 c2 = christoffel(g2).contra;
    for (std::uint32_t i = 0; i < n && rep.gamma_linear; ++i)
        for (std::uint32_t j = 0; j < n && rep.gamma_linear; ++j)
            for (std::uint32_t k = 0; k < n; ++k) {
                Expr d = cp[i][j][k] - c1[i][j][k].lift_to(ext) - lambda * c2[i][j][k].lift_to(ext);
                if (!d.is_zero()) {
                    rep.gamma_linear = false;
                    rep.witnesses.push_back({"Gamma^{" + std::to_string(i + 1) +
                                                 std::to_string(j + 1) + "}_" +
                                                 std::to_string(k + 1) + "(lambda) nonlinear part",
                                             d.str()});
                    break;
                }
            }

    rep.verdict = rep.lambda_flat && rep.gamma_linear;
    return rep;
}

// --- recovery of h from a compatible operator -----------------------------------

namespace detail {

/// Antiderivative of a polynomial expression in one coordinate.
inline Expr integrate_poly(const Expr& e, std::uint32_t var) {
    if (!e.is_polynomial()) throw NonPolynomial("integrand");
    const ContextPtr& ctx = e.context();
    Expr acc = Expr::zero(ctx);
    Expr x = Expr::variable(ctx, var);
    for (const auto& t : e.num().terms()) {
        Expr mono = Expr::constant(ctx, mpq_class(t.c, e.den().constant_value()));
        for (std::size_t i = 0; i < t.e.size(); ++i)
            if (t.e[i] != 0 && i != var) mono *= Expr::variable(ctx, (std::uint32_t)i).pow(t.e[i]);
        unsigned deg = t.e[var];
        mono *= Expr::constant(ctx, mpq_class(1, deg + 1)) * x.pow(deg + 1);
        acc += mono;
    }
    return acc;
}

/// Sets the listed coordinates to zero.
inline Expr at_zero(const Expr& e, std::uint32_t first_var, std::uint32_t count) {
    std::map<std::string, Expr> bind;
    const ContextPtr& ctx = e.context();
    bool any = false;
    for (std::uint32_t v = first_var; v < first_var + count; ++v)
        if (e.num().contains_var(v) || e.den().contains_var(v)) {
            bind[ctx->coordinates()[v]] = Expr::zero(ctx);
            any = true;
        }
    return any ? e.substitute(bind) : e;
}

/// Potential of a closed polynomial 1-form (coordinate-path integration from
/// the origin); omega[k] = d(potential)/dv^k, potential(0) = 0.
inline Expr potential_of_closed_form(const std::vector<Expr>& omega) {
    const ContextPtr& ctx = omega.front().context();
    std::uint32_t n = ctx->dimension();
    for (std::uint32_t k = 0; k < n; ++k) {
        if (!omega[k].is_polynomial()) throw NonPolynomial("one-form component");
        for (std::uint32_t l = k + 1; l < n; ++l)
            if (!(omega[k].diff(l) - omega[l].diff(k)).is_zero()) throw NotIntegrable();
    }
    Expr acc = Expr::zero(ctx);
    for (std::uint32_t k = 0; k < n; ++k)
        acc += integrate_poly(at_zero(omega[k], k + 1, n - (k + 1)), k);
    return acc;
}

}  // namespace detail

struct HRecovery {
    VectorField h;
    // dimension of the unresolved affine family (skew-symmetric directions of
    // eta * A^T); the canonical representative has the symmetric part only
    std::uint32_t null_dimension = 0;
};

/// Inverts from_h on operators written in the coordinates where the second
/// operator is eta d/dx: integrates b^{ij}_k = eta^{is} d2h^j/dv^s dv^k twice
/// with integrability checks, then fixes the affine part against the g-part.
inline HRecovery h_from_operator(const DNOperator& P1, const ContraMetric& eta) {
    require_constant_eta(eta);
    const ContextPtr& ctx = P1.context();
    std::uint32_t n = P1.dim();
    ExprMatrix eta_low = invert_metric(eta);

    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t k = 0; k < n; ++k)
                if (!P1.b[i][j][k].is_polynomial()) throw NonPolynomial("b^{ij}_k");

    // T[j][s][k] = d2 h^j / dv^s dv^k = eta_{is} b^{ij}_k
    Tensor3 T = make_tensor3(ctx, n);
    for (std::uint32_t j = 0; j < n; ++j)
        for (std::uint32_t s = 0; s < n; ++s)
            for (std::uint32_t k = 0; k < n; ++k) {
                Expr sum = Expr::zero(ctx);
                for (std::uint32_t i = 0; i < n; ++i) sum += eta_low(i, s) * P1.b[i][j][k];
                T[j][s][k] = sum;
            }
    for (std::uint32_t j = 0; j < n; ++j)
        for (std::uint32_t s = 0; s < n; ++s)
            for (std::uint32_t k = s + 1; k < n; ++k)
                if (!(T[j][s][k] - T[j][k][s]).is_zero()) throw NotIntegrable();

    // first integration: G[j][s] = dh^j/dv^s with G(0) = 0
    std::vector<std::vector<Expr>> G(n, std::vector<Expr>(n, Expr::zero(ctx)));
    for (std::uint32_t j = 0; j < n; ++j)
        for (std::uint32_t s = 0; s < n; ++s)
            G[j][s] = detail::potential_of_closed_form(T[j][s]);

    // second integration: h0^j with dh0^j/dv^s = G[j][s], h0(0) = 0
    VectorField h0{std::vector<Expr>(n, Expr::zero(ctx))};
    for (std::uint32_t j = 0; j < n; ++j) h0.c[j] = detail::potential_of_closed_form(G[j]);

    // affine correction: S = g1 - g-part(h0) must be constant; solve
    // eta^{is} A^j_s + eta^{js} A^i_s = S^{ij} by the symmetric choice
    // eta A^T = S/2, leaving N(N-1)/2 skew null directions unresolved.
    DNOperator guess = from_h(eta, h0);
    ExprMatrix S = P1.g - guess.g;
    if (!S.is_symmetric()) throw GMismatch();
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            if (!S(i, j).is_constant()) throw GMismatch();
    // A = (S/2)^T eta^{-1}: with B = eta A^T = S/2, A^j_s = (eta^{-1} B)^T = B^T eta^{-1}
    ExprMatrix A(ctx, n);
    Expr half = Expr::constant(ctx, mpq_class(1, 2));
    for (std::uint32_t j = 0; j < n; ++j)
        for (std::uint32_t s = 0; s < n; ++s) {
            Expr sum = Expr::zero(ctx);
            for (std::uint32_t p = 0; p < n; ++p) sum += half * S(p, j) * eta_low(p, s);
            A(j, s) = sum;
        }
    VectorField h = h0;
    for (std::uint32_t j = 0; j < n; ++j)
        for (std::uint32_t s = 0; s < n; ++s) h.c[j] += A(j, s) * Expr::variable(ctx, s);

    DNOperator rebuilt = from_h(eta, h);
    if (!(rebuilt == P1)) throw GMismatch();
    return {h, n * (n - 1) / 2};
}

// --- Dubrovin's flat-pencil tensors ------------------------------------------

struct DubrovinDelta {
    Tensor3 upper;  // Delta^{ijk} = g1^{is} g2^{jp} (Gamma2^k_{ps} - Gamma1^k_{ps})
    Tensor3 mixed;  // Delta^{ij}_k = g2_{ks} Delta^{sij}
};

inline DubrovinDelta dubrovin_delta(const ContraMetric& g1, const ContraMetric& g2) {
    const ContextPtr& ctx = g1.context();
    std::uint32_t n = g1.dim();
    Tensor3 gam1 = christoffel(g1).low;
    Tensor3 gam2 = christoffel(g2).low;
    ExprMatrix g2_low = invert_metric(g2);
    DubrovinDelta d{make_tensor3(ctx, n), make_tensor3(ctx, n)};
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t k = 0; k < n; ++k) {
                Expr sum = Expr::zero(ctx);
                for (std::uint32_t s = 0; s < n; ++s)
                    for (std::uint32_t p = 0; p < n; ++p)
                        sum += g1.g(i, s) * g2.g(j, p) * (gam2[k][p][s] - gam1[k][p][s]);
                d.upper[i][j][k] = sum;
            }
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t k = 0; k < n; ++k) {
                Expr sum = Expr::zero(ctx);
                for (std::uint32_t s = 0; s < n; ++s) sum += g2_low(k, s) * d.upper[s][i][j];
                d.mixed[i][j][k] = sum;
            }
    return d;
}

struct FlatPencilResult {
    ContraMetric g1;
    bool eq26_ok = false;
    bool eq28_ok = false;
    bool g2_flat = false;
    std::vector<Witness> witnesses;
};

/// Builds g1^{ij} = nabla2^i f^j + nabla2^j f^i + c g2^{ij} and verifies the
/// two tensor equations a pencil-generating vector field must satisfy.
inline FlatPencilResult flat_pencil_from_f(const ContraMetric& g2, const VectorField& f,
                                           const Expr& c) {
    require_symmetric(g2);
    if (!c.is_constant()) throw Error("pencil shift c must be constant");
    const ContextPtr& ctx = g2.context();
    std::uint32_t n = g2.dim();

    CovariantHessianResult hess = covariant_hessian(g2, f);  // throws DegenerateMetric
    FlatPencilResult res;
    res.g2_flat = hess.metric_flat;
    if (!hess.metric_flat)
        res.witnesses.push_back({"g2 is not flat (computation proceeds)", ""});

    // nabla^i f^j = g2^{is} (d_s f^j + Gamma^j_{sq} f^q)
    Connection conn = christoffel(g2);
    ExprMatrix nabla_up(ctx, n);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j) {
            Expr sum = Expr::zero(ctx);
            for (std::uint32_t s = 0; s < n; ++s) {
                Expr cov = f.c[j].diff(s);
                for (std::uint32_t q = 0; q < n; ++q) cov += conn.low[j][s][q] * f.c[q];
                sum += g2.g(i, s) * cov;
            }
            nabla_up(i, j) = sum;
        }
    ExprMatrix g1(ctx, n);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            g1(i, j) = nabla_up(i, j) + nabla_up(j, i) + c * g2.g(i, j);
    res.g1 = ContraMetric{g1};

    // Delta^{ij}_k = nabla_k nabla^i f^j = g2^{ip} nabla_k nabla_p f^j
    // (lowered[k][p][j] has the outer index first)
    Tensor3 delta = make_tensor3(ctx, n);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t k = 0; k < n; ++k) {
                Expr sum = Expr::zero(ctx);
                for (std::uint32_t p = 0; p < n; ++p)
                    sum += g2.g(i, p) * hess.lowered[k][p][j];
                delta[i][j][k] = sum;
            }

    res.eq26_ok = true;
    for (std::uint32_t i = 0; i < n && res.eq26_ok; ++i)
        for (std::uint32_t j = 0; j < n && res.eq26_ok; ++j)
            for (std::uint32_t k = 0; k < n && res.eq26_ok; ++k)
                for (std::uint32_t l = 0; l < n; ++l) {
                    Expr sum = Expr::zero(ctx);
                    for (std::uint32_t s = 0; s < n; ++s)
                        sum += delta[i][j][s] * delta[s][k][l] - delta[i][k][s] * delta[s][j][l];
                    if (!sum.is_zero()) {
                        res.eq26_ok = false;
                        res.witnesses.push_back({"Delta association defect at (" +
                                                     std::to_string(i + 1) + "," +
                                                     std::to_string(j + 1) + "," +
                                                     std::to_string(k + 1) + "," +
                                                     std::to_string(l + 1) + ")",
                                                 sum.str()});
                        break;
                    }
                }

    res.eq28_ok = true;
    for (std::uint32_t i = 0; i < n && res.eq28_ok; ++i)
        for (std::uint32_t j = 0; j < n && res.eq28_ok; ++j)
            for (std::uint32_t k = 0; k < n; ++k) {
                Expr sum = Expr::zero(ctx);
                for (std::uint32_t s = 0; s < n; ++s)
                    for (std::uint32_t p = 0; p < n; ++p)
                        sum += (g1(i, s) * g2.g(j, p) - g2.g(i, s) * g1(j, p)) *
                               hess.lowered[s][p][k];
                if (!sum.is_zero()) {
                    res.eq28_ok = false;
                    res.witnesses.push_back({"cross-metric defect at (" + std::to_string(i + 1) +
                                                 "," + std::to_string(j + 1) + "," +
                                                 std::to_string(k + 1) + ")",
                                             sum.str()});
                    break;
                }
            }
    return res;
}

// --- quasihomogeneity ----------------------------------------------------------

struct QuasihomReport {
    VectorField e;
    VectorField E;
    Expr d;
    bool cond1 = false;  // [e, E] = e
    bool cond2 = false;  // L_E g1 = (d-1) g1
    bool cond3 = false;  // L_e g1 = g2
    bool cond4 = false;  // L_e g2 = 0
    bool verdict = false;
    std::vector<Witness> witnesses;
};

inline QuasihomReport quasihomogeneous_check(const ContraMetric& g1, const ContraMetric& g2,
                                             const Expr& tau, const Expr& d) {
    if (!d.is_constant()) throw Error("degree d must be constant");
    const ContextPtr& ctx = g1.context();
    std::uint32_t n = g1.dim();
    if (g1.g.det().is_zero() || g2.g.det().is_zero()) throw DegenerateMetric();

    QuasihomReport rep;
    rep.d = d;
    rep.E.c.assign(n, Expr::zero(ctx));
    rep.e.c.assign(n, Expr::zero(ctx));
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t s = 0; s < n; ++s) {
            rep.E.c[i] += g1.g(i, s) * tau.diff(s);
            rep.e.c[i] += g2.g(i, s) * tau.diff(s);
        }

    VectorField bracket = lie_bracket(rep.e, rep.E);
    rep.cond1 = true;
    for (std::uint32_t i = 0; i < n; ++i) {
        Expr diff = bracket.c[i] - rep.e.c[i];
        if (!diff.is_zero()) {
            rep.cond1 = false;
            rep.witnesses.push_back({"[e,E] - e, component " + std::to_string(i + 1), diff.str()});
            break;
        }
    }

    auto check_matrix = [&](const ExprMatrix& lhs, const ExprMatrix& rhs, bool& flag,
                            const std::string& label) {
        flag = true;
        for (std::uint32_t i = 0; i < n && flag; ++i)
            for (std::uint32_t j = 0; j < n; ++j) {
                Expr diff = lhs(i, j) - rhs(i, j);
                if (!diff.is_zero()) {
                    flag = false;
                    rep.witnesses.push_back({label + " at (" + std::to_string(i + 1) + "," +
                                                 std::to_string(j + 1) + ")",
                                             diff.str()});
                    break;
                }
            }
    };

    Expr dm1 = d - Expr::constant(ctx, 1);
    check_matrix(lie_metric(g1, rep.E), g1.g * dm1, rep.cond2, "L_E g1 - (d-1) g1");
    check_matrix(lie_metric(g1, rep.e), g2.g, rep.cond3, "L_e g1 - g2");
    check_matrix(lie_metric(g2, rep.e), ExprMatrix(ctx, n), rep.cond4, "L_e g2");

    rep.verdict = rep.cond1 && rep.cond2 && rep.cond3 && rep.cond4;
    return rep;
}

// --- coordinate changes ----------------------------------------------------------

/// Pushes a hydrodynamic-type operator given in the context chart along the
/// map: the g-part obeys the (2,0) tensor law, the b-part the contravariant
/// connection law
/// b~^{sr}_q = [ (du^s/dv^i)(du^r/dv^j) b^{ij}_k
///             + (du^s/dv^i) g^{ij} d2u^r/dv^j dv^k ] (v(u)) * dv^k/du^q.
inline DNOperator pushforward_operator(const DNOperator& P, const CoordinateMap& map) {
    map.validate();
    const ContextPtr& ctx = P.context();
    std::uint32_t n = P.dim();
    auto bind = map.inverse_bindings();

    ExprMatrix jfwd(ctx, n);  // du^s/dv^i, function of the old chart
    for (std::uint32_t s = 0; s < n; ++s)
        for (std::uint32_t i = 0; i < n; ++i) jfwd(s, i) = map.forward[s].diff(i);
    ExprMatrix jinv(ctx, n);  // dv^k/du^q, function of the new chart
    for (std::uint32_t k = 0; k < n; ++k)
        for (std::uint32_t q = 0; q < n; ++q) jinv(k, q) = map.inverse[k].diff(q);

    DNOperator out = zero_operator(ctx, n);
    for (std::uint32_t s = 0; s < n; ++s)
        for (std::uint32_t r = 0; r < n; ++r) {
            Expr gsum = Expr::zero(ctx);
            for (std::uint32_t i = 0; i < n; ++i)
                for (std::uint32_t j = 0; j < n; ++j) gsum += jfwd(s, i) * jfwd(r, j) * P.g(i, j);
            out.g(s, r) = gsum.substitute(bind);
            for (std::uint32_t k = 0; k < n; ++k) {
                Expr old_part = Expr::zero(ctx);
                for (std::uint32_t i = 0; i < n; ++i)
                    for (std::uint32_t j = 0; j < n; ++j)
                        old_part += jfwd(s, i) * jfwd(r, j) * P.b[i][j][k] +
                                    jfwd(s, i) * P.g(i, j) * map.forward[r].diff(j).diff(k);
                Expr in_new = old_part.substitute(bind);
                for (std::uint32_t q = 0; q < n; ++q) out.b[s][r][q] += in_new * jinv(k, q);
            }
        }
    return out;
}

}  // namespace hydropencil
