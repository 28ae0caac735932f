#include <catch_amalgamated.hpp>

#include "hydropencil/geometry.hpp"
#include "test_support.hpp"

using namespace hydropencil;

namespace {

ContraMetric metric1(const ContextPtr& ctx, const std::string& g11) {
    ExprMatrix m(ctx, 1);
    m(0, 0) = parse(g11, ctx);
    return {m};
}

ContraMetric diag2(const ContextPtr& ctx, const std::string& a, const std::string& b) {
    ExprMatrix m(ctx, 2);
    m(0, 0) = parse(a, ctx);
    m(1, 1) = parse(b, ctx);
    return {m};
}

}  // namespace

TEST_CASE("invert_metric") {
    auto ctx = Context::make(2);
    ContraMetric id{ExprMatrix::identity(ctx, 2)};
    CHECK(invert_metric(id) == ExprMatrix::identity(ctx, 2));

    auto ctx1 = Context::make(1);
    CHECK(invert_metric(metric1(ctx1, "2*v1"))(0, 0).str() == "1/(2*v1)");

    ExprMatrix low = invert_metric(diag2(ctx, "1", "1/v1^2"));
    CHECK(low(0, 0).str() == "1");
    CHECK(low(1, 1).str() == "v1^2");
    CHECK(low(0, 1).is_zero());

    ExprMatrix sing(ctx, 2);
    sing(0, 0) = parse("v1", ctx);
    CHECK_THROWS_AS(invert_metric(ContraMetric{sing}), DegenerateMetric);
}

TEST_CASE("christoffel symbols") {
    auto ctx = Context::make(2);
    Connection flat = christoffel(ContraMetric{ExprMatrix::identity(ctx, 2)});
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) CHECK(flat.low[i][j][k].is_zero());

    // covariant diag(1, v1^2), passed as its contravariant inverse
    Connection polar = christoffel(diag2(ctx, "1", "1/v1^2"));
    CHECK(polar.low[0][1][1].str() == "-v1");
    CHECK(polar.low[1][0][1].str() == "1/v1");
    CHECK(polar.low[1][1][0].str() == "1/v1");
    CHECK(polar.low[0][0][0].is_zero());
    CHECK(polar.low[0][0][1].is_zero());
    CHECK(polar.low[1][0][0].is_zero());
    CHECK(polar.low[1][1][1].is_zero());

    auto ctx1 = Context::make(1);
    Connection c1 = christoffel(metric1(ctx1, "2*v1"));
    CHECK(c1.low[0][0][0].str() == "-1/(2*v1)");
}

TEST_CASE("metric compatibility of the connection") {
    auto ctx = Context::make(2);
    hptest::Rng rng(11);
    int done = 0;
    while (done < 4) {
        ExprMatrix g(ctx, 2);
        for (std::uint32_t i = 0; i < 2; ++i)
            for (std::uint32_t j = i; j < 2; ++j) {
                Expr e = hptest::random_polynomial_expr(ctx, rng, 2, 2);
                g(i, j) = e;
                g(j, i) = e;
            }
        if (g.det().is_zero()) continue;
        ++done;
        ContraMetric m{g};
        Connection conn = christoffel(m);
        ExprMatrix low = invert_metric(m);
        // d_k g_{ij} - Gamma^s_{ki} g_{sj} - Gamma^s_{kj} g_{is} = 0
        for (std::uint32_t k = 0; k < 2; ++k)
            for (std::uint32_t i = 0; i < 2; ++i)
                for (std::uint32_t j = 0; j < 2; ++j) {
                    Expr d = low(i, j).diff(k);
                    for (std::uint32_t s = 0; s < 2; ++s)
                        d -= conn.low[s][k][i] * low(s, j) + conn.low[s][k][j] * low(i, s);
                    CHECK(d.is_zero());
                }
        // symmetry in the lower indices
        for (std::uint32_t i = 0; i < 2; ++i)
            for (std::uint32_t j = 0; j < 2; ++j)
                for (std::uint32_t k = 0; k < 2; ++k)
                    CHECK((conn.low[i][j][k] - conn.low[i][k][j]).is_zero());
    }
}

TEST_CASE("riemann and flatness") {
    auto ctx = Context::make(2);
    CHECK(is_flat(ContraMetric{ExprMatrix::identity(ctx, 2)}).flat);
    CHECK(is_flat(diag2(ctx, "1", "1/v1^2")).flat);  // polar form

    FlatnessReport r = is_flat(diag2(ctx, "1", "1/(1+v1^2)"));
    REQUIRE_FALSE(r.flat);
    auto& [i, j, k, l, w] = *r.witness;
    CHECK(i == 0);
    CHECK(j == 1);
    CHECK(k == 0);
    CHECK(l == 1);
    CHECK(w.str() == "-1/(v1^2 + 1)");

    // curvature antisymmetry in k,l on a non-flat metric
    Curvature cv = riemann(diag2(ctx, "1", "1/(1+v1^2)"));
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d)
                    CHECK((cv.R[a][b][c][d] + cv.R[a][b][d][c]).is_zero());

    // every nondegenerate 1-D metric is flat
    auto ctx1 = Context::make(1);
    hptest::Rng rng(3);
    for (int it = 0; it < 5; ++it) {
        Expr g = hptest::random_rational_expr(ctx1, rng);
        if (g.is_zero()) continue;
        ExprMatrix m(ctx1, 1);
        m(0, 0) = g;
        CHECK(is_flat(ContraMetric{m}).flat);
    }
}

TEST_CASE("lie derivative of a metric") {
    auto ctx1 = Context::make(1);
    ContraMetric one = metric1(ctx1, "1");
    VectorField X{{parse("v1", ctx1)}};
    CHECK(lie_metric(one, X)(0, 0).str() == "-2");

    ContraMetric gv = metric1(ctx1, "v1");
    VectorField e{{parse("1", ctx1)}};
    CHECK(lie_metric(gv, e)(0, 0).str() == "1");

    auto ctx = Context::make(2);
    ContraMetric id{ExprMatrix::identity(ctx, 2)};
    VectorField c{{parse("3", ctx), parse("5", ctx)}};
    CHECK(lie_metric(id, c).is_zero());
}

TEST_CASE("lie bracket") {
    auto ctx1 = Context::make(1);
    VectorField X{{parse("1", ctx1)}};
    VectorField Y{{parse("v1", ctx1)}};
    CHECK(lie_bracket(X, X).c[0].is_zero());
    CHECK(lie_bracket(X, Y).c[0].str() == "1");

    auto ctx = Context::make(2);
    VectorField A{{parse("1", ctx), parse("0", ctx)}};
    VectorField B{{parse("v1", ctx), parse("v2", ctx)}};
    VectorField ab = lie_bracket(A, B);
    CHECK(ab.c[0].str() == "1");
    CHECK(ab.c[1].is_zero());

    // antisymmetry and Jacobi identity
    hptest::Rng rng(5);
    for (int it = 0; it < 8; ++it) {
        VectorField P = hptest::random_polynomial_field(ctx, rng, 2);
        VectorField Q = hptest::random_polynomial_field(ctx, rng, 2);
        VectorField R = hptest::random_polynomial_field(ctx, rng, 2);
        VectorField pq = lie_bracket(P, Q), qp = lie_bracket(Q, P);
        for (std::uint32_t i = 0; i < 2; ++i) CHECK((pq.c[i] + qp.c[i]).is_zero());
        VectorField j1 = lie_bracket(P, lie_bracket(Q, R));
        VectorField j2 = lie_bracket(Q, lie_bracket(R, P));
        VectorField j3 = lie_bracket(R, lie_bracket(P, Q));
        for (std::uint32_t i = 0; i < 2; ++i) CHECK((j1.c[i] + j2.c[i] + j3.c[i]).is_zero());
    }
}

TEST_CASE("pushforward of a metric") {
    auto ctx1 = Context::make(1);
    CoordinateMap ident{{parse("v1", ctx1)}, {parse("v1", ctx1)}};
    ContraMetric g = metric1(ctx1, "1 + v1^2");
    CHECK(pushforward_metric(g, ident).g == g.g);

    // u = 2v + 1 on g = 1: Jacobian 2 gives 4
    CoordinateMap aff{{parse("2*v1 + 1", ctx1)}, {parse("(v1 - 1)/2", ctx1)}};
    CHECK(pushforward_metric(metric1(ctx1, "1"), aff).g(0, 0).str() == "4");

    // the inverse map undoes the forward map
    CoordinateMap back{aff.inverse, aff.forward};
    ContraMetric once = pushforward_metric(g, aff);
    CHECK(pushforward_metric(once, back).g == g.g);

    // flatness is preserved
    auto ctx = Context::make(2);
    hptest::Rng rng(17);
    CoordinateMap map = hptest::random_coordinate_map(ctx, rng);
    ContraMetric flat2 = diag2(ctx, "1", "1/v1^2");
    CHECK(is_flat(pushforward_metric(flat2, map)).flat);
    ContraMetric curved = diag2(ctx, "1", "1/(1+v1^2)");
    CHECK_FALSE(is_flat(pushforward_metric(curved, map)).flat);

    CoordinateMap bad{{parse("v1", ctx), parse("v2", ctx)},
                      {parse("v2", ctx), parse("v2", ctx)}};
    CHECK_THROWS_AS(pushforward_metric(flat2, bad), InvalidMap);
}

TEST_CASE("pushforward commutes with the metric lie derivative") {
    auto ctx = Context::make(2);
    hptest::Rng rng(23);
    for (int it = 0; it < 5; ++it) {
        CoordinateMap map = hptest::random_coordinate_map(ctx, rng);
        ExprMatrix g(ctx, 2);
        for (std::uint32_t i = 0; i < 2; ++i)
            for (std::uint32_t j = i; j < 2; ++j) {
                Expr e = hptest::random_polynomial_expr(ctx, rng, 2, 2);
                g(i, j) = e;
                g(j, i) = e;
            }
        ContraMetric m{g};
        VectorField X = hptest::random_polynomial_field(ctx, rng, 2);
        ExprMatrix lhs = pushforward_metric(ContraMetric{lie_metric(m, X)}, map).g;
        ExprMatrix rhs = lie_metric(pushforward_metric(m, map), pushforward_vector(X, map));
        CHECK(lhs == rhs);
    }
}

TEST_CASE("covariant hessian") {
    auto ctx1 = Context::make(1);
    ContraMetric one = metric1(ctx1, "1");
    VectorField f{{parse("v1^2/2", ctx1)}};
    auto res = covariant_hessian(one, f);
    CHECK(res.metric_flat);
    CHECK(res.upper[0][0][0].str() == "1");

    VectorField lin{{parse("3*v1 + 2", ctx1)}};
    CHECK(covariant_hessian(one, lin).upper[0][0][0].is_zero());

    auto ctx = Context::make(2);
    ContraMetric id{ExprMatrix::identity(ctx, 2)};
    VectorField cf{{parse("5", ctx), parse("7", ctx)}};
    auto res2 = covariant_hessian(id, cf);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) CHECK(res2.upper[i][j][k].is_zero());

    // warning flag for a non-flat metric, computation still runs
    auto res3 = covariant_hessian(diag2(ctx, "1", "1/(1+v1^2)"), cf);
    CHECK_FALSE(res3.metric_flat);
}
