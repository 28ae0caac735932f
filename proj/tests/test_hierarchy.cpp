#include <catch_amalgamated.hpp>

#include "hydropencil/hierarchy.hpp"
#include "test_support.hpp"

using namespace hydropencil;

namespace {

ContraMetric eta1(const ContextPtr& ctx) {
    ExprMatrix m(ctx, 1);
    m(0, 0) = Expr::constant(ctx, 1);
    return {m};
}

VectorField field(const ContextPtr& ctx, std::initializer_list<const char*> comps) {
    VectorField f{{}};
    for (const char* c : comps) f.c.push_back(parse(c, ctx));
    return f;
}

}  // namespace

TEST_CASE("variational derivative of zeroth-order densities") {
    auto ctx = Context::make(2);
    // quadratic form 1/2 eta_{jl} v^j v^l with eta = diag(2, -1)
    Density rho{parse("v1^2 - v2^2/2", ctx)};
    auto grad = variational_derivative(rho);
    CHECK(grad[0].str() == "2*v1");
    CHECK(grad[1].str() == "-v2");

    Density c{parse("7", ctx)};
    for (const auto& g : variational_derivative(c)) CHECK(g.is_zero());

    auto ctx1 = Context::make(1);
    Density cubic{parse("v1^3/2", ctx1)};
    CHECK(variational_derivative(cubic)[0].str() == "3*v1^2/2");
}

TEST_CASE("applying an operator to a covector") {
    auto ctx = Context::make(2);
    ContraMetric eta{ExprMatrix::identity(ctx, 2)};
    // phi_j = eta_{jl} v^l gives the translation flow
    std::vector<Expr> phi = {parse("v1", ctx), parse("v2", ctx)};
    HydroFlow tr = apply_dn(constant_operator(eta), phi);
    CHECK(tr.M == ExprMatrix::identity(ctx, 2));

    std::vector<Expr> zero = {Expr::zero(ctx), Expr::zero(ctx)};
    CHECK(apply_dn(constant_operator(eta), zero).M.is_zero());

    auto ctx1 = Context::make(1);
    DNOperator P = from_h(eta1(ctx1), field(ctx1, {"v1^2/2"}));
    HydroFlow f = apply_dn(P, {parse("v1", ctx1)});
    CHECK(f.M(0, 0).str() == "3*v1");
}

TEST_CASE("integrating a flow matrix to its potential") {
    auto ctx = Context::make(2);
    VectorField F = integrate_flow(ExprMatrix::identity(ctx, 2));
    CHECK(F.c[0].str() == "v1");
    CHECK(F.c[1].str() == "v2");

    auto ctx1 = Context::make(1);
    ExprMatrix m1(ctx1, 1);
    m1(0, 0) = parse("3*v1", ctx1);
    CHECK(integrate_flow(m1).c[0].str() == "3*v1^2/2");

    // mixed-partial obstruction
    ExprMatrix bad(ctx, 2);
    bad(0, 0) = parse("v2", ctx);
    bad(0, 1) = parse("-v1", ctx);
    CHECK_THROWS_AS(integrate_flow(bad), NotExact);

    ExprMatrix rational(ctx, 2);
    rational(0, 0) = parse("1/(1+v1)", ctx);
    CHECK_THROWS_AS(integrate_flow(rational), NonPolynomial);
}

TEST_CASE("first flow in closed form") {
    auto ctx1 = Context::make(1);
    HydroFlow first = first_flow_closed_form(eta1(ctx1), field(ctx1, {"v1^2/2"}));
    CHECK(first.M(0, 0).str() == "3*v1");
    REQUIRE(first.potential);
    CHECK(first.potential->c[0].str() == "3*v1^2/2");

    CHECK(first_flow_closed_form(eta1(ctx1), field(ctx1, {"0"})).M.is_zero());

    // linear h over identity eta: M = A + A^T
    auto ctx = Context::make(2);
    ContraMetric eta{ExprMatrix::identity(ctx, 2)};
    HydroFlow lin = first_flow_closed_form(eta, field(ctx, {"2*v1 + v2", "3*v1"}));
    CHECK(lin.M(0, 0).str() == "4");
    CHECK(lin.M(0, 1).str() == "4");
    CHECK(lin.M(1, 0).str() == "4");
    CHECK(lin.M(1, 1).is_zero());
}

TEST_CASE("recursion step reproduces the closed forms") {
    auto ctx1 = Context::make(1);
    ContraMetric eta = eta1(ctx1);
    VectorField h = field(ctx1, {"v1^2/2"});

    // applied to the translation potential F = v
    HydroFlow step1 = recursion_step(eta, h, field(ctx1, {"v1"}));
    CHECK(step1.M(0, 0).str() == "3*v1");

    // applied to the first-flow potential
    HydroFlow step2 = recursion_step(eta, h, field(ctx1, {"3*v1^2/2"}));
    CHECK(step2.M(0, 0).str() == "15*v1^2/2");

    CHECK(recursion_step(eta, field(ctx1, {"0"}), field(ctx1, {"3*v1^2/2"})).M.is_zero());

    // property: recursion from translation equals the closed form
    for (std::uint32_t n : {1u, 2u}) {
        auto ctx = Context::make(n);
        hptest::Rng rng(2100 + n);
        for (int it = 0; it < 5; ++it) {
            hptest::PassingInstance inst = hptest::passing_instance(ctx, rng);
            VectorField translation{{}};
            for (std::uint32_t i = 0; i < n; ++i) translation.c.push_back(Expr::variable(ctx, i));
            HydroFlow via_step = recursion_step(inst.eta, inst.h, translation);
            HydroFlow closed = first_flow_closed_form(inst.eta, inst.h);
            CHECK(via_step.M == closed.M);
        }
    }
}

TEST_CASE("second flow in closed form") {
    auto ctx1 = Context::make(1);
    HydroFlow second = second_flow_closed_form(eta1(ctx1), field(ctx1, {"v1^2/2"}));
    CHECK(second.M(0, 0).str() == "15*v1^2/2");

    CHECK(second_flow_closed_form(eta1(ctx1), field(ctx1, {"0"})).M.is_zero());

    // the closed form must equal one recursion step from the first flow,
    // for arbitrary h (constant terms of h are gauge and stay normalized out)
    for (std::uint32_t n : {1u, 2u, 3u}) {
        auto ctx = Context::make(n);
        hptest::Rng rng(2200 + n);
        for (int it = 0; it < 6; ++it) {
            ContraMetric eta = it % 2 == 0 ? hptest::passing_instance(ctx, rng).eta
                                           : hptest::random_eta(ctx, rng);
            VectorField h = it % 2 == 0 ? hptest::passing_instance(ctx, rng).h
                                        : hptest::random_polynomial_field(ctx, rng, 3);
            HydroFlow first = first_flow_closed_form(eta, h);
            REQUIRE(first.potential);
            HydroFlow stepped = recursion_step(eta, h, *first.potential);
            HydroFlow closed = second_flow_closed_form(eta, h);
            CHECK(stepped.M == closed.M);
        }
    }
}

TEST_CASE("hierarchy construction") {
    auto ctx1 = Context::make(1);
    ContraMetric eta = eta1(ctx1);
    VectorField h = field(ctx1, {"v1^2/2"});

    HierarchyResult one = build_hierarchy(eta, h, 1);
    REQUIRE(one.flows.size() == 1);
    CHECK_FALSE(one.failed_step);
    CHECK(one.flows[0].M(0, 0).str() == "3*v1");

    HierarchyResult two = build_hierarchy(eta, h, 2);
    REQUIRE(two.flows.size() == 2);
    CHECK(two.flows[0].M(0, 0).str() == "3*v1");
    CHECK(two.flows[1].M(0, 0).str() == "15*v1^2/2");
    REQUIRE(two.flows[1].potential);
    CHECK(two.flows[1].potential->c[0].str() == "5*v1^3/2");

    HierarchyResult zero = build_hierarchy(eta, field(ctx1, {"0"}), 3);
    REQUIRE(zero.flows.size() == 3);
    for (const auto& f : zero.flows) CHECK(f.M.is_zero());

    // the first flow always admits a potential (it is explicit), even for h
    // violating the residual equations
    auto ctx = Context::make(2);
    hptest::Rng rng(2300);
    for (int it = 0; it < 8; ++it) {
        ContraMetric eta = hptest::random_eta(ctx, rng);
        VectorField h = hptest::random_polynomial_field(ctx, rng, 3);
        HydroFlow first = first_flow_closed_form(eta, h);
        VectorField F = integrate_flow(first.M);
        for (std::uint32_t i = 0; i < 2; ++i)
            CHECK((F.c[i] - first.potential->c[i]).is_zero());
    }
}

TEST_CASE("hierarchy stops early when a flow is not exact") {
    auto ctx = Context::make(2);
    ContraMetric eta{ExprMatrix::identity(ctx, 2)};
    VectorField h = field(ctx, {"v2^2", "0"});
    REQUIRE_FALSE(mokhov_residuals(eta, h).all_zero);
    HierarchyResult res = build_hierarchy(eta, h, 3);
    REQUIRE(res.failed_step);
    CHECK(*res.failed_step == 2);
    CHECK(res.flows.size() == 2);
    CHECK(res.flows[0].potential.has_value());
    CHECK_FALSE(res.flows[1].potential.has_value());
}

TEST_CASE("density search reports absence honestly") {
    auto ctx = Context::make(2);
    ContraMetric eta{ExprMatrix::identity(ctx, 2)};
    // a flow with a potential whose associated one-form is not closed
    ExprMatrix M(ctx, 2);
    M(0, 1) = Expr::constant(ctx, 1);
    HydroFlow flow{M, VectorField{{parse("v2", ctx), parse("0", ctx)}}};
    BiHamiltonianReport rep =
        bihamiltonian_check(flow, eta, field(ctx, {"v1^2/2", "v2^2/2"}));
    CHECK_FALSE(rep.is_first_flow);
    CHECK_FALSE(rep.density_found);
    CHECK_FALSE(rep.verdict);
    REQUIRE_FALSE(rep.witnesses.empty());
}

TEST_CASE("bi-hamiltonian certificate for the first flow") {
    auto ctx1 = Context::make(1);
    ContraMetric eta = eta1(ctx1);
    VectorField h = field(ctx1, {"v1^2/2"});
    HydroFlow first = first_flow_closed_form(eta, h);

    BiHamiltonianReport rep = bihamiltonian_check(first, eta, h);
    CHECK(rep.is_first_flow);
    CHECK(rep.via_p1);
    CHECK(rep.via_p2);
    CHECK(rep.verdict);
    REQUIRE(rep.h2_density);
    CHECK(rep.h2_density->rho.str() == "v1^3/2");

    // zero flow is trivially represented
    VectorField zh = field(ctx1, {"0"});
    HydroFlow zero = first_flow_closed_form(eta, zh);
    BiHamiltonianReport zrep = bihamiltonian_check(zero, eta, zh);
    CHECK(zrep.verdict);

    // linear h: both representations hold with quadratic densities
    auto ctx = Context::make(2);
    hptest::Rng rng(2400);
    for (int it = 0; it < 4; ++it) {
        hptest::PassingInstance lin = hptest::passing_linear(ctx, rng);
        HydroFlow f = first_flow_closed_form(lin.eta, lin.h);
        BiHamiltonianReport r = bihamiltonian_check(f, lin.eta, lin.h);
        CHECK(r.is_first_flow);
        CHECK(r.verdict);
    }
}

TEST_CASE("second-flow density through the constant operator") {
    auto ctx1 = Context::make(1);
    ContraMetric eta = eta1(ctx1);
    VectorField h = field(ctx1, {"v1^2/2"});
    HierarchyResult res = build_hierarchy(eta, h, 2);
    BiHamiltonianReport rep = bihamiltonian_check(res.flows[1], eta, h);
    CHECK_FALSE(rep.is_first_flow);
    CHECK(rep.density_found);
    CHECK(rep.verdict);
    REQUIRE(rep.h2_density);
    // rho with d2 rho / dv^2 = (15/2) v^2: rho = (5/8) v^4
    CHECK(rep.h2_density->rho.str() == "5*v1^4/8");
}
