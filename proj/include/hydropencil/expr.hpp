#pragma once

#include <gmpxx.h>

#include <cmath>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hydropencil/context.hpp"
#include "hydropencil/polynomial.hpp"

namespace hydropencil {

/// Exact rational function over the context's variables, kept canonical:
/// numerator and denominator are coprime integer polynomials, the denominator
/// has a positive leading coefficient, and zero is 0/1. Equality is structural.
class Expr {
  public:
    Expr() = default;

    static Expr zero(ContextPtr ctx) { return Expr(ctx, Poly(ctx->nvars()), one_poly(ctx)); }

    static Expr constant(ContextPtr ctx, const mpq_class& q) {
        mpq_class c(q);
        c.canonicalize();
        return Expr(ctx, Poly::constant(ctx->nvars(), c.get_num()),
                    Poly::constant(ctx->nvars(), c.get_den()));
    }

    static Expr constant(ContextPtr ctx, long n) { return constant(ctx, mpq_class(n)); }

    static Expr variable(ContextPtr ctx, std::uint32_t idx) {
        return Expr(ctx, Poly::variable(ctx->nvars(), idx), one_poly(ctx));
    }

    static Expr variable(ContextPtr ctx, const std::string& name) {
        auto idx = ctx->find(name);
        if (!idx) throw UnknownIdentifier(name);
        return variable(ctx, *idx);
    }

    static Expr from_parts(ContextPtr ctx, Poly num, Poly den) {
        return make(std::move(ctx), std::move(num), std::move(den));
    }

    const ContextPtr& context() const { return ctx_; }
    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }

    bool is_zero() const { return num_.is_zero(); }
    bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
    bool is_polynomial() const { return den_.is_constant(); }

    mpq_class constant_value() const {
        mpq_class q(num_.constant_value(), den_.constant_value());
        q.canonicalize();
        return q;
    }

    friend bool operator==(const Expr& a, const Expr& b) {
        return same_context(a.ctx_, b.ctx_) && a.num_ == b.num_ && a.den_ == b.den_;
    }

    Expr operator-() const { return Expr(ctx_, -num_, den_); }

    friend Expr operator+(const Expr& a, const Expr& b) {
        check(a, b);
        if (a.den_ == b.den_) return make(a.ctx_, a.num_ + b.num_, a.den_);
        Poly g = Poly::gcd(a.den_, b.den_);
        Poly db = Poly::divexact(b.den_, g);
        Poly da = Poly::divexact(a.den_, g);
        return make(a.ctx_, a.num_ * db + b.num_ * da, a.den_ * db);
    }

    friend Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

    friend Expr operator*(const Expr& a, const Expr& b) {
        check(a, b);
        // crosswise reduction keeps intermediate products small
        Poly g1 = Poly::gcd(a.num_, b.den_);
        Poly g2 = Poly::gcd(b.num_, a.den_);
        bool t1 = g1.is_constant() && g1.constant_value() == 1;
        bool t2 = g2.is_constant() && g2.constant_value() == 1;
        Poly num = (t1 ? a.num_ : Poly::divexact(a.num_, g1)) *
                   (t2 ? b.num_ : Poly::divexact(b.num_, g2));
        Poly den = (t2 ? a.den_ : Poly::divexact(a.den_, g2)) *
                   (t1 ? b.den_ : Poly::divexact(b.den_, g1));
        return make(a.ctx_, std::move(num), std::move(den));
    }

    friend Expr operator/(const Expr& a, const Expr& b) {
        check(a, b);
        if (b.is_zero()) throw DivisionByZero();
        return make(a.ctx_, a.num_ * b.den_, a.den_ * b.num_);
    }

    Expr& operator+=(const Expr& o) { return *this = *this + o; }
    Expr& operator-=(const Expr& o) { return *this = *this - o; }
    Expr& operator*=(const Expr& o) { return *this = *this * o; }
    Expr& operator/=(const Expr& o) { return *this = *this / o; }

    Expr pow(unsigned n) const {
        // already coprime, so no normalization is needed
        return Expr(ctx_, num_.pow(n), den_.pow(n));
    }

    /// Exact partial derivative with respect to a coordinate (not a parameter).
    Expr diff(std::uint32_t coord) const {
        if (coord >= ctx_->dimension()) throw UnknownIdentifier(ctx_->var_name(coord));
        return diff_var(coord);
    }

    Expr diff(const std::string& coord_name) const {
        return diff_var(ctx_->coordinate_index(coord_name));
    }

    /// Simultaneous substitution of coordinates. Binding expressions must all
    /// share one target context; parameters pass through by name.
    Expr substitute(const std::map<std::string, Expr>& bindings) const {
        ContextPtr target;
        for (const auto& [name, value] : bindings) {
            if (!ctx_->find(name) || ctx_->is_parameter(*ctx_->find(name)))
                throw UnknownIdentifier(name);
            if (!target)
                target = value.context();
            else if (!same_context(target, value.context()))
                throw Error("substitution bindings mix contexts");
        }
        if (!target) target = ctx_;
        std::vector<const Expr*> values(ctx_->nvars(), nullptr);
        std::vector<Expr> storage;
        storage.reserve(ctx_->nvars());
        for (std::uint32_t i = 0; i < ctx_->nvars(); ++i) {
            const std::string& nm = ctx_->var_name(i);
            auto it = bindings.find(nm);
            if (it != bindings.end()) {
                storage.push_back(it->second);
            } else {
                if (!num_.contains_var(i) && !den_.contains_var(i)) {
                    storage.push_back(zero(target));  // placeholder, never used
                } else if (ctx_->is_parameter(i)) {
                    auto idx = target->find(nm);
                    if (!idx || !target->is_parameter(*idx)) throw UnknownIdentifier(nm);
                    storage.push_back(variable(target, *idx));
                } else if (same_context(target, ctx_)) {
                    storage.push_back(variable(target, i));  // unbound: identity
                } else {
                    throw Error("substitution bindings must cover coordinate '" + nm + "'");
                }
            }
        }
        for (std::uint32_t i = 0; i < ctx_->nvars(); ++i) values[i] = &storage[i];
        Expr ns = eval_poly_at(num_, target, values);
        Expr ds = eval_poly_at(den_, target, values);
        if (ds.is_zero()) throw SubstitutionPole();
        return ns / ds;
    }

    /// Double-precision evaluation at a point (coordinates then parameters),
    /// summing monomials in the canonical order.
    double eval_numeric(std::span<const double> point, double pole_eps = 1e-12) const {
        if (point.size() != ctx_->nvars())
            throw Error("evaluation point has wrong dimension");
        double d = den_.eval(point);
        if (std::abs(d) <= pole_eps) throw NumericPole(d);
        return num_.eval(point) / d;
    }

    /// Canonical text form; parses back to the identical Expr.
    std::string str() const {
        if (is_zero()) return "0";
        std::string n = poly_str(num_);
        if (den_.is_constant() && den_.constant_value() == 1) return n;
        std::string d = poly_str(den_);
        std::string lhs = num_.terms().size() > 1 ? "(" + n + ")" : n;
        std::string rhs = needs_parens_as_denominator(den_) ? "(" + d + ")" : d;
        return lhs + "/" + rhs;
    }

    /// Re-expresses over a context that contains all this context's variable
    /// names (used to inject the pencil parameter).
    Expr lift_to(ContextPtr target) const {
        std::vector<std::uint32_t> perm(ctx_->nvars());
        for (std::uint32_t i = 0; i < ctx_->nvars(); ++i) {
            auto idx = target->find(ctx_->var_name(i));
            if (!idx) throw UnknownIdentifier(ctx_->var_name(i));
            perm[i] = *idx;
        }
        return Expr(target, num_.lift(target->nvars(), perm), den_.lift(target->nvars(), perm));
    }

  private:
    ContextPtr ctx_;
    Poly num_{0};
    Poly den_{0};

    Expr(ContextPtr ctx, Poly num, Poly den)
        : ctx_(std::move(ctx)), num_(std::move(num)), den_(std::move(den)) {}

    static Poly one_poly(const ContextPtr& ctx) { return Poly::constant(ctx->nvars(), 1); }

    static void check(const Expr& a, const Expr& b) {
        if (!same_context(a.ctx_, b.ctx_)) throw Error("mixing expressions from different contexts");
    }

    static Expr make(ContextPtr ctx, Poly num, Poly den) {
        if (den.is_zero()) throw DivisionByZero();
        if (num.is_zero()) {
            Poly one = one_poly(ctx);
            return Expr(std::move(ctx), Poly(one.nvars()), std::move(one));
        }
        Poly g = Poly::gcd(num, den);
        if (!(g.is_constant() && g.constant_value() == 1)) {
            num = Poly::divexact(num, g);
            den = Poly::divexact(den, g);
        }
        if (den.leading_term().c < 0) {
            num = -num;
            den = -den;
        }
        return Expr(std::move(ctx), std::move(num), std::move(den));
    }

    Expr diff_var(std::uint32_t var) const {
        if (den_.is_constant())
            return make(ctx_, num_.diff(var), den_);
        // (n'd - nd')/d^2
        return make(ctx_, num_.diff(var) * den_ - num_ * den_.diff(var), den_ * den_);
    }

    static Expr eval_poly_at(const Poly& p, const ContextPtr& target,
                             const std::vector<const Expr*>& values) {
        Expr acc = zero(target);
        for (const auto& t : p.terms()) {
            Expr term = constant(target, mpq_class(t.c));
            for (std::size_t i = 0; i < t.e.size(); ++i)
                if (t.e[i] != 0) term *= values[i]->pow(t.e[i]);
            acc += term;
        }
        return acc;
    }

    // --- canonical printing --------------------------------------------------

    std::string monomial_str(const Poly::Term& t) const {
        std::ostringstream os;
        bool all_zero = true;
        for (auto e : t.e)
            if (e != 0) all_zero = false;
        mpz_class a = abs(t.c);
        if (all_zero) {
            os << a;
            return os.str();
        }
        bool lead = true;
        if (a != 1) {
            os << a;
            lead = false;
        }
        for (std::size_t i = 0; i < t.e.size(); ++i) {
            if (t.e[i] == 0) continue;
            if (!lead) os << "*";
            os << ctx_->var_name(i);
            if (t.e[i] > 1) os << "^" << t.e[i];
            lead = false;
        }
        return os.str();
    }

    std::string poly_str(const Poly& p) const {
        std::ostringstream os;
        bool first = true;
        for (const auto& t : p.terms()) {
            if (first) {
                if (t.c < 0) os << "-";
                os << monomial_str(t);
                first = false;
            } else {
                os << (t.c < 0 ? " - " : " + ") << monomial_str(t);
            }
        }
        return os.str();
    }

    static bool needs_parens_as_denominator(const Poly& p) {
        if (p.terms().size() != 1) return true;
        const auto& t = p.terms().front();
        if (t.c < 0) return true;
        unsigned factors = (t.c != 1) ? 1 : 0;
        for (auto e : t.e)
            if (e != 0) ++factors;
        return factors > 1;
    }
};

}  // namespace hydropencil
