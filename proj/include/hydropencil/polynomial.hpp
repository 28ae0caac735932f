#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hydropencil/errors.hpp"

namespace hydropencil {

using Exponents = std::vector<std::uint32_t>;

// Graded lexicographic order: total degree first, ties broken by the earliest
// declared variable carrying the larger exponent.
inline int grlex_compare(const Exponents& a, const Exponents& b) {
    std::uint64_t da = 0, db = 0;
    for (auto e : a) da += e;
    for (auto e : b) db += e;
    if (da != db) return da < db ? -1 : 1;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    return 0;
}

struct GrlexGreater {
    bool operator()(const Exponents& a, const Exponents& b) const {
        return grlex_compare(a, b) > 0;
    }
};

/// Multivariate polynomial over Z in a fixed number of variables.
/// Terms are kept sorted in descending graded-lex order with nonzero
/// coefficients; this representation is canonical.
class Poly {
  public:
    struct Term {
        Exponents e;
        mpz_class c;
    };

    explicit Poly(std::uint32_t nvars = 0) : nvars_(nvars) {}

    static Poly constant(std::uint32_t nvars, mpz_class v) {
        Poly p(nvars);
        if (v != 0) p.t_.push_back({Exponents(nvars, 0), std::move(v)});
        return p;
    }

    static Poly variable(std::uint32_t nvars, std::uint32_t idx) {
        Poly p(nvars);
        Exponents e(nvars, 0);
        e.at(idx) = 1;
        p.t_.push_back({std::move(e), mpz_class(1)});
        return p;
    }

    static Poly monomial(std::uint32_t nvars, Exponents e, mpz_class c) {
        Poly p(nvars);
        if (c != 0) p.t_.push_back({std::move(e), std::move(c)});
        return p;
    }

    std::uint32_t nvars() const { return nvars_; }
    const std::vector<Term>& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }

    bool is_constant() const {
        if (t_.empty()) return true;
        if (t_.size() > 1) return false;
        for (auto e : t_[0].e)
            if (e != 0) return false;
        return true;
    }

    // 0 for the zero polynomial
    const mpz_class& constant_value() const {
        static const mpz_class zero(0);
        return t_.empty() ? zero : t_[0].c;
    }

    long total_degree() const {  // -1 for zero
        if (t_.empty()) return -1;
        long d = 0;
        for (auto e : t_[0].e) d += e;
        return d;
    }

    long degree_in(std::uint32_t var) const {  // -1 for zero
        if (t_.empty()) return -1;
        long d = 0;
        for (const auto& t : t_) d = std::max<long>(d, t.e[var]);
        return d;
    }

    bool contains_var(std::uint32_t var) const {
        for (const auto& t : t_)
            if (t.e[var] != 0) return true;
        return false;
    }

    const Term& leading_term() const { return t_.front(); }

    friend bool operator==(const Poly& a, const Poly& b) {
        if (a.nvars_ != b.nvars_ || a.t_.size() != b.t_.size()) return false;
        for (std::size_t i = 0; i < a.t_.size(); ++i)
            if (a.t_[i].e != b.t_[i].e || a.t_[i].c != b.t_[i].c) return false;
        return true;
    }

    Poly operator-() const {
        Poly r(*this);
        for (auto& t : r.t_) t.c = -t.c;
        return r;
    }

    friend Poly operator+(const Poly& a, const Poly& b) { return merge(a, b, false); }
    friend Poly operator-(const Poly& a, const Poly& b) { return merge(a, b, true); }

    friend Poly operator*(const Poly& a, const Poly& b) {
        Poly r(a.nvars_);
        if (a.is_zero() || b.is_zero()) return r;
        if (b.t_.size() == 1) return mul_term(a, b.t_[0]);
        if (a.t_.size() == 1) return mul_term(b, a.t_[0]);
        std::map<Exponents, mpz_class, GrlexGreater> acc;
        Exponents e(a.nvars_);
        for (const auto& ta : a.t_)
            for (const auto& tb : b.t_) {
                for (std::size_t i = 0; i < e.size(); ++i) e[i] = ta.e[i] + tb.e[i];
                acc[e] += ta.c * tb.c;
            }
        r.t_.reserve(acc.size());
        for (auto& [ee, cc] : acc)
            if (cc != 0) r.t_.push_back({ee, std::move(cc)});
        return r;
    }

    Poly& operator+=(const Poly& o) { return *this = *this + o; }
    Poly& operator-=(const Poly& o) { return *this = *this - o; }
    Poly& operator*=(const Poly& o) { return *this = *this * o; }

    friend Poly operator*(const Poly& a, const mpz_class& c) {
        Poly r(a.nvars_);
        if (c == 0) return r;
        r.t_ = a.t_;
        for (auto& t : r.t_) t.c *= c;
        return r;
    }

    Poly pow(unsigned n) const {
        Poly r = constant(nvars_, 1);
        Poly base = *this;
        while (n) {
            if (n & 1u) r = r * base;
            base = (n >>= 1) ? base * base : base;
        }
        return r;
    }

    Poly diff(std::uint32_t var) const {
        Poly r(nvars_);
        for (const auto& t : t_) {
            if (t.e[var] == 0) continue;
            Term d;
            d.e = t.e;
            d.c = t.c * t.e[var];
            d.e[var] -= 1;
            r.t_.push_back(std::move(d));
        }
        // differentiation preserves the monomial order
        return r;
    }

    // Integer content, nonnegative; 0 for the zero polynomial.
    mpz_class content() const {
        mpz_class g(0);
        for (const auto& t : t_) {
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), t.c.get_mpz_t());
            if (g == 1) break;
        }
        return g;
    }

    Poly divexact_int(const mpz_class& c) const {
        Poly r(nvars_);
        r.t_ = t_;
        for (auto& t : r.t_) {
            mpz_class q;
            mpz_divexact(q.get_mpz_t(), t.c.get_mpz_t(), c.get_mpz_t());
            t.c = std::move(q);
        }
        return r;
    }

    // Exact quotient, or nullopt when b does not divide a.
    static std::optional<Poly> try_divide(const Poly& a, const Poly& b) {
        if (b.is_zero()) return std::nullopt;
        Poly q(a.nvars_);
        if (a.is_zero()) return q;
        std::map<Exponents, mpz_class, GrlexGreater> rem;
        for (const auto& t : a.t_) rem.emplace(t.e, t.c);
        const Term& lb = b.t_.front();
        while (!rem.empty()) {
            auto it = rem.begin();
            Exponents qe(a.nvars_);
            for (std::size_t i = 0; i < qe.size(); ++i) {
                if (it->first[i] < lb.e[i]) return std::nullopt;
                qe[i] = it->first[i] - lb.e[i];
            }
            if (!mpz_divisible_p(it->second.get_mpz_t(), lb.c.get_mpz_t())) return std::nullopt;
            mpz_class qc;
            mpz_divexact(qc.get_mpz_t(), it->second.get_mpz_t(), lb.c.get_mpz_t());
            Exponents e(a.nvars_);
            for (const auto& t : b.t_) {
                for (std::size_t i = 0; i < e.size(); ++i) e[i] = qe[i] + t.e[i];
                auto [pos, inserted] = rem.emplace(e, -qc * t.c);
                if (!inserted) {
                    pos->second -= qc * t.c;
                    if (pos->second == 0) rem.erase(pos);
                } else if (pos->second == 0) {
                    rem.erase(pos);
                }
            }
            q.t_.push_back({std::move(qe), std::move(qc)});
        }
        std::sort(q.t_.begin(), q.t_.end(),
                  [](const Term& x, const Term& y) { return grlex_compare(x.e, y.e) > 0; });
        return q;
    }

    static Poly divexact(const Poly& a, const Poly& b) {
        auto q = try_divide(a, b);
        if (!q) throw Error("internal: inexact polynomial division");
        return std::move(*q);
    }

    static Poly gcd(const Poly& a, const Poly& b);

    double eval(std::span<const double> point) const {
        double sum = 0.0;
        for (const auto& t : t_) {
            double m = t.c.get_d();
            for (std::size_t i = 0; i < t.e.size(); ++i) {
                double p = 1.0, x = point[i];
                for (std::uint32_t k = 0; k < t.e[i]; ++k) p *= x;
                m *= p;
            }
            sum += m;
        }
        return sum;
    }

    // Re-embeds into a ring with more variables; old variable i maps to new
    // variable perm[i].
    Poly lift(std::uint32_t new_nvars, std::span<const std::uint32_t> perm) const {
        Poly r(new_nvars);
        r.t_.reserve(t_.size());
        for (const auto& t : t_) {
            Term nt;
            nt.e.assign(new_nvars, 0);
            for (std::size_t i = 0; i < t.e.size(); ++i) nt.e[perm[i]] = t.e[i];
            nt.c = t.c;
            r.t_.push_back(std::move(nt));
        }
        std::sort(r.t_.begin(), r.t_.end(),
                  [](const Term& x, const Term& y) { return grlex_compare(x.e, y.e) > 0; });
        return r;
    }

  private:
    std::uint32_t nvars_;
    std::vector<Term> t_;

    static Poly mul_term(const Poly& a, const Term& t) {
        Poly r(a.nvars_);
        if (t.c == 0) return r;
        r.t_.reserve(a.t_.size());
        for (const auto& ta : a.t_) {
            Term nt;
            nt.e.resize(a.nvars_);
            for (std::size_t i = 0; i < nt.e.size(); ++i) nt.e[i] = ta.e[i] + t.e[i];
            nt.c = ta.c * t.c;
            r.t_.push_back(std::move(nt));
        }
        return r;  // multiplying by one term preserves the order
    }

    static Poly merge(const Poly& a, const Poly& b, bool subtract) {
        Poly r(a.nvars_);
        r.t_.reserve(a.t_.size() + b.t_.size());
        std::size_t i = 0, j = 0;
        while (i < a.t_.size() && j < b.t_.size()) {
            int cmp = grlex_compare(a.t_[i].e, b.t_[j].e);
            if (cmp > 0) {
                r.t_.push_back(a.t_[i++]);
            } else if (cmp < 0) {
                Term t = b.t_[j++];
                if (subtract) t.c = -t.c;
                r.t_.push_back(std::move(t));
            } else {
                mpz_class c = subtract ? mpz_class(a.t_[i].c - b.t_[j].c)
                                       : mpz_class(a.t_[i].c + b.t_[j].c);
                if (c != 0) r.t_.push_back({a.t_[i].e, std::move(c)});
                ++i, ++j;
            }
        }
        for (; i < a.t_.size(); ++i) r.t_.push_back(a.t_[i]);
        for (; j < b.t_.size(); ++j) {
            Term t = b.t_[j];
            if (subtract) t.c = -t.c;
            r.t_.push_back(std::move(t));
        }
        return r;
    }

    // --- gcd machinery -----------------------------------------------------

    static Poly abs_normalized(Poly p) {
        if (!p.is_zero() && p.t_.front().c < 0)
            for (auto& t : p.t_) t.c = -t.c;
        return p;
    }

    Exponents min_exponents() const {
        Exponents m = t_.front().e;
        for (const auto& t : t_)
            for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::min(m[i], t.e[i]);
        return m;
    }

    Poly shift_down(const Exponents& m) const {
        Poly r(nvars_);
        r.t_ = t_;
        for (auto& t : r.t_)
            for (std::size_t i = 0; i < m.size(); ++i) t.e[i] -= m[i];
        return r;
    }

    // View in one distinguished variable: dense coefficient list, low to high.
    static std::vector<Poly> coeffs_in(const Poly& p, std::uint32_t v) {
        std::vector<Poly> c(static_cast<std::size_t>(std::max<long>(p.degree_in(v), 0)) + 1,
                            Poly(p.nvars_));
        for (const auto& t : p.t_) {
            Term nt;
            nt.e = t.e;
            nt.e[v] = 0;
            nt.c = t.c;
            c[t.e[v]].t_.push_back(std::move(nt));
        }
        for (auto& q : c)
            std::sort(q.t_.begin(), q.t_.end(),
                      [](const Term& x, const Term& y) { return grlex_compare(x.e, y.e) > 0; });
        return c;
    }

    static Poly from_coeffs(std::uint32_t nvars, const std::vector<Poly>& c, std::uint32_t v) {
        Poly r(nvars);
        for (std::size_t d = 0; d < c.size(); ++d)
            for (const auto& t : c[d].t_) {
                Term nt = t;
                nt.e[v] = static_cast<std::uint32_t>(d);
                r.t_.push_back(std::move(nt));
            }
        std::sort(r.t_.begin(), r.t_.end(),
                  [](const Term& x, const Term& y) { return grlex_compare(x.e, y.e) > 0; });
        return r;
    }

    static long deg_of(const std::vector<Poly>& c) {
        for (long d = static_cast<long>(c.size()) - 1; d >= 0; --d)
            if (!c[d].is_zero()) return d;
        return -1;
    }

    static void trim(std::vector<Poly>& c) {
        while (!c.empty() && c.back().is_zero()) c.pop_back();
    }

    // content w.r.t. one variable: gcd of the coefficient polynomials
    static Poly content_in(const std::vector<Poly>& c) {
        Poly g(c.empty() ? 0 : c[0].nvars());
        for (const auto& q : c) {
            if (q.is_zero()) continue;
            g = gcd(g, q);
            if (g.is_constant() && g.constant_value() == 1) break;
        }
        return g;
    }

    // pseudo-remainder of dense views (by the distinguished variable)
    static std::vector<Poly> prem(std::vector<Poly> a, const std::vector<Poly>& b,
                                  std::uint32_t nvars) {
        long da = deg_of(a), db = deg_of(b);
        const Poly& lb = b[db];
        long e = da - db + 1;
        while (true) {
            trim(a);
            long d = deg_of(a);
            if (d < db) break;
            Poly la = a[d];
            for (auto& q : a) q = q * lb;
            for (long k = 0; k <= db; ++k) a[d - db + k] -= la * b[k];
            --e;
        }
        if (e > 0) {
            Poly f = lb.pow(static_cast<unsigned>(e));
            for (auto& q : a) q = q * f;
        }
        (void)nvars;
        return a;
    }

    // Subresultant PRS on primitive inputs; returns the primitive gcd part in v.
    static Poly prs_gcd(std::vector<Poly> a, std::vector<Poly> b, std::uint32_t nvars,
                        std::uint32_t v) {
        if (deg_of(a) < deg_of(b)) std::swap(a, b);
        Poly g = Poly::constant(nvars, 1);
        Poly h = Poly::constant(nvars, 1);
        while (true) {
            long da = deg_of(a), db = deg_of(b);
            long delta = da - db;
            std::vector<Poly> r = prem(a, b, nvars);
            trim(r);
            if (deg_of(r) < 0) break;
            if (deg_of(r) == 0) return Poly::constant(nvars, 1);
            Poly div = g * h.pow(static_cast<unsigned>(delta));
            a = std::move(b);
            b = std::move(r);
            for (auto& q : b) q = divexact(q, div);
            g = a[deg_of(a)];
            if (delta == 1) {
                h = g;
            } else if (delta > 1) {
                h = divexact(g.pow(static_cast<unsigned>(delta)),
                             h.pow(static_cast<unsigned>(delta - 1)));
            }
        }
        // make the surviving entry primitive in v
        Poly cont = content_in(b);
        Poly result = from_coeffs(nvars, b, v);
        if (!cont.is_zero() && !(cont.is_constant() && cont.constant_value() == 1))
            result = divexact(result, cont);
        return result;
    }

    // --- triviality probe ----------------------------------------------------
    //
    // deg_v gcd(A, B) <= deg gcd(A|_pt, B|_pt) for any integer specialization
    // of the other variables that keeps both leading coefficients nonzero, so
    // a degree-0 univariate image in every shared variable certifies that the
    // gcd is constant.

    static long mpz_vec_degree(const std::vector<mpz_class>& c) {
        for (long d = static_cast<long>(c.size()) - 1; d >= 0; --d)
            if (c[d] != 0) return d;
        return -1;
    }

    static long univariate_gcd_degree(std::vector<mpz_class> a, std::vector<mpz_class> b) {
        long da = mpz_vec_degree(a), db = mpz_vec_degree(b);
        if (da < db) {
            std::swap(a, b);
            std::swap(da, db);
        }
        while (db >= 0) {
            // pseudo-remainder a <- lc(b)^(da-db+1) a mod b, degrees only
            while (da >= db) {
                mpz_class la = a[da], lb = b[db];
                for (long i = 0; i <= da; ++i) a[i] *= lb;
                for (long i = 0; i <= db; ++i) a[da - db + i] -= la * b[i];
                long nd = -1;
                for (long i = da; i >= 0; --i)
                    if (a[i] != 0) {
                        nd = i;
                        break;
                    }
                da = nd;
                if (da < 0) break;
            }
            if (da < 0) return db;
            // strip content to cap growth
            mpz_class g(0);
            for (long i = 0; i <= da; ++i) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), a[i].get_mpz_t());
            if (g > 1)
                for (long i = 0; i <= da; ++i)
                    mpz_divexact(a[i].get_mpz_t(), a[i].get_mpz_t(), g.get_mpz_t());
            std::swap(a, b);
            std::swap(da, db);
        }
        return da < 0 ? 0 : da;  // b vanished: gcd is previous remainder
    }

    std::vector<mpz_class> specialize_keep(std::uint32_t v, std::span<const long> point) const {
        std::vector<mpz_class> out(static_cast<std::size_t>(degree_in(v)) + 1, mpz_class(0));
        for (const auto& t : t_) {
            mpz_class m = t.c;
            for (std::size_t i = 0; i < t.e.size(); ++i) {
                if (i == v || t.e[i] == 0) continue;
                mpz_class p;
                mpz_ui_pow_ui(p.get_mpz_t(), std::abs(point[i]), t.e[i]);
                if (point[i] < 0 && (t.e[i] & 1u)) p = -p;
                m *= p;
            }
            out[t.e[v]] += m;
        }
        return out;
    }

    static bool probe_trivial(const Poly& a, const Poly& b) {
        static const long seeds[4][8] = {{2, 3, 5, 7, 11, 13, 17, 19},
                                         {-3, 5, -7, 2, -11, 3, -13, 5},
                                         {5, -2, 7, -3, 13, -5, 19, -7},
                                         {7, 11, -2, 5, -3, 17, -5, 23}};
        std::uint32_t nv = a.nvars();
        for (std::uint32_t v = 0; v < nv; ++v) {
            long da = a.degree_in(v), db = b.degree_in(v);
            if (da <= 0 || db <= 0) continue;
            bool shown = false;
            for (int attempt = 0; attempt < 4 && !shown; ++attempt) {
                std::vector<long> pt(nv);
                for (std::uint32_t i = 0; i < nv; ++i) pt[i] = seeds[attempt][i % 8];
                auto ua = a.specialize_keep(v, pt);
                auto ub = b.specialize_keep(v, pt);
                if (mpz_vec_degree(ua) != da || mpz_vec_degree(ub) != db) continue;
                shown = univariate_gcd_degree(std::move(ua), std::move(ub)) == 0;
            }
            if (!shown) return false;
        }
        return true;
    }

    static Poly gcd_core(const Poly& a, const Poly& b) {
        if (a.is_constant() || b.is_constant()) return constant(a.nvars_, 1);
        if (a == b || a == -b) return abs_normalized(a);
        // main variable: smallest shared degree keeps the PRS chain short
        std::uint32_t v = 0;
        long best = -1;
        for (std::uint32_t i = 0; i < a.nvars_; ++i) {
            long da = a.degree_in(i), db = b.degree_in(i);
            if (da <= 0 && db <= 0) continue;
            long score = std::min(da > 0 ? da : db, db > 0 ? db : da);
            if (best < 0 || score < best) {
                best = score;
                v = i;
            }
        }
        if (best < 0) return constant(a.nvars_, 1);
        auto ca = coeffs_in(a, v);
        auto cb = coeffs_in(b, v);
        Poly conta = content_in(ca);
        Poly contb = content_in(cb);
        Poly cg = gcd(conta, contb);
        std::vector<Poly> pa = ca, pb = cb;
        if (!(conta.is_constant() && conta.constant_value() == 1))
            for (auto& q : pa)
                if (!q.is_zero()) q = divexact(q, conta);
        if (!(contb.is_constant() && contb.constant_value() == 1))
            for (auto& q : pb)
                if (!q.is_zero()) q = divexact(q, contb);
        if (deg_of(pa) == 0 || deg_of(pb) == 0) return abs_normalized(cg);
        Poly prs = prs_gcd(std::move(pa), std::move(pb), a.nvars_, v);
        return abs_normalized(cg * prs);
    }
};

inline Poly Poly::gcd(const Poly& a, const Poly& b) {
    if (a.is_zero()) return abs_normalized(b);
    if (b.is_zero()) return abs_normalized(a);
    mpz_class ca = a.content(), cb = b.content(), c;
    mpz_gcd(c.get_mpz_t(), ca.get_mpz_t(), cb.get_mpz_t());
    Poly pa = a.divexact_int(ca), pb = b.divexact_int(cb);
    Exponents ma = pa.min_exponents(), mb = pb.min_exponents(), m(pa.nvars(), 0);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::min(ma[i], mb[i]);
    pa = pa.shift_down(ma);
    pb = pb.shift_down(mb);
    // cheap outs before the PRS: one side dividing the other is common here
    Poly core(a.nvars());
    if (pa.is_constant() || pb.is_constant()) {
        core = constant(a.nvars(), 1);
    } else if (pa == pb || pa == -pb) {
        core = abs_normalized(pa);
    } else if (probe_trivial(pa, pb)) {
        core = constant(a.nvars(), 1);
    } else if (pa.terms().size() <= pb.terms().size() && try_divide(pb, pa)) {
        core = abs_normalized(pa);
    } else if (pb.terms().size() < pa.terms().size() && try_divide(pa, pb)) {
        core = abs_normalized(pb);
    } else {
        core = gcd_core(pa, pb);
    }
    Poly r = core * monomial(a.nvars(), m, c);
    return abs_normalized(std::move(r));
}

}  // namespace hydropencil
