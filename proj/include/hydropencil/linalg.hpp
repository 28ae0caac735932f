#pragma once

#include <cstdint>
#include <vector>

#include "hydropencil/expr.hpp"

namespace hydropencil {

/// Square matrix of expressions.
class ExprMatrix {
  public:
    ExprMatrix() = default;
    ExprMatrix(ContextPtr ctx, std::uint32_t n)
        : ctx_(std::move(ctx)), n_(n), a_(std::size_t(n) * n, Expr::zero(ctx_)) {}

    static ExprMatrix identity(ContextPtr ctx, std::uint32_t n) {
        ExprMatrix m(ctx, n);
        for (std::uint32_t i = 0; i < n; ++i) m(i, i) = Expr::constant(ctx, 1);
        return m;
    }

    std::uint32_t size() const { return n_; }
    const ContextPtr& context() const { return ctx_; }

    Expr& operator()(std::uint32_t i, std::uint32_t j) { return a_[std::size_t(i) * n_ + j]; }
    const Expr& operator()(std::uint32_t i, std::uint32_t j) const {
        return a_[std::size_t(i) * n_ + j];
    }

    bool is_symmetric() const {
        for (std::uint32_t i = 0; i < n_; ++i)
            for (std::uint32_t j = i + 1; j < n_; ++j)
                if (!((*this)(i, j) - (*this)(j, i)).is_zero()) return false;
        return true;
    }

    bool is_zero() const {
        for (const auto& e : a_)
            if (!e.is_zero()) return false;
        return true;
    }

    bool is_constant() const {
        for (const auto& e : a_)
            if (!e.is_constant()) return false;
        return true;
    }

    friend ExprMatrix operator+(const ExprMatrix& x, const ExprMatrix& y) {
        ExprMatrix r = x;
        for (std::size_t i = 0; i < r.a_.size(); ++i) r.a_[i] += y.a_[i];
        return r;
    }

    friend ExprMatrix operator-(const ExprMatrix& x, const ExprMatrix& y) {
        ExprMatrix r = x;
        for (std::size_t i = 0; i < r.a_.size(); ++i) r.a_[i] -= y.a_[i];
        return r;
    }

    friend ExprMatrix operator*(const ExprMatrix& x, const Expr& s) {
        ExprMatrix r = x;
        for (auto& e : r.a_) e *= s;
        return r;
    }

    friend ExprMatrix operator*(const ExprMatrix& x, const ExprMatrix& y) {
        ExprMatrix r(x.ctx_, x.n_);
        for (std::uint32_t i = 0; i < x.n_; ++i)
            for (std::uint32_t j = 0; j < x.n_; ++j) {
                Expr s = Expr::zero(x.ctx_);
                for (std::uint32_t k = 0; k < x.n_; ++k) s += x(i, k) * y(k, j);
                r(i, j) = s;
            }
        return r;
    }

    friend bool operator==(const ExprMatrix& x, const ExprMatrix& y) {
        if (x.n_ != y.n_) return false;
        for (std::size_t i = 0; i < x.a_.size(); ++i)
            if (!(x.a_[i] == y.a_[i])) return false;
        return true;
    }

    /// Determinant, by cofactor expansion for small sizes (keeps polynomial
    /// entries division-free) and exact Gaussian elimination otherwise.
    Expr det() const {
        if (n_ <= 4) {
            std::vector<std::uint32_t> rows(n_), cols(n_);
            for (std::uint32_t i = 0; i < n_; ++i) rows[i] = cols[i] = i;
            return minor_det(rows, cols);
        }
        ExprMatrix m = *this;
        Expr d = Expr::constant(ctx_, 1);
        for (std::uint32_t col = 0; col < n_; ++col) {
            std::uint32_t pivot = col;
            while (pivot < n_ && m(pivot, col).is_zero()) ++pivot;
            if (pivot == n_) return Expr::zero(ctx_);
            if (pivot != col) {
                for (std::uint32_t j = 0; j < n_; ++j) std::swap(m(pivot, j), m(col, j));
                d = -d;
            }
            d *= m(col, col);
            for (std::uint32_t row = col + 1; row < n_; ++row) {
                if (m(row, col).is_zero()) continue;
                Expr f = m(row, col) / m(col, col);
                for (std::uint32_t j = col; j < n_; ++j) m(row, j) -= f * m(col, j);
            }
        }
        return d;
    }

    /// Exact inverse; throws DegenerateMetric when singular as a matrix of
    /// rational functions. Small sizes go through the adjugate, which avoids
    /// division churn on polynomial entries.
    ExprMatrix inverse() const {
        if (n_ <= 4) {
            Expr d = det();
            if (d.is_zero()) throw DegenerateMetric();
            ExprMatrix inv(ctx_, n_);
            if (n_ == 1) {
                inv(0, 0) = Expr::constant(ctx_, 1) / d;
                return inv;
            }
            std::vector<std::uint32_t> all(n_);
            for (std::uint32_t i = 0; i < n_; ++i) all[i] = i;
            for (std::uint32_t i = 0; i < n_; ++i)
                for (std::uint32_t j = 0; j < n_; ++j) {
                    std::vector<std::uint32_t> rows, cols;
                    for (std::uint32_t r : all)
                        if (r != j) rows.push_back(r);
                    for (std::uint32_t c : all)
                        if (c != i) cols.push_back(c);
                    Expr cof = minor_det(rows, cols);
                    if ((i + j) % 2) cof = -cof;
                    inv(i, j) = cof / d;
                }
            return inv;
        }
        ExprMatrix m = *this;
        ExprMatrix inv = identity(ctx_, n_);
        for (std::uint32_t col = 0; col < n_; ++col) {
            std::uint32_t pivot = col;
            while (pivot < n_ && m(pivot, col).is_zero()) ++pivot;
            if (pivot == n_) throw DegenerateMetric();
            if (pivot != col)
                for (std::uint32_t j = 0; j < n_; ++j) {
                    std::swap(m(pivot, j), m(col, j));
                    std::swap(inv(pivot, j), inv(col, j));
                }
            Expr p = m(col, col);
            for (std::uint32_t j = 0; j < n_; ++j) {
                m(col, j) /= p;
                inv(col, j) /= p;
            }
            for (std::uint32_t row = 0; row < n_; ++row) {
                if (row == col || m(row, col).is_zero()) continue;
                Expr f = m(row, col);
                for (std::uint32_t j = 0; j < n_; ++j) {
                    m(row, j) -= f * m(col, j);
                    inv(row, j) -= f * inv(col, j);
                }
            }
        }
        return inv;
    }

    ExprMatrix lift_to(const ContextPtr& target) const {
        ExprMatrix r(target, n_);
        for (std::uint32_t i = 0; i < n_; ++i)
            for (std::uint32_t j = 0; j < n_; ++j) r(i, j) = (*this)(i, j).lift_to(target);
        return r;
    }

  private:
    ContextPtr ctx_;
    std::uint32_t n_ = 0;
    std::vector<Expr> a_;

    Expr minor_det(const std::vector<std::uint32_t>& rows,
                   const std::vector<std::uint32_t>& cols) const {
        std::size_t k = rows.size();
        if (k == 1) return (*this)(rows[0], cols[0]);
        if (k == 2)
            return (*this)(rows[0], cols[0]) * (*this)(rows[1], cols[1]) -
                   (*this)(rows[0], cols[1]) * (*this)(rows[1], cols[0]);
        Expr acc = Expr::zero(ctx_);
        std::vector<std::uint32_t> sub(rows.begin() + 1, rows.end());
        for (std::size_t c = 0; c < k; ++c) {
            if ((*this)(rows[0], cols[c]).is_zero()) continue;
            std::vector<std::uint32_t> rest;
            for (std::size_t x = 0; x < k; ++x)
                if (x != c) rest.push_back(cols[x]);
            Expr term = (*this)(rows[0], cols[c]) * minor_det(sub, rest);
            acc += (c % 2) ? -term : term;
        }
        return acc;
    }
};

}  // namespace hydropencil
