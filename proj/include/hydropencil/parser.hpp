#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "hydropencil/expr.hpp"

namespace hydropencil {

// Grammar (EBNF, documented in the README):
//   expression = term { ("+" | "-") term } ;
//   term       = factor { ("*" | "/") factor } ;
//   factor     = { "+" | "-" } base [ "^" natural ] ;
//   base       = natural | identifier | "(" expression ")" ;
//   natural    = digit { digit } ;
// Identifiers must name context variables. Exponents are nonnegative integers.
class Parser {
  public:
    Parser(std::string_view text, ContextPtr ctx) : text_(text), ctx_(std::move(ctx)) {}

    Expr parse() {
        Expr e = expression();
        skip_ws();
        if (pos_ != text_.size()) throw SyntaxError("unexpected trailing input", pos_);
        return e;
    }

  private:
    std::string_view text_;
    ContextPtr ctx_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    bool accept(char c) {
        if (!peek(c)) return false;
        ++pos_;
        return true;
    }

    Expr expression() {
        Expr e = term();
        while (true) {
            if (accept('+'))
                e += term();
            else if (accept('-'))
                e -= term();
            else
                return e;
        }
    }

    Expr term() {
        Expr e = factor();
        while (true) {
            if (accept('*')) {
                e *= factor();
            } else if (accept('/')) {
                std::size_t at = pos_;
                Expr d = factor();
                if (d.is_zero()) throw DivisionByZeroConstant(at);
                e /= d;
            } else {
                return e;
            }
        }
    }

    Expr factor() {
        bool negative = false;
        while (true) {
            if (accept('-'))
                negative = !negative;
            else if (!accept('+'))
                break;
        }
        Expr e = base();
        if (accept('^')) e = e.pow(natural());
        return negative ? -e : e;
    }

    Expr base() {
        skip_ws();
        if (pos_ >= text_.size()) throw SyntaxError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            mpz_class v(std::string(text_.substr(start, pos_ - start)), 10);
            return Expr::constant(ctx_, mpq_class(v));
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            std::string name(text_.substr(start, pos_ - start));
            auto idx = ctx_->find(name);
            if (!idx) throw UnknownIdentifier(name, start);
            return Expr::variable(ctx_, *idx);
        }
        if (c == '(') {
            ++pos_;
            Expr e = expression();
            if (!accept(')')) throw SyntaxError("expected ')'", pos_);
            return e;
        }
        throw SyntaxError(std::string("unexpected character '") + c + "'", pos_);
    }

    unsigned natural() {
        skip_ws();
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
            throw SyntaxError("exponent must be a nonnegative integer", pos_);
        unsigned long v = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            v = v * 10 + static_cast<unsigned long>(text_[pos_] - '0');
            if (v > 100000) throw SyntaxError("exponent too large", pos_);
            ++pos_;
        }
        return static_cast<unsigned>(v);
    }
};

inline Expr parse(std::string_view text, ContextPtr ctx) {
    return Parser(text, std::move(ctx)).parse();
}

}  // namespace hydropencil
