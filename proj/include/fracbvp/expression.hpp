#pragma once

#include <cctype>
#include <cmath>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "fracbvp/errors.hpp"

namespace fracbvp {

using Complex = std::complex<double>;

// Parse error carrying the byte offset of the offending token.
struct ExprSyntaxError : Error {
    ExprSyntaxError(const std::string& msg, std::size_t offset)
        : Error(msg + " (at byte " + std::to_string(offset) + ")"), byte_offset(offset) {}
    std::size_t byte_offset;
};

// Expression tree over the atoms xi1..xi9, xin, |xi|, |xi'| and numeric
// literals, with + - * / and ^ (real constant exponent).
struct ExprNode {
    enum class Kind { Const, Component, NormalComponent, AbsXi, AbsXiPrime, Add, Sub, Mul, Div, Pow, Neg };

    Kind kind;
    double value = 0.0;      // Const; Pow exponent
    int component = 0;       // Component: 1-based tangential/normal index
    std::shared_ptr<const ExprNode> lhs, rhs;

    static std::shared_ptr<const ExprNode> constant(double v) {
        auto n = std::make_shared<ExprNode>();
        n->kind = Kind::Const;
        n->value = v;
        return n;
    }
};

using ExprPtr = std::shared_ptr<const ExprNode>;

// Evaluation point: tangential frequency vector plus the normal component.
// `component` index i refers to xi_i for i < dim and xi_n for i == dim.
inline Complex eval_expr(const ExprNode& node, const std::vector<double>& xi_prime, double xi_n,
                         int dim) {
    switch (node.kind) {
        case ExprNode::Kind::Const:
            return node.value;
        case ExprNode::Kind::NormalComponent:
            return xi_n;
        case ExprNode::Kind::Component: {
            if (node.component == dim) return xi_n;
            const int idx = node.component - 1;
            if (idx < 0 || idx >= static_cast<int>(xi_prime.size()) + 1)
                throw DomainError("expression references component beyond dimension");
            if (idx < static_cast<int>(xi_prime.size())) return xi_prime[idx];
            return 0.0;
        }
        case ExprNode::Kind::AbsXi: {
            double s = xi_n * xi_n;
            for (double c : xi_prime) s += c * c;
            return std::sqrt(s);
        }
        case ExprNode::Kind::AbsXiPrime: {
            double s = 0.0;
            for (double c : xi_prime) s += c * c;
            return std::sqrt(s);
        }
        case ExprNode::Kind::Add:
            return eval_expr(*node.lhs, xi_prime, xi_n, dim) + eval_expr(*node.rhs, xi_prime, xi_n, dim);
        case ExprNode::Kind::Sub:
            return eval_expr(*node.lhs, xi_prime, xi_n, dim) - eval_expr(*node.rhs, xi_prime, xi_n, dim);
        case ExprNode::Kind::Mul:
            return eval_expr(*node.lhs, xi_prime, xi_n, dim) * eval_expr(*node.rhs, xi_prime, xi_n, dim);
        case ExprNode::Kind::Div: {
            Complex den = eval_expr(*node.rhs, xi_prime, xi_n, dim);
            if (den == Complex(0.0, 0.0)) throw NumericError("expression division by zero");
            return eval_expr(*node.lhs, xi_prime, xi_n, dim) / den;
        }
        case ExprNode::Kind::Pow: {
            Complex base = eval_expr(*node.lhs, xi_prime, xi_n, dim);
            const double t = node.value;
            if (t == std::floor(t) && std::abs(t) < 64.0) {
                Complex r(1.0, 0.0);
                Complex b = t >= 0 ? base : Complex(1.0, 0.0) / base;
                for (int i = 0; i < static_cast<int>(std::abs(t)); ++i) r *= b;
                return r;
            }
            if (base == Complex(0.0, 0.0) && t < 0.0)
                throw DomainError("expression: negative power of zero");
            return std::pow(base, Complex(t, 0.0));
        }
        case ExprNode::Kind::Neg:
            return -eval_expr(*node.lhs, xi_prime, xi_n, dim);
    }
    throw NumericError("expression: corrupt node");
}

// Pretty-printer; round-trips through the parser to an equivalent evaluator.
inline std::string print_expr(const ExprNode& node) {
    auto paren = [](const std::string& s) { return "(" + s + ")"; };
    switch (node.kind) {
        case ExprNode::Kind::Const: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", node.value);
            std::string s(buf);
            return node.value < 0 ? "(" + s + ")" : s;
        }
        case ExprNode::Kind::NormalComponent:
            return "xin";
        case ExprNode::Kind::Component:
            return "xi" + std::to_string(node.component);
        case ExprNode::Kind::AbsXi:
            return "|xi|";
        case ExprNode::Kind::AbsXiPrime:
            return "|xi'|";
        case ExprNode::Kind::Add:
            return paren(print_expr(*node.lhs) + " + " + print_expr(*node.rhs));
        case ExprNode::Kind::Sub:
            return paren(print_expr(*node.lhs) + " - " + print_expr(*node.rhs));
        case ExprNode::Kind::Mul:
            return paren(print_expr(*node.lhs) + " * " + print_expr(*node.rhs));
        case ExprNode::Kind::Div:
            return paren(print_expr(*node.lhs) + " / " + print_expr(*node.rhs));
        case ExprNode::Kind::Pow: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", node.value);
            return paren(print_expr(*node.lhs)) + "^" + (node.value < 0 ? paren(buf) : std::string(buf));
        }
        case ExprNode::Kind::Neg:
            return "(-" + print_expr(*node.lhs) + ")";
    }
    return "?";
}

namespace detail {

class ExprParser {
public:
    explicit ExprParser(const std::string& text) : text_(text) {}

    ExprPtr parse() {
        ExprPtr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) throw ExprSyntaxError("trailing input", pos_);
        return e;
    }

private:
    ExprPtr parse_expr() {
        ExprPtr lhs = parse_term();
        for (;;) {
            skip_ws();
            if (accept('+')) {
                lhs = binary(ExprNode::Kind::Add, lhs, parse_term());
            } else if (accept('-')) {
                lhs = binary(ExprNode::Kind::Sub, lhs, parse_term());
            } else {
                return lhs;
            }
        }
    }

    ExprPtr parse_term() {
        ExprPtr lhs = parse_factor();
        for (;;) {
            skip_ws();
            if (accept('*')) {
                lhs = binary(ExprNode::Kind::Mul, lhs, parse_factor());
            } else if (accept('/')) {
                lhs = binary(ExprNode::Kind::Div, lhs, parse_factor());
            } else {
                return lhs;
            }
        }
    }

    ExprPtr parse_factor() {
        skip_ws();
        if (accept('-')) {
            auto n = std::make_shared<ExprNode>();
            n->kind = ExprNode::Kind::Neg;
            n->lhs = parse_factor();
            return n;
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        skip_ws();
        if (accept('^')) {
            skip_ws();
            double expo = parse_signed_number();
            auto n = std::make_shared<ExprNode>();
            n->kind = ExprNode::Kind::Pow;
            n->lhs = base;
            n->value = expo;
            return n;
        }
        return base;
    }

    ExprPtr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw ExprSyntaxError("unexpected end of input", pos_);
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_expr();
            skip_ws();
            if (!accept(')')) throw ExprSyntaxError("expected ')'", pos_);
            return e;
        }
        if (c == '|') {
            if (text_.compare(pos_, 5, "|xi'|") == 0) {
                pos_ += 5;
                auto n = std::make_shared<ExprNode>();
                n->kind = ExprNode::Kind::AbsXiPrime;
                return n;
            }
            if (text_.compare(pos_, 4, "|xi|") == 0) {
                pos_ += 4;
                auto n = std::make_shared<ExprNode>();
                n->kind = ExprNode::Kind::AbsXi;
                return n;
            }
            throw ExprSyntaxError("expected |xi| or |xi'|", pos_);
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return ExprNode::constant(parse_number());
        }
        if (text_.compare(pos_, 2, "xi") == 0) {
            pos_ += 2;
            if (pos_ < text_.size() && text_[pos_] == 'n') {
                ++pos_;
                auto n = std::make_shared<ExprNode>();
                n->kind = ExprNode::Kind::NormalComponent;
                return n;
            }
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (pos_ == start) throw ExprSyntaxError("expected component index after 'xi'", pos_);
            auto n = std::make_shared<ExprNode>();
            n->kind = ExprNode::Kind::Component;
            n->component = std::stoi(text_.substr(start, pos_ - start));
            if (n->component < 1) throw ExprSyntaxError("component index must be >= 1", start);
            return n;
        }
        throw ExprSyntaxError(std::string("unexpected character '") + c + "'", pos_);
    }

    double parse_signed_number() {
        skip_ws();
        if (accept('(')) {
            double v = parse_signed_number();
            skip_ws();
            if (!accept(')')) throw ExprSyntaxError("expected ')' after exponent", pos_);
            return v;
        }
        bool neg = accept('-');
        double v = parse_number();
        return neg ? -v : v;
    }

    double parse_number() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                text_[pos_] == 'e' || text_[pos_] == 'E' ||
                ((text_[pos_] == '+' || text_[pos_] == '-') && pos_ > start &&
                 (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E')))) {
            ++pos_;
        }
        if (pos_ == start) throw ExprSyntaxError("expected number", pos_);
        try {
            return std::stod(text_.substr(start, pos_ - start));
        } catch (const std::exception&) {
            throw ExprSyntaxError("malformed number", start);
        }
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    static ExprPtr binary(ExprNode::Kind k, ExprPtr l, ExprPtr r) {
        auto n = std::make_shared<ExprNode>();
        n->kind = k;
        n->lhs = std::move(l);
        n->rhs = std::move(r);
        return n;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline ExprPtr parse_expression(const std::string& text) {
    return detail::ExprParser(text).parse();
}

}  // namespace fracbvp
