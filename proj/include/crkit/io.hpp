#pragma once

#include "series.hpp"

#include <cctype>

namespace crkit {

inline std::string monomial_str(const VariableBlocks &vb, const Exponents &e) {
    std::string s;
    for (std::size_t v = 0; v < e.size(); ++v) {
        if (!e[v])
            continue;
        if (!s.empty())
            s += "*";
        s += vb.var_name((int)v);
        if (e[v] > 1)
            s += "^" + std::to_string(e[v]);
    }
    return s;
}

/// Canonical text form: graded-lex term order, exact coefficients, variables
/// by block-qualified names. Parseable by parse_series below.
inline std::string to_string(const TruncatedSeries &f) {
    if (f.is_zero())
        return "0";
    std::string out;
    for (const auto &[e, c] : f.terms()) {
        std::string mono = monomial_str(*f.blocks(), e);
        std::string term;
        if (mono.empty()) {
            term = to_string(c);
        } else if (c == GaussianRational(1)) {
            term = mono;
        } else if (c == -GaussianRational(1)) {
            term = "-" + mono;
        } else if (c.re == 0 || c.im == 0) {
            term = to_string(c) + "*" + mono;
        } else {
            term = "(" + to_string(c) + ")*" + mono;
        }
        if (out.empty())
            out = term;
        else if (term[0] == '-')
            out += " - " + term.substr(1);
        else
            out += " + " + term;
    }
    return out;
}

inline std::string to_string(const SeriesVector &v) {
    std::string s;
    for (int k = 0; k < v.size(); ++k) {
        if (k)
            s += " | ";
        s += to_string(v[k]);
    }
    return s;
}

inline std::ostream &operator<<(std::ostream &os, const TruncatedSeries &f) { return os << to_string(f); }

// ---------------------------------------------------------------------------
// Expression parser. Accepts +, -, *, ^, parentheses, exact rational literals
// like 7 or 2/3, the imaginary unit i, and variables by qualified name (z.1)
// or bare block name for arity-1 blocks. Floating literals are rejected.
// ---------------------------------------------------------------------------

class SeriesParser {
  public:
    SeriesParser(std::string text, BlocksPtr blocks, int trunc)
        : text_(std::move(text)), blocks_(std::move(blocks)), trunc_(trunc) {}

    TruncatedSeries parse() {
        TruncatedSeries r = parse_expr();
        skip_ws();
        if (pos_ != text_.size())
            fail("unexpected trailing input");
        return r;
    }

  private:
    std::string text_;
    BlocksPtr blocks_;
    int trunc_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string &msg) const {
        throw InputError("parse error at offset " + std::to_string(pos_) + " in '" + text_ + "': " + msg);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace((unsigned char)text_[pos_]))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    TruncatedSeries parse_expr() {
        TruncatedSeries acc = parse_term();
        for (;;) {
            if (eat('+'))
                acc += parse_term();
            else if (eat('-'))
                acc -= parse_term();
            else
                return acc;
        }
    }

    TruncatedSeries parse_term() {
        TruncatedSeries acc = parse_factor();
        while (eat('*'))
            acc *= parse_factor();
        return acc;
    }

    TruncatedSeries parse_factor() {
        TruncatedSeries base = parse_atom();
        if (eat('^')) {
            skip_ws();
            if (pos_ >= text_.size() || !std::isdigit((unsigned char)text_[pos_]))
                fail("expected integer exponent after '^'");
            unsigned long k = 0;
            while (pos_ < text_.size() && std::isdigit((unsigned char)text_[pos_]))
                k = k * 10 + (text_[pos_++] - '0');
            TruncatedSeries p = TruncatedSeries::constant(blocks_, trunc_, GaussianRational(1));
            for (unsigned long j = 0; j < k; ++j)
                p *= base;
            return p;
        }
        return base;
    }

    Integer parse_integer() {
        skip_ws();
        std::string digits;
        while (pos_ < text_.size() && std::isdigit((unsigned char)text_[pos_]))
            digits += text_[pos_++];
        if (digits.empty())
            fail("expected number");
        if (pos_ < text_.size() && text_[pos_] == '.')
            fail("floating literal not allowed; use an exact rational like 1/2");
        return Integer(digits);
    }

    TruncatedSeries parse_atom() {
        skip_ws();
        if (pos_ >= text_.size())
            fail("unexpected end of input");
        char c = text_[pos_];
        if (c == '-') {
            ++pos_;
            return -parse_factor();
        }
        if (c == '(') {
            ++pos_;
            TruncatedSeries e = parse_expr();
            if (!eat(')'))
                fail("expected ')'");
            return e;
        }
        if (std::isdigit((unsigned char)c)) {
            Integer num = parse_integer();
            Integer den = 1;
            if (peek() == '/') {
                ++pos_;
                den = parse_integer();
                if (den == 0)
                    fail("zero denominator");
            }
            return TruncatedSeries::constant(blocks_, trunc_, GaussianRational(Rational(num, den)));
        }
        if (std::isalpha((unsigned char)c) || c == '_') {
            std::string name;
            while (pos_ < text_.size() &&
                   (std::isalnum((unsigned char)text_[pos_]) || text_[pos_] == '_' || text_[pos_] == '.'))
                name += text_[pos_++];
            if (name == "i")
                return TruncatedSeries::constant(blocks_, trunc_, GaussianRational::i());
            return variable_by_name(name);
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    TruncatedSeries variable_by_name(const std::string &name) {
        auto dot = name.find('.');
        std::string block = dot == std::string::npos ? name : name.substr(0, dot);
        int idx = 1;
        if (dot != std::string::npos) {
            try {
                idx = std::stoi(name.substr(dot + 1));
            } catch (...) {
                fail("bad variable index in '" + name + "'");
            }
        }
        int b = blocks_->find_block(block);
        if (b < 0)
            fail("unknown variable '" + name + "' (blocks: " + blocks_->describe() + ")");
        if (dot == std::string::npos && blocks_->block(b).arity != 1)
            fail("variable '" + name + "' needs an index, block has arity " +
                 std::to_string(blocks_->block(b).arity));
        return TruncatedSeries::variable(blocks_, trunc_, blocks_->var_index(block, idx));
    }
};

inline TruncatedSeries parse_series(const std::string &text, const BlocksPtr &blocks, int trunc) {
    return SeriesParser(text, blocks, trunc).parse();
}

} // namespace crkit
