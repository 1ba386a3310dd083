#pragma once

#include "blocks.hpp"
#include "rational.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

namespace crkit {

using Exponents = std::vector<std::uint32_t>;

inline int total_degree(const Exponents &e) {
    return std::accumulate(e.begin(), e.end(), 0u);
}

/// Graded-lex term order: ascending total degree, then descending
/// lexicographic in the flat variable order. Gives the canonical
/// iteration order for serialization, so output is bit-stable.
struct GrlexLess {
    bool operator()(const Exponents &a, const Exponents &b) const {
        int da = total_degree(a), db = total_degree(b);
        if (da != db)
            return da < db;
        return a > b; // larger leading exponents come first within a degree
    }
};

/// Sparse multivariate polynomial over Gaussian rationals, understood as a
/// representative of a formal power series modulo total degree trunc.
/// Invariants: every stored exponent has total degree <= trunc, no stored
/// coefficient is zero, exponent arity equals blocks->total_vars().
class TruncatedSeries {
  public:
    using TermMap = std::map<Exponents, GaussianRational, GrlexLess>;

    TruncatedSeries() = default;

    TruncatedSeries(BlocksPtr blocks, int trunc) : blocks_(std::move(blocks)), trunc_(trunc) {
        if (trunc_ < 0)
            throw InputError("TruncatedSeries: negative truncation degree");
    }

    static TruncatedSeries constant(BlocksPtr blocks, int trunc, GaussianRational c) {
        TruncatedSeries f(std::move(blocks), trunc);
        if (!c.is_zero())
            f.terms_.emplace(Exponents(f.blocks_->total_vars(), 0), std::move(c));
        return f;
    }

    static TruncatedSeries variable(BlocksPtr blocks, int trunc, int var) {
        TruncatedSeries f(blocks, trunc);
        if (trunc < 1)
            throw BudgetError("TruncatedSeries: trunc too small to hold a variable");
        Exponents e(blocks->total_vars(), 0);
        e.at(var) = 1;
        f.terms_.emplace(std::move(e), GaussianRational(1));
        return f;
    }

    static TruncatedSeries monomial(BlocksPtr blocks, int trunc, Exponents e, GaussianRational c) {
        TruncatedSeries f(std::move(blocks), trunc);
        f.add_term(std::move(e), std::move(c));
        return f;
    }

    const BlocksPtr &blocks() const { return blocks_; }
    int trunc() const { return trunc_; }
    const TermMap &terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int max_degree() const {
        int d = 0;
        for (const auto &[e, c] : terms_)
            d = std::max(d, total_degree(e));
        return d;
    }

    GaussianRational coeff(const Exponents &e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? GaussianRational() : it->second;
    }

    GaussianRational constant_term() const { return coeff(Exponents(blocks_->total_vars(), 0)); }

    /// Adds c*x^e, purging the entry if the sum cancels.
    void add_term(Exponents e, GaussianRational c) {
        if (c.is_zero())
            return;
        if ((int)e.size() != blocks_->total_vars())
            throw InputError("TruncatedSeries: exponent arity mismatch");
        if (total_degree(e) > trunc_)
            return;
        auto [it, fresh] = terms_.emplace(std::move(e), c);
        if (!fresh) {
            it->second += c;
            if (it->second.is_zero())
                terms_.erase(it);
        }
    }

    void check_compatible(const TruncatedSeries &o, const char *op) const {
        if (blocks_ == o.blocks_)
            return;
        if (!blocks_ || !o.blocks_ || !blocks_->same_structure(*o.blocks_))
            throw InputError(std::string("series ") + op + ": block mismatch between {" +
                             (blocks_ ? blocks_->describe() : "null") + "} and {" +
                             (o.blocks_ ? o.blocks_->describe() : "null") + "}");
    }

    TruncatedSeries with_trunc(int d) const {
        TruncatedSeries r(blocks_, d);
        for (const auto &[e, c] : terms_)
            if (total_degree(e) <= d)
                r.terms_.emplace(e, c);
        return r;
    }

    TruncatedSeries operator-() const {
        TruncatedSeries r(blocks_, trunc_);
        for (const auto &[e, c] : terms_)
            r.terms_.emplace(e, -c);
        return r;
    }

    friend TruncatedSeries operator+(const TruncatedSeries &a, const TruncatedSeries &b) {
        a.check_compatible(b, "add");
        TruncatedSeries r = a.with_trunc(std::min(a.trunc_, b.trunc_));
        for (const auto &[e, c] : b.terms_)
            r.add_term(e, c);
        return r;
    }

    friend TruncatedSeries operator-(const TruncatedSeries &a, const TruncatedSeries &b) {
        a.check_compatible(b, "subtract");
        TruncatedSeries r = a.with_trunc(std::min(a.trunc_, b.trunc_));
        for (const auto &[e, c] : b.terms_)
            r.add_term(e, -c);
        return r;
    }

    friend TruncatedSeries operator*(const TruncatedSeries &a, const TruncatedSeries &b) {
        a.check_compatible(b, "multiply");
        TruncatedSeries r(a.blocks_, std::min(a.trunc_, b.trunc_));
        const int n = a.blocks_->total_vars();
        Exponents e(n);
        for (const auto &[ea, ca] : a.terms_) {
            int da = total_degree(ea);
            for (const auto &[eb, cb] : b.terms_) {
                if (da + total_degree(eb) > r.trunc_)
                    continue;
                for (int v = 0; v < n; ++v)
                    e[v] = ea[v] + eb[v];
                r.add_term(e, ca * cb);
            }
        }
        return r;
    }

    friend TruncatedSeries operator*(const GaussianRational &c, const TruncatedSeries &a) {
        TruncatedSeries r(a.blocks_, a.trunc_);
        if (c.is_zero())
            return r;
        for (const auto &[e, t] : a.terms_)
            r.terms_.emplace(e, c * t);
        return r;
    }

    friend TruncatedSeries operator*(const TruncatedSeries &a, const GaussianRational &c) { return c * a; }

    TruncatedSeries &operator+=(const TruncatedSeries &o) { return *this = *this + o; }
    TruncatedSeries &operator-=(const TruncatedSeries &o) { return *this = *this - o; }
    TruncatedSeries &operator*=(const TruncatedSeries &o) { return *this = *this * o; }

    friend bool operator==(const TruncatedSeries &a, const TruncatedSeries &b) {
        a.check_compatible(b, "compare");
        return a.trunc_ == b.trunc_ && a.terms_ == b.terms_;
    }
    friend bool operator!=(const TruncatedSeries &a, const TruncatedSeries &b) { return !(a == b); }

    /// Same coefficients, truncation degree ignored.
    bool same_terms(const TruncatedSeries &o) const {
        check_compatible(o, "compare");
        return terms_ == o.terms_;
    }

  private:
    BlocksPtr blocks_;
    int trunc_ = 0;
    TermMap terms_;
};

/// jet: drop all terms of total degree > k. Requires k <= trunc.
inline TruncatedSeries jet(const TruncatedSeries &f, int k) {
    if (k > f.trunc())
        throw BudgetError("jet: order " + std::to_string(k) + " exceeds truncation degree " +
                          std::to_string(f.trunc()));
    TruncatedSeries r(f.blocks(), f.trunc());
    for (const auto &[e, c] : f.terms())
        if (total_degree(e) <= k)
            r.add_term(e, c);
    return r;
}

/// Exact rational evaluation at a full point.
inline GaussianRational evaluate(const TruncatedSeries &f, const std::vector<GaussianRational> &point) {
    if ((int)point.size() != f.blocks()->total_vars())
        throw InputError("evaluate: point arity mismatch");
    GaussianRational acc;
    for (const auto &[e, c] : f.terms()) {
        GaussianRational term = c;
        for (std::size_t v = 0; v < point.size(); ++v)
            for (std::uint32_t k = 0; k < e[v]; ++k)
                term *= point[v];
        acc += term;
    }
    return acc;
}

/// Exact formal partial derivative; the result is known one degree less far.
inline TruncatedSeries differentiate(const TruncatedSeries &f, int var) {
    if (f.trunc() == 0)
        throw BudgetError("differentiate: truncation degree exhausted");
    if (var < 0 || var >= f.blocks()->total_vars())
        throw InputError("differentiate: no such variable");
    TruncatedSeries r(f.blocks(), f.trunc() - 1);
    for (const auto &[e, c] : f.terms()) {
        if (e[var] == 0)
            continue;
        Exponents d = e;
        d[var] -= 1;
        r.add_term(std::move(d), c * GaussianRational((long)e[var]));
    }
    return r;
}

/// The formal bar operation: conjugate every coefficient and exchange each
/// holomorphic block's exponents with its paired antiholomorphic block.
/// Real-parameter and auxiliary blocks are fixed. Involution.
inline TruncatedSeries conjugate_swap(const TruncatedSeries &f) {
    const VariableBlocks &vb = *f.blocks();
    // Per-variable target position under the pairing.
    std::vector<int> dest(vb.total_vars());
    std::vector<bool> must_be_unused(vb.total_vars(), false);
    for (int b = 0; b < vb.block_count(); ++b) {
        const Block &blk = vb.block(b);
        bool conjugable = blk.role == BlockRole::Holomorphic || blk.role == BlockRole::Antiholomorphic;
        for (int k = 0; k < blk.arity; ++k) {
            int v = vb.offset(b) + k;
            if (!conjugable) {
                dest[v] = v;
            } else if (blk.pair >= 0) {
                dest[v] = vb.offset(blk.pair) + k;
            } else {
                dest[v] = v;
                must_be_unused[v] = true;
            }
        }
    }
    TruncatedSeries r(f.blocks(), f.trunc());
    for (const auto &[e, c] : f.terms()) {
        Exponents d(e.size(), 0);
        for (std::size_t v = 0; v < e.size(); ++v) {
            if (e[v] && must_be_unused[v])
                throw InputError("conjugate_swap: block '" +
                                 vb.block(vb.block_of_var((int)v)).name +
                                 "' is holomorphic/antiholomorphic but unpaired");
            d[dest[v]] = e[v];
        }
        r.add_term(std::move(d), c.conj());
    }
    return r;
}

/// Ordered list of series sharing one block structure and truncation.
struct SeriesVector {
    std::vector<TruncatedSeries> components;

    SeriesVector() = default;
    explicit SeriesVector(std::vector<TruncatedSeries> comps) : components(std::move(comps)) { validate(); }

    void validate() const {
        for (std::size_t k = 1; k < components.size(); ++k) {
            components[0].check_compatible(components[k], "SeriesVector");
            if (components[k].trunc() != components[0].trunc())
                throw InputError("SeriesVector: components disagree on truncation degree");
        }
    }

    int size() const { return (int)components.size(); }
    const TruncatedSeries &operator[](int k) const { return components.at(k); }
    TruncatedSeries &operator[](int k) { return components.at(k); }

    BlocksPtr blocks() const { return components.empty() ? nullptr : components[0].blocks(); }
    int trunc() const { return components.empty() ? 0 : components[0].trunc(); }

    friend bool operator==(const SeriesVector &a, const SeriesVector &b) {
        return a.components == b.components;
    }
};

inline SeriesVector conjugate_swap(const SeriesVector &v) {
    std::vector<TruncatedSeries> out;
    out.reserve(v.components.size());
    for (const auto &f : v.components)
        out.push_back(conjugate_swap(f));
    return SeriesVector(std::move(out));
}

} // namespace crkit
