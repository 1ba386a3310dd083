#pragma once

#include "series.hpp"

namespace crkit {

namespace detail {

// Shared power cache for substitution: pw[v][k] = subs[v]^k.
class PowerCache {
  public:
    PowerCache(const std::vector<TruncatedSeries> &subs, BlocksPtr target, int trunc)
        : subs_(subs), one_(TruncatedSeries::constant(target, trunc, GaussianRational(1))) {
        pw_.resize(subs.size());
    }

    const TruncatedSeries &get(std::size_t v, std::uint32_t k) {
        if (k == 0)
            return one_;
        auto &col = pw_[v];
        if (col.empty())
            col.push_back(subs_[v]);
        while (col.size() < k)
            col.push_back(col.back() * subs_[v]);
        return col[k - 1];
    }

  private:
    const std::vector<TruncatedSeries> &subs_;
    TruncatedSeries one_;
    std::vector<std::vector<TruncatedSeries>> pw_;
};

inline TruncatedSeries substitute(const TruncatedSeries &f, const std::vector<TruncatedSeries> &subs,
                                  PowerCache &cache, BlocksPtr target, int trunc) {
    TruncatedSeries acc(target, trunc);
    for (const auto &[e, c] : f.terms()) {
        TruncatedSeries term = TruncatedSeries::constant(target, trunc, c);
        for (std::size_t v = 0; v < e.size() && !term.is_zero(); ++v)
            if (e[v])
                term *= cache.get(v, e[v]);
        acc += term;
    }
    return acc;
}

} // namespace detail

/// Formal composition f(subs[0], ..., subs[m-1]). One substitute per variable
/// of f, all sharing one target universe; each substitute must have zero
/// constant term so the composite is well defined modulo min(trunc).
inline TruncatedSeries compose(const TruncatedSeries &f, const std::vector<TruncatedSeries> &subs) {
    if ((int)subs.size() != f.blocks()->total_vars())
        throw InputError("compose: need one substitute per variable of f (" +
                         std::to_string(f.blocks()->total_vars()) + " expected, " +
                         std::to_string(subs.size()) + " given)");
    if (subs.empty())
        throw InputError("compose: f has no variables");
    BlocksPtr target = subs[0].blocks();
    int trunc = std::min(f.trunc(), subs[0].trunc());
    for (std::size_t v = 0; v < subs.size(); ++v) {
        subs[0].check_compatible(subs[v], "compose substitutes");
        trunc = std::min(trunc, subs[v].trunc());
        if (!subs[v].constant_term().is_zero())
            throw InputError("compose: substitute for " + f.blocks()->var_name((int)v) +
                             " has a nonzero constant term (recenter first)");
    }
    detail::PowerCache cache(subs, target, trunc);
    return detail::substitute(f, subs, cache, target, trunc);
}

inline SeriesVector compose(const SeriesVector &f, const std::vector<TruncatedSeries> &subs) {
    std::vector<TruncatedSeries> out;
    out.reserve(f.components.size());
    for (const auto &g : f.components)
        out.push_back(compose(g, subs));
    return SeriesVector(std::move(out));
}

/// Identity substitution vector for a universe.
inline std::vector<TruncatedSeries> identity_subs(const BlocksPtr &blocks, int trunc) {
    std::vector<TruncatedSeries> subs;
    subs.reserve(blocks->total_vars());
    for (int v = 0; v < blocks->total_vars(); ++v)
        subs.push_back(TruncatedSeries::variable(blocks, trunc, v));
    return subs;
}

/// Re-expresses f in another universe via a flat variable map:
/// source variable v becomes target variable var_map[v]. A value of -1
/// requires the variable to be unused in f.
inline TruncatedSeries embed(const TruncatedSeries &f, const BlocksPtr &target,
                             const std::vector<int> &var_map, int trunc = -1) {
    if ((int)var_map.size() != f.blocks()->total_vars())
        throw InputError("embed: variable map arity mismatch");
    if (trunc < 0)
        trunc = f.trunc();
    TruncatedSeries r(target, trunc);
    for (const auto &[e, c] : f.terms()) {
        Exponents d(target->total_vars(), 0);
        for (std::size_t v = 0; v < e.size(); ++v) {
            if (!e[v])
                continue;
            if (var_map[v] < 0)
                throw InputError("embed: variable " + f.blocks()->var_name((int)v) +
                                 " has no image in the target universe");
            d[var_map[v]] += e[v];
        }
        r.add_term(std::move(d), c);
    }
    return r;
}

/// Variable map matching blocks by name; blocks of f absent from the target
/// map to -1 (allowed only if unused).
inline std::vector<int> block_var_map(const BlocksPtr &from, const BlocksPtr &to) {
    std::vector<int> map(from->total_vars(), -1);
    for (int b = 0; b < from->block_count(); ++b) {
        int tb = to->find_block(from->block(b).name);
        if (tb < 0)
            continue;
        if (to->block(tb).arity != from->block(b).arity)
            throw InputError("block_var_map: arity mismatch for block '" + from->block(b).name + "'");
        for (int k = 0; k < from->block(b).arity; ++k)
            map[from->offset(b) + k] = to->offset(tb) + k;
    }
    return map;
}

inline TruncatedSeries embed_by_name(const TruncatedSeries &f, const BlocksPtr &target, int trunc = -1) {
    return embed(f, target, block_var_map(f.blocks(), target), trunc);
}

/// Taylor expansion of the stored polynomial representative at `point`,
/// re-expressed in shifted variables. Exact for polynomial input; recentering
/// a genuinely truncated series invalidates tail guarantees, so callers track
/// their degree budget explicitly.
inline TruncatedSeries recenter(const TruncatedSeries &f, const std::vector<GaussianRational> &point) {
    const int n = f.blocks()->total_vars();
    if ((int)point.size() != n)
        throw InputError("recenter: point arity mismatch");
    // Shift substitutes p_v + x_v; degrees never grow, so modular products
    // are exact here despite the constant terms.
    std::vector<TruncatedSeries> subs;
    subs.reserve(n);
    for (int v = 0; v < n; ++v) {
        TruncatedSeries s = TruncatedSeries::variable(f.blocks(), f.trunc(), v);
        s += TruncatedSeries::constant(f.blocks(), f.trunc(), point[v]);
        subs.push_back(std::move(s));
    }
    detail::PowerCache cache(subs, f.blocks(), f.trunc());
    return detail::substitute(f, subs, cache, f.blocks(), f.trunc());
}

inline SeriesVector recenter(const SeriesVector &f, const std::vector<GaussianRational> &point) {
    std::vector<TruncatedSeries> out;
    out.reserve(f.components.size());
    for (const auto &g : f.components)
        out.push_back(recenter(g, point));
    return SeriesVector(std::move(out));
}

/// Removes `block_name` from the universe of f, substituting the given exact
/// values for its variables. Polynomial semantics, like recenter.
inline TruncatedSeries specialize(const TruncatedSeries &f, const std::string &block_name,
                                  const std::vector<GaussianRational> &values) {
    const VariableBlocks &vb = *f.blocks();
    int bi = vb.find_block(block_name);
    if (bi < 0)
        throw InputError("specialize: no block named '" + block_name + "'");
    const Block &blk = vb.block(bi);
    if ((int)values.size() != blk.arity)
        throw InputError("specialize: value count does not match arity of '" + block_name + "'");

    std::vector<BlockSpec> keep;
    for (int b = 0; b < vb.block_count(); ++b) {
        if (b == bi)
            continue;
        const Block &bb = vb.block(b);
        std::string pair = bb.pair >= 0 && bb.pair != bi ? vb.block(bb.pair).name : "";
        keep.push_back(BlockSpec{bb.name, bb.arity, bb.role, pair});
    }
    BlocksPtr reduced = make_blocks(keep);

    TruncatedSeries r(reduced, f.trunc());
    for (const auto &[e, c] : f.terms()) {
        GaussianRational coeff = c;
        Exponents d(reduced->total_vars(), 0);
        int dst = 0;
        for (int b = 0; b < vb.block_count(); ++b) {
            for (int k = 0; k < vb.block(b).arity; ++k) {
                std::uint32_t exp = e[vb.offset(b) + k];
                if (b == bi) {
                    for (std::uint32_t j = 0; j < exp; ++j)
                        coeff *= values[k];
                } else {
                    d[dst++] = exp;
                }
            }
        }
        r.add_term(std::move(d), std::move(coeff));
    }
    return r;
}

inline SeriesVector specialize(const SeriesVector &f, const std::string &block_name,
                               const std::vector<GaussianRational> &values) {
    std::vector<TruncatedSeries> out;
    out.reserve(f.components.size());
    for (const auto &g : f.components)
        out.push_back(specialize(g, block_name, values));
    return SeriesVector(std::move(out));
}

} // namespace crkit
