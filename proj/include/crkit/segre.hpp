#pragma once

#include "manifold.hpp"

#include <functional>

namespace crkit {

/// Universe of the order-q Segre map: blocks x1, ..., xq, each of arity n.
inline BlocksPtr segre_universe(int n, int q) {
    std::vector<BlockSpec> specs;
    for (int j = 1; j <= q; ++j)
        specs.push_back(BlockSpec{"x" + std::to_string(j), n, BlockRole::Auxiliary, ""});
    return make_blocks(specs);
}

struct SegreMap {
    int q = 0;
    SeriesVector map; // N components over segre_universe(n, q)
    int trunc = 0;
};

/// Exact truncated Segre recursion:
///   S^1 = (x1, 0),  S^q = (x1, Q(x1, bar S^{q-1} in shifted blocks)).
inline SegreMap segre_map(const GenericManifold &M, int q) {
    if (q < 1)
        throw InputError("segre_map: order must be >= 1");
    if (M.trunc < 1)
        throw BudgetError("segre_map: truncation degree " + std::to_string(M.trunc) +
                          " cannot hold degree-1 data; need at least 1");
    const int T = M.trunc;
    BlocksPtr U = segre_universe(M.n, 1);
    std::vector<TruncatedSeries> comps;
    for (int k = 1; k <= M.n; ++k)
        comps.push_back(TruncatedSeries::variable(U, T, U->var_index("x1", k)));
    for (int j = 0; j < M.d; ++j)
        comps.push_back(TruncatedSeries(U, T));
    SeriesVector S(std::move(comps));

    for (int level = 2; level <= q; ++level) {
        BlocksPtr V = segre_universe(M.n, level);
        // Shift the conjugated previous level from (x1..x_{level-1}) to (x2..x_level).
        std::vector<int> shift(U->total_vars());
        for (int j = 1; j < level; ++j)
            for (int k = 1; k <= M.n; ++k)
                shift[U->var_index("x" + std::to_string(j), k)] =
                    V->var_index("x" + std::to_string(j + 1), k);
        SeriesVector prev_bar = conjugate_swap(S);
        std::vector<TruncatedSeries> subs(M.blocks->total_vars(), TruncatedSeries(V, T));
        for (int k = 1; k <= M.n; ++k) {
            subs[M.blocks->var_index("z", k)] = TruncatedSeries::variable(V, T, V->var_index("x1", k));
            subs[M.blocks->var_index("chi", k)] = embed(prev_bar[k - 1], V, shift);
        }
        for (int k = 1; k <= M.d; ++k)
            subs[M.blocks->var_index("tau", k)] = embed(prev_bar[M.n + k - 1], V, shift);

        std::vector<TruncatedSeries> next;
        for (int k = 1; k <= M.n; ++k)
            next.push_back(TruncatedSeries::variable(V, T, V->var_index("x1", k)));
        for (int j = 0; j < M.d; ++j)
            next.push_back(compose(M.Q[j], subs));
        S = SeriesVector(std::move(next));
        U = V;
    }
    return SegreMap{q, std::move(S), T};
}

// --- exact polynomial Jacobian rank -----------------------------------------

/// Polynomial derivative that keeps the truncation degree (entries are exact
/// polynomial representatives here, not budgeted series).
inline TruncatedSeries poly_diff(const TruncatedSeries &f, int var) {
    TruncatedSeries r(f.blocks(), f.trunc());
    for (const auto &[e, c] : f.terms()) {
        if (e[var] == 0)
            continue;
        Exponents d = e;
        d[var] -= 1;
        r.add_term(std::move(d), c * GaussianRational((long)e[var]));
    }
    return r;
}

/// Determinant of a small matrix of polynomials by Laplace expansion.
inline TruncatedSeries poly_det(const std::vector<std::vector<TruncatedSeries>> &m) {
    const int k = (int)m.size();
    if (k == 0)
        throw InputError("poly_det: empty matrix");
    if (k == 1)
        return m[0][0];
    BlocksPtr blocks = m[0][0].blocks();
    int trunc = m[0][0].trunc();
    TruncatedSeries acc(blocks, trunc);
    for (int c = 0; c < k; ++c) {
        if (m[0][c].is_zero())
            continue;
        std::vector<std::vector<TruncatedSeries>> sub;
        for (int i = 1; i < k; ++i) {
            std::vector<TruncatedSeries> row;
            for (int j = 0; j < k; ++j)
                if (j != c)
                    row.push_back(m[i][j]);
            sub.push_back(std::move(row));
        }
        TruncatedSeries term = m[0][c] * poly_det(sub);
        if (c % 2)
            acc -= term;
        else
            acc += term;
    }
    return acc;
}

struct RankCertificate {
    int rank = 0;
    std::vector<int> rows, cols;            // the certifying nonzero minor
    std::vector<GaussianRational> witness;  // point where it is nonzero
    GaussianRational witness_value;
    int minor_degree_bound = 0;             // degree within which minors are exact
};

namespace detail {

inline void combinations(int n, int k, const std::function<bool(const std::vector<int> &)> &visit) {
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i)
        idx[i] = i;
    if (k == 0) {
        visit(idx);
        return;
    }
    for (;;) {
        if (visit(idx))
            return;
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i)
            --i;
        if (i < 0)
            return;
        ++idx[i];
        for (int j = i + 1; j < k; ++j)
            idx[j] = idx[j - 1] + 1;
    }
}

/// Deterministic point where a nonzero polynomial does not vanish: scan the
/// product grid {0..deg_v} per variable (guaranteed to contain one).
inline std::vector<GaussianRational> nonvanishing_point(const TruncatedSeries &p) {
    const int n = p.blocks()->total_vars();
    std::vector<int> degs(n, 0);
    for (const auto &[e, c] : p.terms())
        for (int v = 0; v < n; ++v)
            degs[v] = std::max(degs[v], (int)e[v]);
    std::vector<int> cur(n, 0);
    for (;;) {
        std::vector<GaussianRational> pt;
        pt.reserve(n);
        for (int v = 0; v < n; ++v)
            pt.push_back(GaussianRational((long)cur[v]));
        if (!evaluate(p, pt).is_zero())
            return pt;
        int v = 0;
        while (v < n && cur[v] == degs[v])
            cur[v++] = 0;
        if (v == n)
            throw Error("nonvanishing_point: no point found (internal; polynomial was zero?)");
        ++cur[v];
    }
}

} // namespace detail

/// Generic rank of a polynomial map over the function field, with an exact
/// certificate: a nonzero r x r Jacobian minor together with a rational
/// witness point, plus identically-vanishing (r+1)-minors checked on the way.
inline RankCertificate generic_rank(const SeriesVector &A) {
    const int N = A.size();
    const int m = A.blocks()->total_vars();
    int maxdeg = 0;
    for (const auto &f : A.components)
        maxdeg = std::max(maxdeg, f.max_degree());
    // Lift to a working degree where every minor is computed exactly.
    const int rmax = std::min(N, m);
    const int bound = std::max(1, rmax * std::max(1, maxdeg));
    std::vector<std::vector<TruncatedSeries>> J(N);
    for (int i = 0; i < N; ++i) {
        TruncatedSeries lifted = A[i].with_trunc(bound);
        for (int v = 0; v < m; ++v)
            J[i].push_back(poly_diff(lifted, v));
    }

    RankCertificate cert;
    cert.minor_degree_bound = bound;
    for (int r = rmax; r >= 1; --r) {
        bool found = false;
        detail::combinations(N, r, [&](const std::vector<int> &rows) {
            bool stop = false;
            detail::combinations(m, r, [&](const std::vector<int> &cols) {
                std::vector<std::vector<TruncatedSeries>> sub;
                for (int i : rows) {
                    std::vector<TruncatedSeries> row;
                    for (int j : cols)
                        row.push_back(J[i][j]);
                    sub.push_back(std::move(row));
                }
                TruncatedSeries minor = poly_det(sub);
                if (!minor.is_zero()) {
                    cert.rank = r;
                    cert.rows = rows;
                    cert.cols = cols;
                    cert.witness = detail::nonvanishing_point(minor);
                    cert.witness_value = evaluate(minor, cert.witness);
                    found = stop = true;
                }
                return stop;
            });
            return stop;
        });
        if (found)
            return cert;
    }
    cert.rank = 0;
    return cert;
}

struct MinimalityReport {
    struct Entry {
        int q = 0;
        RankCertificate rank;
    };
    std::vector<Entry> ranks;
    int N = 0;
    int bound_used = 0;
    bool minimal = false;
    int t = -1; // least q with full generic rank, -1 if not attained

    int rank_at(int q) const {
        for (const auto &e : ranks)
            if (e.q == q)
                return e.rank.rank;
        throw InputError("MinimalityReport: no entry for q");
    }
};

/// Generic ranks of S^q for q = 1..bound (default d+1); t is the least order
/// of full rank. Ranks are checked to be non-decreasing in q.
inline MinimalityReport minimality_order(const GenericManifold &M, int bound = -1) {
    if (bound < 1)
        bound = M.d + 1;
    MinimalityReport rep;
    rep.N = M.N();
    rep.bound_used = bound;
    int prev = 0;
    for (int q = 1; q <= bound; ++q) {
        SegreMap S = segre_map(M, q);
        RankCertificate rc = generic_rank(S.map);
        if (rc.rank < prev)
            throw VerifyError("minimality_order: generic rank decreased from q = " + std::to_string(q - 1));
        prev = rc.rank;
        rep.ranks.push_back({q, rc});
        if (rc.rank == rep.N) {
            rep.minimal = true;
            rep.t = q;
            break;
        }
    }
    return rep;
}

/// Jet parametrization order for minimality order t and nondegeneracy order k0.
inline int parametrization_order(int t, int k0) {
    if (t < 1 || k0 < 1)
        throw InputError("parametrization_order: t and k0 must be >= 1");
    return 2 * t * k0;
}

} // namespace crkit
