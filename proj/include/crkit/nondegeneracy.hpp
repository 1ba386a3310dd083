#pragma once

#include "manifold.hpp"

#include <functional>

namespace crkit {

/// All multiindices over `vars` variables of total degree exactly `deg`,
/// in descending lexicographic order (deterministic).
inline std::vector<Exponents> multiindices(int vars, int deg) {
    std::vector<Exponents> out;
    Exponents cur(vars, 0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == vars - 1) {
            cur[pos] = left;
            out.push_back(cur);
            return;
        }
        for (int k = left; k >= 0; --k) {
            cur[pos] = k;
            rec(pos + 1, left - k);
        }
    };
    if (vars == 0) {
        if (deg == 0)
            out.push_back(cur);
        return out;
    }
    rec(0, deg);
    return out;
}

/// Exact table of the rows d^alpha/d chi^alpha [rho_{l, Z'_k}(H, barH)]|_0 on
/// the chart, for all |alpha| <= k_max and all generators l. In normal
/// coordinates at 0 these chart partials agree with CR derivatives.
struct DerivativeRowTable {
    struct Row {
        Exponents alpha;
        int ell = 0; // generator index, 0-based
        int order = 0;
        std::vector<GaussianRational> values; // N' entries
    };
    int Np = 0;
    int dp = 0;
    int k_max = 0;
    std::vector<Row> rows; // ordered by order, then alpha (desc lex), then ell
};

inline DerivativeRowTable derivative_rows(const MapGerm &map, const GenericManifold &M,
                                          const DefiningIdeal &I, int k_max) {
    if (!map.params.empty())
        throw InputError("derivative_rows: specialize map parameters before certifying");
    if (!I.eps_block.empty())
        throw InputError("derivative_rows: specialize the deformation parameter first");
    const int D = std::min(M.trunc, std::min(map.H.trunc(), I.trunc));
    if (D < k_max + 1)
        throw BudgetError("derivative_rows: need truncation degree >= " + std::to_string(k_max + 1) +
                          ", have " + std::to_string(D));
    MappingCheck mc = check_maps_into(map, M, I);
    if (!mc.ok)
        throw VerifyError("derivative_rows: map does not send M into the target; " + mc.message());

    const int Np = I.ambient_dim();
    ManifoldChart chart(M);
    SeriesVector Hc = restrict_to_M(map.H, chart);
    SeriesVector Hbar = conjugate_swap(map.H);

    const int T = D - 1; // one derivative of the generators
    std::vector<TruncatedSeries> subs(I.blocks->total_vars(), TruncatedSeries(chart.chart_blocks, T));
    for (int k = 0; k < Np; ++k) {
        subs[I.hol_vars[k]] = Hc[k].with_trunc(T);
        subs[I.anti_vars[k]] = embed_by_name(Hbar[k], chart.chart_blocks, T);
    }

    // g[l][k] = rho_{l, Z'_k}(H, barH) restricted to the chart.
    std::vector<std::vector<TruncatedSeries>> g(I.generators());
    for (int l = 0; l < I.generators(); ++l)
        for (int k = 0; k < Np; ++k)
            g[l].push_back(compose(I.gradient(l, k), subs));

    const BlocksPtr cb = chart.chart_blocks;
    const int chi_off = cb->offset(cb->find_block("chi"));

    DerivativeRowTable table;
    table.Np = Np;
    table.dp = I.generators();
    table.k_max = k_max;
    for (int order = 0; order <= k_max; ++order) {
        for (const Exponents &alpha : multiindices(M.n, order)) {
            Rational fact = 1;
            for (std::uint32_t a : alpha)
                for (std::uint32_t j = 2; j <= a; ++j)
                    fact *= j;
            Exponents full(cb->total_vars(), 0);
            for (int k = 0; k < M.n; ++k)
                full[chi_off + k] = alpha[k];
            for (int l = 0; l < table.dp; ++l) {
                DerivativeRowTable::Row row;
                row.alpha = alpha;
                row.ell = l;
                row.order = order;
                for (int k = 0; k < Np; ++k)
                    row.values.push_back(GaussianRational(fact) * g[l][k].coeff(full));
                table.rows.push_back(std::move(row));
            }
        }
    }
    return table;
}

/// Witness tuple for the nondegeneracy determinant: row multiindices iota,
/// generator choices ell, the exact nonzero determinant, and k0 = max |iota|.
struct NondegCertificate {
    std::vector<Exponents> iota;
    std::vector<int> ell; // 1-based generator indices
    GaussianRational det_value;
    int k0 = 0;
};

struct NondegOutcome {
    bool nondegenerate = false;
    NondegCertificate cert;            // valid when nondegenerate
    std::vector<int> rank_by_order;    // achieved span rank after each order
    int k_max = 0;
};

/// Greedy spanning-row search by increasing derivative order; the greedy
/// order realizes the minimal k0 since rows of order <= k span iff a
/// spanning set with max order <= k exists.
inline NondegOutcome find_nondegeneracy(const MapGerm &map, const GenericManifold &M,
                                        const DefiningIdeal &I, int k_max = -1) {
    const int D = std::min(M.trunc, std::min(map.H.trunc(), I.trunc));
    if (k_max < 0)
        k_max = D - 1;
    DerivativeRowTable table = derivative_rows(map, M, I, k_max);
    const int Np = table.Np;

    NondegOutcome out;
    out.k_max = k_max;
    std::vector<const DerivativeRowTable::Row *> selected;
    auto rank_with = [&](const DerivativeRowTable::Row *extra) {
        Matrix<GaussianRational> m((int)selected.size() + (extra ? 1 : 0), Np);
        for (std::size_t i = 0; i < selected.size(); ++i)
            for (int k = 0; k < Np; ++k)
                m.at((int)i, k) = selected[i]->values[k];
        if (extra)
            for (int k = 0; k < Np; ++k)
                m.at((int)selected.size(), k) = extra->values[k];
        return m.rank();
    };

    out.rank_by_order.assign(k_max + 1, 0);
    for (const auto &row : table.rows) {
        if ((int)selected.size() < Np && rank_with(&row) > (int)selected.size())
            selected.push_back(&row);
        out.rank_by_order[row.order] = (int)selected.size();
        if ((int)selected.size() == Np)
            break;
    }
    for (int o = 1; o <= k_max; ++o)
        out.rank_by_order[o] = std::max(out.rank_by_order[o], out.rank_by_order[o - 1]);

    if ((int)selected.size() == Np) {
        out.nondegenerate = true;
        Matrix<GaussianRational> m(Np, Np);
        for (int i = 0; i < Np; ++i) {
            out.cert.iota.push_back(selected[i]->alpha);
            out.cert.ell.push_back(selected[i]->ell + 1);
            out.cert.k0 = std::max(out.cert.k0, selected[i]->order);
            for (int k = 0; k < Np; ++k)
                m.at(i, k) = selected[i]->values[k];
        }
        out.cert.det_value = m.det();
        if (out.cert.det_value.is_zero())
            throw Error("find_nondegeneracy: selected rows are singular (internal)");
    }
    return out;
}

/// Recomputes the certificate rows from scratch and checks the determinant.
inline bool verify_certificate(const MapGerm &map, const GenericManifold &M, const DefiningIdeal &I,
                               const NondegCertificate &cert) {
    DerivativeRowTable table = derivative_rows(map, M, I, cert.k0);
    const int Np = table.Np;
    Matrix<GaussianRational> m(Np, Np);
    for (int i = 0; i < Np; ++i) {
        bool found = false;
        for (const auto &row : table.rows)
            if (row.alpha == cert.iota[i] && row.ell + 1 == cert.ell[i]) {
                for (int k = 0; k < Np; ++k)
                    m.at(i, k) = row.values[k];
                found = true;
                break;
            }
        if (!found)
            return false;
    }
    return m.det() == cert.det_value && !cert.det_value.is_zero();
}

/// Cumulative flavor: rows of order <= k span C^{N'} (membership in the
/// union of F_j, j <= k). Exact flavor: k is precisely the minimal order.
inline bool is_k_nondegenerate(const MapGerm &map, const GenericManifold &M, const DefiningIdeal &I,
                               int k, bool exact_order = false) {
    NondegOutcome out = find_nondegeneracy(map, M, I, k);
    if (!out.nondegenerate)
        return false;
    return exact_order ? out.cert.k0 == k : out.cert.k0 <= k;
}

} // namespace crkit
