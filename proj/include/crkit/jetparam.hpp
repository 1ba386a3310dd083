#pragma once

#include "nondegeneracy.hpp"
#include "segre.hpp"

namespace crkit {

/// Taylor field of H along the order-j Segre map: F(x, dZ) agrees with
/// H(S^j(x) + dZ) for dZ-order <= zhat_budget and total degree <= attained.
struct TaylorField {
    int level = 0;
    SeriesVector F;      // N' components over (x1..xj, dZ)
    int zhat_budget = 0; // trusted dZ-order
    int attained = 0;    // trusted total degree
};

namespace detail {

inline std::vector<BlockSpec> param_blocks_of(const BlocksPtr &blocks) {
    std::vector<BlockSpec> out;
    for (int b = 0; b < blocks->block_count(); ++b)
        if (blocks->block(b).role == BlockRole::RealParam)
            out.push_back(BlockSpec{blocks->block(b).name, blocks->block(b).arity,
                                    BlockRole::RealParam, ""});
    return out;
}

inline BlocksPtr field_universe(int n, int N, int level, const std::vector<BlockSpec> &params = {}) {
    std::vector<BlockSpec> specs;
    for (int j = 1; j <= level; ++j)
        specs.push_back(BlockSpec{"x" + std::to_string(j), n, BlockRole::Auxiliary, ""});
    specs.push_back(BlockSpec{"dZ", N, BlockRole::Auxiliary, ""});
    for (const auto &p : params)
        specs.push_back(p);
    return make_blocks(specs);
}

inline BlocksPtr level_universe(int n, int N, int level, const std::vector<BlockSpec> &params = {}) {
    std::vector<BlockSpec> specs;
    for (int j = 1; j <= level; ++j)
        specs.push_back(BlockSpec{"x" + std::to_string(j), n, BlockRole::Auxiliary, ""});
    specs.push_back(BlockSpec{"dZ", N, BlockRole::Auxiliary, ""});
    specs.push_back(BlockSpec{"dchi", n, BlockRole::Auxiliary, ""});
    for (const auto &p : params)
        specs.push_back(p);
    return make_blocks(specs);
}

/// Slices a field to its trusted rectangle: dZ-order <= zb, degree <= deg.
inline TruncatedSeries slice_field(const TruncatedSeries &f, const BlocksPtr &blocks, int zb, int deg) {
    int db = blocks->find_block("dZ");
    int off = blocks->offset(db), ar = blocks->block(db).arity;
    TruncatedSeries r(blocks, deg);
    for (const auto &[e, c] : f.terms()) {
        int dz = 0;
        for (int k = 0; k < ar; ++k)
            dz += (int)e[off + k];
        if (dz <= zb && total_degree(e) <= deg)
            r.add_term(e, c);
    }
    return r;
}

/// iota-th dchi-derivative at dchi = 0, as a series without the dchi block;
/// the output is trusted only through degree (input trust - |iota|).
inline TruncatedSeries chi_extract(const TruncatedSeries &f, const BlocksPtr &target,
                                   const Exponents &iota, int out_trunc) {
    const VariableBlocks &vb = *f.blocks();
    int cb = vb.find_block("dchi");
    int off = vb.offset(cb), ar = vb.block(cb).arity;
    Rational fact = 1;
    for (std::uint32_t a : iota)
        for (std::uint32_t j = 2; j <= a; ++j)
            fact *= j;
    std::vector<int> map = block_var_map(f.blocks(), target);
    TruncatedSeries r(target, out_trunc);
    for (const auto &[e, c] : f.terms()) {
        bool match = true;
        for (int k = 0; k < ar && match; ++k)
            match = e[off + k] == iota[k];
        if (!match)
            continue;
        Exponents d(target->total_vars(), 0);
        for (std::size_t v = 0; v < e.size(); ++v) {
            if ((int)v >= off && (int)v < off + ar)
                continue;
            if (e[v])
                d[map[v]] += e[v];
        }
        r.add_term(std::move(d), GaussianRational(fact) * c);
    }
    return r;
}

} // namespace detail

/// The order-0 Taylor field at the origin, built from a jet of order t0:
/// F_0(dZ) = Lambda(dZ). Lambda may carry real parameter blocks (curve data);
/// they ride along through every level.
inline TaylorField initial_field(const SeriesVector &Lambda, const GenericManifold &M, int jet_order) {
    const BlocksPtr lb = Lambda.blocks();
    BlocksPtr U = detail::field_universe(M.n, M.N(), 0, detail::param_blocks_of(lb));
    std::vector<int> map(lb->total_vars(), -1);
    for (int b = 0; b < lb->block_count(); ++b) {
        const Block &bb = lb->block(b);
        for (int k = 1; k <= bb.arity; ++k) {
            if (bb.name == "z")
                map[lb->var_index("z", k)] = U->var_index("dZ", k);
            else if (bb.name == "w")
                map[lb->var_index("w", k)] = U->var_index("dZ", M.n + k);
            else if (bb.role == BlockRole::RealParam)
                map[lb->var_index(bb.name, k)] = U->var_index(bb.name, k);
        }
    }
    std::vector<TruncatedSeries> comps;
    for (int c = 0; c < Lambda.size(); ++c)
        comps.push_back(embed(jet(Lambda[c], std::min(jet_order, Lambda.trunc())), U, map, Lambda.trunc()));
    TaylorField F;
    F.level = 0;
    F.F = SeriesVector(std::move(comps));
    F.zhat_budget = jet_order;
    F.attained = Lambda.trunc();
    return F;
}

/// One reflection step (the series Cramer solve behind the basic identity):
/// from the field along level j-1, produce the field along level j by solving
/// the nondegenerate square system built from the certificate pairs. The
/// conjugation alternation is the conj-coefficient pass on the previous field.
inline TaylorField reflection_solve(const GenericManifold &M, const DefiningIdeal &I,
                                    const NondegCertificate &cert, const TaylorField &prev,
                                    Matrix<GaussianRational> *level_matrix_out = nullptr) {
    const int n = M.n, N = M.N(), Np = I.ambient_dim(), k0 = cert.k0;
    const int j = prev.level + 1;
    const int W = std::min({prev.attained, M.trunc, I.trunc});
    const int Tj = W - k0;
    if (Tj < 0)
        throw BudgetError("reflection_solve: no degree budget left at level " + std::to_string(j));
    const int Bj = prev.zhat_budget - k0;
    if (Bj < 0)
        throw BudgetError("reflection_solve: jet data exhausted at level " + std::to_string(j) +
                          " (need " + std::to_string(k0) + " more derivative orders)");

    std::vector<BlockSpec> params = detail::param_blocks_of(prev.F.blocks());
    BlocksPtr U = detail::level_universe(n, N, j, params);
    BlocksPtr Uout = detail::field_universe(n, N, j, params);

    SegreMap Sj = segre_map(M, j);
    // S^j(x) + dZ over U.
    std::vector<TruncatedSeries> SjdZ;
    for (int c = 0; c < N; ++c) {
        TruncatedSeries s = embed_by_name(Sj.map[c], U, W);
        SjdZ.push_back(s + TruncatedSeries::variable(U, W, U->var_index("dZ", c + 1)));
    }

    // Q-bar evaluated at (x2 + dchi, S^j + dZ).
    SeriesVector Qbar = conjugate_swap(M.Q);
    std::vector<TruncatedSeries> qsubs(M.blocks->total_vars(), TruncatedSeries(U, W));
    for (int k = 1; k <= n; ++k) {
        TruncatedSeries chi_arg = TruncatedSeries::variable(U, W, U->var_index("dchi", k));
        if (j >= 2)
            chi_arg += TruncatedSeries::variable(U, W, U->var_index("x2", k));
        qsubs[M.blocks->var_index("chi", k)] = chi_arg; // bar Q's chi-slot
        qsubs[M.blocks->var_index("z", k)] = SjdZ[k - 1];
    }
    for (int k = 1; k <= M.d; ++k)
        qsubs[M.blocks->var_index("w", k)] = SjdZ[n + k - 1];
    std::vector<TruncatedSeries> qbar_at;
    for (int k = 0; k < M.d; ++k)
        qbar_at.push_back(compose(Qbar[k], qsubs));

    // Delta = zeta-argument minus the previous-level base point.
    // chi-part: dchi; w-part: Qbar(x2+dchi, S^j+dZ) - bar S^{j-1}_w(x2..xj).
    std::vector<TruncatedSeries> delta(N, TruncatedSeries(U, W));
    for (int k = 1; k <= n; ++k)
        delta[k - 1] = TruncatedSeries::variable(U, W, U->var_index("dchi", k));
    if (j >= 2) {
        SegreMap Sprev = segre_map(M, j - 1);
        SeriesVector Sbar = conjugate_swap(Sprev.map);
        std::vector<int> shift(Sprev.map.blocks()->total_vars());
        for (int b = 1; b < j; ++b)
            for (int k = 1; k <= n; ++k)
                shift[Sprev.map.blocks()->var_index("x" + std::to_string(b), k)] =
                    U->var_index("x" + std::to_string(b + 1), k);
        for (int k = 0; k < M.d; ++k)
            delta[n + k] = qbar_at[k] - embed(Sbar[n + k], U, shift, W);
    } else {
        for (int k = 0; k < M.d; ++k)
            delta[n + k] = qbar_at[k];
    }
    for (int k = 0; k < N; ++k)
        if (!delta[k].constant_term().is_zero())
            throw Error("reflection_solve: level shift has a constant term (internal)");

    // Second slot: conjugated previous field composed at (shifted x, Delta).
    SeriesVector prev_bar = conjugate_swap(prev.F);
    BlocksPtr Uprev = prev.F.blocks();
    std::vector<TruncatedSeries> fsubs(Uprev->total_vars(), TruncatedSeries(U, W));
    for (int b = 1; b < j; ++b)
        for (int k = 1; k <= n; ++k)
            fsubs[Uprev->var_index("x" + std::to_string(b), k)] =
                TruncatedSeries::variable(U, W, U->var_index("x" + std::to_string(b + 1), k));
    for (int k = 1; k <= N; ++k)
        fsubs[Uprev->var_index("dZ", k)] = delta[k - 1];
    for (const auto &p : params)
        for (int k = 1; k <= p.arity; ++k)
            fsubs[Uprev->var_index(p.name, k)] =
                TruncatedSeries::variable(U, W, U->var_index(p.name, k));
    std::vector<TruncatedSeries> second;
    for (int c = 0; c < Np; ++c)
        second.push_back(compose(prev_bar[c].with_trunc(W), fsubs));

    // The square system e_i(Uk) = d^{iota_i}/d dchi [rho_{l_i}(Uk, second)] = 0.
    auto build_residuals = [&](const std::vector<TruncatedSeries> &Ucur) {
        std::vector<TruncatedSeries> subs(I.blocks->total_vars(), TruncatedSeries(U, W));
        for (int k = 0; k < Np; ++k) {
            subs[I.hol_vars[k]] = embed_by_name(Ucur[k], U, W);
            subs[I.anti_vars[k]] = second[k];
        }
        std::vector<TruncatedSeries> e;
        for (int i = 0; i < Np; ++i) {
            TruncatedSeries Ei = compose(I.rho[cert.ell[i] - 1].with_trunc(W), subs);
            e.push_back(detail::chi_extract(Ei, Uout, cert.iota[i], Tj));
        }
        return e;
    };

    // Level matrix: rows d e_i / d U_k at the origin; for level 1 this equals
    // the certificate matrix.
    Matrix<GaussianRational> C(Np, Np);
    {
        std::vector<TruncatedSeries> subs(I.blocks->total_vars(), TruncatedSeries(U, W));
        for (int k = 0; k < Np; ++k)
            subs[I.anti_vars[k]] = second[k];
        // Slice x = dZ = 0 of the second slot enters through the composition;
        // differentiate rho in each Z'_k first, then extract at the origin.
        for (int i = 0; i < Np; ++i)
            for (int k = 0; k < Np; ++k) {
                TruncatedSeries dd =
                    compose(differentiate(I.rho[cert.ell[i] - 1], I.hol_vars[k]).with_trunc(W), subs);
                TruncatedSeries ext = detail::chi_extract(dd, Uout, cert.iota[i], Tj);
                C.at(i, k) = ext.constant_term();
            }
    }
    if (level_matrix_out)
        *level_matrix_out = C;
    GaussianRational cdet = C.det();
    if (cdet.is_zero())
        throw VerifyError("reflection_solve: level system is singular at the base point "
                          "(certificate/base-point mismatch)");
    Matrix<GaussianRational> Cinv = C.inverse();

    std::vector<TruncatedSeries> Ucur(Np, TruncatedSeries(Uout, Tj));
    for (int pass = 0; pass <= Tj + 1; ++pass) {
        std::vector<TruncatedSeries> e = build_residuals(Ucur);
        bool done = true;
        for (const auto &r : e)
            done = done && r.is_zero();
        if (done)
            break;
        if (pass == Tj + 1)
            throw Error("reflection_solve: fixed point did not converge (internal)");
        for (int i = 0; i < Np; ++i) {
            TruncatedSeries upd(Uout, Tj);
            for (int k = 0; k < Np; ++k)
                upd += Cinv.at(i, k) * e[k];
            Ucur[i] -= upd;
        }
    }

    TaylorField out;
    out.level = j;
    out.zhat_budget = Bj;
    out.attained = Tj;
    std::vector<TruncatedSeries> sliced;
    for (int c = 0; c < Np; ++c)
        sliced.push_back(detail::slice_field(Ucur[c], Uout, Bj, Tj));
    out.F = SeriesVector(std::move(sliced));
    return out;
}

/// H composed with the order-q Segre map, recovered from a jet of order
/// q*k0 by alternating reflection steps along the Segre levels.
struct SegreExpansion {
    int q = 0;
    SeriesVector composite; // N' components over segre_universe(n, q)
    int attained = 0;
};

inline SegreExpansion segre_expand(const GenericManifold &M, const DefiningIdeal &I,
                                   const NondegCertificate &cert, const SeriesVector &Lambda, int q) {
    if (q % 2 != 0)
        throw InputError("segre_expand: the Segre order must be even");
    TaylorField F = initial_field(Lambda, M, q * cert.k0);
    for (int j = 1; j <= q; ++j)
        F = reflection_solve(M, I, cert, F);

    std::vector<BlockSpec> params = detail::param_blocks_of(Lambda.blocks());
    BlocksPtr X = segre_universe(M.n, q);
    if (!params.empty())
        X = extend_universe(X, params);
    BlocksPtr Uf = F.F.blocks();
    SegreExpansion out;
    out.q = q;
    out.attained = F.attained;
    std::vector<int> map(Uf->total_vars(), -1);
    for (int b = 1; b <= q; ++b)
        for (int k = 1; k <= M.n; ++k)
            map[Uf->var_index("x" + std::to_string(b), k)] = X->var_index("x" + std::to_string(b), k);
    for (const auto &p : params)
        for (int k = 1; k <= p.arity; ++k)
            map[Uf->var_index(p.name, k)] = X->var_index(p.name, k);
    std::vector<TruncatedSeries> comps;
    int dzb = Uf->find_block("dZ");
    for (int c = 0; c < F.F.size(); ++c) {
        TruncatedSeries g(Uf, F.attained);
        for (const auto &[e, co] : F.F[c].terms()) {
            bool pure = true;
            for (int k = 0; k < Uf->block(dzb).arity && pure; ++k)
                pure = e[Uf->offset(dzb) + k] == 0;
            if (pure)
                g.add_term(e, co);
        }
        comps.push_back(embed(g, X, map, F.attained));
    }
    out.composite = SeriesVector(std::move(comps));
    return out;
}

/// Recovered map from a t0-jet: the Segre composite, recentered at a
/// full-rank zero x0 of S^{2t} and composed with a right inverse.
struct Reconstruction {
    SeriesVector H; // over M's ambient universe
    int attained = 0;
    std::vector<GaussianRational> x0;
    std::vector<int> slice;
    bool jet_consistent = false; // jet(H, t0) == Lambda
    int t0 = 0;
};

namespace detail {

/// Deterministic search for x0 with S(x0) = 0, x1-block zero, and some
/// N-column slice of full rank. Scans a fixed rational palette in the box of
/// side 1, sphere-style seeds first.
inline bool find_full_rank_zero(const SegreMap &S, int n, int N, std::vector<GaussianRational> &x0,
                                std::vector<int> &slice) {
    const int m = S.map.blocks()->total_vars();
    std::vector<Rational> palette = {Rational(0),      Rational(1),      Rational(1, 2),
                                     Rational(-1, 2),  Rational(1, 4),   Rational(3, 4),
                                     Rational(-1),     Rational(1, 3),   Rational(-1, 4)};
    // Jacobian entries as exact polynomials.
    std::vector<std::vector<TruncatedSeries>> J(N);
    for (int i = 0; i < N; ++i)
        for (int v = 0; v < m; ++v)
            J[i].push_back(poly_diff(S.map[i].with_trunc(S.trunc + 1), v));

    std::vector<int> idx(m - n, 0); // free coordinates beyond the zero x1-block
    for (;;) {
        std::vector<GaussianRational> cand(m);
        for (int v = n; v < m; ++v)
            cand[v] = GaussianRational(palette[idx[v - n]]);
        bool zero = true;
        for (int i = 0; i < N && zero; ++i)
            zero = evaluate(S.map[i], cand).is_zero();
        if (zero) {
            Matrix<GaussianRational> Jv(N, m);
            for (int i = 0; i < N; ++i)
                for (int v = 0; v < m; ++v)
                    Jv.at(i, v) = evaluate(J[i][v], cand);
            if (Jv.rank() == N) {
                bool found = false;
                detail::combinations(m, N, [&](const std::vector<int> &cols) {
                    Matrix<GaussianRational> sub(N, N);
                    for (int i = 0; i < N; ++i)
                        for (int c = 0; c < N; ++c)
                            sub.at(i, c) = Jv.at(i, cols[c]);
                    if (!sub.det().is_zero()) {
                        slice = cols;
                        found = true;
                        return true;
                    }
                    return false;
                });
                if (found) {
                    x0 = cand;
                    return true;
                }
            }
        }
        int v = 0;
        while (v < m - n && idx[v] == (int)palette.size() - 1)
            idx[v++] = 0;
        if (v == m - n)
            return false;
        ++idx[v];
    }
}

} // namespace detail

inline Reconstruction reconstruct(const GenericManifold &M, const DefiningIdeal &I,
                                  const NondegCertificate &cert, const SeriesVector &Lambda, int t) {
    if (!detail::param_blocks_of(Lambda.blocks()).empty())
        throw InputError("reconstruct: parameter-carrying jets are supported by segre_expand only");
    const int q = 2 * t;
    const int t0 = parametrization_order(t, cert.k0);
    SegreExpansion G = segre_expand(M, I, cert, Lambda, q);

    SegreMap S = segre_map(M, q);
    Reconstruction rec;
    rec.t0 = t0;
    if (!detail::find_full_rank_zero(S, M.n, M.N(), rec.x0, rec.slice))
        throw InputError("reconstruct: no full-rank zero of the Segre map found in the rational "
                         "search box of side 1 (palette 0, +-1, halves, quarters, thirds)");

    // Right inverse of S^{2t} on the slice, over the (z, w) coordinates.
    BlocksPtr ZW = make_blocks({{"z", M.n, BlockRole::Auxiliary, ""},
                                {"w", M.d, BlockRole::Auxiliary, ""}});
    SeriesVector T = invert_map_slice(S.map, rec.x0, rec.slice, ZW);

    // H = (G recentered at x0) o (T - x0).
    SeriesVector Gr = recenter(G.composite, rec.x0);
    std::vector<TruncatedSeries> shifted;
    for (int v = 0; v < T.size(); ++v)
        shifted.push_back(T[v].with_trunc(G.attained) -
                          TruncatedSeries::constant(ZW, G.attained, rec.x0[v]));
    std::vector<TruncatedSeries> comps;
    for (int c = 0; c < Gr.size(); ++c)
        comps.push_back(embed_by_name(compose(Gr[c], shifted), M.blocks));
    rec.H = SeriesVector(std::move(comps));
    rec.attained = G.attained;

    // Jet-consistency flag (not an error: inadmissible jets are allowed in
    // and reported by the admissibility check).
    rec.jet_consistent = true;
    const int cmp = std::min(t0, rec.attained);
    for (int c = 0; c < rec.H.size(); ++c)
        if (!jet(rec.H[c], cmp).same_terms(jet(Lambda[c].with_trunc(M.trunc), cmp)))
            rec.jet_consistent = false;
    return rec;
}

/// Admissibility of a jet: reconstruct, then test the mapping equation; the
/// residual coefficients are exactly the defining equations of the jet set.
struct AdmissibilityReport {
    bool admissible = false;
    bool jet_consistent = false;
    std::string reason;
    MappingCheck mapping;
    Reconstruction rec;
};

inline AdmissibilityReport admissible_jet(const GenericManifold &M, const DefiningIdeal &I,
                                          const NondegCertificate &cert, const SeriesVector &Lambda,
                                          int t, int degree_goal = -1) {
    AdmissibilityReport rep;
    rep.rec = reconstruct(M, I, cert, Lambda, t);
    rep.jet_consistent = rep.rec.jet_consistent;
    if (degree_goal < 0)
        degree_goal = rep.rec.attained;
    if (degree_goal > rep.rec.attained)
        throw BudgetError("admissible_jet: degree goal exceeds the attained degree " +
                          std::to_string(rep.rec.attained));
    if (!rep.rec.jet_consistent) {
        rep.reason = "reconstruction does not reproduce the input jet";
        return rep;
    }
    MapGerm H;
    std::vector<TruncatedSeries> comps;
    for (int c = 0; c < rep.rec.H.size(); ++c)
        comps.push_back(jet(rep.rec.H[c], degree_goal).with_trunc(degree_goal));
    H.H = SeriesVector(std::move(comps));
    std::vector<GaussianRational> zero(M.blocks->total_vars());
    for (int c = 0; c < H.H.size(); ++c)
        if (!evaluate(H.H[c], zero).is_zero()) {
            rep.reason = "reconstructed map does not fix the base point";
            return rep;
        }
    rep.mapping = check_maps_into(H, M, I);
    rep.admissible = rep.mapping.ok;
    if (!rep.admissible)
        rep.reason = rep.mapping.message();
    return rep;
}

} // namespace crkit
