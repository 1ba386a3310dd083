#pragma once

#include "linalg.hpp"
#include "transform.hpp"

namespace crkit {

/// Coefficient-recursion implicit function theorem at truncated order.
/// F is a system over a universe containing the block `unknown_block` (k
/// components, k = arity); the remaining variables are the free ones.
/// Requires F(0, y0) = 0 and an invertible Jacobian dF/dy at (0, y0).
/// Returns the unique formal solution y(x) with y(0) = y0, over the reduced
/// universe without `unknown_block`. Exact modulo trunc; for y0 != 0 the
/// input is treated as a polynomial representative (shift semantics).
inline SeriesVector solve_implicit(const SeriesVector &F, const std::string &unknown_block,
                                   const std::vector<GaussianRational> &y0) {
    const BlocksPtr blocks = F.blocks();
    const int T = F.trunc();
    const VariableBlocks &vb = *blocks;
    int ybi = vb.find_block(unknown_block);
    if (ybi < 0)
        throw InputError("solve_implicit: no block named '" + unknown_block + "'");
    const int k = vb.block(ybi).arity;
    if ((int)y0.size() != k)
        throw InputError("solve_implicit: base point arity mismatch");
    if (F.size() != k)
        throw InputError("solve_implicit: need as many equations as unknowns");

    // Base-point check F(0, y0) = 0.
    std::vector<GaussianRational> base(vb.total_vars());
    for (int j = 0; j < k; ++j)
        base[vb.offset(ybi) + j] = y0[j];
    for (int i = 0; i < k; ++i)
        if (!evaluate(F[i], base).is_zero())
            throw InputError("solve_implicit: F does not vanish at the base point (component " +
                             std::to_string(i + 1) + ")");

    // Shift the unknown block to the base point: G(x, u) = F(x, y0 + u).
    SeriesVector G = recenter(F, base);

    // Jacobian dG/du at 0.
    Matrix<GaussianRational> J(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            Exponents e(vb.total_vars(), 0);
            e[vb.offset(ybi) + j] = 1;
            J.at(i, j) = G[i].coeff(e);
        }
    GaussianRational jdet = J.det();
    if (jdet.is_zero())
        throw InputError("solve_implicit: singular Jacobian at the base point (det = " +
                         to_string(jdet) + ")");
    Matrix<GaussianRational> Jinv = J.inverse();

    // Reduced universe without the unknown block.
    std::vector<BlockSpec> keep;
    for (int b = 0; b < vb.block_count(); ++b) {
        if (b == ybi)
            continue;
        const Block &bb = vb.block(b);
        keep.push_back(BlockSpec{bb.name, bb.arity, bb.role,
                                 bb.pair >= 0 && bb.pair != ybi ? vb.block(bb.pair).name : ""});
    }
    BlocksPtr reduced = make_blocks(keep);

    // Substitution slots: free variables map to themselves, unknowns to u.
    auto make_subs = [&](const std::vector<TruncatedSeries> &u) {
        std::vector<TruncatedSeries> subs;
        subs.reserve(vb.total_vars());
        int dst = 0;
        for (int b = 0; b < vb.block_count(); ++b)
            for (int j = 0; j < vb.block(b).arity; ++j) {
                if (b == ybi)
                    subs.push_back(u[j]);
                else
                    subs.push_back(TruncatedSeries::variable(reduced, T, dst));
                if (b != ybi)
                    ++dst;
            }
        return subs;
    };

    // Fixed-point iteration u <- u - Jinv * G(x, u); one degree per pass.
    std::vector<TruncatedSeries> u(k, TruncatedSeries(reduced, T));
    for (int pass = 0; pass <= T; ++pass) {
        std::vector<TruncatedSeries> subs = make_subs(u);
        std::vector<TruncatedSeries> residual;
        residual.reserve(k);
        bool all_zero = true;
        for (int i = 0; i < k; ++i) {
            residual.push_back(compose(G[i], subs));
            all_zero = all_zero && residual.back().is_zero();
        }
        if (all_zero)
            break;
        for (int i = 0; i < k; ++i) {
            TruncatedSeries delta(reduced, T);
            for (int j = 0; j < k; ++j)
                delta += Jinv.at(i, j) * residual[j];
            u[i] -= delta;
        }
    }

    // The fixed point must be an exact solution modulo T.
    {
        std::vector<TruncatedSeries> subs = make_subs(u);
        for (int i = 0; i < k; ++i)
            if (!compose(G[i], subs).is_zero())
                throw Error("solve_implicit: iteration failed to converge (internal)");
    }

    std::vector<TruncatedSeries> y;
    y.reserve(k);
    for (int j = 0; j < k; ++j)
        y.push_back(u[j] + TruncatedSeries::constant(reduced, T, y0[j]));
    return SeriesVector(std::move(y));
}

/// Multiplicative inverse 1/f for f with f(0) != 0, via the geometric series.
inline TruncatedSeries invert_unit(const TruncatedSeries &f) {
    GaussianRational c = f.constant_term();
    if (c.is_zero())
        throw InputError("invert_unit: constant term vanishes");
    const int T = f.trunc();
    GaussianRational cinv = inverse(c);
    // f = c(1 - g), g of valuation >= 1.
    TruncatedSeries g = TruncatedSeries::constant(f.blocks(), T, GaussianRational(1)) - cinv * f;
    TruncatedSeries acc = TruncatedSeries::constant(f.blocks(), T, GaussianRational(1));
    TruncatedSeries pw = g;
    for (int d = 1; d <= T && !pw.is_zero(); ++d) {
        acc += pw;
        pw *= g;
    }
    return cinv * acc;
}

/// Square root with chosen exact branch: y(0) = r0, r0^2 = f(0), y^2 = f.
inline TruncatedSeries sqrt_at(const TruncatedSeries &f, const GaussianRational &r0) {
    if (r0 * r0 != f.constant_term())
        throw InputError("sqrt_at: r0^2 does not equal the constant term");
    const VariableBlocks &vb = *f.blocks();
    std::vector<BlockSpec> specs;
    for (int b = 0; b < vb.block_count(); ++b) {
        const Block &bb = vb.block(b);
        specs.push_back(BlockSpec{bb.name, bb.arity, bb.role,
                                  bb.pair >= 0 ? vb.block(bb.pair).name : ""});
    }
    specs.push_back(BlockSpec{"_sqrt", 1, BlockRole::Auxiliary, ""});
    BlocksPtr ext = make_blocks(specs);
    int yvar = ext->var_index("_sqrt", 1);
    TruncatedSeries y = TruncatedSeries::variable(ext, f.trunc(), yvar);
    SeriesVector F(std::vector<TruncatedSeries>{y * y - embed_by_name(f, ext)});
    SeriesVector sol = solve_implicit(F, "_sqrt", {r0});
    // Solution lives over the original universe again.
    return embed_by_name(sol[0], f.blocks());
}

/// Right inverse of a full-rank map near a zero x0 of A along a coordinate
/// slice. A has N components over an m-variable universe (m >= N); `slice`
/// selects N source variables allowed to move, the rest stay frozen at x0.
/// Returns T with A(T(Z)) = Z modulo trunc and T(0) = x0, as m components
/// over the given N-variable target universe.
inline SeriesVector invert_map_slice(const SeriesVector &A, const std::vector<GaussianRational> &x0,
                                     const std::vector<int> &slice, const BlocksPtr &target) {
    const int N = A.size();
    const int m = A.blocks()->total_vars();
    const int T = A.trunc();
    if ((int)x0.size() != m)
        throw InputError("invert_map_slice: base point arity mismatch");
    if ((int)slice.size() != N)
        throw InputError("invert_map_slice: slice must pick exactly " + std::to_string(N) + " variables");
    if (target->total_vars() != N)
        throw InputError("invert_map_slice: target universe must have " + std::to_string(N) + " variables");
    for (int i = 0; i < N; ++i)
        if (!evaluate(A[i], x0).is_zero())
            throw InputError("invert_map_slice: A does not vanish at the base point");

    SeriesVector Ar = recenter(A, x0);

    // Extended universe: target coordinates plus the slice unknowns.
    std::vector<BlockSpec> specs;
    for (int b = 0; b < target->block_count(); ++b) {
        const Block &bb = target->block(b);
        specs.push_back(BlockSpec{bb.name, bb.arity, bb.role,
                                  bb.pair >= 0 ? target->block(bb.pair).name : ""});
    }
    specs.push_back(BlockSpec{"_slice", N, BlockRole::Auxiliary, ""});
    BlocksPtr ext = make_blocks(specs);

    std::vector<TruncatedSeries> subs(m, TruncatedSeries(ext, T));
    for (int j = 0; j < N; ++j) {
        int v = slice[j];
        if (v < 0 || v >= m)
            throw InputError("invert_map_slice: slice variable out of range");
        subs[v] = TruncatedSeries::variable(ext, T, ext->var_index("_slice", j + 1));
    }

    std::vector<TruncatedSeries> Fc;
    Fc.reserve(N);
    std::vector<int> tgt_map = block_var_map(target, ext);
    for (int i = 0; i < N; ++i) {
        TruncatedSeries zi = TruncatedSeries::variable(ext, T, tgt_map[i]);
        Fc.push_back(compose(Ar[i], subs) - zi);
    }

    SeriesVector s;
    try {
        s = solve_implicit(SeriesVector(std::move(Fc)), "_slice", std::vector<GaussianRational>(N));
    } catch (const InputError &e) {
        throw InputError(std::string(e.what()) +
                         " [invert_map_slice: the slice Jacobian is singular at x0; try another slice "
                         "or run a generic-rank diagnostic]");
    }

    std::vector<TruncatedSeries> Tcomp(m, TruncatedSeries(target, T));
    for (int v = 0; v < m; ++v)
        Tcomp[v] = TruncatedSeries::constant(target, T, x0[v]);
    for (int j = 0; j < N; ++j) {
        TruncatedSeries sj = embed_by_name(s[j], target);
        Tcomp[slice[j]] += sj;
    }
    return SeriesVector(std::move(Tcomp));
}

/// Checks A(T(Z)) = Z modulo the common truncation, exactly.
inline bool verify_right_inverse(const SeriesVector &A, const std::vector<GaussianRational> &x0,
                                 const SeriesVector &T) {
    SeriesVector Ar = recenter(A, x0);
    std::vector<TruncatedSeries> shifted;
    shifted.reserve(T.size());
    for (int v = 0; v < T.size(); ++v)
        shifted.push_back(T[v] - TruncatedSeries::constant(T.blocks(), T.trunc(), x0[v]));
    for (int i = 0; i < A.size(); ++i) {
        TruncatedSeries lhs = compose(Ar[i], shifted);
        TruncatedSeries zi = TruncatedSeries::variable(T.blocks(), lhs.trunc(), i);
        if (!lhs.same_terms(zi))
            return false;
    }
    return true;
}

} // namespace crkit
