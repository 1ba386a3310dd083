#pragma once

#include "io.hpp"
#include "solve.hpp"
#include "transform.hpp"

namespace crkit {

/// Universe for graph data Im w = phi(z, zbar, Re w): blocks z, chi, u.
inline BlocksPtr graph_universe(int n, int d) {
    return make_blocks({
        {"z", n, BlockRole::Holomorphic, "chi"},
        {"chi", n, BlockRole::Antiholomorphic, "z"},
        {"u", d, BlockRole::RealParam, ""},
    });
}

/// Ambient complexified universe of a source manifold: (z, w) and (chi, tau).
inline BlocksPtr source_ambient_universe(int n, int d) {
    return make_blocks({
        {"z", n, BlockRole::Holomorphic, "chi"},
        {"chi", n, BlockRole::Antiholomorphic, "z"},
        {"w", d, BlockRole::Holomorphic, "tau"},
        {"tau", d, BlockRole::Antiholomorphic, "w"},
    });
}

/// Ambient complexified universe of a target: (zp, wp) and (chip, etap).
inline BlocksPtr target_ambient_universe(int m, int dp) {
    return make_blocks({
        {"zp", m, BlockRole::Holomorphic, "chip"},
        {"chip", m, BlockRole::Antiholomorphic, "zp"},
        {"wp", dp, BlockRole::Holomorphic, "etap"},
        {"etap", dp, BlockRole::Antiholomorphic, "wp"},
    });
}

/// Extends a universe by extra blocks (used to carry parameter blocks along).
inline BlocksPtr extend_universe(const BlocksPtr &base, const std::vector<BlockSpec> &extra) {
    std::vector<BlockSpec> specs;
    for (int b = 0; b < base->block_count(); ++b) {
        const Block &bb = base->block(b);
        specs.push_back(BlockSpec{bb.name, bb.arity, bb.role,
                                  bb.pair >= 0 ? base->block(bb.pair).name : ""});
    }
    for (const auto &e : extra)
        specs.push_back(e);
    return make_blocks(specs);
}

/// Real-analytic defining ideal of a target germ at 0: d' generators over a
/// paired ambient universe, optionally carrying a real parameter block.
struct DefiningIdeal {
    BlocksPtr blocks;
    SeriesVector rho;           // d' generators, reality-symmetric
    std::vector<int> hol_vars;  // flat indices of Z' (column order for gradients)
    std::vector<int> anti_vars; // flat indices of zeta', paired with hol_vars
    std::string eps_block;      // "" when the ideal is not a deformation
    int trunc = 0;

    int ambient_dim() const { return (int)hol_vars.size(); }
    int generators() const { return rho.size(); }

    bool reality_check() const {
        for (int j = 0; j < rho.size(); ++j)
            if (!(conjugate_swap(rho[j]) == rho[j]))
                return false;
        return true;
    }

    void verify(const std::vector<GaussianRational> &eps0 = {}) const {
        std::vector<GaussianRational> origin(blocks->total_vars());
        if (!eps_block.empty() && !eps0.empty()) {
            int b = blocks->find_block(eps_block);
            for (int k = 0; k < blocks->block(b).arity; ++k)
                origin[blocks->offset(b) + k] = eps0[k];
        }
        for (int j = 0; j < rho.size(); ++j)
            if (!evaluate(rho[j], origin).is_zero())
                throw InputError("DefiningIdeal: generator " + std::to_string(j + 1) +
                                 " does not vanish at the base point");
        if (!reality_check())
            throw InputError("DefiningIdeal: generators are not reality-symmetric");
    }

    /// d/dZ'_k of generator j.
    TruncatedSeries gradient(int j, int k) const { return differentiate(rho[j], hol_vars[k]); }

    /// d/dzeta'_k of generator j.
    TruncatedSeries gradient_bar(int j, int k) const { return differentiate(rho[j], anti_vars[k]); }

    /// Fixes the parameter block at an exact value (polynomial semantics).
    DefiningIdeal specialize_eps(const std::vector<GaussianRational> &eps) const {
        if (eps_block.empty())
            throw InputError("specialize_eps: ideal has no parameter block");
        DefiningIdeal I;
        I.rho = specialize(rho, eps_block, eps);
        I.blocks = I.rho.blocks();
        I.trunc = trunc;
        const VariableBlocks &vb = *blocks;
        auto remap = [&](int v) {
            int b = vb.block_of_var(v);
            return I.blocks->var_index(vb.block(b).name, v - vb.offset(b) + 1);
        };
        for (int k = 0; k < ambient_dim(); ++k) {
            I.hol_vars.push_back(remap(hol_vars[k]));
            I.anti_vars.push_back(remap(anti_vars[k]));
        }
        return I;
    }
};

/// Builds the complexified ideal of a graph target Im w = phi(z, zbar, Re w)
/// without requiring normality: rho = (w - eta)/(2i) - phi(z, chi, (w+eta)/2).
inline DefiningIdeal ideal_from_graph(const SeriesVector &phi, int m, int dp) {
    const int trunc = phi.trunc();
    if (phi.size() != dp)
        throw InputError("ideal_from_graph: generator count mismatch");
    for (int j = 0; j < dp; ++j)
        if (!(conjugate_swap(phi[j]) == phi[j]))
            throw InputError("ideal_from_graph: phi is not real (component " + std::to_string(j + 1) + ")");

    BlocksPtr amb = target_ambient_universe(m, dp);
    std::vector<TruncatedSeries> subs;
    subs.reserve(phi.blocks()->total_vars());
    const GaussianRational half(1, 2);
    for (int k = 0; k < m; ++k)
        subs.push_back(TruncatedSeries::variable(amb, trunc, amb->var_index("zp", k + 1)));
    for (int k = 0; k < m; ++k)
        subs.push_back(TruncatedSeries::variable(amb, trunc, amb->var_index("chip", k + 1)));
    for (int k = 0; k < dp; ++k)
        subs.push_back(half * (TruncatedSeries::variable(amb, trunc, amb->var_index("wp", k + 1)) +
                               TruncatedSeries::variable(amb, trunc, amb->var_index("etap", k + 1))));

    const GaussianRational inv2i = inverse(GaussianRational(Rational(0), Rational(2)));
    DefiningIdeal I;
    I.blocks = amb;
    I.trunc = trunc;
    std::vector<TruncatedSeries> gens;
    for (int j = 0; j < dp; ++j) {
        TruncatedSeries wj = TruncatedSeries::variable(amb, trunc, amb->var_index("wp", j + 1));
        TruncatedSeries ej = TruncatedSeries::variable(amb, trunc, amb->var_index("etap", j + 1));
        gens.push_back(inv2i * (wj - ej) - compose(phi[j], subs));
    }
    I.rho = SeriesVector(std::move(gens));
    for (int k = 0; k < m; ++k)
        I.hol_vars.push_back(amb->var_index("zp", k + 1));
    for (int k = 0; k < dp; ++k)
        I.hol_vars.push_back(amb->var_index("wp", k + 1));
    for (int k = 0; k < m; ++k)
        I.anti_vars.push_back(amb->var_index("chip", k + 1));
    for (int k = 0; k < dp; ++k)
        I.anti_vars.push_back(amb->var_index("etap", k + 1));
    I.verify();
    return I;
}

/// Translates the ideal to a new base point p' on the target (Z' -> Z' + p').
/// Exact for polynomial generators; the shift is the polynomial Taylor shift.
inline DefiningIdeal translate_ideal(const DefiningIdeal &I, const std::vector<GaussianRational> &point) {
    if ((int)point.size() != I.ambient_dim())
        throw InputError("translate_ideal: point arity mismatch");
    std::vector<GaussianRational> full(I.blocks->total_vars());
    for (int k = 0; k < I.ambient_dim(); ++k) {
        full[I.hol_vars[k]] = point[k];
        full[I.anti_vars[k]] = point[k].conj();
    }
    for (int j = 0; j < I.rho.size(); ++j)
        if (!evaluate(I.rho[j], full).is_zero())
            throw InputError("translate_ideal: the point does not lie on the target (generator " +
                             std::to_string(j + 1) + ")");
    DefiningIdeal T = I;
    T.rho = recenter(I.rho, full);
    T.verify();
    return T;
}

/// Germ of a generic real-analytic submanifold in normal coordinates,
/// together with its own graph-form defining ideal.
struct GenericManifold {
    int n = 0; // CR dimension
    int d = 0; // codimension, N = n + d
    BlocksPtr blocks;  // z, chi, w, tau
    SeriesVector Q;    // d components in (z, chi, tau); w-exponents all zero
    DefiningIdeal own_ideal;
    int trunc = 0;

    int N() const { return n + d; }

    /// Builds M = {Im w = phi(z, zbar, Re w)} and verifies normal-coordinate
    /// invariants: Q(z,0,tau) = Q(0,chi,tau) = tau exactly, and the reality
    /// identity Q(z, chi, barQ(chi, z, w)) = w modulo trunc.
    static GenericManifold from_graph(const SeriesVector &phi, int n, int d) {
        GenericManifold M;
        M.n = n;
        M.d = d;
        M.trunc = phi.trunc();
        M.blocks = source_ambient_universe(n, d);

        DefiningIdeal I = ideal_from_graph(phi, n, d);
        std::vector<int> map(I.blocks->total_vars());
        for (int k = 0; k < n; ++k) {
            map[I.blocks->var_index("zp", k + 1)] = M.blocks->var_index("z", k + 1);
            map[I.blocks->var_index("chip", k + 1)] = M.blocks->var_index("chi", k + 1);
        }
        for (int k = 0; k < d; ++k) {
            map[I.blocks->var_index("wp", k + 1)] = M.blocks->var_index("w", k + 1);
            map[I.blocks->var_index("etap", k + 1)] = M.blocks->var_index("tau", k + 1);
        }
        std::vector<TruncatedSeries> renamed;
        for (int j = 0; j < d; ++j)
            renamed.push_back(embed(I.rho[j], M.blocks, map));

        M.own_ideal.blocks = M.blocks;
        M.own_ideal.trunc = M.trunc;
        M.own_ideal.rho = SeriesVector(std::move(renamed));
        for (int k = 0; k < n; ++k)
            M.own_ideal.hol_vars.push_back(M.blocks->var_index("z", k + 1));
        for (int k = 0; k < d; ++k)
            M.own_ideal.hol_vars.push_back(M.blocks->var_index("w", k + 1));
        for (int k = 0; k < n; ++k)
            M.own_ideal.anti_vars.push_back(M.blocks->var_index("chi", k + 1));
        for (int k = 0; k < d; ++k)
            M.own_ideal.anti_vars.push_back(M.blocks->var_index("tau", k + 1));

        SeriesVector q = solve_implicit(M.own_ideal.rho, "w", std::vector<GaussianRational>(d));
        std::vector<TruncatedSeries> qfull;
        for (int j = 0; j < d; ++j)
            qfull.push_back(embed_by_name(q[j], M.blocks));
        M.Q = SeriesVector(std::move(qfull));

        M.verify_normality();
        M.verify_reality();
        return M;
    }

    void verify_normality() const {
        for (int pass = 0; pass < 2; ++pass) {
            std::vector<TruncatedSeries> subs = identity_subs(blocks, trunc);
            const char *zeroed = pass == 0 ? "chi" : "z";
            for (int k = 0; k < n; ++k)
                subs[blocks->var_index(zeroed, k + 1)] = TruncatedSeries(blocks, trunc);
            for (int j = 0; j < d; ++j) {
                TruncatedSeries got = compose(Q[j], subs);
                TruncatedSeries want =
                    TruncatedSeries::variable(blocks, trunc, blocks->var_index("tau", j + 1));
                if (!got.same_terms(want))
                    throw VerifyError("normality fails: Q_" + std::to_string(j + 1) + "(" +
                                      (pass == 0 ? "z, 0, tau" : "0, chi, tau") + ") = " + to_string(got));
            }
        }
    }

    void verify_reality() const {
        SeriesVector Qbar = conjugate_swap(Q);
        std::vector<TruncatedSeries> subs = identity_subs(blocks, trunc);
        for (int j = 0; j < d; ++j)
            subs[blocks->var_index("tau", j + 1)] = Qbar[j];
        for (int j = 0; j < d; ++j) {
            TruncatedSeries got = compose(Q[j], subs);
            TruncatedSeries want = TruncatedSeries::variable(blocks, trunc, blocks->var_index("w", j + 1));
            if (!got.same_terms(want))
                throw VerifyError("reality identity fails for Q_" + std::to_string(j + 1) +
                                  ": got " + to_string(got));
        }
    }

    const DefiningIdeal &ideal() const { return own_ideal; }
};

/// Parametrization (z, chi, tau) -> ((z, Q(z,chi,tau)), (chi, tau)) of the
/// complexified manifold, carrying any extra real-parameter blocks along.
struct ManifoldChart {
    const GenericManifold &M;
    BlocksPtr chart_blocks; // z, chi, tau (+ extras)

    explicit ManifoldChart(const GenericManifold &m, const std::vector<BlockSpec> &extras = {}) : M(m) {
        std::vector<BlockSpec> specs = {
            {"z", m.n, BlockRole::Holomorphic, "chi"},
            {"chi", m.n, BlockRole::Antiholomorphic, "z"},
            {"tau", m.d, BlockRole::Antiholomorphic, ""},
        };
        for (const auto &e : extras)
            specs.push_back(e);
        chart_blocks = make_blocks(specs);
    }

    /// Substitution slots for a series over M's ambient universe (+ extras).
    std::vector<TruncatedSeries> substitution(const BlocksPtr &from, int trunc) const {
        std::vector<TruncatedSeries> subs(from->total_vars(), TruncatedSeries(chart_blocks, trunc));
        for (int v = 0; v < from->total_vars(); ++v) {
            int b = from->block_of_var(v);
            const std::string &name = from->block(b).name;
            int k = v - from->offset(b) + 1;
            if (name == "w")
                subs[v] = embed_by_name(M.Q[k - 1], chart_blocks, trunc);
            else
                subs[v] = TruncatedSeries::variable(chart_blocks, trunc, chart_blocks->var_index(name, k));
        }
        return subs;
    }
};

/// Restriction of an ambient series to the complexified manifold: substitute
/// the chart. Vanishing of the result modulo trunc is vanishing on M.
inline TruncatedSeries restrict_to_M(const TruncatedSeries &f, const ManifoldChart &chart) {
    return compose(f, chart.substitution(f.blocks(), std::min(f.trunc(), chart.M.trunc)));
}

inline SeriesVector restrict_to_M(const SeriesVector &f, const ManifoldChart &chart) {
    std::vector<TruncatedSeries> out;
    out.reserve(f.components.size());
    for (const auto &g : f.components)
        out.push_back(restrict_to_M(g, chart));
    return SeriesVector(std::move(out));
}

/// Outcome of the truncated mapping-equation check H(M) subset M'.
struct MappingCheck {
    bool ok = true;
    int generator = -1;        // 1-based index of the failing generator
    std::string residual_term; // lowest graded-lex nonzero residual term
    SeriesVector residuals;

    std::string message() const {
        if (ok)
            return "mapping equation holds modulo the truncation degree";
        return "mapping equation fails: generator " + std::to_string(generator) +
               ", lowest residual term " + residual_term;
    }
};

/// A holomorphic map germ from M's ambient space, possibly carrying extra
/// real parameter blocks: N' components over M's universe plus the extras.
struct MapGerm {
    SeriesVector H;
    std::vector<BlockSpec> params;

    void check_holomorphic() const {
        const VariableBlocks &vb = *H.blocks();
        for (const auto &comp : H.components)
            for (const auto &[e, c] : comp.terms())
                for (int v = 0; v < vb.total_vars(); ++v)
                    if (e[v]) {
                        const Block &b = vb.block(vb.block_of_var(v));
                        if (b.name == "chi" || b.name == "tau")
                            throw InputError("map is not holomorphic: depends on " + vb.var_name(v));
                    }
        std::vector<GaussianRational> zero(vb.total_vars());
        for (const auto &comp : H.components)
            if (!evaluate(comp, zero).is_zero())
                throw InputError("map does not fix the base point: H(0) != 0");
    }
};

/// Computes the residuals rho_j(H(Z), barH(zeta)[, eps]) restricted to M.
/// When the ideal carries an eps block and no value is supplied, eps stays
/// symbolic and rides along as a parameter block of the chart.
inline MappingCheck check_maps_into(const MapGerm &map, const GenericManifold &M, const DefiningIdeal &I,
                                    const std::vector<GaussianRational> &eps = {}) {
    map.check_holomorphic();
    const int Np = I.ambient_dim();
    if (map.H.size() != Np)
        throw InputError("check_maps_into: map has " + std::to_string(map.H.size()) +
                         " components, target ambient dimension is " + std::to_string(Np));

    std::vector<BlockSpec> extras = map.params;
    DefiningIdeal ideal = I;
    bool symbolic_eps = false;
    if (!I.eps_block.empty()) {
        if (!eps.empty()) {
            ideal = I.specialize_eps(eps);
        } else {
            symbolic_eps = true;
            int eb = I.blocks->find_block(I.eps_block);
            extras.push_back(BlockSpec{I.eps_block, I.blocks->block(eb).arity, BlockRole::RealParam, ""});
        }
    }

    ManifoldChart chart(M, extras);
    const int T = std::min(M.trunc, std::min(map.H.trunc(), ideal.trunc));

    SeriesVector Hc = restrict_to_M(map.H, chart);
    SeriesVector Hbar = conjugate_swap(map.H);

    std::vector<TruncatedSeries> subs(ideal.blocks->total_vars(), TruncatedSeries(chart.chart_blocks, T));
    for (int k = 0; k < Np; ++k) {
        subs[ideal.hol_vars[k]] = Hc[k].with_trunc(T);
        subs[ideal.anti_vars[k]] = embed_by_name(Hbar[k], chart.chart_blocks, T);
    }
    if (symbolic_eps) {
        int eb = ideal.blocks->find_block(ideal.eps_block);
        for (int k = 0; k < ideal.blocks->block(eb).arity; ++k)
            subs[ideal.blocks->offset(eb) + k] = TruncatedSeries::variable(
                chart.chart_blocks, T, chart.chart_blocks->var_index(ideal.eps_block, k + 1));
    }

    MappingCheck out;
    std::vector<TruncatedSeries> residuals;
    for (int j = 0; j < ideal.rho.size(); ++j) {
        TruncatedSeries r = compose(ideal.rho[j], subs);
        if (!r.is_zero() && out.ok) {
            out.ok = false;
            out.generator = j + 1;
            const auto &[e, c] = *r.terms().begin();
            std::string mono = monomial_str(*r.blocks(), e);
            out.residual_term = mono.empty() ? to_string(c) : to_string(c) + "*" + mono;
        }
        residuals.push_back(std::move(r));
    }
    out.residuals = SeriesVector(std::move(residuals));
    return out;
}

/// Deformation of a target: parameter-dependent defining ideal plus the
/// distinguished parameter. For base-point type, `chart` embeds the local
/// parameter space into the target.
struct Deformation {
    DefiningIdeal ideal; // carries the eps block
    SeriesVector chart;  // c(eps): N' components over the eps universe
    std::vector<GaussianRational> eps0;
    int m = 0;

    DefiningIdeal specialized(const std::vector<GaussianRational> &eps) const {
        return ideal.specialize_eps(eps);
    }
};

/// Base-point-type deformation: rho_j(Z', zeta', eps) =
/// varrho_j(Z' + c(eps), zeta' + bar c(eps)) for a rational local chart c of
/// the target through 0 (c(0) = 0, c maps into the target modulo trunc).
inline Deformation base_point_deformation(const DefiningIdeal &I, const SeriesVector &chart,
                                          const std::string &eps_name = "eps") {
    if (!I.eps_block.empty())
        throw InputError("base_point_deformation: ideal already carries a parameter block");
    const int Np = I.ambient_dim();
    if (chart.size() != Np)
        throw InputError("base_point_deformation: chart component count mismatch");
    const BlocksPtr eps_universe = chart.blocks();
    if (eps_universe->block_count() != 1 || eps_universe->block(0).role != BlockRole::RealParam)
        throw InputError("base_point_deformation: chart must live over a single real parameter block");
    const int m = eps_universe->block(0).arity;
    const int T = std::min(I.trunc, chart.trunc());

    SeriesVector chart_bar = conjugate_swap(chart);
    {
        std::vector<TruncatedSeries> subs(I.blocks->total_vars(), TruncatedSeries(eps_universe, T));
        for (int k = 0; k < Np; ++k) {
            subs[I.hol_vars[k]] = chart[k].with_trunc(T);
            subs[I.anti_vars[k]] = chart_bar[k].with_trunc(T);
        }
        for (int j = 0; j < I.rho.size(); ++j) {
            TruncatedSeries r = compose(I.rho[j], subs);
            if (!r.is_zero())
                throw InputError("base_point_deformation: chart does not map into the target "
                                 "(generator " + std::to_string(j + 1) + ", residual " + to_string(r) + ")");
        }
    }

    BlocksPtr ext = extend_universe(I.blocks, {{eps_name, m, BlockRole::RealParam, ""}});
    std::vector<int> lift = block_var_map(I.blocks, ext);
    auto chart_in_ext = [&](const TruncatedSeries &f) {
        std::vector<int> map(eps_universe->total_vars());
        for (int k = 0; k < m; ++k)
            map[k] = ext->var_index(eps_name, k + 1);
        return embed(f, ext, map, T);
    };

    std::vector<TruncatedSeries> subs(I.blocks->total_vars(), TruncatedSeries(ext, T));
    for (int v = 0; v < I.blocks->total_vars(); ++v)
        subs[v] = TruncatedSeries::variable(ext, T, lift[v]);
    for (int k = 0; k < Np; ++k) {
        subs[I.hol_vars[k]] = subs[I.hol_vars[k]] + chart_in_ext(chart[k]);
        subs[I.anti_vars[k]] = subs[I.anti_vars[k]] + chart_in_ext(chart_bar[k]);
    }

    Deformation D;
    D.m = m;
    D.eps0 = std::vector<GaussianRational>(m);
    D.chart = chart;
    D.ideal.blocks = ext;
    D.ideal.trunc = T;
    D.ideal.eps_block = eps_name;
    std::vector<TruncatedSeries> gens;
    for (int j = 0; j < I.rho.size(); ++j)
        gens.push_back(compose(I.rho[j].with_trunc(T), subs));
    D.ideal.rho = SeriesVector(std::move(gens));
    for (int k = 0; k < Np; ++k) {
        D.ideal.hol_vars.push_back(lift[I.hol_vars[k]]);
        D.ideal.anti_vars.push_back(lift[I.anti_vars[k]]);
    }
    D.ideal.verify(D.eps0);

    DefiningIdeal back = D.specialized(D.eps0);
    for (int j = 0; j < I.rho.size(); ++j)
        if (!back.rho[j].same_terms(embed_by_name(I.rho[j].with_trunc(T), back.blocks)))
            throw VerifyError("base_point_deformation: specialization at eps0 does not reproduce the ideal");
    return D;
}

} // namespace crkit
