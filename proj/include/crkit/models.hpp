#pragma once

#include "manifold.hpp"

namespace crkit {

// Shipped model germs used by the gallery, the CLI presets, and the tests.

/// Heisenberg sphere model Im w = |z|^2 in C^{n+1}.
inline GenericManifold sphere_germ(int n, int trunc) {
    BlocksPtr G = graph_universe(n, 1);
    TruncatedSeries phi(G, trunc);
    for (int k = 1; k <= n; ++k)
        phi += TruncatedSeries::variable(G, trunc, G->var_index("z", k)) *
               TruncatedSeries::variable(G, trunc, G->var_index("chi", k));
    return GenericManifold::from_graph(SeriesVector({phi}), n, 1);
}

/// Totally real flat model Im w = 0 in C^2 (not minimal).
inline GenericManifold flat_germ(int trunc) {
    BlocksPtr G = graph_universe(1, 1);
    return GenericManifold::from_graph(SeriesVector({TruncatedSeries(G, trunc)}), 1, 1);
}

/// Im w = |z|^2 + |z|^4 in C^2: source of the planar-family example.
inline GenericManifold planar_family_source(int trunc) {
    BlocksPtr G = graph_universe(1, 1);
    TruncatedSeries phi = parse_series("z*chi + z^2*chi^2", G, trunc);
    return GenericManifold::from_graph(SeriesVector({phi}), 1, 1);
}

/// Im w' = |z1'|^2 + |z1'|^4 + (Re z1')^2 Im(z2') in C^3: the target carrying
/// a two-parameter plane of embeddings of the planar-family source.
inline DefiningIdeal planar_family_target(int trunc) {
    BlocksPtr G = graph_universe(2, 1);
    TruncatedSeries phi = parse_series(
        "z.1*chi.1 + z.1^2*chi.1^2 + (1/2*z.1 + 1/2*chi.1)^2 * (-1/2*i*z.2 + 1/2*i*chi.2)", G, trunc);
    return ideal_from_graph(SeriesVector({phi}), 2, 1);
}

/// The map family (z, w) -> (z, t, w + s) into the planar-family target.
/// Symbolic: (s, t) ride along as real parameter blocks. Otherwise the
/// (0, 0)-member (z, 0, w) is returned; other members differ from it only by
/// the base-point translation.
inline MapGerm planar_family_map(const GenericManifold &M, bool symbolic) {
    std::vector<BlockSpec> params;
    if (symbolic)
        params = {{"s", 1, BlockRole::RealParam, ""}, {"t", 1, BlockRole::RealParam, ""}};
    BlocksPtr U = symbolic ? extend_universe(M.blocks, params) : M.blocks;
    const int T = M.trunc;
    TruncatedSeries zv = TruncatedSeries::variable(U, T, U->var_index("z", 1));
    TruncatedSeries wv = TruncatedSeries::variable(U, T, U->var_index("w", 1));
    TruncatedSeries sv = symbolic ? TruncatedSeries::variable(U, T, U->var_index("s", 1))
                                  : TruncatedSeries(U, T);
    TruncatedSeries tv = symbolic ? TruncatedSeries::variable(U, T, U->var_index("t", 1))
                                  : TruncatedSeries(U, T);
    MapGerm H;
    H.H = SeriesVector({zv, tv, wv + sv});
    H.params = params;
    return H;
}

/// Im w' = |z1'|^4 + |z2'|^4 in C^3: finitely degenerate along the pair of
/// coordinate hyperplane traces.
inline GenericManifold quartic_pair_source(int trunc) {
    BlocksPtr G = graph_universe(2, 1);
    TruncatedSeries phi = parse_series("z.1^2*chi.1^2 + z.2^2*chi.2^2", G, trunc);
    return GenericManifold::from_graph(SeriesVector({phi}), 2, 1);
}

/// Codimension-2 model Im w1 = |z|^2, Im w2 = |z|^4 in C^3.
inline GenericManifold quadric_codim2(int trunc) {
    BlocksPtr G = graph_universe(1, 2);
    TruncatedSeries phi1 = parse_series("z*chi", G, trunc);
    TruncatedSeries phi2 = parse_series("z^2*chi^2", G, trunc);
    return GenericManifold::from_graph(SeriesVector({phi1, phi2}), 1, 2);
}

/// The hyperquadric target Im w' = |z1'|^2 + |z2'|^2 in C^3.
inline DefiningIdeal hyperquadric_target3(int trunc) {
    BlocksPtr G = graph_universe(2, 1);
    TruncatedSeries phi = parse_series("z.1*chi.1 + z.2*chi.2", G, trunc);
    return ideal_from_graph(SeriesVector({phi}), 2, 1);
}

/// Rational base-point chart of the sphere target Im w' = |z'|^2 in C^2:
/// eps = (Re z', Im z', Re w') on the graph.
inline SeriesVector sphere_basepoint_chart(int trunc) {
    BlocksPtr E = make_blocks({{"eps", 3, BlockRole::RealParam, ""}});
    return SeriesVector({parse_series("eps.1 + i*eps.2", E, trunc),
                         parse_series("eps.3 + i*(eps.1^2 + eps.2^2)", E, trunc)});
}

/// Rational base-point chart of the planar-family target in C^3.
inline SeriesVector planar_family_basepoint_chart(int trunc) {
    BlocksPtr E = make_blocks({{"eps", 5, BlockRole::RealParam, ""}});
    return SeriesVector({
        parse_series("eps.1 + i*eps.2", E, trunc),
        parse_series("eps.3 + i*eps.4", E, trunc),
        parse_series("eps.5 + i*((eps.1^2+eps.2^2) + (eps.1^2+eps.2^2)^2 + eps.1^2*eps.4)", E, trunc),
    });
}

/// Identity germ of a source manifold, as a map into its own ideal.
inline MapGerm identity_map(const GenericManifold &M) {
    std::vector<TruncatedSeries> comps;
    for (int k = 1; k <= M.n; ++k)
        comps.push_back(TruncatedSeries::variable(M.blocks, M.trunc, M.blocks->var_index("z", k)));
    for (int k = 1; k <= M.d; ++k)
        comps.push_back(TruncatedSeries::variable(M.blocks, M.trunc, M.blocks->var_index("w", k)));
    MapGerm H;
    H.H = SeriesVector(std::move(comps));
    return H;
}

} // namespace crkit
