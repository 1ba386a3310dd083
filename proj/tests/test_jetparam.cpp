#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <crkit/jetparam.hpp>
#include <crkit/models.hpp>
#include <crkit/solve.hpp>

using namespace crkit;
using t::gr;
using t::ps;

namespace {

MapGerm sphere_automorphism(const GenericManifold &M) {
    // (z, w) / (1 - w): an exact rational self-map of the sphere germ.
    TruncatedSeries one = TruncatedSeries::constant(M.blocks, M.trunc, GaussianRational(1));
    TruncatedSeries w = ps("w", M.blocks, M.trunc);
    TruncatedSeries geom = invert_unit(one - w);
    MapGerm H;
    H.H = SeriesVector({ps("z", M.blocks, M.trunc) * geom, w * geom});
    return H;
}

} // namespace

TEST_CASE("reflection_solve") {
    GenericManifold M = sphere_germ(1, 10);
    MapGerm id = identity_map(M);
    NondegCertificate cert = find_nondegeneracy(id, M, M.ideal(), 4).cert;

    SECTION("level-1 system matrix equals the certificate matrix") {
        TaylorField F0 = initial_field(id.H, M, 4);
        Matrix<GaussianRational> C;
        reflection_solve(M, M.ideal(), cert, F0, &C);
        Matrix<GaussianRational> expect(2, 2);
        // certificate rows in order: (alpha=0 -> (0, 1/(2i))), (alpha=1 -> (-1, 0))
        expect.at(0, 1) = t::gi(-1, 2);
        expect.at(1, 0) = gr(-1);
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k)
                CHECK(C.at(i, k) == expect.at(i, k));
        CHECK(C.det() == cert.det_value);
    }

    SECTION("level 1 recovers the map on the first Segre set") {
        TaylorField F1 = reflection_solve(M, M.ideal(), cert, initial_field(id.H, M, 4));
        // dZ = 0 slice of the field is H o S^1 = (x1, 0).
        BlocksPtr V = F1.F.blocks();
        CHECK(detail::slice_field(F1.F[0], V, 0, F1.attained) ==
              TruncatedSeries::variable(V, F1.attained, V->var_index("x1", 1)));
        CHECK(detail::slice_field(F1.F[1], V, 0, F1.attained).is_zero());
    }

    SECTION("planar base map level 1 recovers (x1, 0, 0)") {
        GenericManifold P = planar_family_source(12);
        DefiningIdeal T = planar_family_target(12);
        MapGerm H = planar_family_map(P, false);
        NondegCertificate c2 = find_nondegeneracy(H, P, T, 4).cert;
        TaylorField F1 = reflection_solve(P, T, c2, initial_field(H.H, P, 8));
        BlocksPtr V = F1.F.blocks();
        CHECK(detail::slice_field(F1.F[0], V, 0, F1.attained) ==
              TruncatedSeries::variable(V, F1.attained, V->var_index("x1", 1)));
        CHECK(detail::slice_field(F1.F[1], V, 0, F1.attained).is_zero());
        CHECK(detail::slice_field(F1.F[2], V, 0, F1.attained).is_zero());
    }

    SECTION("jet budget exhaustion is reported") {
        TaylorField F0 = initial_field(id.H, M, 0);
        CHECK_THROWS_AS(reflection_solve(M, M.ideal(), cert, F0), BudgetError);
    }
}

TEST_CASE("segre_expand") {
    GenericManifold M = sphere_germ(1, 10);
    MapGerm id = identity_map(M);
    NondegCertificate cert = find_nondegeneracy(id, M, M.ideal(), 4).cert;

    SECTION("sphere identity composite at q = 4") {
        SegreExpansion G = segre_expand(M, M.ideal(), cert, id.H, 4);
        CHECK(G.attained == 6);
        BlocksPtr X = G.composite.blocks();
        CHECK(G.composite[0] == ps("x1.1", X, 6));
        CHECK(G.composite[1] == ps("2*i*(x1.1*x2.1 - x2.1*x3.1 + x3.1*x4.1)", X, 6));
    }

    SECTION("setting the higher blocks to zero reduces to H(x1, 0)") {
        MapGerm A = sphere_automorphism(M);
        SeriesVector Lambda({jet(A.H[0], 4), jet(A.H[1], 4)});
        SegreExpansion G = segre_expand(M, M.ideal(), cert, Lambda, 4);
        BlocksPtr X = G.composite.blocks();
        std::vector<TruncatedSeries> subs(X->total_vars(), TruncatedSeries(X, G.attained));
        subs[X->var_index("x1", 1)] =
            TruncatedSeries::variable(X, G.attained, X->var_index("x1", 1));
        int cmp = std::min(G.attained, 4); // the jet pins H(x1, 0) through order 4
        std::vector<TruncatedSeries> lsubs(M.blocks->total_vars(), TruncatedSeries(X, G.attained));
        lsubs[M.blocks->var_index("z", 1)] =
            TruncatedSeries::variable(X, G.attained, X->var_index("x1", 1));
        for (int c = 0; c < 2; ++c) {
            TruncatedSeries reduced = compose(G.composite[c], subs);
            TruncatedSeries expect = compose(jet(Lambda[c], cmp), lsubs);
            CHECK(jet(reduced, cmp).same_terms(jet(expect, cmp)));
        }
    }

    SECTION("planar base map composite matches the direct composition") {
        GenericManifold P = planar_family_source(12);
        DefiningIdeal T = planar_family_target(12);
        MapGerm H = planar_family_map(P, false);
        NondegCertificate c2 = find_nondegeneracy(H, P, T, 4).cert;
        SegreExpansion G = segre_expand(P, T, c2, H.H, 4);
        CHECK(G.attained == 4);
        SegreMap S4 = segre_map(P, 4);
        std::vector<TruncatedSeries> subs(P.blocks->total_vars(),
                                          TruncatedSeries(S4.map.blocks(), 12));
        subs[P.blocks->var_index("z", 1)] = S4.map[0];
        subs[P.blocks->var_index("w", 1)] = S4.map[1];
        for (int c = 0; c < 3; ++c) {
            TruncatedSeries direct = compose(H.H[c], subs);
            CHECK(jet(direct, G.attained)
                      .same_terms(jet(G.composite[c].with_trunc(12), G.attained)));
        }
    }

    SECTION("odd order is rejected") {
        CHECK_THROWS_AS(segre_expand(M, M.ideal(), cert, id.H, 3), InputError);
    }

    SECTION("curve version agrees with the directly composed curve") {
        // Dilation family H_t = ((1+t) z, (1+t)^2 w), tangent to every order.
        BlocksPtr U = extend_universe(M.blocks, {{"t", 1, BlockRole::RealParam, ""}});
        TruncatedSeries tv = ps("t", U, 10);
        TruncatedSeries one = TruncatedSeries::constant(U, 10, GaussianRational(1));
        SeriesVector Ht({(one + tv) * ps("z", U, 10), (one + tv) * (one + tv) * ps("w", U, 10)});
        SeriesVector Lam({jet(Ht[0], 6), jet(Ht[1], 6)}); // order 4 plus t-degree slack
        SegreExpansion G = segre_expand(M, M.ideal(), cert, Lam, 4);
        SegreMap S4 = segre_map(M, 4);
        BlocksPtr X = G.composite.blocks();
        std::vector<TruncatedSeries> subs(U->total_vars(), TruncatedSeries(X, 10));
        subs[U->var_index("z", 1)] = embed_by_name(S4.map[0], X, 10);
        subs[U->var_index("w", 1)] = embed_by_name(S4.map[1], X, 10);
        subs[U->var_index("t", 1)] = TruncatedSeries::variable(X, 10, X->var_index("t", 1));
        for (int c = 0; c < 2; ++c) {
            TruncatedSeries direct = compose(Ht[c], subs);
            CHECK(jet(direct, G.attained).same_terms(jet(G.composite[c].with_trunc(10), G.attained)));
        }
    }
}

TEST_CASE("reconstruct") {
    GenericManifold M = sphere_germ(1, 10);
    MapGerm id = identity_map(M);
    NondegCertificate cert = find_nondegeneracy(id, M, M.ideal(), 4).cert;

    SECTION("sphere identity from its 4-jet, exact to degree 6") {
        SeriesVector Lambda({jet(id.H[0], 4), jet(id.H[1], 4)});
        Reconstruction R = reconstruct(M, M.ideal(), cert, Lambda, 2);
        CHECK(R.attained >= 6);
        CHECK(R.jet_consistent);
        CHECK(jet(R.H[0], R.attained).same_terms(jet(id.H[0], R.attained)));
        CHECK(jet(R.H[1], R.attained).same_terms(jet(id.H[1], R.attained)));
    }

    SECTION("linear sphere map round-trips exactly") {
        MapGerm L;
        L.H = SeriesVector({ps("2*i*z", M.blocks, 10), ps("4*w", M.blocks, 10)});
        REQUIRE(check_maps_into(L, M, M.ideal()).ok);
        NondegCertificate cl = find_nondegeneracy(L, M, M.ideal(), 4).cert;
        Reconstruction R =
            reconstruct(M, M.ideal(), cl, SeriesVector({jet(L.H[0], 4), jet(L.H[1], 4)}), 2);
        CHECK(R.jet_consistent);
        CHECK(jet(R.H[0], R.attained).same_terms(jet(L.H[0], R.attained)));
        CHECK(jet(R.H[1], R.attained).same_terms(jet(L.H[1], R.attained)));
    }

    SECTION("planar base map round-trips exactly at a sufficient budget") {
        GenericManifold P = planar_family_source(16);
        DefiningIdeal T = planar_family_target(16);
        MapGerm H = planar_family_map(P, false);
        NondegCertificate c2 = find_nondegeneracy(H, P, T, 4).cert;
        Reconstruction R = reconstruct(P, T, c2, H.H, 2);
        CHECK(R.attained == 8);
        CHECK(R.jet_consistent);
        for (int c = 0; c < 3; ++c)
            CHECK(jet(R.H[c], R.attained).same_terms(jet(H.H[c], R.attained)));
    }

    SECTION("truncated rational map: levels are exact, recentering is flagged") {
        // The tail of H o S^4 beyond the attained window contaminates the
        // shift to x0, so the end-to-end trip cannot reproduce the jet; the
        // pipeline reports this instead of silently truncating.
        MapGerm A = sphere_automorphism(M);
        SeriesVector Lambda({jet(A.H[0], 4), jet(A.H[1], 4)});
        Reconstruction R = reconstruct(M, M.ideal(), cert, Lambda, 2);
        CHECK_FALSE(R.jet_consistent);
    }

    SECTION("determinism: identical inputs give identical output") {
        SeriesVector Lambda({jet(id.H[0], 4), jet(id.H[1], 4)});
        Reconstruction a = reconstruct(M, M.ideal(), cert, Lambda, 2);
        Reconstruction b = reconstruct(M, M.ideal(), cert, Lambda, 2);
        CHECK(to_string(a.H) == to_string(b.H));
        CHECK(a.x0 == b.x0);
        CHECK(a.slice == b.slice);
    }
}

TEST_CASE("admissible_jet") {
    GenericManifold M = sphere_germ(1, 10);
    MapGerm id = identity_map(M);
    NondegCertificate cert = find_nondegeneracy(id, M, M.ideal(), 4).cert;
    SeriesVector Lambda({jet(id.H[0], 4), jet(id.H[1], 4)});

    SECTION("the identity 4-jet is admissible") {
        AdmissibilityReport rep = admissible_jet(M, M.ideal(), cert, Lambda, 2);
        CHECK(rep.admissible);
        CHECK(rep.jet_consistent);
    }

    SECTION("a perturbed jet is rejected with an exact residual") {
        SeriesVector Lp = Lambda;
        Exponents e(M.blocks->total_vars(), 0);
        e[M.blocks->var_index("z", 1)] = 2;
        Lp[0].add_term(e, GaussianRational(1));
        AdmissibilityReport rep = admissible_jet(M, M.ideal(), cert, Lp, 2);
        CHECK_FALSE(rep.admissible);
        CHECK_FALSE(rep.reason.empty());
    }

    SECTION("the zero jet fails the certificate precondition") {
        SeriesVector Lz({TruncatedSeries(M.blocks, 10), TruncatedSeries(M.blocks, 10)});
        CHECK_THROWS_AS(admissible_jet(M, M.ideal(), cert, Lz, 2), Error);
    }
}
