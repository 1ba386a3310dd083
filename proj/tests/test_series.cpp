#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace crkit;
using t::gi;
using t::gr;
using t::ps;

TEST_CASE("ring operations on truncated series") {
    auto U = t::source_universe(1, 1);

    SECTION("binomial square") {
        auto f = ps("1 + z", U, 2);
        CHECK(to_string(f * f) == "1 + 2*z.1 + z.1^2");
    }

    SECTION("truncation drops the product entirely") {
        auto f = ps("z", U, 1) * ps("chi", U, 1);
        CHECK(f.is_zero());
        CHECK(f.trunc() == 1);
    }

    SECTION("expansion with truncation at degree 2") {
        auto f = ps("1 + z + w", U, 2) * ps("1 - z", U, 2);
        CHECK(f == ps("1 + w - z^2 - z*w", U, 2));
    }

    SECTION("scalar multiply keeps exactness") {
        auto f = gi(1, 2) * ps("2*z", U, 3);
        CHECK(to_string(f) == "i*z.1");
    }

    SECTION("block mismatch is a structural error") {
        auto V = t::aux_universe("x", 2);
        CHECK_THROWS_AS(ps("z", U, 2) + ps("x.1", V, 2), InputError);
        CHECK_THROWS_WITH(ps("z", U, 2) * ps("x.1", V, 2),
                          Catch::Matchers::ContainsSubstring("block mismatch"));
    }

    SECTION("zero coefficients are purged") {
        auto f = ps("z + w", U, 2) - ps("w", U, 2);
        CHECK(f.terms().size() == 1);
        auto g = f - ps("z", U, 2);
        CHECK(g.is_zero());
    }
}

TEST_CASE("composition") {
    auto U = t::source_universe(1, 1);
    auto X = t::aux_universe("x", 2);

    SECTION("projection") {
        auto f = ps("w", U, 3);
        std::vector<TruncatedSeries> subs = {
            TruncatedSeries(X, 3), TruncatedSeries(X, 3), // z, chi unused
            ps("2*i*x.1*x.2", X, 3), TruncatedSeries(X, 3)};
        CHECK(to_string(compose(f, subs)) == "2*i*x.1*x.2");
    }

    SECTION("reexpansion of z^2 under z -> z + z^2") {
        auto f = ps("z^2", U, 3);
        std::vector<TruncatedSeries> subs = identity_subs(U, 3);
        subs[U->var_index("z", 1)] = ps("z + z^2", U, 3);
        CHECK(compose(f, subs) == ps("z^2 + 2*z^3", U, 3));
    }

    SECTION("identity substitution is the identity") {
        auto f = ps("1 + z*chi - 3/4*w^2", U, 4);
        CHECK(compose(f, identity_subs(U, 4)).same_terms(f));
    }

    SECTION("nonzero constant term is rejected") {
        auto f = ps("z", U, 2);
        std::vector<TruncatedSeries> subs = identity_subs(U, 2);
        subs[0] = ps("1 + z", U, 2);
        CHECK_THROWS_WITH(compose(f, subs), Catch::Matchers::ContainsSubstring("constant term"));
    }
}

TEST_CASE("recenter is the exact polynomial Taylor shift") {
    auto X = t::aux_universe("x", 1);
    auto X2 = t::aux_universe("x", 2);

    CHECK(recenter(ps("x^2", X, 3), {gr(1)}) == ps("1 + 2*x + x^2", X, 3));
    CHECK(recenter(ps("x", X, 2), {gr(5, 7)}) == ps("5/7 + x", X, 2));
    CHECK(recenter(ps("x.1*x.2", X2, 3), {gr(1), gr(0)}) == ps("x.2 + x.1*x.2", X2, 3));
}

TEST_CASE("differentiation") {
    auto U = t::source_universe(1, 1);

    SECTION("plain partials") {
        auto f = ps("z^2*chi", U, 5);
        CHECK(differentiate(f, U->var_index("z", 1)) == ps("2*z*chi", U, 4));
        auto q = ps("tau + 2*i*z*chi", U, 5);
        CHECK(differentiate(q, U->var_index("chi", 1)) == ps("2*i*z", U, 4));
        CHECK(differentiate(ps("42", U, 5), U->var_index("w", 1)).is_zero());
    }

    SECTION("budget is decremented and exhausted") {
        auto f = ps("z", U, 1);
        auto df = differentiate(f, U->var_index("z", 1));
        CHECK(df.trunc() == 0);
        CHECK_THROWS_AS(differentiate(df, U->var_index("z", 1)), BudgetError);
    }
}

TEST_CASE("conjugate swap") {
    auto U = t::source_universe(1, 1);

    SECTION("definition on a monomial") {
        CHECK(conjugate_swap(ps("i*z", U, 2)) == ps("-i*chi", U, 2));
    }

    SECTION("solved sphere graph goes to its bar") {
        // Q = tau + 2i z chi; bar(Q) = w - 2i z chi, and the reality identity
        // Q(z, chi, bar(Q)(chi, z, w)) = w pins the sign.
        auto Q = ps("tau + 2*i*z*chi", U, 6);
        auto Qbar = conjugate_swap(Q);
        CHECK(Qbar == ps("w - 2*i*z*chi", U, 6));
        std::vector<TruncatedSeries> subs = identity_subs(U, 6);
        subs[U->var_index("tau", 1)] = Qbar;
        CHECK(compose(Q, subs) == ps("w", U, 6));
    }

    SECTION("reality-symmetric series are fixed") {
        auto f = ps("z*chi + i*z^2*chi - i*z*chi^2 + w - tau + 0", U, 4);
        // w - tau is anti-real; drop it and keep a genuinely real series.
        auto g = ps("z*chi + (1+i)*z^2*chi + (1-i)*z*chi^2", U, 4);
        CHECK(conjugate_swap(g) == g);
        CHECK(conjugate_swap(f) != f);
    }

    SECTION("involution") {
        auto f = ps("3/5 + i*z - 2*w*tau + z^2*chi", U, 4);
        CHECK(conjugate_swap(conjugate_swap(f)) == f);
    }

    SECTION("unpaired holomorphic block") {
        auto B = make_blocks({{"z", 1, BlockRole::Holomorphic, ""}});
        CHECK_THROWS_WITH(conjugate_swap(ps("z", B, 2)),
                          Catch::Matchers::ContainsSubstring("unpaired"));
        // Unused unpaired blocks are fine.
        CHECK(conjugate_swap(ps("7", B, 2)) == ps("7", B, 2));
    }

    SECTION("real parameters are fixed") {
        auto B = make_blocks({{"z", 1, BlockRole::Holomorphic, "chi"},
                              {"chi", 1, BlockRole::Antiholomorphic, "z"},
                              {"s", 1, BlockRole::RealParam, ""}});
        CHECK(conjugate_swap(ps("i*s*z", B, 3)) == ps("-i*s*chi", B, 3));
    }
}

TEST_CASE("jet and evaluate") {
    auto U = t::source_universe(1, 1);
    auto X = t::aux_universe("x", 2);

    CHECK(jet(ps("1 + z + z^5", U, 6), 2) == ps("1 + z", U, 6));
    auto f = ps("1 + z*w - chi^3", U, 4);
    CHECK(jet(f, f.trunc()) == f);
    CHECK_THROWS_AS(jet(f, 5), BudgetError);

    CHECK(evaluate(ps("2*i*x.1*x.2", X, 3), {gr(1, 2), gr(1, 3)}) == gi(1, 3));
    CHECK_THROWS_AS(evaluate(ps("x.1", X, 2), {gr(1)}), InputError);
}

TEST_CASE("canonical text form") {
    auto U = t::source_universe(1, 1);

    SECTION("ordering and coefficient rendering") {
        auto f = ps("1/2 - z + 3*w^2 - 1/2*i*z*chi + (2/3+1/5*i)*tau^2", U, 4);
        CHECK(to_string(f) ==
              "1/2 - z.1 - 1/2*i*z.1*chi.1 + 3*w.1^2 + (2/3+1/5*i)*tau.1^2");
    }

    SECTION("writer output parses back to the same series") {
        auto f = ps("-1 + 2/7*z - i*chi + (1/2-3*i)*z*w^2", U, 5);
        CHECK(parse_series(to_string(f), U, 5) == f);
    }

    SECTION("floating literals are rejected with advice") {
        CHECK_THROWS_WITH(ps("0.5*z", U, 2), Catch::Matchers::ContainsSubstring("1/2"));
    }

    SECTION("zero prints as 0") {
        CHECK(to_string(TruncatedSeries(U, 3)) == "0");
        CHECK(parse_series("0", U, 3).is_zero());
    }
}
