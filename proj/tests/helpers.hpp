#pragma once

#include <crkit/io.hpp>
#include <crkit/transform.hpp>

namespace t {

using namespace crkit;

// Normal-coordinate universe for a source manifold in C^{n+d}.
inline BlocksPtr source_universe(int n, int d) {
    return make_blocks({
        {"z", n, BlockRole::Holomorphic, "chi"},
        {"chi", n, BlockRole::Antiholomorphic, "z"},
        {"w", d, BlockRole::Holomorphic, "tau"},
        {"tau", d, BlockRole::Antiholomorphic, "w"},
    });
}

inline BlocksPtr aux_universe(const std::string &name, int arity) {
    return make_blocks({{name, arity, BlockRole::Auxiliary, ""}});
}

inline TruncatedSeries ps(const std::string &text, const BlocksPtr &blocks, int trunc) {
    return parse_series(text, blocks, trunc);
}

inline GaussianRational gr(long num, long den = 1) { return GaussianRational(num, den); }

inline GaussianRational gi(long num, long den = 1) {
    return GaussianRational(Rational(0), Rational(num, den));
}

} // namespace t
