#pragma once

#include "manifold.hpp"
#include "nondegeneracy.hpp"

#include <functional>
#include <optional>

namespace crkit {

/// One solution of a hol-type linear system: a parameter direction v (empty
/// when no deformation is involved) and a jet Y along the map.
struct HolElement {
    std::vector<Rational> v;
    SeriesVector Y; // N' components over the source ambient universe
};

/// Assembled exact linear system for infinitesimal deformations: unknowns are
/// the real and imaginary parts of the kappa-jet coefficients of Y (and v),
/// equations are the chart-monomial coefficients of the complexified identity
///   sum_k rho_{Z'_k}(H,barH) Y_k(Z) + rho_{zeta'_k}(H,barH) barY_k(zeta)
///   [+ rho_eps(H,barH) . v] = 0
/// collected through total degree eq_degree.
class HolSystem {
  public:
    HolSystem(const MapGerm &map, const GenericManifold &M, const DefiningIdeal &I,
              const std::vector<TruncatedSeries> &eps_gradients, int m, int kappa, bool vanish,
              int eq_degree)
        : M_(M), kappa_(kappa), vanish_(vanish), m_(m) {
        if (!map.params.empty())
            throw InputError("hol system: specialize map parameters first");
        Np_ = I.ambient_dim();
        source_ = map.H.blocks();
        const int avail = std::min(M.trunc, std::min(map.H.trunc(), I.trunc)) - 1;
        if (kappa > avail)
            throw BudgetError("hol system: jet order " + std::to_string(kappa) +
                              " exceeds the trustworthy equation degree " + std::to_string(avail));
        if (eq_degree > avail)
            throw BudgetError("hol system: equation degree " + std::to_string(eq_degree) +
                              " exceeds the trustworthy bound " + std::to_string(avail));
        eq_degree_ = eq_degree < 0 ? avail : eq_degree;

        MappingCheck mc = check_maps_into(map, M, I);
        if (!mc.ok)
            throw VerifyError("hol system: base map fails the mapping equation; " + mc.message());

        ManifoldChart chart(M);
        chart_blocks_ = chart.chart_blocks;
        const int T = avail;
        SeriesVector Hc = restrict_to_M(map.H, chart);
        SeriesVector Hbar = conjugate_swap(map.H);
        std::vector<TruncatedSeries> subs(I.blocks->total_vars(), TruncatedSeries(chart_blocks_, T));
        for (int k = 0; k < Np_; ++k) {
            subs[I.hol_vars[k]] = Hc[k].with_trunc(T);
            subs[I.anti_vars[k]] = embed_by_name(Hbar[k], chart_blocks_, T);
        }
        const int dp = I.generators();
        g_.resize(dp);
        h_.resize(dp);
        for (int l = 0; l < dp; ++l)
            for (int k = 0; k < Np_; ++k) {
                g_[l].push_back(compose(I.gradient(l, k), subs));
                h_[l].push_back(compose(I.gradient_bar(l, k), subs));
            }
        r_.resize(dp);
        if (m_ > 0) {
            if ((int)eps_gradients.size() != dp * m_)
                throw InputError("hol system: eps gradient count mismatch");
            for (int l = 0; l < dp; ++l)
                for (int j = 0; j < m_; ++j)
                    r_[l].push_back(compose(eps_gradients[l * m_ + j], subs));
        }

        // Unknown layout: monomials of Y (source (z,w)-exponents).
        for (int deg = vanish_ ? 1 : 0; deg <= kappa_; ++deg)
            for (const Exponents &beta : source_monomials(deg))
                monomials_.push_back(beta);

        // Chart images of the monomials: P_beta = (z, Q)^beta, and the bar
        // monomials (chi, tau)^beta.
        std::vector<TruncatedSeries> chart_subs = chart.substitution(source_, T);
        std::vector<TruncatedSeries> P, Pbar;
        for (const Exponents &beta : monomials_) {
            TruncatedSeries mono = TruncatedSeries::monomial(source_, T, beta, GaussianRational(1));
            P.push_back(compose(mono, chart_subs));
            Pbar.push_back(embed_by_name(conjugate_swap(mono), chart_blocks_, T));
        }

        // Columns per generator and unknown; rows are chart monomials.
        const int nm = (int)monomials_.size();
        cols_y_.assign(dp, {});
        cols_ybar_.assign(dp, {});
        for (int l = 0; l < dp; ++l)
            for (int k = 0; k < Np_; ++k)
                for (int b = 0; b < nm; ++b) {
                    residual_bound_ = std::max(residual_bound_,
                                               g_[l][k].max_degree() + P[b].max_degree());
                    residual_bound_ = std::max(residual_bound_,
                                               h_[l][k].max_degree() + Pbar[b].max_degree());
                    cols_y_[l].push_back(g_[l][k] * P[b]);
                    cols_ybar_[l].push_back(h_[l][k] * Pbar[b]);
                }
        for (int l = 0; l < dp; ++l)
            for (const auto &s : r_[l])
                residual_bound_ = std::max(residual_bound_, s.max_degree());
        // With every residual coefficient collected, the kernel consists of
        // exact polynomial solutions of degree <= kappa; below the bound it
        // may contain jets with no polynomial completion in the budget.
        exact_ = eq_degree_ >= residual_bound_;

        // Row index: all chart monomials of degree <= eq_degree present in
        // any column.
        auto note = [&](const TruncatedSeries &s) {
            for (const auto &[e, c] : s.terms())
                if (total_degree(e) <= eq_degree_)
                    rows_.emplace(e, 0);
        };
        for (int l = 0; l < dp; ++l) {
            for (const auto &s : cols_y_[l])
                note(s);
            for (const auto &s : cols_ybar_[l])
                note(s);
            for (const auto &s : r_[l])
                note(s);
        }
        int next = 0;
        for (auto &[e, idx] : rows_)
            idx = next++;
        const auto &row_of = rows_;

        const int unknowns = 2 * Np_ * nm + m_;
        A_ = Matrix<Rational>(2 * next * dp, unknowns);
        for (int l = 0; l < dp; ++l) {
            for (int k = 0; k < Np_; ++k)
                for (int b = 0; b < nm; ++b) {
                    const TruncatedSeries &cy = cols_y_[l][k * nm + b];
                    const TruncatedSeries &cyb = cols_ybar_[l][k * nm + b];
                    int acol = col_a(k, b), bcol = col_b(k, b);
                    auto add = [&](const Exponents &e, const GaussianRational &c,
                                   const GaussianRational &d) {
                        auto it = row_of.find(e);
                        if (it == row_of.end())
                            return;
                        int base = 2 * (l * next + it->second);
                        // c*y + d*conj(y) with y = a + ib splits into
                        // Re: a Re(c+d) - b Im(c-d),  Im: a Im(c+d) + b Re(c-d).
                        A_.at(base, acol) += c.re + d.re;
                        A_.at(base, bcol) += -(c.im - d.im);
                        A_.at(base + 1, acol) += c.im + d.im;
                        A_.at(base + 1, bcol) += c.re - d.re;
                    };
                    for (const auto &[e, c] : cy.terms())
                        if (total_degree(e) <= eq_degree_)
                            add(e, c, GaussianRational());
                    for (const auto &[e, d] : cyb.terms())
                        if (total_degree(e) <= eq_degree_)
                            add(e, GaussianRational(), d);
                }
            for (int j = 0; j < m_; ++j)
                for (const auto &[e, c] : r_[l][j].terms()) {
                    if (total_degree(e) > eq_degree_)
                        continue;
                    auto it = row_of.find(e);
                    if (it == row_of.end())
                        continue;
                    int base = 2 * (l * next + it->second);
                    A_.at(base, col_v(j)) += c.re;
                    A_.at(base + 1, col_v(j)) += c.im;
                }
        }
    }

    int unknown_count() const { return A_.cols(); }
    int kappa() const { return kappa_; }
    int eq_degree() const { return eq_degree_; }
    int residual_degree_bound() const { return residual_bound_; }
    bool exact_kernel() const { return exact_; }
    int param_count() const { return m_; }
    const std::vector<Exponents> &monomials() const { return monomials_; }
    const BlocksPtr &source() const { return source_; }

    std::vector<HolElement> kernel_basis() const {
        std::vector<HolElement> out;
        for (const std::vector<Rational> &vec : A_.kernel())
            out.push_back(from_vector(vec));
        return out;
    }

    std::vector<Rational> to_vector(const HolElement &el) const {
        std::vector<Rational> vec(unknown_count());
        const int nm = (int)monomials_.size();
        for (int k = 0; k < Np_; ++k)
            for (int b = 0; b < nm; ++b) {
                GaussianRational c = el.Y[k].coeff(monomials_[b]);
                vec[col_a(k, b)] = c.re;
                vec[col_b(k, b)] = c.im;
            }
        for (int j = 0; j < m_; ++j)
            vec[col_v(j)] = j < (int)el.v.size() ? el.v[j] : Rational(0);
        return vec;
    }

    HolElement from_vector(const std::vector<Rational> &vec) const {
        HolElement el;
        const int nm = (int)monomials_.size();
        std::vector<TruncatedSeries> comps;
        for (int k = 0; k < Np_; ++k) {
            TruncatedSeries f(source_, kappa_);
            for (int b = 0; b < nm; ++b)
                f.add_term(monomials_[b], GaussianRational(vec[col_a(k, b)], vec[col_b(k, b)]));
            comps.push_back(std::move(f));
        }
        el.Y = SeriesVector(std::move(comps));
        for (int j = 0; j < m_; ++j)
            el.v.push_back(vec[col_v(j)]);
        return el;
    }

    /// Exact membership: the element satisfies every collected equation.
    bool contains(const HolElement &el) const {
        // The element's Y must not exceed the jet order or violate vanishing.
        for (int k = 0; k < Np_; ++k)
            for (const auto &[e, c] : el.Y[k].terms()) {
                if (total_degree(e) > kappa_)
                    return false;
                if (vanish_ && total_degree(e) == 0)
                    return false;
            }
        for (const Rational &x : A_.apply(to_vector(el)))
            if (x != 0)
                return false;
        return true;
    }

    /// Independent residual verification: substitute Y back into the series
    /// identity and check vanishing through eq_degree.
    bool residual_vanishes(const HolElement &el) const {
        const int T = eq_degree_;
        ManifoldChart chart(M_);
        std::vector<TruncatedSeries> chart_subs = chart.substitution(source_, M_.trunc - 1);
        SeriesVector Ybar = conjugate_swap(el.Y);
        for (std::size_t l = 0; l < g_.size(); ++l) {
            TruncatedSeries acc(chart_blocks_, M_.trunc - 1);
            for (int k = 0; k < Np_; ++k) {
                acc += g_[l][k] * compose(el.Y[k].with_trunc(M_.trunc - 1), chart_subs);
                acc += h_[l][k] * embed_by_name(Ybar[k], chart_blocks_, M_.trunc - 1);
            }
            for (int j = 0; j < m_; ++j)
                acc += GaussianRational(el.v[j]) * r_[l][j];
            if (!jet(acc.with_trunc(std::min(acc.trunc(), T)), T).is_zero())
                return false;
        }
        return true;
    }

    /// Solves A x = rhs exactly; returns a particular solution if consistent.
    std::optional<HolElement> solve_affine(const std::vector<Rational> &rhs) const {
        Matrix<Rational> aug(A_.rows(), A_.cols() + 1);
        for (int i = 0; i < A_.rows(); ++i) {
            for (int j = 0; j < A_.cols(); ++j)
                aug.at(i, j) = A_.at(i, j);
            aug.at(i, A_.cols()) = rhs[i];
        }
        std::vector<int> piv = aug.rref();
        if (!piv.empty() && piv.back() == A_.cols())
            return std::nullopt; // inconsistent
        std::vector<Rational> x(A_.cols());
        for (std::size_t i = 0; i < piv.size(); ++i)
            x[piv[i]] = aug.at((int)i, A_.cols());
        return from_vector(x);
    }

    /// Right-hand side vector layout matching the assembled rows, built from
    /// per-generator chart series (e.g. the inhomogeneous part of an order-k
    /// extension step). Row values are negated coefficients of the series.
    std::vector<Rational> rhs_from_series(const std::vector<TruncatedSeries> &per_generator) const {
        int next = (int)rows_.size();
        std::vector<Rational> rhs(2 * next * (int)g_.size());
        for (std::size_t l = 0; l < per_generator.size(); ++l)
            for (const auto &[e, c] : per_generator[l].terms()) {
                if (total_degree(e) > eq_degree_)
                    continue;
                auto it = rows_.find(e);
                if (it == rows_.end()) {
                    if (!c.is_zero())
                        throw VerifyError("hol system: inhomogeneity outside the assembled row space");
                    continue;
                }
                int base = 2 * ((int)l * next + it->second);
                rhs[base] = -c.re;
                rhs[base + 1] = -c.im;
            }
        return rhs;
    }

    std::vector<Exponents> source_monomials(int deg) const {
        // Multiindices over the (z, w) variables only, embedded in the full
        // source exponent layout.
        const VariableBlocks &vb = *source_;
        std::vector<int> hol_positions;
        for (int b = 0; b < vb.block_count(); ++b)
            if (vb.block(b).name == "z" || vb.block(b).name == "w")
                for (int k = 0; k < vb.block(b).arity; ++k)
                    hol_positions.push_back(vb.offset(b) + k);
        std::vector<Exponents> out;
        for (const Exponents &packed : multiindices((int)hol_positions.size(), deg)) {
            Exponents full(vb.total_vars(), 0);
            for (std::size_t i = 0; i < hol_positions.size(); ++i)
                full[hol_positions[i]] = packed[i];
            out.push_back(std::move(full));
        }
        return out;
    }

  private:
    int col_a(int k, int b) const { return 2 * (k * (int)monomials_.size() + b); }
    int col_b(int k, int b) const { return col_a(k, b) + 1; }
    int col_v(int j) const { return 2 * Np_ * (int)monomials_.size() + j; }

    const GenericManifold &M_;
    BlocksPtr source_;
    BlocksPtr chart_blocks_;
    int Np_ = 0, kappa_ = 0, m_ = 0, eq_degree_ = 0, residual_bound_ = 0;
    bool vanish_ = true, exact_ = false;
    std::vector<Exponents> monomials_;
    std::vector<std::vector<TruncatedSeries>> g_, h_, r_, cols_y_, cols_ybar_;
    std::map<Exponents, int, GrlexLess> rows_;
    Matrix<Rational> A_;
};

/// Exact kernel basis of jet-coefficient unknowns realizing hol(H) or
/// hol(H, D), plus the data needed for sweeps and membership checks.
struct InfDefBasis {
    int kappa = 0;
    int eq_degree = 0;
    bool exact = false; // every residual coefficient was collected
    bool vanish = true;
    int m = 0;
    std::vector<HolElement> basis;
    std::shared_ptr<HolSystem> system;

    int dim() const { return (int)basis.size(); }
};

namespace detail {

inline std::vector<TruncatedSeries> eps_gradients_at_base(const Deformation &D) {
    const DefiningIdeal &I = D.ideal;
    std::vector<TruncatedSeries> out;
    int eb = I.blocks->find_block(I.eps_block);
    for (int l = 0; l < I.generators(); ++l)
        for (int j = 0; j < D.m; ++j) {
            TruncatedSeries d = differentiate(I.rho[l], I.blocks->offset(eb) + j);
            out.push_back(specialize(d, I.eps_block, D.eps0));
        }
    return out;
}

inline InfDefBasis solve_hol(const MapGerm &map, const GenericManifold &M, const DefiningIdeal &I,
                             const std::vector<TruncatedSeries> &eps_grads, int m, int kappa,
                             bool vanish, int eq_degree) {
    InfDefBasis out;
    out.kappa = kappa;
    out.vanish = vanish;
    out.m = m;
    out.system = std::make_shared<HolSystem>(map, M, I, eps_grads, m, kappa, vanish, eq_degree);
    out.eq_degree = out.system->eq_degree();
    out.exact = out.system->exact_kernel();
    out.basis = out.system->kernel_basis();
    for (const HolElement &el : out.basis)
        if (!out.system->residual_vanishes(el))
            throw VerifyError("hol kernel element fails the residual back-substitution");
    return out;
}

} // namespace detail

/// hol(H) at jet order kappa: Y with Y(0) = 0 and
/// Re(rho_{Z'}(H, barH) . Y)|_M = 0, coefficients collected through
/// eq_degree (default: the full trustworthy depth trunc - 1).
inline InfDefBasis hol_jets(const MapGerm &map, const GenericManifold &M, const DefiningIdeal &I,
                            int kappa, int eq_degree = -1) {
    return detail::solve_hol(map, M, I, {}, 0, kappa, true, eq_degree);
}

/// hol(H) in the relaxed flavor without the vanishing constraint at 0.
inline InfDefBasis hol_jets_relaxed(const MapGerm &map, const GenericManifold &M,
                                    const DefiningIdeal &I, int kappa, int eq_degree = -1) {
    return detail::solve_hol(map, M, I, {}, 0, kappa, false, eq_degree);
}

/// hol(H, D): unknowns (v, Y) with the rho_eps . v term, at eps = eps0.
inline InfDefBasis hol_def_jets(const MapGerm &map, const GenericManifold &M, const Deformation &D,
                                int kappa, int eq_degree = -1) {
    DefiningIdeal I0 = D.specialized(D.eps0);
    return detail::solve_hol(map, M, I0, detail::eps_gradients_at_base(D), D.m, kappa, true,
                             eq_degree);
}

/// Projection of the kernel to (v, jet of order proj_order of Y); returns the
/// exact dimension of the image.
inline int projected_dim(const InfDefBasis &basis, int proj_order) {
    if (basis.basis.empty())
        return 0;
    const HolSystem &sys = *basis.system;
    std::vector<Exponents> kept;
    for (const Exponents &e : sys.monomials())
        if (total_degree(e) <= proj_order)
            kept.push_back(e);
    const int Np = basis.basis[0].Y.size();
    Matrix<Rational> m((int)basis.basis.size(), 2 * Np * (int)kept.size() + basis.m);
    for (std::size_t i = 0; i < basis.basis.size(); ++i) {
        int c = 0;
        for (int k = 0; k < Np; ++k)
            for (const Exponents &e : kept) {
                GaussianRational co = basis.basis[i].Y[k].coeff(e);
                m.at((int)i, c++) = co.re;
                m.at((int)i, c++) = co.im;
            }
        for (int j = 0; j < basis.m; ++j)
            m.at((int)i, c++) = basis.basis[i].v[j];
    }
    return m.rank();
}

/// Sweep of projected dimensions over jet orders; flags stabilization when
/// two consecutive values agree. The value is a heuristic certificate, not a
/// proved dimension.
struct StabilizationReport {
    std::vector<std::pair<int, int>> dims; // (kappa, projected dim)
    int proj_order = 0;
    bool stabilized = false;
    int value = -1;

    std::string verdict() const {
        if (!stabilized)
            return "not stabilized in range";
        return "stabilized at " + std::to_string(value) + " (heuristic certificate)";
    }
};

template <class SolveFn>
inline StabilizationReport stabilized_dim(SolveFn &&solve, int kappa_lo, int kappa_hi, int proj_order) {
    StabilizationReport rep;
    rep.proj_order = proj_order;
    for (int kappa = kappa_lo; kappa <= kappa_hi; ++kappa) {
        InfDefBasis b = solve(kappa);
        int dim = projected_dim(b, proj_order);
        // Once the projection genuinely truncates (kappa > proj_order), the
        // projected dimension must not grow along the sweep.
        if (kappa > proj_order && !rep.dims.empty() && dim > rep.dims.back().second)
            throw VerifyError("stabilized_dim: projected dimension increased along the sweep");
        rep.dims.emplace_back(kappa, dim);
    }
    // Stabilized means the sweep ended on two agreeing values.
    if (rep.dims.size() >= 2 &&
        rep.dims.back().second == rep.dims[rep.dims.size() - 2].second) {
        rep.stabilized = true;
        rep.value = rep.dims.back().second;
    }
    return rep;
}

/// Exact spanning set of the evaluations at the base point, as vectors in
/// R^{2N'} laid out (Re Y_1, Im Y_1, ..., Re Y_{N'}, Im Y_{N'}). For a
/// base-point-type deformation the evaluation is Y(0) + c'(0) v.
inline Matrix<Rational> evaluate_at_base(const InfDefBasis &basis, const Deformation *D = nullptr) {
    const int Np = basis.basis.empty() ? 0 : basis.basis[0].Y.size();
    Matrix<Rational> span((int)basis.basis.size(), 2 * Np);
    std::vector<std::vector<GaussianRational>> cprime;
    if (D) {
        const BlocksPtr E = D->chart.blocks();
        for (int k = 0; k < D->chart.size(); ++k) {
            std::vector<GaussianRational> row;
            for (int j = 0; j < D->m; ++j) {
                Exponents e(E->total_vars(), 0);
                e[j] = 1;
                row.push_back(D->chart[k].coeff(e));
            }
            cprime.push_back(std::move(row));
        }
    }
    for (std::size_t i = 0; i < basis.basis.size(); ++i) {
        const HolElement &el = basis.basis[i];
        for (int k = 0; k < Np; ++k) {
            GaussianRational val = el.Y[k].constant_term();
            if (D)
                for (int j = 0; j < D->m; ++j)
                    val += cprime[k][j] * GaussianRational(el.v[j]);
            span.at((int)i, 2 * k) = val.re;
            span.at((int)i, 2 * k + 1) = val.im;
        }
    }
    return span;
}

// --- curves and higher-order deformations -----------------------------------

/// Polynomial curve (eps(t), H(t)) over the source universe extended by a
/// real parameter block "t" (plus any map parameter blocks).
struct CurveInT {
    SeriesVector H;                   // components over source + t universe
    std::vector<TruncatedSeries> eps; // m components over the same universe, eps(0) = eps0 = 0
    int degree = 0;                   // t-degree of the data
};

struct TangencyReport {
    bool tangent = false;
    int order_checked = 0;
    int first_failing_order = -1;
    std::string failing_coefficient; // chart-series coefficient of t^j
};

/// Expands rho(H(Z(s), t), bar..., eps(t)) on the chart and tests vanishing
/// of the t-coefficients through order r.
inline TangencyReport curve_tangency(const CurveInT &curve, const GenericManifold &M,
                                     const DefiningIdeal &I, int r) {
    BlocksPtr U = curve.H.blocks();
    if (U->find_block("t") < 0)
        throw InputError("curve_tangency: curve universe must carry a 't' block");
    const int T = std::min({M.trunc, curve.H.trunc(), I.trunc});
    if (T <= r)
        throw BudgetError("curve_tangency: t-degree budget " + std::to_string(T) +
                          " cannot certify order " + std::to_string(r));

    std::vector<BlockSpec> extras;
    for (int b = 0; b < U->block_count(); ++b) {
        const Block &bb = U->block(b);
        if (bb.role == BlockRole::RealParam)
            extras.push_back(BlockSpec{bb.name, bb.arity, bb.role, ""});
    }
    ManifoldChart chart(M, extras);

    // H must be holomorphic in (z, w) and fix the base point for all t.
    for (const auto &comp : curve.H.components)
        for (const auto &[e, c] : comp.terms())
            for (int v = 0; v < U->total_vars(); ++v)
                if (e[v]) {
                    const std::string &name = U->block(U->block_of_var(v)).name;
                    if (name == "chi" || name == "tau")
                        throw InputError("curve_tangency: curve is not holomorphic in Z");
                }

    SeriesVector Hc = restrict_to_M(curve.H, chart);
    SeriesVector Hbar = conjugate_swap(curve.H);

    const int Np = I.ambient_dim();
    std::vector<TruncatedSeries> subs(I.blocks->total_vars(), TruncatedSeries(chart.chart_blocks, T));
    for (int k = 0; k < Np; ++k) {
        subs[I.hol_vars[k]] = Hc[k].with_trunc(T);
        subs[I.anti_vars[k]] = embed_by_name(Hbar[k], chart.chart_blocks, T);
    }
    if (!I.eps_block.empty()) {
        int eb = I.blocks->find_block(I.eps_block);
        if ((int)curve.eps.size() != I.blocks->block(eb).arity)
            throw InputError("curve_tangency: eps component count mismatch");
        for (int j = 0; j < (int)curve.eps.size(); ++j) {
            if (!curve.eps[j].constant_term().is_zero())
                throw InputError("curve_tangency: eps(0) must equal the distinguished parameter 0");
            subs[I.blocks->offset(eb) + j] =
                compose(curve.eps[j], chart.substitution(U, T));
        }
    }

    TangencyReport rep;
    rep.order_checked = r;
    rep.tangent = true;
    const int tvar = chart.chart_blocks->var_index("t", 1);
    for (int l = 0; l < I.generators(); ++l) {
        TruncatedSeries res = compose(I.rho[l], subs);
        // Split by t-powers and test each coefficient through order r.
        for (const auto &[e, c] : res.terms()) {
            int j = (int)e[tvar];
            if (j > r)
                continue;
            if (rep.first_failing_order < 0 || j < rep.first_failing_order) {
                rep.tangent = false;
                rep.first_failing_order = j;
                Exponents without = e;
                without[tvar] = 0;
                std::string mono = monomial_str(*chart.chart_blocks, without);
                rep.failing_coefficient =
                    mono.empty() ? to_string(c) : to_string(c) + "*" + mono;
            }
        }
    }
    if (rep.tangent)
        rep.first_failing_order = -1;
    return rep;
}

/// Order-k infinitesimal deformations around the trivial prefix: the
/// t^j-coefficient equations of the mapping residual form a block-triangular
/// system whose level-j linear part is the hol(H, D) operator, so each level's
/// kernel around the zero prefix equals the first-order kernel.
struct HolKBasis {
    int k = 0;
    std::vector<InfDefBasis> levels; // levels[j] solves the order-(j+1) step
};

inline HolKBasis hol_k_jets(const MapGerm &map, const GenericManifold &M, const Deformation &D,
                            int k, int kappa, int eq_degree = -1) {
    if (k < 1)
        throw InputError("hol_k_jets: order must be >= 1");
    HolKBasis out;
    out.k = k;
    InfDefBasis first = hol_def_jets(map, M, D, kappa, eq_degree);
    out.levels.push_back(first);
    for (int j = 2; j <= k; ++j)
        out.levels.push_back(first); // zero prefix: same operator, zero RHS
    return out;
}

/// Membership of a tuple (w_1..w_k, Y_1..Y_k) in hol^k(H, D): exact expansion
/// of the curve tau_k through order k.
inline bool hol_k_member(const MapGerm &map, const GenericManifold &M, const Deformation &D,
                         const std::vector<std::vector<Rational>> &w,
                         const std::vector<SeriesVector> &Y, int k) {
    if ((int)w.size() != k || (int)Y.size() != k)
        throw InputError("hol_k_member: need k parameter and k field slots");
    BlocksPtr U = extend_universe(map.H.blocks(), {{"t", 1, BlockRole::RealParam, ""}});
    const int T = map.H.trunc();
    int tv = U->var_index("t", 1);
    TruncatedSeries tpow = TruncatedSeries::constant(U, T, GaussianRational(1));
    TruncatedSeries tvar = TruncatedSeries::variable(U, T, tv);

    CurveInT curve;
    std::vector<TruncatedSeries> comps;
    for (int c = 0; c < map.H.size(); ++c)
        comps.push_back(embed_by_name(map.H[c], U));
    curve.eps.assign(D.m, TruncatedSeries(U, T));
    for (int j = 1; j <= k; ++j) {
        tpow *= tvar;
        for (int c = 0; c < map.H.size(); ++c)
            comps[c] += tpow * embed_by_name(Y[j - 1][c], U, T);
        for (int l = 0; l < D.m; ++l)
            curve.eps[l] += GaussianRational(w[j - 1][l]) * tpow;
    }
    curve.H = SeriesVector(std::move(comps));
    curve.degree = k;
    return curve_tangency(curve, M, D.ideal, k).tangent;
}

/// Sufficient isolation criterion: a stabilized zero-dimensional hol(H, D)
/// certifies that H is isolated; anything else is reported as inapplicable
/// or inconclusive, never as non-isolation.
struct IsolationVerdict {
    enum Kind { Isolated, Inapplicable, Inconclusive } kind = Inconclusive;
    StabilizationReport sweep;

    std::string text() const {
        switch (kind) {
        case Isolated:
            return "isolated (zero-dimensional infinitesimal deformation space)";
        case Inapplicable:
            return "criterion inapplicable (stabilized dimension " + std::to_string(sweep.value) + ")";
        default:
            return "inconclusive (dimension sweep did not stabilize)";
        }
    }
};

inline IsolationVerdict isolation_report(const StabilizationReport &sweep) {
    IsolationVerdict v;
    v.sweep = sweep;
    if (!sweep.stabilized)
        v.kind = IsolationVerdict::Inconclusive;
    else if (sweep.value == 0)
        v.kind = IsolationVerdict::Isolated;
    else
        v.kind = IsolationVerdict::Inapplicable;
    return v;
}

/// Verification of the base-point isomorphism (v, Y) <-> Y + c'(0) v between
/// hol(H, D) and the relaxed hol(H), at matched jet order.
struct BasepointIsoReport {
    int dim_def = 0;
    int dim_hol = 0;
    bool forward_ok = false;  // (v, Y) -> Y + c'(0)v lands in hol(H)
    bool backward_ok = false; // W -> (v with c'(0)v = W(0), W - W(0)) lands in hol(H, D)
    bool ok() const { return dim_def == dim_hol && forward_ok && backward_ok; }
};

inline BasepointIsoReport basepoint_iso_check(const MapGerm &map, const GenericManifold &M,
                                              const DefiningIdeal &I, const Deformation &D, int kappa,
                                              int eq_degree = -1) {
    BasepointIsoReport rep;
    InfDefBasis def = hol_def_jets(map, M, D, kappa, eq_degree);
    InfDefBasis rel = hol_jets_relaxed(map, M, I, kappa, eq_degree);
    rep.dim_def = def.dim();
    rep.dim_hol = rel.dim();

    const BlocksPtr E = D.chart.blocks();
    const int Np = I.ambient_dim();
    std::vector<std::vector<GaussianRational>> cprime(Np);
    for (int k = 0; k < Np; ++k)
        for (int j = 0; j < D.m; ++j) {
            Exponents e(E->total_vars(), 0);
            e[j] = 1;
            cprime[k].push_back(D.chart[k].coeff(e));
        }

    rep.forward_ok = true;
    for (const HolElement &el : def.basis) {
        HolElement W;
        std::vector<TruncatedSeries> comps;
        for (int k = 0; k < Np; ++k) {
            GaussianRational shift;
            for (int j = 0; j < D.m; ++j)
                shift += cprime[k][j] * GaussianRational(el.v[j]);
            comps.push_back(el.Y[k] + TruncatedSeries::constant(el.Y.blocks(), el.Y.trunc(), shift));
        }
        W.Y = SeriesVector(std::move(comps));
        if (!rel.system->contains(W)) {
            rep.forward_ok = false;
            break;
        }
    }

    // Inverse convention: W -> (v, W - W(0)) with c'(0) v = W(0); the paper's
    // displayed inverse W -> (W(0), W + W(0)) composes to W + 2 W(0), so the
    // translation half carries the minus sign here.
    rep.backward_ok = true;
    Matrix<Rational> C(2 * Np, D.m);
    for (int k = 0; k < Np; ++k)
        for (int j = 0; j < D.m; ++j) {
            C.at(2 * k, j) = cprime[k][j].re;
            C.at(2 * k + 1, j) = cprime[k][j].im;
        }
    for (const HolElement &el : rel.basis) {
        std::vector<Rational> w0(2 * Np);
        for (int k = 0; k < Np; ++k) {
            GaussianRational c = el.Y[k].constant_term();
            w0[2 * k] = c.re;
            w0[2 * k + 1] = c.im;
        }
        // Solve C v = W(0) exactly.
        Matrix<Rational> aug(2 * Np, D.m + 1);
        for (int i = 0; i < 2 * Np; ++i) {
            for (int j = 0; j < D.m; ++j)
                aug.at(i, j) = C.at(i, j);
            aug.at(i, D.m) = w0[i];
        }
        std::vector<int> piv = aug.rref();
        if (!piv.empty() && piv.back() == D.m) {
            rep.backward_ok = false; // W(0) is not tangent to the target
            break;
        }
        HolElement back;
        back.v.assign(D.m, Rational(0));
        for (std::size_t i = 0; i < piv.size(); ++i)
            back.v[piv[i]] = aug.at((int)i, D.m);
        std::vector<TruncatedSeries> comps;
        for (int k = 0; k < Np; ++k)
            comps.push_back(el.Y[k] - TruncatedSeries::constant(el.Y.blocks(), el.Y.trunc(),
                                                                el.Y[k].constant_term()));
        back.Y = SeriesVector(std::move(comps));
        if (!def.system->contains(back)) {
            rep.backward_ok = false;
            break;
        }
    }
    return rep;
}

} // namespace crkit
