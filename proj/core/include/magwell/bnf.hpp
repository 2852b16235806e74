#pragma once

#include <map>
#include <string>
#include <vector>

#include "magwell/series.hpp"

namespace magwell {

// Coefficients of (|z|^2)^{*m} = sum_i c[m][i] I^{m-i} param^i, exact; c[m] has m+1 entries.
// In E2 the same table applies with param = h.
const std::vector<std::vector<Rational>>& star_power_table(int mmax);

// Explicit symbol over the variables of a real-basis layout and its parameter, e.g. "x1^2 + xi1^2 + hbar*y1".
// Aliases: I1..Is for the oscillator actions (x_j^2 + xi_j^2, or t_i^2 + tt_i^2 in the second algebra);
// with one oscillator also z2 = I1 and z4 = I1^2.
Series<Quad> parse_symbol(const std::string& text, const LayoutPtr& real_layout, int nmax, int tmax);

template <class S>
struct TableEntry {
    std::vector<int> alpha;      // powers of the star powers of |z_j|^2 (or |v_j|^2)
    std::vector<int> alpha_tau;  // tau powers (E1 only)
    int ell = 0;                 // power of the semiclassical parameter
    Series<S> coeff;             // base-only polynomial
};

template <class S>
struct NormalFormTable {
    LayoutPtr layout;  // complex basis
    int r = 0;
    std::vector<Series<S>> betas;  // base polynomials in front of |z_j|^2
    std::vector<TableEntry<S>> entries;
    Series<S> input, h2, generator, kappa, residual, conjugated;
};

template <class S>
struct Homological {
    Series<S> K, rho;
};

namespace bnf_detail {

struct Split {
    std::vector<int> a, b;  // oscillator exponents (z, zbar)
    bool diagonal = true;
};

inline Split split(const Layout& L, const Mono& m) {
    Split sp;
    for (const auto& o : oscillators(L)) {
        sp.a.push_back(m[o.a]);
        sp.b.push_back(m[o.b]);
        if (m[o.a] != m[o.b]) sp.diagonal = false;
    }
    return sp;
}

template <class S>
bool is_base_only(const Series<S>& s, const Mono& m) {
    if (m.back() != 0) return false;
    for (int i = 0; i < s.layout().nvars(); ++i)
        if (s.layout().kinds[i] == VarKind::Fiber && m[i] != 0) return false;
    return true;
}

// 1/d as a truncated base series, d = d0 + (base terms).
template <class S>
Series<S> invert_base(const Series<S>& d) {
    using F = Field<S>;
    S d0 = d.coeff(d.unit());
    Series<S> rest = d;
    rest.mutable_terms().erase(d.unit());
    Series<S> inv = Series<S>::constant(d.layout_ptr(), d.nmax(), d.tmax(), F::one() / d0);
    if (rest.is_zero()) return inv;
    Series<S> q = rest * (-(F::one() / d0));
    Series<S> term = inv;
    for (int m = 0; m < d.nmax() + d.tmax() + 1; ++m) {
        term = mul_pointwise(term, q);
        if (term.is_zero()) break;
        inv += term;
    }
    return inv;
}

}  // namespace bnf_detail

// Extracts the base polynomial in front of |z_j|^2 (no other fiber factor, no parameter).
template <class S>
std::vector<Series<S>> extract_betas(const Series<S>& h) {
    const Layout& L = h.layout();
    const auto osc = oscillators(L);
    std::vector<Series<S>> out(osc.size(), Series<S>(h.layout_ptr(), h.nmax(), h.tmax()));
    for (const auto& [m, c] : h.terms()) {
        if (m.back() != 0) continue;
        for (std::size_t j = 0; j < osc.size(); ++j) {
            if (m[osc[j].a] != 1 || m[osc[j].b] != 1) continue;
            Mono base = m;
            base[osc[j].a] = base[osc[j].b] = 0;
            if (bnf_detail::is_base_only(h, base)) out[j].add(base, c);
        }
    }
    return out;
}

// Splits a degree-N component R into K (commuting with every oscillator) and rho with
// R = K + sum_j beta_j (i/eps) ad_{|z_j|^2} rho at degree N.
template <class S>
Homological<S> homological_solve(const Series<S>& R, const std::vector<Series<S>>& betas, double res_tol = 1e-9) {
    using F = Field<S>;
    const Layout& L = R.layout();
    Homological<S> out{Series<S>(R.layout_ptr(), R.nmax(), R.tmax()), Series<S>(R.layout_ptr(), R.nmax(), R.tmax())};
    double bmax = 0.0;
    for (const auto& b : betas) bmax = std::max(bmax, F::magnitude(b.coeff(b.unit())));
    std::map<std::vector<int>, Series<S>> inverses;
    const auto osc = oscillators(L);
    for (const auto& [m, c] : R.terms()) {
        auto sp = bnf_detail::split(L, m);
        if (sp.diagonal) {
            out.K.add(m, c);
            continue;
        }
        std::vector<int> diff(osc.size());
        for (std::size_t j = 0; j < osc.size(); ++j) diff[j] = sp.b[j] - sp.a[j];
        auto it = inverses.find(diff);
        if (it == inverses.end()) {
            Series<S> d(R.layout_ptr(), R.nmax(), R.tmax());
            for (std::size_t j = 0; j < osc.size(); ++j)
                if (diff[j]) d += betas[j] * F::from_rational(diff[j]);
            S d0 = d.coeff(d.unit());
            if (F::magnitude(d0) <= res_tol * bmax) {
                std::string a, b;
                for (std::size_t j = 0; j < osc.size(); ++j) {
                    a += (j ? "," : "") + std::to_string(sp.a[j]);
                    b += (j ? "," : "") + std::to_string(sp.b[j]);
                }
                throw ResonanceError("resonant monomial: alpha = (" + a + "), alpha' = (" + b +
                                     ") gives a vanishing frequency combination at the well");
            }
            d *= F::i() * F::from_rational(2);
            it = inverses.emplace(diff, bnf_detail::invert_base(d)).first;
        }
        Series<S> single(R.layout_ptr(), R.nmax(), R.tmax());
        single.add(m, c);
        out.rho += mul_pointwise(single, it->second);
    }
    return out;
}

// Iterative normal form of H2 + gamma (complex basis) up to degree r - 1.
template <class S>
NormalFormTable<S> birkhoff(const Series<S>& symbol, int r, double res_tol = 1e-9);

template <class S>
std::vector<TableEntry<S>> reorder_star(const Series<S>& kappa);

// Rebuilds sum c * prod (|z_j|^2)^{*alpha_j} * tau^alpha_tau * param^ell as a pointwise series.
template <class S>
Series<S> reconstruct(const std::vector<TableEntry<S>>& table, const LayoutPtr& layout, int nmax, int tmax);

// Substitutes I_j -> (2 n_j - 1) param in H2 + kappa; the result lives in the real-basis
// layout and has no oscillator variables.
template <class S>
Series<S> effective_symbol(const NormalFormTable<S>& table, const std::vector<int>& n);

// ---------------------------------------------------------------------------------------

template <class S>
NormalFormTable<S> birkhoff(const Series<S>& symbol, int r, double res_tol) {
    const Layout& L = symbol.layout();
    if (!L.complex_basis) throw AlgebraError("birkhoff expects the complex oscillator basis");
    if (symbol.nmax() < r - 1) throw AlgebraError("truncation order below the requested normal form order");
    NormalFormTable<S> nf;
    nf.layout = symbol.layout_ptr();
    nf.r = r;
    nf.input = symbol;
    const auto osc = oscillators(L);

    for (const auto& [m, c] : symbol.terms()) {
        int D = symbol.fiber_degree(m);
        if (D == 1) throw AlgebraError("symbol has a degree-one part: " + symbol.mono_text(m));
        if (D == 0 && L.tag == AlgebraTag::E1)
            throw AlgebraError("E1 symbol has a degree-zero part: " + symbol.mono_text(m));
        if (D != 2) continue;
        auto sp = bnf_detail::split(L, m);
        int osc_deg = 0;
        for (std::size_t j = 0; j < osc.size(); ++j) osc_deg += sp.a[j] + sp.b[j];
        if (!sp.diagonal || (osc_deg != 0 && osc_deg != 2)) throw AlgebraError("degree-two part is not of oscillator form: " + symbol.mono_text(m));
    }
    nf.h2 = degree_range(symbol, 0, 2);
    nf.betas = extract_betas(nf.h2);
    for (std::size_t j = 0; j < nf.betas.size(); ++j)
        if (Field<S>::is_zero(nf.betas[j].coeff(nf.betas[j].unit())))
            throw AlgebraError("oscillator " + std::to_string(j + 1) + " has zero frequency at the well");

    Series<S> rho(symbol.layout_ptr(), symbol.nmax(), symbol.tmax());
    for (int N = 3; N < r; ++N) {
        Series<S> cur = exp_ad(rho, symbol);
        Homological<S> hs = homological_solve(project_degree(cur, N), nf.betas, res_tol);
        rho += hs.rho;
    }
    nf.generator = rho;
    nf.conjugated = exp_ad(rho, symbol);
    nf.kappa = degree_range(nf.conjugated, 3, r - 1);
    if constexpr (!Field<S>::exact) {
        // roundoff leaves tiny off-diagonal remains; anything sizeable is a real failure
        const double scale = std::max(1.0, symbol.max_abs());
        auto& terms = nf.kappa.mutable_terms();
        for (auto it = terms.begin(); it != terms.end();) {
            if (bnf_detail::split(L, it->first).diagonal) {
                ++it;
                continue;
            }
            if (Field<S>::magnitude(it->second) > 1e-8 * scale)
                throw AlgebraError("normal form left a non-diagonal term: " + nf.kappa.mono_text(it->first));
            it = terms.erase(it);
        }
    }
    nf.residual = degree_range(nf.conjugated, r, symbol.nmax());
    nf.entries = reorder_star(nf.kappa);
    return nf;
}

template <class S>
std::vector<TableEntry<S>> reorder_star(const Series<S>& kappa) {
    using F = Field<S>;
    const Layout& L = kappa.layout();
    const auto osc = oscillators(L);
    const int s = static_cast<int>(osc.size());
    const int ktau = L.tag == AlgebraTag::E1 ? L.k : 0;
    std::map<Mono, S> work(kappa.terms().begin(), kappa.terms().end());
    int maxpow = 0;
    for (const auto& [m, c] : work) {
        auto sp = bnf_detail::split(L, m);
        if (!sp.diagonal) throw AlgebraError("reorder_star: non-diagonal monomial " + kappa.mono_text(m));
        for (int j = 0; j < s; ++j) maxpow = std::max(maxpow, sp.a[j]);
    }
    const auto& tab = star_power_table(maxpow);
    std::map<std::tuple<std::vector<int>, std::vector<int>, int>, Series<S>> entries;

    auto total = [&](const Mono& m) {
        int t = 0;
        for (const auto& o : osc) t += m[o.a];
        return t;
    };
    while (!work.empty()) {
        auto lead = work.begin();
        for (auto it = work.begin(); it != work.end(); ++it)
            if (total(it->first) > total(lead->first)) lead = it;
        Mono m = lead->first;
        S c = lead->second;
        std::vector<int> alpha(s), atau(ktau);
        for (int j = 0; j < s; ++j) alpha[j] = m[osc[j].a];
        for (int i = 0; i < ktau; ++i) atau[i] = m[L.tau(i)];
        Mono base = m;
        for (const auto& o : osc) base[o.a] = base[o.b] = 0;
        for (int i = 0; i < ktau; ++i) base[L.tau(i)] = 0;
        int ell = base.back();
        base.back() = 0;
        auto key = std::make_tuple(alpha, atau, ell);
        auto eit = entries.find(key);
        if (eit == entries.end())
            eit = entries.emplace(key, Series<S>(kappa.layout_ptr(), kappa.nmax(), kappa.tmax())).first;
        eit->second.add(base, c);
        // subtract c * prod_j p_{alpha_j}(I_j) at this base/tau/param position
        std::vector<std::pair<Mono, S>> expansion{{m, c}};
        for (int j = 0; j < s; ++j) {
            std::vector<std::pair<Mono, S>> next;
            for (const auto& [mm, cc] : expansion)
                for (int i = 0; i <= alpha[j]; ++i) {
                    const Rational& pi = tab[alpha[j]][i];
                    if (sgn(pi) == 0) continue;
                    Mono n = mm;
                    n[osc[j].a] = n[osc[j].b] = static_cast<std::uint8_t>(alpha[j] - i);
                    n.back() = static_cast<std::uint8_t>(n.back() + i);
                    next.emplace_back(n, cc * F::from_rational(pi));
                }
            expansion.swap(next);
        }
        for (const auto& [n, v] : expansion) {
            auto [it, fresh] = work.try_emplace(n, -v);
            if (!fresh) {
                it->second -= v;
                if (F::is_zero(it->second)) work.erase(it);
            } else if (F::is_zero(it->second)) {
                work.erase(it);
            }
        }
    }
    std::vector<TableEntry<S>> out;
    for (auto& [key, poly] : entries) {
        if (poly.is_zero()) continue;
        out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), std::move(poly)});
    }
    return out;
}

template <class S>
Series<S> reconstruct(const std::vector<TableEntry<S>>& table, const LayoutPtr& layout, int nmax, int tmax) {
    using F = Field<S>;
    const Layout& L = *layout;
    const auto osc = oscillators(L);
    int maxpow = 0;
    for (const auto& e : table)
        for (int a : e.alpha) maxpow = std::max(maxpow, a);
    const auto& tab = star_power_table(maxpow);
    Series<S> out(layout, nmax, tmax);
    for (const auto& e : table) {
        for (const auto& [bm, c] : e.coeff.terms()) {
            std::vector<std::pair<Mono, S>> expansion;
            Mono m = bm;
            for (std::size_t i = 0; i < e.alpha_tau.size(); ++i) m[L.tau(i)] = static_cast<std::uint8_t>(e.alpha_tau[i]);
            m.back() = static_cast<std::uint8_t>(e.ell);
            expansion.emplace_back(m, c);
            for (std::size_t j = 0; j < osc.size(); ++j) {
                std::vector<std::pair<Mono, S>> next;
                for (const auto& [mm, cc] : expansion)
                    for (int i = 0; i <= e.alpha[j]; ++i) {
                        const Rational& pi = tab[e.alpha[j]][i];
                        if (sgn(pi) == 0) continue;
                        Mono n = mm;
                        n[osc[j].a] = n[osc[j].b] = static_cast<std::uint8_t>(e.alpha[j] - i);
                        n.back() = static_cast<std::uint8_t>(n.back() + i);
                        next.emplace_back(n, cc * F::from_rational(pi));
                    }
                expansion.swap(next);
            }
            for (const auto& [n, v] : expansion) out.add(n, v);
        }
    }
    return out;
}

template <class S>
Series<S> effective_symbol(const NormalFormTable<S>& table, const std::vector<int>& n) {
    using F = Field<S>;
    const Layout& L = *table.layout;
    const auto osc = oscillators(L);
    if (n.size() != osc.size()) throw std::invalid_argument("effective_symbol: one level index per oscillator");
    for (int v : n)
        if (v < 1) throw std::invalid_argument("effective_symbol: levels start at 1");
    LayoutPtr real = toggle_basis(L);
    const int nmax = table.input.nmax(), tmax = table.input.tmax();
    Series<S> out(real, nmax, tmax);
    auto emit = [&](const std::vector<TableEntry<S>>& entries) {
        for (const auto& e : entries) {
            S factor = F::one();
            int extra = 0;
            for (std::size_t j = 0; j < osc.size(); ++j)
                for (int p = 0; p < e.alpha[j]; ++p) {
                    factor *= F::from_rational(2 * n[j] - 1);
                    ++extra;
                }
            for (const auto& [bm, c] : e.coeff.terms()) {
                Mono m = bm;
                for (std::size_t i = 0; i < e.alpha_tau.size(); ++i) m[L.tau(i)] = static_cast<std::uint8_t>(e.alpha_tau[i]);
                m.back() = static_cast<std::uint8_t>(e.ell + extra);
                out.add(m, c * factor);
            }
        }
    };
    emit(reorder_star(table.h2));
    emit(table.entries);
    return out;
}

}  // namespace magwell
