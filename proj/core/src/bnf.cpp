#include "magwell/bnf.hpp"

#include <map>

#include "magwell/expr.hpp"

namespace magwell {

namespace {

constexpr int kMaxStarPower = 24;

std::vector<std::vector<Rational>> build_star_powers() {
    // (|z|^2)^{*m} in the one-oscillator complex algebra; each power is homogeneous.
    LayoutPtr L = e1_layout(1, 0, true);
    const int nmax = 2 * kMaxStarPower;
    auto I = mul_pointwise(Series<Quad>::variable(L, nmax, 0, L->osc_a(0)),
                           Series<Quad>::variable(L, nmax, 0, L->osc_b(0)));
    std::vector<std::vector<Rational>> table{{Rational(1)}};
    Series<Quad> p = Series<Quad>::constant(L, nmax, 0, Quad(1L));
    for (int m = 1; m <= kMaxStarPower; ++m) {
        p = star(p, I);
        std::vector<Rational> row(m + 1);
        for (const auto& [mono, c] : p.terms()) {
            int a = mono[L->osc_a(0)], ell = mono.back();
            if (a != mono[L->osc_b(0)] || a + ell != m || c.has_radical() || !c.a.is_real())
                throw AlgebraError("unexpected term in a star power of |z|^2");
            row[ell] = c.a.re;
        }
        table.push_back(std::move(row));
    }
    return table;
}

}  // namespace

const std::vector<std::vector<Rational>>& star_power_table(int mmax) {
    static const std::vector<std::vector<Rational>> table = build_star_powers();
    if (mmax > kMaxStarPower) throw AlgebraError("star power beyond the supported order");
    return table;
}

Series<Quad> parse_symbol(const std::string& text, const LayoutPtr& layout, int nmax, int tmax) {
    const Layout& L = *layout;
    if (L.complex_basis) throw std::invalid_argument("symbols are read in the real basis");
    const int nv = L.nvars();
    std::vector<std::string> vars = L.names;
    vars.push_back(L.param);
    std::map<std::string, Poly> aliases;
    const auto osc = oscillators(L);
    for (std::size_t j = 0; j < osc.size(); ++j) {
        Poly a = Poly::variable(nv + 1, osc[j].a), b = Poly::variable(nv + 1, osc[j].b);
        aliases["I" + std::to_string(j + 1)] = a * a + b * b;
    }
    if (osc.size() == 1) {
        aliases["z2"] = aliases["I1"];
        aliases["z4"] = aliases["I1"] * aliases["I1"];
    }
    Poly p = parse_poly(text, vars, aliases);
    Series<Quad> out(layout, nmax, tmax);
    for (const auto& [e, c] : p.terms()) {
        Mono m(nv + 1);
        for (int i = 0; i <= nv; ++i) {
            if (e[i] > 255) throw std::invalid_argument("exponent too large in symbol");
            m[i] = static_cast<std::uint8_t>(e[i]);
        }
        out.add(m, Quad(c));
    }
    return out;
}

}  // namespace magwell
