#include "magwell/layout.hpp"

#include <stdexcept>

namespace magwell {

int Layout::index(const std::string& name) const {
    for (int i = 0; i < nvars(); ++i)
        if (names[i] == name) return i;
    throw std::invalid_argument("unknown variable '" + name + "'");
}

bool Layout::same_shape(const Layout& o) const {
    return tag == o.tag && complex_basis == o.complex_basis && s == o.s && k == o.k;
}

namespace {

const CQ kTwoI(Rational(0), Rational(2));

void add_var(Layout& l, const std::string& name, VarKind kind) {
    l.names.push_back(name);
    l.kinds.push_back(kind);
}

}  // namespace

LayoutPtr e1_layout(int s, int k, bool complex_basis) {
    auto l = std::make_shared<Layout>();
    l->tag = AlgebraTag::E1;
    l->complex_basis = complex_basis;
    l->s = s;
    l->k = k;
    l->param = "hbar";
    for (int j = 1; j <= s; ++j) add_var(*l, "y" + std::to_string(j), VarKind::Base);
    for (int j = 1; j <= s; ++j) add_var(*l, "eta" + std::to_string(j), VarKind::Base);
    for (int i = 1; i <= k; ++i) add_var(*l, "t" + std::to_string(i), VarKind::Base);
    for (int i = 1; i <= k; ++i) add_var(*l, "tau" + std::to_string(i), VarKind::Fiber);
    for (int j = 1; j <= s; ++j) add_var(*l, (complex_basis ? "z" : "x") + std::to_string(j), VarKind::Fiber);
    for (int j = 1; j <= s; ++j) add_var(*l, (complex_basis ? "zb" : "xi") + std::to_string(j), VarKind::Fiber);
    for (int j = 0; j < s; ++j) l->pairs.push_back({l->y(j), l->eta(j), CQ(1L), 1});
    for (int i = 0; i < k; ++i) l->pairs.push_back({l->t(i), l->tau(i), CQ(1L), 1});
    for (int j = 0; j < s; ++j) {
        if (complex_basis)
            l->pairs.push_back({l->osc_b(j), l->osc_a(j), kTwoI, 1});
        else
            l->pairs.push_back({l->osc_a(j), l->osc_b(j), CQ(1L), 1});
    }
    return l;
}

LayoutPtr e2_layout(int s, int k, bool complex_basis) {
    auto l = std::make_shared<Layout>();
    l->tag = AlgebraTag::E2;
    l->complex_basis = complex_basis;
    l->s = s;
    l->k = k;
    l->param = "h";
    for (int j = 1; j <= s; ++j) add_var(*l, "y" + std::to_string(j), VarKind::Base);
    for (int j = 1; j <= s; ++j) add_var(*l, "eta" + std::to_string(j), VarKind::Base);
    for (int i = 1; i <= k; ++i) add_var(*l, (complex_basis ? "v" : "t") + std::to_string(i), VarKind::Fiber);
    for (int i = 1; i <= k; ++i) add_var(*l, (complex_basis ? "vb" : "tt") + std::to_string(i), VarKind::Fiber);
    // base contractions carry hbar = h^2
    for (int j = 0; j < s; ++j) l->pairs.push_back({l->y(j), l->eta(j), CQ(1L), 2});
    for (int i = 0; i < k; ++i) {
        if (complex_basis)
            l->pairs.push_back({l->tau(i), l->t(i), kTwoI, 1});
        else
            l->pairs.push_back({l->t(i), l->tau(i), CQ(1L), 1});
    }
    return l;
}

LayoutPtr toggle_basis(const Layout& l) {
    return l.tag == AlgebraTag::E1 ? e1_layout(l.s, l.k, !l.complex_basis) : e2_layout(l.s, l.k, !l.complex_basis);
}

std::vector<OscPair> oscillators(const Layout& l) {
    std::vector<OscPair> out;
    if (l.tag == AlgebraTag::E1)
        for (int j = 0; j < l.s; ++j) out.push_back({l.osc_a(j), l.osc_b(j)});
    else
        for (int i = 0; i < l.k; ++i) out.push_back({l.t(i), l.tau(i)});
    return out;
}

}  // namespace magwell
