#include <doctest.h>

#include "magwell/bnf.hpp"
#include "oracles.hpp"

using namespace magwell;
using SQ = Series<Quad>;

namespace {

SQ var(const LayoutPtr& L, int n, int t, int idx, int p = 1) { return SQ::variable(L, n, t, idx, p); }

}  // namespace

TEST_CASE("canonical commutators") {
    auto L = e1_layout(1, 1, false);
    const int n = 6, t = 3;
    SQ x = var(L, n, t, L->osc_a(0)), xi = var(L, n, t, L->osc_b(0));
    SQ ih = SQ::param(L, n, t) * Field<Quad>::i();
    CHECK(star(x, xi) - star(xi, x) == ih);
    SQ tt = var(L, n, t, L->t(0)), tau = var(L, n, t, L->tau(0));
    CHECK(star(tt, tau) - star(tau, tt) == ih);
    SQ y = var(L, n, t, L->y(0)), eta = var(L, n, t, L->eta(0));
    CHECK(star(y, eta) - star(eta, y) == ih);
    CHECK(star(x, tau) == star(tau, x));
}

TEST_CASE("|z|^2 star |z|^2 in both bases") {
    for (bool cb : {false, true}) {
        auto Lr = e1_layout(1, 0, false);
        SQ x = var(Lr, 6, 0, Lr->osc_a(0)), xi = var(Lr, 6, 0, Lr->osc_b(0));
        SQ I = mul_pointwise(x, x) + mul_pointwise(xi, xi);
        if (cb) I = change_basis(I);
        SQ h2 = SQ::param(I.layout_ptr(), 6, 0, 2);
        CHECK(star(I, I) == mul_pointwise(I, I) - h2);
    }
}

TEST_CASE("basis change round trip and reality") {
    std::mt19937_64 rng(11);
    auto L = e1_layout(2, 1, false);
    for (int i = 0; i < 5; ++i) {
        SQ a = oracle::random_series<Quad>(L, 5, 2, rng);
        SQ c = change_basis(a);
        CHECK(c.layout().complex_basis);
        CHECK(change_basis(c) == a);
        CHECK(a.is_real());
    }
}

TEST_CASE("star product is associative and the bracket is a derivation") {
    std::mt19937_64 rng(3);
    auto L = e1_layout(1, 1, false);
    for (int i = 0; i < 6; ++i) {
        SQ a = oracle::random_series<Quad>(L, 6, 3, rng), b = oracle::random_series<Quad>(L, 6, 3, rng),
           c = oracle::random_series<Quad>(L, 6, 3, rng);
        CHECK(star(star(a, b), c) == star(a, star(b, c)));
    }
}

TEST_CASE("bracket with a quadratic equals the canonical bracket") {
    std::mt19937_64 rng(5);
    auto L = e1_layout(1, 1, false);
    SQ x = var(L, 6, 3, L->osc_a(0)), xi = var(L, 6, 3, L->osc_b(0));
    SQ I = mul_pointwise(x, x) + mul_pointwise(xi, xi);
    std::vector<std::pair<int, int>> qp{{L->osc_a(0), L->osc_b(0)}, {L->t(0), L->tau(0)}, {L->y(0), L->eta(0)}};
    for (int i = 0; i < 10; ++i) {
        SQ rho = oracle::random_series<Quad>(L, 6, 3, rng);
        CHECK(bracket(I, rho) == oracle::poisson(I, rho, qp));
    }
    CHECK(bracket(x, xi) == SQ::constant(L, 6, 3, Quad(-1L)));
}

TEST_CASE("truncation drops monomials outside the graded window") {
    auto L = e1_layout(1, 1, false);
    SQ x = var(L, 3, 1, L->osc_a(0));
    CHECK(mul_pointwise(mul_pointwise(x, x), mul_pointwise(x, x)).is_zero());
    SQ t = var(L, 3, 1, L->t(0), 5);
    CHECK(t.is_zero());
    CHECK(!var(L, 3, 1, L->t(0), 4).is_zero());
    CHECK(SQ::param(L, 3, 1, 2).is_zero());
}

TEST_CASE("exp_ad with a quadratic-free generator conjugates the oscillator") {
    auto L = e1_layout(1, 0, false);
    const int n = 6;
    SQ x = var(L, n, 0, L->osc_a(0)), xi = var(L, n, 0, L->osc_b(0));
    SQ I = mul_pointwise(x, x) + mul_pointwise(xi, xi);
    SQ g = mul_pointwise(mul_pointwise(x, x), x) * Quad(Rational(1, 3));
    SQ once = exp_ad(g, I);
    SQ back = exp_ad(-g, once);
    CHECK(degree_range(back - I, 0, n).is_zero());
}
