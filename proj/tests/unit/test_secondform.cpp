#include <doctest.h>

#include "magwell/secondform.hpp"

using namespace magwell;

namespace {

SeriesF mono(const LayoutPtr& L, int n, int t, std::vector<std::pair<int, int>> vars, int hp, double c) {
    SeriesF r(L, n, t);
    Mono m = r.unit();
    for (auto [v, p] : vars) m[v] = static_cast<std::uint8_t>(p);
    m.back() = static_cast<std::uint8_t>(hp);
    r.add(m, cplx(c, 0.0));
    return r;
}

}  // namespace

TEST_CASE("toy field-line symbol reduces to a unit oscillator") {
    auto L = e1_layout(1, 1, false);
    const int n = 5, t = 2;
    SeriesF n1 = mono(L, n, t, {{L->tau(0), 2}}, 0, 1.0) + mono(L, n, t, {}, 1, 1.0) +
                 mono(L, n, t, {{L->t(0), 2}}, 1, 1.0);
    auto red = reduce_to_oscillator(n1, n, t);
    REQUIRE(red.nu0.size() == 1);
    CHECK(red.nu0[0] == doctest::Approx(1.0).epsilon(1e-12));
    auto L2 = red.series.layout_ptr();
    SeriesF expect = mono(L2, n, t, {}, 0, 1.0) + mono(L2, n, t, {{L2->t(0), 2}}, 0, 1.0) +
                     mono(L2, n, t, {{L2->tau(0), 2}}, 0, 1.0);
    CHECK((red.series - expect).max_abs() < 1e-12);
}

TEST_CASE("reduction recovers generalized eigenvalues for a quadratic symbol") {
    auto L = e1_layout(0, 2, false);
    const int n = 4, t = 1;
    // M = [[2, 0.5],[0.5, 1]], b = 3 + t^T K t with K = [[1, 0.2],[0.2, 3]]
    SeriesF n1 = mono(L, n, t, {{L->tau(0), 2}}, 0, 2.0) + mono(L, n, t, {{L->tau(0), 1}, {L->tau(1), 1}}, 0, 1.0) +
                 mono(L, n, t, {{L->tau(1), 2}}, 0, 1.0) + mono(L, n, t, {}, 1, 3.0) +
                 mono(L, n, t, {{L->t(0), 2}}, 1, 1.0) + mono(L, n, t, {{L->t(0), 1}, {L->t(1), 1}}, 1, 0.4) +
                 mono(L, n, t, {{L->t(1), 2}}, 1, 3.0);
    auto red = reduce_to_oscillator(n1, n, t);
    Eigen::MatrixXd M(2, 2), K(2, 2);
    M << 2, 0.5, 0.5, 1;
    K << 1, 0.2, 0.2, 3;
    Eigen::VectorXcd ev = (M * K).eigenvalues();
    std::vector<double> nu2{ev(0).real(), ev(1).real()};
    std::sort(nu2.rbegin(), nu2.rend());
    CHECK(red.nu0[0] * red.nu0[0] == doctest::Approx(nu2[0]).epsilon(1e-10));
    CHECK(red.nu0[1] * red.nu0[1] == doctest::Approx(nu2[1]).epsilon(1e-10));
    auto L2 = red.series.layout_ptr();
    for (int j = 0; j < 2; ++j) {
        Mono a = red.series.unit(), b = red.series.unit();
        a[L2->t(j)] = 2;
        b[L2->tau(j)] = 2;
        CHECK(red.series.coeff(a).real() == doctest::Approx(red.nu0[j]).epsilon(1e-10));
        CHECK(red.series.coeff(b).real() == doctest::Approx(red.nu0[j]).epsilon(1e-10));
    }
}

TEST_CASE("w-dependent frequencies stay diagonal after reduction") {
    auto L = e1_layout(1, 1, false);
    const int n = 5, t = 3;
    const int y = L->y(0), eta = L->eta(0), tt = L->t(0), tau = L->tau(0);
    // M = 1 + y/4, b = 1 + y^2 + eta^2 + y t + (1 + eta/3) t^2 + t^3/5
    SeriesF n1 = mono(L, n, t, {{tau, 2}}, 0, 1.0) + mono(L, n, t, {{tau, 2}, {y, 1}}, 0, 0.25) +
                 mono(L, n, t, {}, 1, 1.0) + mono(L, n, t, {{y, 2}}, 1, 1.0) + mono(L, n, t, {{eta, 2}}, 1, 1.0) +
                 mono(L, n, t, {{y, 1}, {tt, 1}}, 1, 1.0) + mono(L, n, t, {{tt, 2}}, 1, 1.0) +
                 mono(L, n, t, {{tt, 2}, {eta, 1}}, 1, 1.0 / 3) + mono(L, n, t, {{tt, 3}}, 1, 0.2);
    auto red = reduce_to_oscillator(n1, n, t);
    CHECK(red.dropped < 1e-10);
    auto table = second_birkhoff(red.series, 5);
    auto m1 = effective_m_symbol(table, {1});
    auto c = coefficients_at_origin(m1);
    REQUIRE(c.size() >= 2);
    CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c[1] == doctest::Approx(1.0).epsilon(1e-12));
}
