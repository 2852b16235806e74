#pragma once

// Test-side oracles, written without reference to the library internals they check.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "magwell/series.hpp"

namespace oracle {

using magwell::Mono;
using magwell::Quad;
using magwell::Rational;
using magwell::Series;

// Small random rational in [-range, range] with denominator up to `den`.
inline Rational small_rational(std::mt19937_64& rng, int range = 3, int den = 4) {
    std::uniform_int_distribution<int> d(1, den), n(-range * den, range * den);
    Rational r(n(rng), d(rng));
    r.canonicalize();
    return r;
}

struct RandomShape {
    int terms = 8;
    int min_fiber = 0;      // smallest fiber degree (param counts 2)
    int max_base = -1;      // cap on the base degree of a term, -1 for the series limit
    int max_param = 1;
};

// Random admissible series with real rational coefficients.
template <class S>
Series<S> random_series(const magwell::LayoutPtr& L, int nmax, int tmax, std::mt19937_64& rng,
                        const RandomShape& shape = {}) {
    Series<S> out(L, nmax, tmax);
    const int nv = L->nvars();
    std::uniform_int_distribution<int> pick(0, nv - 1), pw(0, shape.max_param);
    int made = 0, guard = 0;
    while (made < shape.terms && guard++ < 100000) {
        Mono m = out.unit();
        m.back() = static_cast<std::uint8_t>(pw(rng));
        std::uniform_int_distribution<int> len(0, nmax + tmax);
        const int steps = len(rng);
        for (int i = 0; i < steps; ++i) ++m[pick(rng)];
        const int fd = out.fiber_degree(m), bd = out.base_degree(m);
        if (!out.admissible(m) || fd < shape.min_fiber) continue;
        if (shape.max_base >= 0 && bd > shape.max_base) continue;
        if (!magwell::Field<S>::is_zero(out.coeff(m))) continue;
        out.add(m, magwell::Field<S>::from_rational(small_rational(rng)));
        ++made;
    }
    return out;
}

// d/dx_v applied termwise.
template <class S>
Series<S> partial(const Series<S>& a, int v) {
    Series<S> out(a.layout_ptr(), a.nmax(), a.tmax());
    for (const auto& [m, c] : a.terms()) {
        if (m[v] == 0) continue;
        Mono e = m;
        --e[v];
        out.add(e, c * magwell::Field<S>::from_rational(Rational(m[v])));
    }
    return out;
}

template <class S>
Series<S> product(const Series<S>& a, const Series<S>& b) {
    Series<S> out(a.layout_ptr(), a.nmax(), a.tmax());
    for (const auto& [m1, c1] : a.terms())
        for (const auto& [m2, c2] : b.terms()) {
            Mono e = m1;
            for (std::size_t i = 0; i < e.size(); ++i) e[i] = static_cast<std::uint8_t>(e[i] + m2[i]);
            out.add(e, c1 * c2);
        }
    return out;
}

// Canonical bracket over position/momentum pairs (q, p), normalised so that {q, p} = -1,
// which is the convention of (i/hbar)[q, p] with [q, p] = i hbar.
template <class S>
Series<S> poisson(const Series<S>& f, const Series<S>& g, const std::vector<std::pair<int, int>>& qp) {
    Series<S> out(f.layout_ptr(), f.nmax(), f.tmax());
    for (auto [q, p] : qp) {
        out += product(partial(f, p), partial(g, q));
        out -= product(partial(f, q), partial(g, p));
    }
    return out;
}

// Matrix of the Weyl quantisation of x^m xi^n on the first `size` number states, with
// X = sqrt(hbar/2)(a + a^+), Xi = -i sqrt(hbar/2)(a - a^+). McCoy's formula
// W(x^m xi^n) = 2^-m sum_k C(m,k) X^k Xi^n X^(m-k) is evaluated in a padded basis.
inline Eigen::MatrixXcd weyl_monomial(int m, int n, double hbar, int size) {
    const int big = size + m + n + 2;
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(big, big);
    for (int i = 1; i < big; ++i) a(i - 1, i) = std::sqrt(static_cast<double>(i));
    const Eigen::MatrixXcd ad = a.adjoint();
    const double r = std::sqrt(hbar / 2);
    const Eigen::MatrixXcd X = r * (a + ad);
    const Eigen::MatrixXcd P = std::complex<double>(0, -r) * (a - ad);
    auto power = [&](const Eigen::MatrixXcd& A, int e) {
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(big, big);
        for (int i = 0; i < e; ++i) out = out * A;
        return out;
    };
    Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(big, big);
    const Eigen::MatrixXcd Pn = power(P, n);
    double binom = 1;
    for (int k = 0; k <= m; ++k) {
        W += binom * power(X, k) * Pn * power(X, m - k);
        binom = binom * (m - k) / (k + 1);
    }
    W /= std::pow(2.0, m);
    return W.topLeftCorner(size, size);
}

// Lowest eigenvalues of sum c * x^m xi^n.
inline std::vector<double> weyl_levels(const std::vector<std::tuple<int, int, double>>& terms, double hbar, int size,
                                       int count) {
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(size, size);
    for (auto [m, n, c] : terms) H += c * weyl_monomial(m, n, hbar, size);
    H = 0.5 * (H + H.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = es.eigenvalues()(i);
    return out;
}

}  // namespace oracle
