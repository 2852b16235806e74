#include "magwell/secondform.hpp"

#include <cmath>
#include <map>

namespace magwell {

namespace {

using Jet = SeriesF;
using BasePoly = std::map<Mono, double>;  // E1 monomials in (y, eta, t) only

BasePoly diff(const BasePoly& p, int var) {
    BasePoly out;
    for (const auto& [m, c] : p) {
        if (m[var] == 0) continue;
        Mono n = m;
        n[var] = static_cast<std::uint8_t>(n[var] - 1);
        out[n] += c * m[var];
    }
    return out;
}

double eval_at(const BasePoly& p, const Layout& L1, const Eigen::VectorXd& t) {
    double v = 0.0;
    for (const auto& [m, c] : p) {
        bool at_origin = true;
        for (int j = 0; j < 2 * L1.s; ++j)
            if (m[j]) at_origin = false;
        if (!at_origin) continue;
        double term = c;
        for (int i = 0; i < L1.k; ++i) term *= std::pow(t(i), m[L1.t(i)]);
        v += term;
    }
    return v;
}

class Substituter {
public:
    Substituter(const Layout& L1, LayoutPtr L2, int nmax, int tmax, std::vector<Jet> tsub)
        : L1_(L1), L2_(std::move(L2)), nmax_(nmax), tmax_(tmax), tsub_(std::move(tsub)) {}

    const Jet& power(int i, int p) {
        auto key = std::make_pair(i, p);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        Jet v = p == 0 ? Jet::constant(L2_, nmax_, tmax_, cplx(1.0, 0.0)) : mul_pointwise(power(i, p - 1), tsub_[i]);
        return cache_.emplace(key, std::move(v)).first->second;
    }

    Jet operator()(const BasePoly& p) {
        Jet out(L2_, nmax_, tmax_);
        for (const auto& [m, c] : p) {
            Jet w(L2_, nmax_, tmax_);
            Mono wm = w.unit();
            for (int j = 0; j < 2 * L1_.s; ++j) wm[j] = m[j];
            w.add(wm, cplx(c, 0.0));
            for (int i = 0; i < L1_.k && !w.is_zero(); ++i)
                if (m[L1_.t(i)]) w = mul_pointwise(w, power(i, m[L1_.t(i)]));
            out += w;
        }
        return out;
    }

private:
    const Layout& L1_;
    LayoutPtr L2_;
    int nmax_, tmax_;
    std::vector<Jet> tsub_;
    std::map<std::pair<int, int>, Jet> cache_;
};

double value0(const Jet& j) { return j.coeff(j.unit()).real(); }

// (1 + u)^p with u a jet vanishing at 0, times c^p.
Jet real_power(const Jet& x, double p) {
    double x0 = value0(x);
    Jet u = x * cplx(1.0 / x0, 0.0);
    u.mutable_terms().erase(u.unit());
    Jet out = Jet::constant(x.layout_ptr(), x.nmax(), x.tmax(), cplx(std::pow(x0, p), 0.0));
    Jet term = out;
    double coef = 1.0;
    for (int m = 1; m <= x.nmax() + x.tmax() + 1; ++m) {
        coef *= (p - (m - 1)) / m;
        if (m == 1)
            term = u;
        else
            term = mul_pointwise(term, u);
        if (term.is_zero()) break;
        out += term * cplx(coef * std::pow(x0, p), 0.0);
    }
    return out;
}

using JetMatrix = std::vector<std::vector<Jet>>;

JetMatrix matmul(const JetMatrix& a, const JetMatrix& b) {
    const std::size_t n = a.size(), m = b[0].size(), q = b.size();
    JetMatrix c(n, std::vector<Jet>(m, Jet(a[0][0].layout_ptr(), a[0][0].nmax(), a[0][0].tmax())));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t l = 0; l < q; ++l) c[i][j] += mul_pointwise(a[i][l], b[l][j]);
    return c;
}

Eigen::MatrixXd at_origin(const JetMatrix& a) {
    Eigen::MatrixXd r(a.size(), a[0].size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[0].size(); ++j) r(i, j) = value0(a[i][j]);
    return r;
}

JetMatrix constant_matrix(const Eigen::MatrixXd& m, const LayoutPtr& L, int nmax, int tmax) {
    JetMatrix r(m.rows(), std::vector<Jet>(m.cols(), Jet(L, nmax, tmax)));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) r[i][j] = Jet::constant(L, nmax, tmax, cplx(m(i, j), 0.0));
    return r;
}

JetMatrix inverse(const JetMatrix& a) {
    const int order = a[0][0].nmax() + a[0][0].tmax();
    const auto n = static_cast<Eigen::Index>(a.size());
    const auto& L = a[0][0].layout_ptr();
    JetMatrix x = constant_matrix(at_origin(a).inverse(), L, a[0][0].nmax(), a[0][0].tmax());
    JetMatrix two = constant_matrix(2.0 * Eigen::MatrixXd::Identity(n, n), L, a[0][0].nmax(), a[0][0].tmax());
    for (int it = 0, reach = 1; reach <= 2 * order + 2; ++it, reach *= 2) {
        JetMatrix ax = matmul(a, x);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) ax[i][j] = two[i][j] - ax[i][j];
        x = matmul(x, ax);
    }
    return x;
}

void chop(Jet& j, double tol) {
    std::erase_if(j.mutable_terms(), [tol](const auto& kv) { return std::abs(kv.second) < tol; });
}

}  // namespace

OscillatorReduction reduce_to_oscillator(const SeriesF& n1, int nmax, int tmax) {
    const Layout& L1 = n1.layout();
    if (L1.tag != AlgebraTag::E1 || L1.complex_basis) throw AlgebraError("reduce_to_oscillator expects a real E1 symbol");
    const int s = L1.s, k = L1.k;
    LayoutPtr L2 = e2_layout(s, k, false);

    BasePoly bhat;
    std::vector<std::vector<BasePoly>> Mpoly(k, std::vector<BasePoly>(k));
    std::map<std::pair<std::vector<int>, int>, BasePoly> groups;  // (tau exps, hbar power) -> base poly
    for (const auto& [m, c] : n1.terms()) {
        for (int j = 0; j < s; ++j)
            if (m[L1.osc_a(j)] || m[L1.osc_b(j)]) throw AlgebraError("N1 still contains oscillator variables");
        if (std::abs(c.imag()) > 1e-12 * std::max(1.0, std::abs(c))) throw AlgebraError("N1 must be real");
        std::vector<int> te(k);
        int deg = 2 * m.back();
        for (int i = 0; i < k; ++i) deg += te[i] = m[L1.tau(i)];
        if (deg < 2) throw AlgebraError("N1 term of degree below two: " + n1.mono_text(m));
        Mono base = m;
        for (int i = 0; i < k; ++i) base[L1.tau(i)] = 0;
        base.back() = 0;
        groups[{te, m.back()}][base] += c.real();
        if (deg != 2) continue;
        if (m.back() == 1) {
            bhat[base] += c.real();
        } else {
            int first = -1, second = -1;
            for (int i = 0; i < k; ++i)
                for (int r = 0; r < te[i]; ++r) (first < 0 ? first : second) = i;
            if (first == second) {
                Mpoly[first][first][base] += c.real();
            } else {
                Mpoly[first][second][base] += 0.5 * c.real();
                Mpoly[second][first][base] += 0.5 * c.real();
            }
        }
    }

    OscillatorReduction out;
    const double scale = std::max(1.0, n1.max_abs());

    // minimiser of t -> b(0, t), then its jet in w by chord Newton
    out.s0 = Eigen::VectorXd::Zero(k);
    std::vector<BasePoly> grad(k);
    std::vector<std::vector<BasePoly>> hess(k, std::vector<BasePoly>(k));
    for (int i = 0; i < k; ++i) grad[i] = diff(bhat, L1.t(i));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) hess[i][j] = diff(grad[i], L1.t(j));
    auto hess_at = [&](const Eigen::VectorXd& t) {
        Eigen::MatrixXd H(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) H(i, j) = eval_at(hess[i][j], L1, t);
        return H;
    };
    for (int it = 0; it < 100 && k > 0; ++it) {
        Eigen::VectorXd g(k);
        for (int i = 0; i < k; ++i) g(i) = eval_at(grad[i], L1, out.s0);
        if (g.norm() < 1e-14 * scale) break;
        out.s0 -= hess_at(out.s0).ldlt().solve(g);
        if (it == 99) throw ConvergenceError("no critical point of b(0, t) found");
    }
    Eigen::MatrixXd H0 = hess_at(out.s0);
    if (k > 0 && H0.llt().info() != Eigen::Success) throw AssumptionError(1, "t -> b(0,t) has no non-degenerate minimum");

    const int order = nmax + tmax;
    std::vector<Jet> sj(k, Jet(L2, nmax, tmax));
    for (int i = 0; i < k; ++i) sj[i] = Jet::constant(L2, nmax, tmax, cplx(out.s0(i), 0.0));
    Eigen::MatrixXd H0inv = k > 0 ? Eigen::MatrixXd(H0.inverse()) : Eigen::MatrixXd();
    for (int it = 0; it <= order + 1 && k > 0; ++it) {
        Substituter sub(L1, L2, nmax, tmax, sj);
        std::vector<Jet> F;
        for (int i = 0; i < k; ++i) F.push_back(sub(grad[i]));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) sj[i] -= F[j] * cplx(H0inv(i, j), 0.0);
    }
    out.s_jet = sj;

    Substituter on_s(L1, L2, nmax, tmax, sj);
    out.n0 = on_s(bhat);
    if (k == 0) {
        Substituter plain(L1, L2, nmax, tmax, {});
        out.series = Jet(L2, nmax, tmax);
        for (const auto& [key, poly] : groups) {
            Jet piece = plain(poly);
            out.series += shift_param(piece, 2 * key.second - 2, nmax, tmax);
        }
        return out;
    }

    JetMatrix Kt(k, std::vector<Jet>(k, Jet(L2, nmax, tmax))), Ms = Kt;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            Kt[i][j] = on_s(hess[i][j]) * cplx(0.5, 0.0);
            Ms[i][j] = on_s(Mpoly[i][j]);
        }
    out.M0 = at_origin(Ms);
    out.Kt0 = at_origin(Kt);
    CoReduction cr = co_reduce(out.M0, out.Kt0);
    out.P0 = cr.P;
    for (int j = 0; j < k; ++j) out.nu0.push_back(cr.nus(j));
    for (int j = 1; j < k; ++j)
        if (out.nu0[j - 1] - out.nu0[j] <= 1e-6 * out.nu0[j - 1])
            throw AssumptionError(4, "field-line frequencies coincide at the well");
    JetMatrix Minv = inverse(Ms);
    Eigen::MatrixXd M0inv = out.M0.inverse();

    JetMatrix Q(k, std::vector<Jet>(k, Jet(L2, nmax, tmax))), R = Q;
    for (int j = 0; j < k; ++j) {
        const double lam0 = cr.nus(j) * cr.nus(j);
        Eigen::VectorXd p0 = cr.P.col(j);
        Eigen::MatrixXd J0 = Eigen::MatrixXd::Zero(k + 1, k + 1);
        J0.topLeftCorner(k, k) = out.Kt0 - lam0 * M0inv;
        J0.topRightCorner(k, 1) = -M0inv * p0;
        J0.bottomLeftCorner(1, k) = (M0inv * p0).transpose();
        Eigen::MatrixXd J0inv = J0.inverse();
        JetMatrix p(k, std::vector<Jet>(1, Jet(L2, nmax, tmax)));
        for (int i = 0; i < k; ++i) p[i][0] = Jet::constant(L2, nmax, tmax, cplx(p0(i), 0.0));
        Jet lam = Jet::constant(L2, nmax, tmax, cplx(lam0, 0.0));
        for (int it = 0; it <= order + 1; ++it) {
            JetMatrix kp = matmul(Kt, p), mp = matmul(Minv, p);
            std::vector<Jet> F(k + 1, Jet(L2, nmax, tmax));
            for (int i = 0; i < k; ++i) F[i] = kp[i][0] - mul_pointwise(lam, mp[i][0]);
            for (int i = 0; i < k; ++i) F[k] += mul_pointwise(p[i][0], mp[i][0]);
            F[k] -= Jet::constant(L2, nmax, tmax, cplx(1.0, 0.0));
            F[k] *= cplx(0.5, 0.0);
            for (int a = 0; a < k; ++a)
                for (int b = 0; b <= k; ++b) p[a][0] -= F[b] * cplx(J0inv(a, b), 0.0);
            for (int b = 0; b <= k; ++b) lam -= F[b] * cplx(J0inv(k, b), 0.0);
        }
        out.nus.push_back(real_power(lam, 0.5));
        Jet qpow = real_power(lam, -0.25), rpow = real_power(lam, 0.25);
        JetMatrix mp = matmul(Minv, p);
        for (int i = 0; i < k; ++i) {
            Q[i][j] = mul_pointwise(p[i][0], qpow);
            R[i][j] = mul_pointwise(mp[i][0], rpow);
        }
    }

    std::vector<Jet> tsub(k, Jet(L2, nmax, tmax)), tausub(k, Jet(L2, nmax, tmax));
    for (int i = 0; i < k; ++i) {
        tsub[i] = sj[i];
        for (int l = 0; l < k; ++l) {
            tsub[i] += mul_pointwise(Q[i][l], Jet::variable(L2, nmax, tmax, L2->t(l)));
            tausub[i] += mul_pointwise(R[i][l], Jet::variable(L2, nmax, tmax, L2->tau(l)));
        }
    }
    Substituter full(L1, L2, nmax, tmax, tsub);
    Substituter taus(L1, L2, nmax, tmax, tausub);
    Jet series(L2, nmax, tmax);
    for (const auto& [key, poly] : groups) {
        const auto& [te, ell] = key;
        Jet piece = full(poly);
        int tdeg = 0;
        for (int i = 0; i < k; ++i) {
            if (te[i]) piece = mul_pointwise(piece, taus.power(i, te[i]));
            tdeg += te[i];
        }
        series += shift_param(piece, tdeg + 2 * ell - 2, nmax, tmax);
    }

    // the exact reduction has no degree-one part and a diagonal quadratic part; remove roundoff
    Jet cz = change_basis(series);
    const auto osc = oscillators(cz.layout());
    auto& terms = cz.mutable_terms();
    for (auto it = terms.begin(); it != terms.end();) {
        const int D = cz.fiber_degree(it->first);
        bool spurious = D == 1;
        if (D == 2) {
            for (const auto& o : osc)
                if (it->first[o.a] != it->first[o.b]) spurious = true;
        }
        if (!spurious) {
            ++it;
            continue;
        }
        double mag = std::abs(it->second);
        if (mag > 1e-8 * scale)
            throw AlgebraError("oscillator reduction left a non-oscillator term " + cz.mono_text(it->first));
        out.dropped = std::max(out.dropped, mag);
        it = terms.erase(it);
    }
    out.series = change_basis(cz);
    chop(out.series, 1e-15 * scale);
    return out;
}

SeriesF quadratic_model(const WellReport& well, const QuadData& quad, int s, int k, int nmax, int tmax) {
    LayoutPtr L = e1_layout(s, k, false);
    SeriesF n1(L, nmax, tmax);
    Eigen::MatrixXd Hb = Eigen::MatrixXd::Zero(2 * s + k, 2 * s + k);
    Hb.topLeftCorner(2 * s, 2 * s) = quad.Hw;
    if (k > 0) {
        Hb.topRightCorner(2 * s, k) = quad.cross;
        Hb.bottomLeftCorner(k, 2 * s) = quad.cross.transpose();
        Hb.bottomRightCorner(k, k) = 2.0 * quad.Kt;
    }
    Mono m = n1.unit();
    m.back() = 1;
    n1.add(m, cplx(well.b0, 0.0));
    for (int a = 0; a < 2 * s + k; ++a)
        for (int b = a; b < 2 * s + k; ++b) {
            Mono q = m;
            q[a]++;
            q[b]++;
            n1.add(q, cplx(a == b ? 0.5 * Hb(a, a) : Hb(a, b), 0.0));
        }
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) {
            Mono q = n1.unit();
            q[L->tau(i)]++;
            q[L->tau(j)]++;
            n1.add(q, cplx(i == j ? quad.M0(i, i) : 2.0 * quad.M0(i, j), 0.0));
        }
    return n1;
}

std::vector<double> coefficients_at_origin(const SeriesF& m) {
    std::vector<double> out;
    for (const auto& [mono, c] : m.terms()) {
        bool origin = true;
        for (int i = 0; i < m.layout().nvars(); ++i)
            if (mono[i]) origin = false;
        if (!origin) continue;
        if (out.size() <= mono.back()) out.resize(mono.back() + 1, 0.0);
        out[mono.back()] += c.real();
    }
    return out;
}

ConstantTerm constant_term(const SeriesF& m1) {
    ConstantTerm ct;
    const Layout& L = m1.layout();
    const int s = L.s, dim = 2 * s;
    auto coeff = [&](std::vector<int> at, int hp) {
        Mono m = m1.unit();
        for (int v : at) m[v]++;
        m[L.nvars()] = static_cast<std::uint8_t>(hp);
        return m1.coeff(m).real();
    };
    ct.b0 = coeff({}, 0);
    ct.nu0 = coeff({}, 1);
    ct.schur = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd g(dim), g0(dim);
    for (int a = 0; a < dim; ++a) {
        g(a) = coeff({a}, 1);
        g0(a) = coeff({a}, 0);
        for (int b = 0; b < dim; ++b) ct.schur(a, b) = a == b ? 2.0 * coeff({a, a}, 0) : coeff({a, b}, 0);
    }
    if (g0.norm() > 1e-8 * std::max(1.0, std::abs(ct.b0))) {
        ct.note = "b(w, s(w)) is not critical at w = 0";
        return ct;
    }
    if (dim > 0 && ct.schur.llt().info() != Eigen::Success) {
        ct.note = "b(w, s(w)) has no non-degenerate minimum at w = 0";
        return ct;
    }
    ct.c0 = coeff({}, 2) - (dim > 0 ? 0.5 * g.dot(ct.schur.llt().solve(g)) : 0.0);
    ct.available = true;
    return ct;
}

}  // namespace magwell
