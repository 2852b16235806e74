#pragma once

#include <algorithm>
#include <climits>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "magwell/errors.hpp"
#include "magwell/exact.hpp"
#include "magwell/layout.hpp"

namespace magwell {

// Exponents of every layout variable followed by the power of the semiclassical parameter.
using Mono = std::vector<std::uint8_t>;

// Truncated graded formal series. A monomial is kept iff its fiber degree D satisfies
// D <= nmax and base_degree + D <= nmax + tmax; both conditions define two-sided ideals
// for the star product, so the truncated algebra stays associative.
template <class S>
class Series {
public:
    using F = Field<S>;

    Series() = default;
    Series(LayoutPtr layout, int nmax, int tmax) : layout_(std::move(layout)), nmax_(nmax), tmax_(tmax) {}

    const Layout& layout() const { return *layout_; }
    const LayoutPtr& layout_ptr() const { return layout_; }
    int nmax() const { return nmax_; }
    int tmax() const { return tmax_; }
    const std::map<Mono, S>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }

    Mono unit() const { return Mono(layout_->nvars() + 1, 0); }

    int fiber_degree(const Mono& m) const {
        int d = 2 * m.back();
        for (int i = 0; i < layout_->nvars(); ++i)
            if (layout_->kinds[i] == VarKind::Fiber) d += m[i];
        return d;
    }
    int base_degree(const Mono& m) const {
        int d = 0;
        for (int i = 0; i < layout_->nvars(); ++i)
            if (layout_->kinds[i] == VarKind::Base) d += m[i];
        return d;
    }
    bool admissible(const Mono& m) const {
        int D = fiber_degree(m);
        return D <= nmax_ && base_degree(m) + D <= nmax_ + tmax_;
    }

    void add(const Mono& m, const S& c) {
        if (F::is_zero(c) || !admissible(m)) return;
        auto [it, fresh] = terms_.try_emplace(m, c);
        if (!fresh) {
            it->second += c;
            if (F::is_zero(it->second)) terms_.erase(it);
        }
    }
    // Accumulate without the zero check; call prune() afterwards.
    void add_raw(const Mono& m, const S& c) {
        auto [it, fresh] = terms_.try_emplace(m, c);
        if (!fresh) it->second += c;
    }
    void prune() { std::erase_if(terms_, [](const auto& kv) { return F::is_zero(kv.second); }); }

    S coeff(const Mono& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? F::zero() : it->second;
    }

    static Series constant(LayoutPtr l, int nmax, int tmax, const S& c) {
        Series r(l, nmax, tmax);
        r.add(r.unit(), c);
        return r;
    }
    static Series variable(LayoutPtr l, int nmax, int tmax, int index, int power = 1) {
        Series r(l, nmax, tmax);
        Mono m = r.unit();
        m[index] = static_cast<std::uint8_t>(power);
        r.add(m, F::one());
        return r;
    }
    static Series variable(LayoutPtr l, int nmax, int tmax, const std::string& name, int power = 1) {
        int idx = l->index(name);
        return variable(l, nmax, tmax, idx, power);
    }
    static Series param(LayoutPtr l, int nmax, int tmax, int power = 1) {
        Series r(l, nmax, tmax);
        Mono m = r.unit();
        m.back() = static_cast<std::uint8_t>(power);
        r.add(m, F::one());
        return r;
    }

    Series& operator+=(const Series& o) {
        check(o);
        for (const auto& [m, c] : o.terms_) add(m, c);
        return *this;
    }
    Series& operator-=(const Series& o) {
        check(o);
        for (const auto& [m, c] : o.terms_) add(m, -c);
        return *this;
    }
    Series& operator*=(const S& c) {
        if (F::is_zero(c)) {
            terms_.clear();
            return *this;
        }
        for (auto& [m, v] : terms_) v *= c;
        return *this;
    }
    Series operator-() const {
        Series r = *this;
        for (auto& [m, v] : r.terms_) v = -v;
        return r;
    }
    friend Series operator+(Series a, const Series& b) { return a += b; }
    friend Series operator-(Series a, const Series& b) { return a -= b; }
    friend Series operator*(Series a, const S& c) { return a *= c; }
    friend Series operator*(const S& c, Series a) { return a *= c; }
    friend bool operator==(const Series& a, const Series& b) { return (a - b).is_zero(); }

    // Same terms under different caps (terms outside the new caps are dropped).
    Series truncated(int nmax, int tmax) const {
        Series r(layout_, nmax, tmax);
        for (const auto& [m, c] : terms_) r.add(m, c);
        return r;
    }

    void check(const Series& o) const {
        if (!layout_ || !o.layout_) throw AlgebraError("series without layout");
        if (layout_ != o.layout_ && !layout_->same_shape(*o.layout_))
            throw AlgebraError("algebra mismatch between series");
        if (nmax_ != o.nmax_ || tmax_ != o.tmax_) throw AlgebraError("truncation mismatch between series");
    }

    bool is_real() const {
        for (const auto& [m, c] : terms_)
            if (!F::is_real(c)) return false;
        return true;
    }

    double max_abs() const {
        double r = 0.0;
        for (const auto& [m, c] : terms_) r = std::max(r, F::magnitude(c));
        return r;
    }

    std::string mono_text(const Mono& m) const {
        std::string s;
        for (int i = 0; i <= layout_->nvars(); ++i) {
            if (m[i] == 0) continue;
            if (!s.empty()) s += "*";
            s += i < layout_->nvars() ? layout_->names[i] : layout_->param;
            if (m[i] > 1) s += "^" + std::to_string(m[i]);
        }
        return s.empty() ? "1" : s;
    }

    // Canonical text: one term per line, ordered by degree then by exponent vector.
    std::string to_text() const {
        std::vector<std::pair<int, const Mono*>> order;
        for (const auto& [m, c] : terms_) order.emplace_back(fiber_degree(m), &m);
        std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        std::ostringstream os;
        for (const auto& [d, m] : order) os << "[" << d << "] " << F::str(terms_.at(*m)) << " " << mono_text(*m) << "\n";
        return os.str();
    }

    std::map<Mono, S>& mutable_terms() { return terms_; }

private:
    LayoutPtr layout_;
    int nmax_ = 0;
    int tmax_ = 0;
    std::map<Mono, S> terms_;
};

namespace detail {

inline const Rational& factorial(int n) {
    static const std::vector<Rational> table = [] {
        std::vector<Rational> t{Rational(1)};
        for (long i = 1; i <= 64; ++i) t.push_back(t.back() * i);
        return t;
    }();
    return table.at(n);
}

inline long falling(int n, int k) {
    long r = 1;
    for (int i = 0; i < k; ++i) r *= (n - i);
    return r;
}

// c/(2i) written as rho * i^sigma with rho rational; holds for c = 1 and c = 2i.
struct PairFactor {
    Rational rho;
    int sigma;
};

inline PairFactor pair_factor(const CQ& c) {
    CQ f = c / CQ(Rational(0), Rational(2));
    if (f.is_real()) return {f.re, 0};
    if (sgn(f.re) == 0) return {f.im, 1};
    throw AlgebraError("pair coefficient must make c/(2i) real or imaginary");
}

inline CQ i_power(int sigma) {
    switch (((sigma % 4) + 4) % 4) {
        case 0: return CQ(1L);
        case 1: return CQ(Rational(0), Rational(1));
        case 2: return CQ(-1L);
        default: return CQ(Rational(0), Rational(-1));
    }
}

}  // namespace detail

// Moyal expansion sum_K (eps/2i)^K box^K / K! with per-pair eps powers, truncated to (ncap, tcap).
// With odd_only, only odd K are kept (half the commutator).
template <class S>
Series<S> star_product(const Series<S>& a, const Series<S>& b, int ncap, int tcap, bool odd_only = false) {
    a.check(b);
    using F = Field<S>;
    const Layout& L = a.layout();
    const int P = static_cast<int>(L.pairs.size());
    const int nv = L.nvars();
    Series<S> out(a.layout_ptr(), ncap, tcap);

    std::vector<detail::PairFactor> fac;
    std::vector<int> dD(P), dW(P);
    for (const auto& pr : L.pairs) {
        fac.push_back(detail::pair_factor(pr.coeff));
        int nf = (L.kinds[pr.q] == VarKind::Fiber) + (L.kinds[pr.p] == VarKind::Fiber);
        dD[fac.size() - 1] = 2 * pr.eps_power - nf;
        dW[fac.size() - 1] = 2 * pr.eps_power - 2;
    }

    struct Term {
        const Mono* m;
        const S* c;
        int D, W;
    };
    auto collect = [&](const Series<S>& s) {
        std::vector<Term> v;
        for (const auto& [m, c] : s.terms()) {
            int D = s.fiber_degree(m);
            v.push_back({&m, &c, D, D + s.base_degree(m)});
        }
        return v;
    };
    auto ta = collect(a), tb = collect(b);

    Mono e(nv + 1);
    const Mono* m1 = nullptr;
    const Mono* m2 = nullptr;
    S c12;
    std::vector<Rational> rstack(P + 1);
    std::vector<int> sigstack(P + 1), kstack(P + 1);

    std::function<void(int, int, int)> rec = [&](int p, int D, int W) {
        if (p == P) {
            if (odd_only && kstack[P] % 2 == 0) return;
            CQ f = detail::i_power(sigstack[P]);
            f.re *= rstack[P];
            f.im *= rstack[P];
            out.add_raw(e, c12 * F::from_cq(f));
            return;
        }
        const auto& pr = L.pairs[p];
        const int P1 = (*m1)[pr.p], Q1 = (*m1)[pr.q], P2 = (*m2)[pr.p], Q2 = (*m2)[pr.q];
        const int amax = std::min(P1, Q2), bmax = std::min(Q1, P2);
        const std::uint8_t ep = e[pr.p], eq = e[pr.q], el = e.back();
        for (int aa = 0; aa <= amax; ++aa) {
            for (int bb = 0; bb <= bmax; ++bb) {
                int kk = aa + bb;
                int nD = D + dD[p] * kk, nW = W + dW[p] * kk;
                if (nD > ncap || nW > ncap + tcap) break;
                if (kk == 0) {
                    rstack[p + 1] = rstack[p];
                } else {
                    Rational r = rstack[p] * detail::falling(P1, aa) * detail::falling(Q1, bb) *
                                 detail::falling(Q2, aa) * detail::falling(P2, bb);
                    r /= detail::factorial(aa) * detail::factorial(bb);
                    for (int i = 0; i < kk; ++i) r *= fac[p].rho;
                    if (bb % 2) r = -r;
                    rstack[p + 1] = r;
                }
                sigstack[p + 1] = sigstack[p] + fac[p].sigma * kk;
                kstack[p + 1] = kstack[p] + kk;
                e[pr.p] = static_cast<std::uint8_t>(ep - kk);
                e[pr.q] = static_cast<std::uint8_t>(eq - kk);
                e.back() = static_cast<std::uint8_t>(el + pr.eps_power * kk);
                rec(p + 1, nD, nW);
            }
            if (D + dD[p] * aa > ncap) break;
        }
        e[pr.p] = ep;
        e[pr.q] = eq;
        e.back() = el;
    };

    for (const auto& x : ta) {
        for (const auto& y : tb) {
            int D = x.D + y.D, W = x.W + y.W;
            if (D > ncap || W > ncap + tcap) continue;
            m1 = x.m;
            m2 = y.m;
            for (int i = 0; i <= nv; ++i) e[i] = static_cast<std::uint8_t>((*m1)[i] + (*m2)[i]);
            c12 = *x.c * *y.c;
            rstack[0] = 1;
            sigstack[0] = 0;
            kstack[0] = 0;
            rec(0, D, W);
        }
    }
    out.prune();
    return out;
}

template <class S>
Series<S> star(const Series<S>& a, const Series<S>& b) {
    return star_product(a, b, a.nmax(), a.tmax());
}

// Pointwise (commutative) product under the same truncation.
template <class S>
Series<S> mul_pointwise(const Series<S>& a, const Series<S>& b) {
    a.check(b);
    Series<S> out(a.layout_ptr(), a.nmax(), a.tmax());
    Mono e = out.unit();
    for (const auto& [m1, c1] : a.terms())
        for (const auto& [m2, c2] : b.terms()) {
            for (std::size_t i = 0; i < e.size(); ++i) e[i] = static_cast<std::uint8_t>(m1[i] + m2[i]);
            if (out.admissible(e)) out.add_raw(e, c1 * c2);
        }
    out.prune();
    return out;
}

// Multiply by the semiclassical parameter to the given (possibly negative) power.
template <class S>
Series<S> shift_param(const Series<S>& a, int by, int nmax, int tmax) {
    Series<S> out(a.layout_ptr(), nmax, tmax);
    for (const auto& [m, c] : a.terms()) {
        int l = m.back() + by;
        if (l < 0) throw AlgebraError("negative power of the semiclassical parameter");
        Mono n = m;
        n.back() = static_cast<std::uint8_t>(l);
        out.add(n, c);
    }
    return out;
}

// (i/eps)[a, b] with eps the algebra's semiclassical parameter.
template <class S>
Series<S> bracket(const Series<S>& a, const Series<S>& b) {
    using F = Field<S>;
    Series<S> half = star_product(a, b, a.nmax() + 2, a.tmax(), true);
    Series<S> r = shift_param(half, -1, a.nmax(), a.tmax());
    r *= F::i() * F::from_rational(2);
    return r;
}

template <class S>
int valuation(const Series<S>& a) {
    int v = INT_MAX;
    for (const auto& [m, c] : a.terms()) v = std::min(v, a.fiber_degree(m));
    return v;
}

template <class S>
Series<S> project_degree(const Series<S>& a, int N) {
    Series<S> out(a.layout_ptr(), a.nmax(), a.tmax());
    for (const auto& [m, c] : a.terms())
        if (a.fiber_degree(m) == N) out.add(m, c);
    return out;
}

template <class S>
Series<S> degree_range(const Series<S>& a, int lo, int hi) {
    Series<S> out(a.layout_ptr(), a.nmax(), a.tmax());
    for (const auto& [m, c] : a.terms()) {
        int d = a.fiber_degree(m);
        if (d >= lo && d <= hi) out.add(m, c);
    }
    return out;
}

// sum_m (1/m!) ((i/eps) ad_gen)^m target, exact on the truncated algebra.
template <class S>
Series<S> exp_ad(const Series<S>& gen, const Series<S>& target) {
    using F = Field<S>;
    gen.check(target);
    if (gen.is_zero()) return target;
    if (valuation(gen) < 3) throw AlgebraError("exp_ad needs a generator of valuation at least 3");
    Series<S> sum = target, term = target;
    for (int m = 1; m <= 2 * target.nmax() + 4 && !term.is_zero(); ++m) {
        term = bracket(gen, term);
        term *= F::from_rational(Rational(1, m));
        sum += term;
    }
    return sum;
}

// Linear change of the oscillator variables between the real and complex bases:
// x = (z + zbar)/2, xi = (z - zbar)/(2i) and back z = x + i xi, zbar = x - i xi.
template <class S>
Series<S> change_basis(const Series<S>& a) {
    using F = Field<S>;
    LayoutPtr target = toggle_basis(a.layout());
    const bool to_complex = !a.layout().complex_basis;
    const auto osc = oscillators(a.layout());
    const CQ half(Rational(1, 2)), ihalf(Rational(0), Rational(1, 2)), one(1L), i1(Rational(0), Rational(1));
    // old_a -> A*new_a + B*new_b ; old_b -> C*new_a + D*new_b
    CQ A, B, C, D;
    if (to_complex) {
        A = half; B = half; C = -ihalf; D = ihalf;
    } else {
        A = one; B = i1; C = one; D = -i1;
    }
    Series<S> out(target, a.nmax(), a.tmax());
    for (const auto& [m, c] : a.terms()) {
        // expand each oscillator factor binomially
        std::vector<std::pair<Mono, CQ>> acc{{m, CQ(1L)}};
        for (const auto& o : osc) {
            int pa = m[o.a], pb = m[o.b];
            if (pa == 0 && pb == 0) continue;
            std::vector<std::pair<Mono, CQ>> next;
            for (int i = 0; i <= pa; ++i) {
                for (int j = 0; j <= pb; ++j) {
                    // choose i of the a-factors to give new_a, j of the b-factors to give new_a
                    CQ w(Rational(detail::falling(pa, i)) / detail::factorial(i) *
                         Rational(detail::falling(pb, j)) / detail::factorial(j));
                    for (int r = 0; r < i; ++r) w *= A;
                    for (int r = 0; r < pa - i; ++r) w *= B;
                    for (int r = 0; r < j; ++r) w *= C;
                    for (int r = 0; r < pb - j; ++r) w *= D;
                    for (const auto& [mm, cc] : acc) {
                        Mono n = mm;
                        n[o.a] = static_cast<std::uint8_t>(i + j);
                        n[o.b] = static_cast<std::uint8_t>(pa + pb - i - j);
                        next.emplace_back(n, cc * w);
                    }
                }
            }
            acc.swap(next);
        }
        for (const auto& [n, w] : acc) out.add_raw(n, c * F::from_cq(w));
    }
    out.prune();
    return out;
}

// Exact coefficient conversion between the two scalar types (float to exact is not offered).
template <class S>
Series<cplx> to_float(const Series<S>& a) {
    Series<cplx> out(a.layout_ptr(), a.nmax(), a.tmax());
    for (const auto& [m, c] : a.terms()) out.add(m, Field<S>::to_complex(c));
    return out;
}

}  // namespace magwell
