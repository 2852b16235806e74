#pragma once

#include <complex>
#include <string>

#include <gmpxx.h>

namespace magwell {

using Rational = mpq_class;
using cplx = std::complex<double>;

// Gaussian rational re + i*im.
struct CQ {
    Rational re{0};
    Rational im{0};

    CQ() = default;
    CQ(Rational r) : re(std::move(r)) {}
    CQ(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
    CQ(long n) : re(n) {}

    bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }
    bool is_real() const { return sgn(im) == 0; }
    CQ conj() const { return {re, -im}; }
    Rational norm2() const { return re * re + im * im; }
    cplx to_complex() const { return {re.get_d(), im.get_d()}; }

    CQ& operator+=(const CQ& o) { re += o.re; im += o.im; return *this; }
    CQ& operator-=(const CQ& o) { re -= o.re; im -= o.im; return *this; }
    CQ& operator*=(const CQ& o);
    CQ& operator/=(const CQ& o);
    CQ operator-() const { return {-re, -im}; }
    friend CQ operator+(CQ a, const CQ& b) { return a += b; }
    friend CQ operator-(CQ a, const CQ& b) { return a -= b; }
    friend CQ operator*(CQ a, const CQ& b) { return a *= b; }
    friend CQ operator/(CQ a, const CQ& b) { return a /= b; }
    friend bool operator==(const CQ& a, const CQ& b) { return a.re == b.re && a.im == b.im; }
};

std::string to_string(const CQ& z);

// Element a + b*sqrt(D) of Q(i, sqrt(D)), D a positive squarefree integer.
// D = 0 means "no radical"; values with different nonzero radicands may not be mixed.
struct Quad {
    CQ a;
    CQ b;
    long D = 0;

    Quad() = default;
    Quad(CQ x) : a(std::move(x)) {}
    Quad(Rational r) : a(std::move(r)) {}
    Quad(long n) : a(n) {}
    Quad(CQ x, CQ y, long d) : a(std::move(x)), b(std::move(y)), D(d) { normalize(); }

    static Quad sqrt_of(long d);  // exact sqrt(d) for squarefree d > 1

    bool is_zero() const { return a.is_zero() && b.is_zero(); }
    bool is_real() const { return a.is_real() && b.is_real(); }
    bool has_radical() const { return !b.is_zero(); }
    Quad conj() const { return Quad(a.conj(), b.conj(), D); }
    cplx to_complex() const;

    Quad& operator+=(const Quad& o);
    Quad& operator-=(const Quad& o);
    Quad& operator*=(const Quad& o);
    Quad& operator/=(const Quad& o);
    Quad operator-() const { return Quad(-a, -b, D); }
    friend Quad operator+(Quad x, const Quad& y) { return x += y; }
    friend Quad operator-(Quad x, const Quad& y) { return x -= y; }
    friend Quad operator*(Quad x, const Quad& y) { return x *= y; }
    friend Quad operator/(Quad x, const Quad& y) { return x /= y; }
    friend bool operator==(const Quad& x, const Quad& y) { return (x - y).is_zero(); }

private:
    void normalize() { if (b.is_zero()) D = 0; }
    long join(const Quad& o) const;
};

std::string to_string(const Quad& q);

// Uniform interface over the exact and floating coefficient types.
template <class S>
struct Field;

template <>
struct Field<Quad> {
    static constexpr bool exact = true;
    static Quad zero() { return Quad(); }
    static Quad one() { return Quad(1L); }
    static Quad i() { return Quad(CQ(Rational(0), Rational(1))); }
    static Quad from_rational(const Rational& r) { return Quad(r); }
    static Quad from_double(double x) { return Quad(Rational(x)); }
    static Quad from_cq(const CQ& z) { return Quad(z); }
    static bool is_zero(const Quad& x) { return x.is_zero(); }
    static bool is_real(const Quad& x) { return x.is_real(); }
    static Quad conj(const Quad& x) { return x.conj(); }
    static cplx to_complex(const Quad& x) { return x.to_complex(); }
    static double magnitude(const Quad& x) { return std::abs(x.to_complex()); }
    static std::string str(const Quad& x) { return to_string(x); }
};

template <>
struct Field<cplx> {
    static constexpr bool exact = false;
    static cplx zero() { return {0.0, 0.0}; }
    static cplx one() { return {1.0, 0.0}; }
    static cplx i() { return {0.0, 1.0}; }
    static cplx from_rational(const Rational& r) { return {r.get_d(), 0.0}; }
    static cplx from_double(double x) { return {x, 0.0}; }
    static cplx from_cq(const CQ& z) { return z.to_complex(); }
    static bool is_zero(const cplx& x) { return x.real() == 0.0 && x.imag() == 0.0; }
    static bool is_real(const cplx& x) { return x.imag() == 0.0; }
    static cplx conj(const cplx& x) { return std::conj(x); }
    static cplx to_complex(const cplx& x) { return x; }
    static double magnitude(const cplx& x) { return std::abs(x); }
    static std::string str(const cplx& x);
};

Rational parse_decimal(const std::string& text);  // "1.25e-3", "3/4", "7" -> exact

}  // namespace magwell
