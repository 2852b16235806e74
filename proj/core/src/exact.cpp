#include "magwell/exact.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace magwell {

CQ& CQ::operator*=(const CQ& o) {
    if (is_real() && o.is_real()) {
        re *= o.re;
        return *this;
    }
    Rational r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
}

CQ& CQ::operator/=(const CQ& o) {
    if (o.is_zero()) throw std::domain_error("CQ: division by zero");
    if (o.is_real()) {
        re /= o.re;
        im /= o.re;
        return *this;
    }
    Rational n = o.norm2();
    *this *= o.conj();
    re /= n;
    im /= n;
    return *this;
}

std::string to_string(const CQ& z) {
    if (z.is_real()) return z.re.get_str();
    if (sgn(z.re) == 0) return z.im.get_str() + "i";
    std::string s = "(" + z.re.get_str();
    if (sgn(z.im) >= 0) s += "+";
    return s + z.im.get_str() + "i)";
}

Quad Quad::sqrt_of(long d) {
    if (d <= 1) throw std::domain_error("Quad::sqrt_of needs a squarefree radicand > 1");
    return Quad(CQ(), CQ(1L), d);
}

long Quad::join(const Quad& o) const {
    if (!has_radical()) return o.D;
    if (!o.has_radical()) return D;
    if (D != o.D) throw std::domain_error("Quad: mixed radicands");
    return D;
}

cplx Quad::to_complex() const {
    cplx v = a.to_complex();
    if (has_radical()) v += b.to_complex() * std::sqrt(static_cast<double>(D));
    return v;
}

Quad& Quad::operator+=(const Quad& o) {
    D = join(o);
    a += o.a;
    if (o.has_radical()) b += o.b;
    normalize();
    return *this;
}

Quad& Quad::operator-=(const Quad& o) {
    D = join(o);
    a -= o.a;
    if (o.has_radical()) b -= o.b;
    normalize();
    return *this;
}

Quad& Quad::operator*=(const Quad& o) {
    if (!has_radical() && !o.has_radical()) {
        a *= o.a;
        return *this;
    }
    long d = join(o);
    CQ na = a * o.a + b * o.b * CQ(d);
    CQ nb = a * o.b + b * o.a;
    a = std::move(na);
    b = std::move(nb);
    D = d;
    normalize();
    return *this;
}

Quad& Quad::operator/=(const Quad& o) {
    if (o.is_zero()) throw std::domain_error("Quad: division by zero");
    if (!o.has_radical()) {
        a /= o.a;
        if (has_radical()) b /= o.a;
        return *this;
    }
    // (a + b r)^{-1} = (a - b r) / (a^2 - b^2 D)
    CQ n = o.a * o.a - o.b * o.b * CQ(o.D);
    *this *= Quad(o.a, -o.b, o.D);
    a /= n;
    b /= n;
    normalize();
    return *this;
}

std::string to_string(const Quad& q) {
    if (!q.has_radical()) return to_string(q.a);
    return to_string(q.a) + "+" + to_string(q.b) + "*sqrt(" + std::to_string(q.D) + ")";
}

std::string Field<cplx>::str(const cplx& x) {
    char buf[64];
    if (x.imag() == 0.0)
        std::snprintf(buf, sizeof buf, "%.17g", x.real());
    else
        std::snprintf(buf, sizeof buf, "(%.17g%+.17gi)", x.real(), x.imag());
    return buf;
}

Rational parse_decimal(const std::string& text) {
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        Rational r(parse_decimal(text.substr(0, slash)) / parse_decimal(text.substr(slash + 1)));
        return r;
    }
    std::string mant = text;
    long exp10 = 0;
    auto e = text.find_first_of("eE");
    if (e != std::string::npos) {
        mant = text.substr(0, e);
        exp10 = std::stol(text.substr(e + 1));
    }
    bool neg = false;
    if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
        neg = mant[0] == '-';
        mant = mant.substr(1);
    }
    auto dot = mant.find('.');
    std::string digits = mant;
    if (dot != std::string::npos) {
        digits = mant.substr(0, dot) + mant.substr(dot + 1);
        exp10 -= static_cast<long>(mant.size() - dot - 1);
    }
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("not a number: " + text);
    mpz_class num(digits, 10);
    mpz_class pow10;
    mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp10)));
    Rational r = exp10 >= 0 ? Rational(num * pow10) : Rational(num, pow10);
    r.canonicalize();
    return neg ? Rational(-r) : r;
}

}  // namespace magwell
