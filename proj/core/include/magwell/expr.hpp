#pragma once

#include <map>
#include <string>
#include <vector>

#include "magwell/exact.hpp"

namespace magwell {

// Sparse multivariate polynomial with exact rational coefficients.
class Poly {
public:
    using Exps = std::vector<int>;

    Poly() = default;
    explicit Poly(int nvars) : nvars_(nvars) {}

    static Poly constant(int nvars, const Rational& c);
    static Poly variable(int nvars, int i);

    int nvars() const { return nvars_; }
    const std::map<Exps, Rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    Rational constant_term() const;
    int degree() const;

    void add_term(const Exps& e, const Rational& c);

    Poly& operator+=(const Poly& o);
    Poly& operator-=(const Poly& o);
    Poly operator-() const;
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(const Poly& a, const Poly& b);
    friend Poly operator*(Poly a, const Rational& c);
    friend bool operator==(const Poly& a, const Poly& b) {
        return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
    }
    Poly pow(int n) const;

    Poly diff(int i) const;
    double eval(const double* x) const;
    Rational eval(const std::vector<Rational>& x) const;
    // Composition: substitute variable i by subs[i] (all subs share one variable count).
    Poly compose(const std::vector<Poly>& subs) const;

    std::string str(const std::vector<std::string>& names) const;

private:
    int nvars_ = 0;
    std::map<Exps, Rational> terms_;
};

// Parses the expression grammar: numbers (decimal literals are exact), named variables,
// aliases (names bound to polynomials), + - * /constant ^uint and parentheses.
// `line` and `column0` locate the expression in its enclosing document for errors.
Poly parse_poly(const std::string& text, const std::vector<std::string>& vars,
                const std::map<std::string, Poly>& aliases = {}, int line = 1, int column0 = 1);

std::vector<std::string> coordinate_names(int d);  // q1..qd

}  // namespace magwell
