#include "magwell/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "magwell/errors.hpp"

namespace magwell {

Poly Poly::constant(int nvars, const Rational& c) {
    Poly p(nvars);
    p.add_term(Exps(nvars, 0), c);
    return p;
}

Poly Poly::variable(int nvars, int i) {
    Poly p(nvars);
    Exps e(nvars, 0);
    e[i] = 1;
    p.add_term(e, 1);
    return p;
}

bool Poly::is_constant() const {
    for (const auto& [e, c] : terms_)
        if (std::any_of(e.begin(), e.end(), [](int k) { return k != 0; })) return false;
    return true;
}

Rational Poly::constant_term() const {
    auto it = terms_.find(Exps(nvars_, 0));
    return it == terms_.end() ? Rational(0) : it->second;
}

int Poly::degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) {
        int s = 0;
        for (int k : e) s += k;
        d = std::max(d, s);
    }
    return d;
}

void Poly::add_term(const Exps& e, const Rational& c) {
    if (sgn(c) == 0) return;
    auto [it, fresh] = terms_.try_emplace(e, c);
    if (!fresh) {
        it->second += c;
        if (sgn(it->second) == 0) terms_.erase(it);
    }
}

Poly& Poly::operator+=(const Poly& o) {
    if (nvars_ == 0 && terms_.empty()) nvars_ = o.nvars_;
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
}

Poly& Poly::operator-=(const Poly& o) {
    if (nvars_ == 0 && terms_.empty()) nvars_ = o.nvars_;
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
}

Poly Poly::operator-() const {
    Poly r(nvars_);
    for (const auto& [e, c] : terms_) r.terms_.emplace(e, -c);
    return r;
}

Poly operator*(const Poly& a, const Poly& b) {
    Poly r(std::max(a.nvars_, b.nvars_));
    Poly::Exps e(r.nvars_);
    for (const auto& [ea, ca] : a.terms_)
        for (const auto& [eb, cb] : b.terms_) {
            for (int i = 0; i < r.nvars_; ++i) e[i] = ea[i] + eb[i];
            r.add_term(e, ca * cb);
        }
    return r;
}

Poly operator*(Poly a, const Rational& c) {
    if (sgn(c) == 0) return Poly(a.nvars_);
    for (auto& [e, v] : a.terms_) v *= c;
    return a;
}

Poly Poly::pow(int n) const {
    Poly r = constant(nvars_, 1);
    Poly base = *this;
    while (n > 0) {
        if (n & 1) r = r * base;
        n >>= 1;
        if (n) base = base * base;
    }
    return r;
}

Poly Poly::diff(int i) const {
    Poly r(nvars_);
    for (const auto& [e, c] : terms_) {
        if (e[i] == 0) continue;
        Exps f = e;
        f[i] -= 1;
        r.add_term(f, c * e[i]);
    }
    return r;
}

double Poly::eval(const double* x) const {
    double s = 0.0;
    for (const auto& [e, c] : terms_) {
        double t = c.get_d();
        for (int i = 0; i < nvars_; ++i)
            for (int k = 0; k < e[i]; ++k) t *= x[i];
        s += t;
    }
    return s;
}

Rational Poly::eval(const std::vector<Rational>& x) const {
    Rational s = 0;
    for (const auto& [e, c] : terms_) {
        Rational t = c;
        for (int i = 0; i < nvars_; ++i)
            for (int k = 0; k < e[i]; ++k) t *= x[i];
        s += t;
    }
    return s;
}

Poly Poly::compose(const std::vector<Poly>& subs) const {
    int n = subs.empty() ? 0 : subs[0].nvars();
    Poly r(n);
    for (const auto& [e, c] : terms_) {
        Poly t = constant(n, c);
        for (int i = 0; i < nvars_; ++i)
            if (e[i]) t = t * subs[i].pow(e[i]);
        r += t;
    }
    return r;
}

std::string Poly::str(const std::vector<std::string>& names) const {
    if (terms_.empty()) return "0";
    std::string s;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [e, c] = *it;
        std::string mono;
        for (int i = 0; i < nvars_; ++i) {
            if (e[i] == 0) continue;
            if (!mono.empty()) mono += "*";
            mono += names[i];
            if (e[i] > 1) mono += "^" + std::to_string(e[i]);
        }
        Rational a = abs(c);
        std::string coef = a.get_str();
        if (!first) s += sgn(c) < 0 ? " - " : " + ";
        else if (sgn(c) < 0) s += "-";
        if (mono.empty()) s += coef;
        else if (a == 1) s += mono;
        else s += (a.get_den() == 1 ? coef : "(" + coef + ")") + "*" + mono;
        first = false;
    }
    return s;
}

std::vector<std::string> coordinate_names(int d) {
    std::vector<std::string> v;
    for (int i = 1; i <= d; ++i) v.push_back("q" + std::to_string(i));
    return v;
}

namespace {

class Parser {
public:
    Parser(const std::string& text, const std::vector<std::string>& vars,
           const std::map<std::string, Poly>& aliases, int line, int column0)
        : s_(text), vars_(vars), aliases_(aliases), line_(line), col0_(column0) {}

    Poly run() {
        Poly p = expr();
        skip();
        if (pos_ < s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return p;
    }

private:
    const std::string& s_;
    const std::vector<std::string>& vars_;
    const std::map<std::string, Poly>& aliases_;
    int line_, col0_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, line_, col0_ + static_cast<int>(pos_));
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    int n() const { return static_cast<int>(vars_.size()); }

    Poly expr() {
        Poly p = term();
        for (;;) {
            if (accept('+')) p += term();
            else if (accept('-')) p -= term();
            else return p;
        }
    }

    Poly term() {
        Poly p = factor();
        for (;;) {
            if (accept('*')) {
                p = p * factor();
            } else if (accept('/')) {
                std::size_t at = pos_;
                while (at < s_.size() && std::isspace(static_cast<unsigned char>(s_[at]))) ++at;
                Poly q = factor();
                if (!q.is_constant()) {
                    pos_ = at;
                    fail("division by a non-constant expression");
                }
                Rational c = q.constant_term();
                if (sgn(c) == 0) {
                    pos_ = at;
                    fail("division by zero");
                }
                p = p * Rational(1 / c);
            } else {
                return p;
            }
        }
    }

    Poly factor() {
        if (accept('-')) return -factor();
        if (accept('+')) return factor();
        Poly base = atom();
        if (accept('^')) {
            skip();
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (start == pos_) fail("exponent must be a non-negative integer");
            int e = std::stoi(s_.substr(start, pos_ - start));
            return base.pow(e);
        }
        return base;
    }

    Poly atom() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Poly p = expr();
            if (!accept(')')) fail("expected ')'");
            return p;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
                ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
                std::size_t save = pos_++;
                if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
                if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
                } else {
                    pos_ = save;
                }
            }
            std::string lit = s_.substr(start, pos_ - start);
            try {
                return Poly::constant(n(), parse_decimal(lit));
            } catch (const std::exception&) {
                pos_ = start;
                fail("malformed number '" + lit + "'");
            }
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            std::string name = s_.substr(start, pos_ - start);
            for (int i = 0; i < n(); ++i)
                if (vars_[i] == name) return Poly::variable(n(), i);
            auto it = aliases_.find(name);
            if (it != aliases_.end()) return it->second;
            skip();
            pos_ = start;
            if (name == "sin" || name == "cos" || name == "exp" || name == "sqrt" || name == "log")
                fail("non-polynomial function '" + name + "'");
            fail("unknown variable '" + name + "'");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
};

}  // namespace

Poly parse_poly(const std::string& text, const std::vector<std::string>& vars,
                const std::map<std::string, Poly>& aliases, int line, int column0) {
    Parser p(text, vars, aliases, line, column0);
    Poly r = p.run();
    if (r.nvars() == 0) r = Poly(static_cast<int>(vars.size()));
    return r;
}

}  // namespace magwell
