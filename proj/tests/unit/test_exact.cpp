#include <doctest.h>

#include "magwell/errors.hpp"
#include "magwell/exact.hpp"

using namespace magwell;

TEST_CASE("decimal literals are exact") {
    CHECK(parse_decimal("0.1") == Rational(1, 10));
    CHECK(parse_decimal("1.25e-3") == Rational(1, 800));
    CHECK(parse_decimal("3/4") == Rational(3, 4));
    CHECK(parse_decimal("7") == Rational(7));
    CHECK(parse_decimal("2E2") == Rational(200));
}

TEST_CASE("Gaussian rationals") {
    CQ i(Rational(0), Rational(1));
    CHECK(i * i == CQ(-1L));
    CQ z(Rational(3), Rational(4));
    CHECK(z * z.conj() == CQ(z.norm2()));
    CHECK((z / z) == CQ(1L));
    CHECK(to_string(CQ(Rational(1, 2), Rational(-3))) != "");
}

TEST_CASE("quadratic extension arithmetic") {
    Quad r2 = Quad::sqrt_of(2);
    CHECK(r2 * r2 == Quad(2L));
    Quad x = Quad(1L) + r2;
    Quad y = Quad(1L) / x;  // sqrt 2 - 1
    CHECK(y == r2 - Quad(1L));
    CHECK(x * y == Quad(1L));
    CHECK(std::abs(x.to_complex().real() - (1 + std::sqrt(2.0))) < 1e-15);
    CHECK((x - x).is_zero());
    CHECK(!(x - Quad(1L)).is_zero());
    Quad r3 = Quad::sqrt_of(3);
    CHECK_THROWS(r2 + r3);
}

TEST_CASE("field adaptor converts doubles exactly") {
    Quad q = Field<Quad>::from_double(0.1);
    CHECK(q.a.re.get_d() == 0.1);
    CHECK(Field<cplx>::from_double(0.25) == cplx(0.25, 0));
}
