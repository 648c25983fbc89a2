#include <catch_amalgamated.hpp>

#include "obsyn/rational.hpp"

using namespace obsyn;

TEST_CASE("rationals parse and print in canonical form") {
    CHECK(Rational::parse("1/2").str() == "1/2");
    CHECK(Rational::parse("2/4").str() == "1/2");
    CHECK(Rational::parse("-6/4").str() == "-3/2");
    CHECK(Rational::parse("7").str() == "7");
    CHECK(Rational::parse("0").str() == "0");
    // Table values reduce to lowest terms: 13248/575 = 576/25.
    CHECK(Rational::parse("13248/575") == Rational(576, 25));
    CHECK(Rational::parse("13248/575").str() == "576/25");
    CHECK(Rational(1).is_one());

    CHECK_THROWS_AS(Rational::parse(""), ParseError);
    CHECK_THROWS_AS(Rational::parse("1.5"), ParseError);
    CHECK_THROWS_AS(Rational::parse("1.5x"), ParseError);
    CHECK_THROWS_AS(Rational::parse("1/0"), ParseError);
    CHECK_THROWS_AS(Rational::parse("1/-2"), ParseError);
    CHECK_THROWS_AS(Rational::parse("/2"), ParseError);
}

TEST_CASE("rational arithmetic is exact") {
    const Rational a(1, 3), b(1, 6);
    CHECK((a + b).str() == "1/2");
    CHECK((a - b).str() == "1/6");
    CHECK((a * b).str() == "1/18");
    CHECK((a / b).str() == "2");
    CHECK(Rational(1, 2) + Rational(1, 2) == Rational(1));
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK((-Rational(3, 4)).str() == "-3/4");

    // Running sums over many small fractions stay exact.
    Rational sum;
    for (long d = 1; d <= 50; ++d) sum += Rational(1, d) - Rational(1, d + 1);
    CHECK(sum == Rational(50, 51));
}

TEST_CASE("infinity dominates every rational") {
    const Value inf = Value::infinity();
    const Value v{Rational(1000000)};
    CHECK(v < inf);
    CHECK(inf > v);
    CHECK(inf == Value::infinity());
    CHECK(!(inf < inf));
    CHECK(inf.str() == "inf");
    CHECK((Value(Rational(3, 2)) + Value(Rational(1, 2))) == Value(Rational(2)));
    CHECK((v + inf).is_infinite());
    CHECK(Value::parse("inf").is_infinite());
    CHECK(Value::parse("5/4") == Value(Rational(5, 4)));
}
