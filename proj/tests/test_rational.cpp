#include "lazyrelu/rational.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lazyrelu;

TEST(Rational, DecimalLiteralsAreExact) {
    EXPECT_EQ(parse_decimal("0.1"), make_rational(1, 10));
    EXPECT_EQ(parse_decimal("-12"), Rational(-12));
    EXPECT_EQ(parse_decimal("3."), Rational(3));
    EXPECT_EQ(parse_decimal(".5"), make_rational(1, 2));
    EXPECT_EQ(parse_decimal("+0.25"), make_rational(1, 4));
    EXPECT_EQ(parse_decimal("-3.2e-05"), make_rational(-32, 1000000));
    EXPECT_EQ(parse_decimal("1.5E2"), Rational(150));
    // 0.1 is not the binary double nearest to it.
    EXPECT_NE(*parse_decimal("0.1"), Rational(0.1));
}

TEST(Rational, RejectsNonDecimals) {
    for (const char* bad : {"", "-", ".", "1e", "1e+", "abc", "1.2.3", "0x10", "1/2", " 1"}) {
        EXPECT_FALSE(parse_decimal(bad)) << bad;
    }
}

TEST(Rational, CanonicalForm) {
    Rational r = make_rational(6, -4);
    EXPECT_EQ(r.get_num(), -3);
    EXPECT_EQ(r.get_den(), 2);
    Rational s = *parse_decimal("2.50");
    EXPECT_EQ(s.get_num(), 5);
    EXPECT_EQ(s.get_den(), 2);
}

TEST(Rational, Rendering) {
    EXPECT_EQ(to_exact_decimal(make_rational(1, 10)), "0.1");
    EXPECT_EQ(to_exact_decimal(make_rational(-3, 8)), "-0.375");
    EXPECT_EQ(to_exact_decimal(Rational(42)), "42");
    EXPECT_EQ(to_exact_decimal(Rational(0)), "0");
    EXPECT_THROW(to_exact_decimal(make_rational(1, 3)), std::domain_error);
    EXPECT_EQ(to_decimal(make_rational(1, 3), 4), "0.3333");
    EXPECT_EQ(to_decimal(make_rational(-2, 3), 4), "-0.6667");
    EXPECT_EQ(to_decimal(make_rational(-1, 100000), 3), "0");
    EXPECT_EQ(to_exact_string(make_rational(-1, 2)), "-1/2");
    EXPECT_EQ(parse_exact_string("-1/2"), make_rational(-1, 2));
    EXPECT_FALSE(parse_exact_string("1/0"));
}

TEST(Rational, ExactDecimalRoundTripProperty) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long> num(-1000000, 1000000);
    std::uniform_int_distribution<int> pow2(0, 12), pow5(0, 12);
    for (int i = 0; i < 500; ++i) {
        long den = (1L << pow2(rng));
        for (int k = pow5(rng); k > 0; --k) den *= 5;
        Rational r = make_rational(num(rng), den);
        ASSERT_TRUE(has_finite_decimal(r));
        EXPECT_EQ(parse_decimal(to_exact_decimal(r)), r);
    }
}
