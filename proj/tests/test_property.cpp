#include "lazyrelu/property.hpp"

#include "support/instances.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lazyrelu;

TEST(ParseProperty, ThreeBoundAtoms) {
    Property p = parse_property(std::string("x0 >= 1.0\nx0 <= 2.0\ny0 <= 0.5\n"));
    ASSERT_EQ(p.atoms.size(), 3u);
    EXPECT_EQ(p.atoms[0].relation, Relation::GreaterEq);
    EXPECT_EQ(p.atoms[0].constant, 1);
    EXPECT_EQ(p.atoms[2].terms[0].var, (VarRef{VarRef::Kind::Output, 0}));
    EXPECT_EQ(p.atoms[2].constant, make_rational(1, 2));
}

TEST(ParseProperty, MultiTermAtom) {
    Property p = parse_property(std::string("2*x0 - y1 <= 0.25"));
    ASSERT_EQ(p.atoms.size(), 1u);
    const auto& a = p.atoms[0];
    ASSERT_EQ(a.terms.size(), 2u);
    EXPECT_EQ(a.terms[0].coefficient, 2);
    EXPECT_EQ(a.terms[0].var, (VarRef{VarRef::Kind::Input, 0}));
    EXPECT_EQ(a.terms[1].coefficient, -1);
    EXPECT_EQ(a.terms[1].var, (VarRef{VarRef::Kind::Output, 1}));
    EXPECT_EQ(a.constant, make_rational(1, 4));
}

TEST(ParseProperty, CommentsBlankLinesAndCombining) {
    Property p = parse_property(std::string("# header\n\n  x0 + 0.5*x0 + y0 = -3   # trailing\n-x1 >= -1e-1\n"));
    ASSERT_EQ(p.atoms.size(), 2u);
    ASSERT_EQ(p.atoms[0].terms.size(), 2u);
    EXPECT_EQ(p.atoms[0].terms[0].coefficient, make_rational(3, 2));
    EXPECT_EQ(p.atoms[0].relation, Relation::Equal);
    EXPECT_EQ(p.atoms[0].constant, -3);
    EXPECT_EQ(p.atoms[1].terms[0].coefficient, -1);
    EXPECT_EQ(p.atoms[1].constant, make_rational(-1, 10));
}

TEST(ParseProperty, Errors) {
    try {
        parse_property(std::string("x0 >= 0\nz0 >= 1\n"));
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_EQ(e.column(), 1u);
        EXPECT_NE(std::string(e.what()).find("unknown variable prefix"), std::string::npos);
    }
    EXPECT_THROW(parse_property(std::string("# nothing\n\n")), ParseError);
    EXPECT_THROW(parse_property(std::string("")), ParseError);
    EXPECT_THROW(parse_property(std::string("x0 < 1")), ParseError);
    EXPECT_THROW(parse_property(std::string("x0 <= ")), ParseError);
    EXPECT_THROW(parse_property(std::string("2 x0 <= 1")), ParseError);
    EXPECT_THROW(parse_property(std::string("x <= 1")), ParseError);
    EXPECT_THROW(parse_property(std::string("x0 <= 1 2")), ParseError);
    EXPECT_THROW(parse_property(std::string("+x0 <= 1")), ParseError);
    EXPECT_THROW(parse_property(std::string("x0a <= 1")), ParseError);
    try {
        parse_property(std::string("x0 + y0 <> 1"));
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.column(), 9u);
    }
}

TEST(Property, CheckAgainstNetwork) {
    Network net = lazyrelu::testing::relu_identity();
    EXPECT_NO_THROW(parse_property(std::string("x0 <= 1\ny0 >= 0")).check_against(net));
    EXPECT_THROW(parse_property(std::string("x1 <= 1")).check_against(net), std::invalid_argument);
    EXPECT_THROW(parse_property(std::string("y3 <= 1")).check_against(net), std::invalid_argument);
}

namespace {

std::string random_decimal(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> digits(0, 999), frac(0, 3), form(0, 3);
    std::string s = std::to_string(digits(rng));
    const int f = frac(rng);
    if (f > 0) {
        s += ".";
        for (int i = 0; i < f; ++i) s += static_cast<char>('0' + digits(rng) % 10);
    }
    if (form(rng) == 0) s += "e-" + std::to_string(frac(rng));
    return s;
}

// Random sentence of the grammar (with random spacing).
std::string random_atom_text(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> terms(1, 4), coin(0, 1), idx(0, 12), rel(0, 2), sp(0, 2);
    auto space = [&] { return std::string(static_cast<std::size_t>(sp(rng)), ' '); };
    std::string s = space();
    const int n = terms(rng);
    for (int t = 0; t < n; ++t) {
        if (t > 0) s += space() + (coin(rng) ? "+" : "-") + space();
        if (coin(rng)) s += random_decimal(rng) + space() + "*" + space();
        s += (coin(rng) ? "x" : "y") + std::to_string(idx(rng));
    }
    static const char* rels[] = {"<=", ">=", "="};
    s += space() + rels[rel(rng)] + space();
    if (coin(rng)) s += "-";
    return s + random_decimal(rng) + space();
}

}  // namespace

TEST(ParseProperty, TotalOverGeneratedGrammarInstances) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 1000; ++i) {
        const std::string text = random_atom_text(rng);
        EXPECT_NO_THROW(parse_property(text)) << text;
    }
}

TEST(ParseProperty, PrettyPrintRoundTrip) {
    std::mt19937_64 rng(19);
    for (int i = 0; i < 300; ++i) {
        std::string text;
        for (int k = 0; k < 3; ++k) text += random_atom_text(rng) + "\n";
        Property p = parse_property(text);
        EXPECT_EQ(parse_property(to_string(p)), p) << text << "--\n" << to_string(p);
    }
}
