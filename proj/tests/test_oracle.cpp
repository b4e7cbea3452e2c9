#include "lazyrelu/oracle.hpp"

#include "support/fourier_motzkin.hpp"
#include "support/instances.hpp"
#include "support/random_lp.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lazyrelu;
using namespace lazyrelu::testing;

TEST(Oracle, ReluIdentityBothPatternsInfeasible) {
    const VerificationProblem p =
        encode(relu_identity(), parse_property(std::string("x0 >= 1\nx0 <= 2\ny0 <= 0.5")));
    EXPECT_FALSE(fm_pattern_feasible(p, {false}));
    EXPECT_FALSE(fm_pattern_feasible(p, {true}));
    const auto r = oracle_solve(p);
    EXPECT_TRUE(r.verdict.unsat());
    EXPECT_EQ(r.stats.patterns_checked, 2u);
}

TEST(Oracle, ZeroPairsIsOneLpCheck) {
    std::mt19937_64 rng(59);
    for (int i = 0; i < 50; ++i) {
        const VerificationProblem p = random_lp(rng);
        const auto r = oracle_solve(p);
        EXPECT_EQ(r.stats.patterns_checked, 1u);
        Tableau t(p);
        EXPECT_EQ(r.verdict.sat(), t.check_feasible().feasible());
    }
}

TEST(Oracle, PairCap) {
    NetGenSpec spec;
    spec.layer_dims = {1, 11, 1};
    const Network net = generate_network(spec);
    const VerificationProblem p = encode(net, parse_property(std::string("y0 <= 0")));
    EXPECT_THROW(oracle_solve(p, 10), std::invalid_argument);
    EXPECT_NO_THROW(oracle_solve(p, 11));
}

TEST(Oracle, FirstFeasiblePatternInLexicographicOrder) {
    // |x| >= 1/2 on [-1, 1]: pattern (inactive, active) is the first
    // feasible one (x <= -1/2), so the counterexample is negative.
    const Network net = abs_network();
    const Property prop = parse_property(std::string("x0 >= -1\nx0 <= 1\ny0 >= 0.5"));
    const VerificationProblem p = encode(net, prop);
    EXPECT_FALSE(fm_pattern_feasible(p, {false, false}));
    EXPECT_TRUE(fm_pattern_feasible(p, {false, true}));
    const auto r = oracle_solve(p);
    ASSERT_TRUE(r.verdict.sat());
    EXPECT_EQ(r.stats.patterns_checked, 2u);
    EXPECT_LT(r.verdict.counterexample[0], 0);
    EXPECT_TRUE(validate_counterexample(net, prop, p, r.verdict).pass);
}

TEST(OracleProperty, AgreesWithEliminationPerPattern) {
    std::mt19937_64 rng(61);
    for (int i = 0; i < 60; ++i) {
        const auto inst = random_instance(rng, 4);
        const VerificationProblem p = encode(inst.net, inst.prop);
        const auto r = oracle_solve(p);
        EXPECT_EQ(r.verdict.sat(), fm_problem_sat(p)) << "instance " << i;
        if (r.verdict.sat()) EXPECT_TRUE(validate_counterexample(inst.net, inst.prop, p, r.verdict).pass);
        else EXPECT_EQ(r.stats.patterns_checked, std::uint64_t{1} << p.pairs.size());
    }
}
