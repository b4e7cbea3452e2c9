#pragma once

// Eager ground truth for small problems: one LP per complete phase pattern.

#include "lazyrelu/search.hpp"

#include <stdexcept>

namespace lazyrelu {

inline constexpr std::size_t kDefaultOracleMaxPairs = 10;

/// Patterns are visited in lexicographic order over pair ids with
/// Inactive < Active; the first feasible one yields Sat. Bound propagation
/// is deliberately not used.
inline SolveResult oracle_solve(const VerificationProblem& problem, std::size_t max_pairs = kDefaultOracleMaxPairs) {
    const std::size_t r = problem.pairs.size();
    if (r > max_pairs) {
        throw std::invalid_argument("oracle cap exceeded: " + std::to_string(r) + " pairs, cap " +
                                    std::to_string(max_pairs));
    }
    const auto start = std::chrono::steady_clock::now();
    SolveResult result;
    result.verdict = Verdict::make_unsat();
    const std::uint64_t patterns = std::uint64_t{1} << r;
    for (std::uint64_t pattern = 0; pattern < patterns; ++pattern) {
        ++result.stats.patterns_checked;
        Tableau t(problem);
        bool conflict = false;
        for (std::size_t i = 0; i < r && !conflict; ++i) {
            const bool active = (pattern >> (r - 1 - i)) & 1U;
            const ReluPair& pair = problem.pairs[i];
            const Rational zero = 0;
            if (active) {
                conflict = t.assert_bound(pair.b, BoundKind::Lower, zero) == AssertResult::ImmediateConflict ||
                           t.assert_bound(pair.d, BoundKind::Lower, zero) == AssertResult::ImmediateConflict ||
                           t.assert_bound(pair.d, BoundKind::Upper, zero) == AssertResult::ImmediateConflict;
            } else {
                conflict = t.assert_bound(pair.b, BoundKind::Upper, zero) == AssertResult::ImmediateConflict ||
                           t.assert_bound(pair.f, BoundKind::Lower, zero) == AssertResult::ImmediateConflict ||
                           t.assert_bound(pair.f, BoundKind::Upper, zero) == AssertResult::ImmediateConflict;
            }
        }
        if (conflict) continue;
        ++result.stats.lp_checks;
        const bool feasible = t.check_feasible().feasible();
        result.stats.pivots += t.pivot_count();
        if (!feasible) continue;
        result.verdict.kind = Verdict::Kind::Sat;
        result.verdict.assignment = t.assignment();
        for (VarId x : problem.inputs) result.verdict.counterexample.push_back(result.verdict.assignment[x]);
        break;
    }
    result.stats.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace lazyrelu
