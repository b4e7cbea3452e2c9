#pragma once

// The ReLU theory solver: LP feasibility interleaved with ReLU checking.
// Violated pairs are first repaired by moving nonbasic values; a pair is
// split into its active/inactive cases only after repeated failed repairs.
// Split decisions live on a trail and are undone by chronological
// backtracking.

#include "lazyrelu/network.hpp"
#include "lazyrelu/problem.hpp"
#include "lazyrelu/property.hpp"
#include "lazyrelu/simplex.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace lazyrelu {

enum class Phase { Undecided, Active, Inactive };

enum class PhaseOrigin { None, Propagated, SplitDecision };

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Undecided: return "undecided";
        case Phase::Active: return "active";
        case Phase::Inactive: return "inactive";
    }
    return "?";
}

struct PairPhase {
    Phase phase = Phase::Undecided;
    PhaseOrigin origin = PhaseOrigin::None;

    bool operator==(const PairPhase&) const = default;
};

struct TrailFrame {
    std::size_t pair = 0;
    Phase tried = Phase::Active;
    std::optional<Phase> remaining;
    BoundsSnapshot bounds;
    std::vector<PairPhase> phases;
};

using Trail = std::vector<TrailFrame>;

struct SolveConfig {
    unsigned split_threshold = 5;
    std::chrono::milliseconds timeout{60'000};
    std::optional<std::uint64_t> max_splits;
    std::ostream* trace = nullptr;
};

struct SolveStats {
    std::uint64_t pivots = 0;
    std::uint64_t lp_checks = 0;
    std::uint64_t fix_attempts = 0;
    std::uint64_t fixes = 0;
    std::uint64_t splits = 0;
    std::uint64_t backtracks = 0;
    std::uint64_t max_trail_depth = 0;
    std::uint64_t propagated_fixes = 0;
    std::uint64_t patterns_checked = 0;  // oracle only
    double wall_ms = 0;
};

struct Verdict {
    enum class Kind { Sat, Unsat, ResourceOut };
    enum class Reason { None, Timeout, SplitLimit };

    Kind kind = Kind::Unsat;
    Reason reason = Reason::None;
    std::vector<Rational> assignment;      // every problem variable, when Sat
    std::vector<Rational> counterexample;  // input sub-vector, when Sat

    bool sat() const { return kind == Kind::Sat; }
    bool unsat() const { return kind == Kind::Unsat; }

    static Verdict make_unsat() { return {}; }
    static Verdict resource_out(Reason why) { return {Kind::ResourceOut, why, {}, {}}; }
};

inline const char* verdict_name(const Verdict& v) {
    switch (v.kind) {
        case Verdict::Kind::Sat: return "sat";
        case Verdict::Kind::Unsat: return "unsat";
        case Verdict::Kind::ResourceOut: return "resource_out";
    }
    return "?";
}

inline const char* reason_name(Verdict::Reason r) {
    switch (r) {
        case Verdict::Reason::None: return "none";
        case Verdict::Reason::Timeout: return "timeout";
        case Verdict::Reason::SplitLimit: return "split_limit";
    }
    return "?";
}

struct SolveResult {
    Verdict verdict;
    SolveStats stats;
};

/// Pair ids (ascending) whose assignment breaks f = max(0, b).
inline std::vector<std::size_t> check_relus(std::span<const Rational> assignment, std::span<const ReluPair> pairs) {
    std::vector<std::size_t> violated;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const Rational& b = assignment[pairs[i].b];
        const Rational& f = assignment[pairs[i].f];
        const bool ok = sgn(b) > 0 ? f == b : sgn(f) == 0;
        if (!ok) violated.push_back(i);
    }
    return violated;
}

enum class FixResult { Fixed, NotFixed };

/// Repairs a violated pair by moving one of its nonbasic variables:
/// f := max(0, b) if f is nonbasic and that value is in f's bounds, else
/// b := f if b is nonbasic, f > 0, and that value is in b's bounds.
/// `violations` is incremented either way.
inline FixResult try_fix(Tableau& t, const ReluPair& pair, unsigned& violations) {
    ++violations;
    auto in_bounds = [&t](VarId v, const Rational& x) {
        return !(t.lower(v) && x < *t.lower(v)) && !(t.upper(v) && x > *t.upper(v));
    };
    if (!t.is_basic(pair.f)) {
        Rational target = sgn(t.value(pair.b)) > 0 ? t.value(pair.b) : Rational(0);
        if (in_bounds(pair.f, target)) {
            t.update_nonbasic(pair.f, target);
            return FixResult::Fixed;
        }
    }
    if (!t.is_basic(pair.b)) {
        const Rational f = t.value(pair.f);
        if (sgn(f) > 0 && in_bounds(pair.b, f)) {
            t.update_nonbasic(pair.b, f);
            return FixResult::Fixed;
        }
    }
    return FixResult::NotFixed;
}

enum class BacktrackResult { Flipped, Exhausted };

/// One solve call: owns the tableau, per-pair phases and counters, and the
/// decision trail.
class ReluSearch {
public:
    ReluSearch(const VerificationProblem& problem, SolveConfig config = {})
        : problem_(problem),
          config_(std::move(config)),
          tableau_(problem),
          phases_(problem.pairs.size()),
          violations_(problem.pairs.size(), 0) {
        if (config_.split_threshold == 0) throw std::invalid_argument("split_threshold must be at least 1");
        tableau_.set_trace(config_.trace);
    }

    Tableau& tableau() { return tableau_; }
    const Tableau& tableau() const { return tableau_; }
    const Trail& trail() const { return trail_; }
    const std::vector<PairPhase>& phases() const { return phases_; }
    const std::vector<unsigned>& violations() const { return violations_; }
    const SolveStats& stats() const { return stats_; }

    /// Called right after a backtrack restores a frame, before the remaining
    /// phase is asserted, with the frame's stored snapshot.
    void on_restore(std::function<void(const TrailFrame&, const Tableau&)> hook) { restore_hook_ = std::move(hook); }

    /// Propagates bounds to a fixpoint over the tableau's current bounds and
    /// fixes every undecided pair whose pre-activation sign is forced.
    AssertResult propagate() {
        while (true) {
            std::vector<Bound> lower = tableau_.lower_bounds();
            std::vector<Bound> upper = tableau_.upper_bounds();
            if (propagate_bounds(problem_.rows, problem_.pairs, lower, upper) == PropagationStatus::Infeasible) {
                return AssertResult::ImmediateConflict;
            }
            for (VarId v = 0; v < lower.size(); ++v) {
                if (lower[v] && tableau_.assert_bound(v, BoundKind::Lower, *lower[v]) == AssertResult::ImmediateConflict) {
                    return AssertResult::ImmediateConflict;
                }
                if (upper[v] && tableau_.assert_bound(v, BoundKind::Upper, *upper[v]) == AssertResult::ImmediateConflict) {
                    return AssertResult::ImmediateConflict;
                }
            }
            bool fixed_any = false;
            for (std::size_t i = 0; i < problem_.pairs.size(); ++i) {
                if (phases_[i].phase != Phase::Undecided) continue;
                const FixablePhase forced =
                    fixable_phase(problem_.pairs[i], tableau_.lower_bounds(), tableau_.upper_bounds());
                if (forced == FixablePhase::None) continue;
                const Phase phase = forced == FixablePhase::Active ? Phase::Active : Phase::Inactive;
                phases_[i] = {phase, PhaseOrigin::Propagated};
                ++stats_.propagated_fixes;
                if (assert_phase_bounds(problem_.pairs[i], phase) == AssertResult::ImmediateConflict) {
                    return AssertResult::ImmediateConflict;
                }
                fixed_any = true;
            }
            if (!fixed_any) return AssertResult::Ok;
        }
    }

    /// Pushes a decision frame for an undecided pair, then asserts
    /// `first`'s bounds and propagates.
    AssertResult split(std::size_t pair_id, Phase first) {
        if (phases_[pair_id].phase != Phase::Undecided) throw std::logic_error("split on a decided pair");
        const Phase second = first == Phase::Active ? Phase::Inactive : Phase::Active;
        trail_.push_back({pair_id, first, second, tableau_.snapshot(), phases_});
        ++stats_.splits;
        stats_.max_trail_depth = std::max<std::uint64_t>(stats_.max_trail_depth, trail_.size());
        trace("split", pair_id, first);
        return enter_phase(pair_id, first);
    }

    /// Pops frames until one still has an untried phase, restores its
    /// snapshot, and asserts that phase.
    BacktrackResult backtrack() {
        ++stats_.backtracks;
        while (!trail_.empty()) {
            TrailFrame& frame = trail_.back();
            if (!frame.remaining) {
                trail_.pop_back();
                continue;
            }
            tableau_.restore(frame.bounds);
            phases_ = frame.phases;
            if (restore_hook_) restore_hook_(frame, tableau_);
            const Phase phase = *frame.remaining;
            frame.remaining.reset();
            frame.tried = phase;
            trace("flip", frame.pair, phase);
            if (enter_phase(frame.pair, phase) == AssertResult::Ok) return BacktrackResult::Flipped;
        }
        return BacktrackResult::Exhausted;
    }

    SolveResult run() {
        const auto start = std::chrono::steady_clock::now();
        auto finish = [&](Verdict v) {
            stats_.pivots = tableau_.pivot_count();
            stats_.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            return SolveResult{std::move(v), stats_};
        };
        const auto deadline = start + config_.timeout;

        if (propagate() == AssertResult::ImmediateConflict) return finish(Verdict::make_unsat());
        while (true) {
            if (std::chrono::steady_clock::now() > deadline) {
                return finish(Verdict::resource_out(Verdict::Reason::Timeout));
            }
            ++stats_.lp_checks;
            if (!tableau_.check_feasible().feasible()) {
                if (backtrack() == BacktrackResult::Exhausted) return finish(Verdict::make_unsat());
                continue;
            }
            const auto violated = check_relus(tableau_.assignment(), problem_.pairs);
            if (violated.empty()) return finish(sat_verdict());

            const std::size_t p = violated.front();
            if (phases_[p].phase != Phase::Undecided) {
                throw std::logic_error("decided pair violated under a feasible assignment");
            }
            if (violations_[p] >= config_.split_threshold) {
                if (config_.max_splits && stats_.splits >= *config_.max_splits) {
                    return finish(Verdict::resource_out(Verdict::Reason::SplitLimit));
                }
                const Phase first = sgn(tableau_.value(problem_.pairs[p].b)) >= 0 ? Phase::Active : Phase::Inactive;
                if (split(p, first) == AssertResult::ImmediateConflict &&
                    backtrack() == BacktrackResult::Exhausted) {
                    return finish(Verdict::make_unsat());
                }
                continue;
            }
            ++stats_.fix_attempts;
            if (try_fix(tableau_, problem_.pairs[p], violations_[p]) == FixResult::Fixed) ++stats_.fixes;
        }
    }

private:
    AssertResult assert_phase_bounds(const ReluPair& pair, Phase phase) {
        const Rational zero = 0;
        if (phase == Phase::Active) {
            if (tableau_.assert_bound(pair.b, BoundKind::Lower, zero) == AssertResult::ImmediateConflict) {
                return AssertResult::ImmediateConflict;
            }
            if (tableau_.assert_bound(pair.d, BoundKind::Lower, zero) == AssertResult::ImmediateConflict) {
                return AssertResult::ImmediateConflict;
            }
            return tableau_.assert_bound(pair.d, BoundKind::Upper, zero);
        }
        if (tableau_.assert_bound(pair.b, BoundKind::Upper, zero) == AssertResult::ImmediateConflict) {
            return AssertResult::ImmediateConflict;
        }
        if (tableau_.assert_bound(pair.f, BoundKind::Lower, zero) == AssertResult::ImmediateConflict) {
            return AssertResult::ImmediateConflict;
        }
        return tableau_.assert_bound(pair.f, BoundKind::Upper, zero);
    }

    AssertResult enter_phase(std::size_t pair_id, Phase phase) {
        phases_[pair_id] = {phase, PhaseOrigin::SplitDecision};
        if (assert_phase_bounds(problem_.pairs[pair_id], phase) == AssertResult::ImmediateConflict) {
            return AssertResult::ImmediateConflict;
        }
        return propagate();
    }

    Verdict sat_verdict() const {
        Verdict v;
        v.kind = Verdict::Kind::Sat;
        v.assignment = tableau_.assignment();
        for (VarId x : problem_.inputs) v.counterexample.push_back(v.assignment[x]);
        return v;
    }

    void trace(const char* what, std::size_t pair_id, Phase phase) const {
        if (config_.trace) *config_.trace << what << " pair " << pair_id << ' ' << phase_name(phase) << "\n";
    }

    const VerificationProblem& problem_;
    SolveConfig config_;
    Tableau tableau_;
    std::vector<PairPhase> phases_;
    std::vector<unsigned> violations_;
    Trail trail_;
    SolveStats stats_;
    std::function<void(const TrailFrame&, const Tableau&)> restore_hook_;
};

inline SolveResult solve(const VerificationProblem& problem, const SolveConfig& config = {}) {
    ReluSearch search(problem, config);
    return search.run();
}

/// True iff the assignment satisfies every row, every bound, and every
/// ReLU pair exactly.
inline bool satisfies(const VerificationProblem& problem, std::span<const Rational> assignment) {
    if (assignment.size() != problem.num_vars()) return false;
    for (const auto& row : problem.rows) {
        if (sgn(row.residual(assignment)) != 0) return false;
    }
    for (VarId v = 0; v < problem.num_vars(); ++v) {
        if (problem.lower[v] && assignment[v] < *problem.lower[v]) return false;
        if (problem.upper[v] && assignment[v] > *problem.upper[v]) return false;
    }
    return check_relus(assignment, problem.pairs).empty();
}

struct Validation {
    bool pass = false;
    std::string reason;
};

/// Replays the counterexample through the network and checks the network's
/// input box, every property atom, and agreement with the assignment's
/// output variables, all exactly.
inline Validation validate_counterexample(const Network& net, const Property& prop, const VerificationProblem& problem,
                                          const Verdict& verdict) {
    if (!verdict.sat()) return {false, "verdict is not sat"};
    const auto& input = verdict.counterexample;
    if (input.size() != net.input_size()) return {false, "counterexample has the wrong arity"};
    for (std::size_t i = 0; i < input.size(); ++i) {
        if ((net.input_lower[i] && input[i] < *net.input_lower[i]) ||
            (net.input_upper[i] && input[i] > *net.input_upper[i])) {
            return {false, "x" + std::to_string(i) + " lies outside the network's input range"};
        }
    }
    const auto outputs = evaluate(net, input);
    if (verdict.assignment.size() != problem.num_vars()) return {false, "assignment has the wrong size"};
    for (std::size_t j = 0; j < outputs.size(); ++j) {
        if (verdict.assignment[problem.outputs[j]] != outputs[j]) {
            return {false, "y" + std::to_string(j) + " in the assignment differs from the forward pass"};
        }
    }
    for (std::size_t i = 0; i < input.size(); ++i) {
        if (verdict.assignment[problem.inputs[i]] != input[i]) {
            return {false, "x" + std::to_string(i) + " in the assignment differs from the counterexample"};
        }
    }
    for (std::size_t a = 0; a < prop.atoms.size(); ++a) {
        if (!prop.atoms[a].holds(input, outputs)) {
            return {false, "atom " + std::to_string(a + 1) + " (" + to_string(prop.atoms[a]) + ") does not hold"};
        }
    }
    return {true, {}};
}

}  // namespace lazyrelu
