#pragma once

// Lowering of (Network, Property) into a flat verification problem:
// variables with bounds, linear equality rows, and ReLU pairs. Also the
// interval bound propagation used before and during search.

#include "lazyrelu/network.hpp"
#include "lazyrelu/property.hpp"
#include "lazyrelu/rational.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

namespace lazyrelu {

using VarId = std::size_t;

enum class VarRole { Input, PreActivation, PostActivation, Slack, Output, Auxiliary };

inline const char* role_name(VarRole role) {
    switch (role) {
        case VarRole::Input: return "input";
        case VarRole::PreActivation: return "preact";
        case VarRole::PostActivation: return "postact";
        case VarRole::Slack: return "slack";
        case VarRole::Output: return "output";
        case VarRole::Auxiliary: return "aux";
    }
    return "?";
}

struct VarInfo {
    VarRole role = VarRole::Input;
    std::size_t layer = 0;  // hidden layer (1-based) for b/f/d
    std::size_t index = 0;  // neuron, input, output, or atom index

    std::string name() const {
        switch (role) {
            case VarRole::Input: return "x" + std::to_string(index);
            case VarRole::Output: return "y" + std::to_string(index);
            case VarRole::Auxiliary: return "a" + std::to_string(index);
            case VarRole::PreActivation: return "b" + std::to_string(layer) + "_" + std::to_string(index);
            case VarRole::PostActivation: return "f" + std::to_string(layer) + "_" + std::to_string(index);
            case VarRole::Slack: return "d" + std::to_string(layer) + "_" + std::to_string(index);
        }
        return "?";
    }
};

struct RowTerm {
    VarId var = 0;
    Rational coefficient;
};

/// sum(terms) = constant. `defined` is the variable the row was introduced
/// for; it has a nonzero coefficient in `terms`.
struct LinearRow {
    std::vector<RowTerm> terms;
    Rational constant;
    VarId defined = 0;

    Rational residual(std::span<const Rational> values) const {
        Rational sum = 0;
        for (const auto& t : terms) sum += t.coefficient * values[t.var];
        return sum - constant;
    }
};

/// f = max(0, b), with slack d = f - b fixed by its own row.
struct ReluPair {
    VarId b = 0;
    VarId f = 0;
    VarId d = 0;
};

/// Bounds may be stored crossed when the property itself is contradictory;
/// propagate_bounds (and the solver) report that as infeasibility.
struct VerificationProblem {
    std::vector<VarInfo> vars;
    std::vector<Bound> lower;
    std::vector<Bound> upper;
    std::vector<LinearRow> rows;
    std::vector<ReluPair> pairs;
    std::vector<VarId> inputs;
    std::vector<VarId> outputs;

    std::size_t num_vars() const { return vars.size(); }

    VarId add_var(VarInfo info, Bound lo = std::nullopt, Bound hi = std::nullopt) {
        vars.push_back(info);
        lower.push_back(std::move(lo));
        upper.push_back(std::move(hi));
        return vars.size() - 1;
    }
};

inline bool tighten_lower(std::vector<Bound>& lower, VarId v, const Rational& value) {
    if (lower[v] && *lower[v] >= value) return false;
    lower[v] = value;
    return true;
}

inline bool tighten_upper(std::vector<Bound>& upper, VarId v, const Rational& value) {
    if (upper[v] && *upper[v] <= value) return false;
    upper[v] = value;
    return true;
}

inline bool bounds_cross(const Bound& lo, const Bound& hi) { return lo && hi && *lo > *hi; }

/// Builds the problem. Variable order: inputs, then (b, f, d) per hidden
/// neuron layer by layer, then outputs, then one auxiliary per multi-term
/// atom. Rows appear in the same topological order.
inline VerificationProblem encode(const Network& net, const Property& prop) {
    net.validate();
    prop.check_against(net);

    VerificationProblem p;
    for (std::size_t i = 0; i < net.input_size(); ++i) {
        p.inputs.push_back(p.add_var({VarRole::Input, 0, i}, net.input_lower[i], net.input_upper[i]));
    }

    std::vector<VarId> previous = p.inputs;
    for (std::size_t k = 0; k < net.layer_count(); ++k) {
        const bool hidden = k + 1 < net.layer_count() || net.relu_output;
        const Matrix& w = net.weights[k];
        std::vector<VarId> current;
        if (hidden) {
            const std::size_t layer = k + 1;
            std::vector<ReluPair> layer_pairs;
            for (std::size_t r = 0; r < w.rows; ++r) {
                ReluPair pair;
                pair.b = p.add_var({VarRole::PreActivation, layer, r});
                pair.f = p.add_var({VarRole::PostActivation, layer, r}, Rational(0));
                pair.d = p.add_var({VarRole::Slack, layer, r});
                layer_pairs.push_back(pair);
            }
            // b - W prev = bias
            for (std::size_t r = 0; r < w.rows; ++r) {
                LinearRow row;
                row.defined = layer_pairs[r].b;
                row.terms.push_back({layer_pairs[r].b, Rational(1)});
                for (std::size_t c = 0; c < w.cols; ++c) {
                    if (sgn(w.at(r, c)) != 0) row.terms.push_back({previous[c], -w.at(r, c)});
                }
                row.constant = net.biases[k][r];
                p.rows.push_back(std::move(row));
            }
            // d - f + b = 0
            for (const auto& pair : layer_pairs) {
                LinearRow row;
                row.defined = pair.d;
                row.terms = {{pair.d, Rational(1)}, {pair.f, Rational(-1)}, {pair.b, Rational(1)}};
                row.constant = 0;
                p.rows.push_back(std::move(row));
                p.pairs.push_back(pair);
                current.push_back(pair.f);
            }
        } else {
            for (std::size_t r = 0; r < w.rows; ++r) {
                const VarId y = p.add_var({VarRole::Output, 0, r});
                LinearRow row;
                row.defined = y;
                row.terms.push_back({y, Rational(1)});
                for (std::size_t c = 0; c < w.cols; ++c) {
                    if (sgn(w.at(r, c)) != 0) row.terms.push_back({previous[c], -w.at(r, c)});
                }
                row.constant = net.biases[k][r];
                p.rows.push_back(std::move(row));
                current.push_back(y);
            }
        }
        previous = std::move(current);
    }
    if (net.relu_output) {
        // Outputs are the last layer's post-activations, copied through y - f = 0.
        for (std::size_t r = 0; r < previous.size(); ++r) {
            const VarId y = p.add_var({VarRole::Output, 0, r});
            p.rows.push_back({{{y, Rational(1)}, {previous[r], Rational(-1)}}, Rational(0), y});
            p.outputs.push_back(y);
        }
    } else {
        p.outputs = previous;
    }

    auto var_of = [&p](const VarRef& ref) {
        return ref.kind == VarRef::Kind::Input ? p.inputs[ref.index] : p.outputs[ref.index];
    };
    auto apply = [&p](VarId v, Relation rel, const Rational& value) {
        if (rel != Relation::GreaterEq) tighten_upper(p.upper, v, value);
        if (rel != Relation::LessEq) tighten_lower(p.lower, v, value);
    };

    std::size_t aux_count = 0;
    for (const auto& atom : prop.atoms) {
        if (atom.terms.size() == 1 && sgn(atom.terms[0].coefficient) != 0) {
            const Term& t = atom.terms[0];
            Relation rel = atom.relation;
            if (sgn(t.coefficient) < 0 && rel != Relation::Equal) {
                rel = rel == Relation::LessEq ? Relation::GreaterEq : Relation::LessEq;
            }
            apply(var_of(t.var), rel, atom.constant / t.coefficient);
            continue;
        }
        // a - sum(c_i v_i) = 0, then bound a.
        const VarId a = p.add_var({VarRole::Auxiliary, 0, aux_count++});
        LinearRow row;
        row.defined = a;
        row.terms.push_back({a, Rational(1)});
        for (const auto& t : atom.terms) {
            if (sgn(t.coefficient) != 0) row.terms.push_back({var_of(t.var), -t.coefficient});
        }
        row.constant = 0;
        p.rows.push_back(std::move(row));
        apply(a, atom.relation, atom.constant);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Interval propagation

enum class PropagationStatus { Ok, Infeasible };

namespace detail {

// Interval of sum(c_i * v_i) over the given terms, skipping `skip`.
inline std::pair<Bound, Bound> row_interval(const LinearRow& row, VarId skip, const std::vector<Bound>& lower,
                                            const std::vector<Bound>& upper) {
    Rational lo = 0, hi = 0;
    bool lo_finite = true, hi_finite = true;
    for (const auto& t : row.terms) {
        if (t.var == skip) continue;
        const bool positive = sgn(t.coefficient) > 0;
        const Bound& for_lo = positive ? lower[t.var] : upper[t.var];
        const Bound& for_hi = positive ? upper[t.var] : lower[t.var];
        if (lo_finite) {
            if (for_lo) {
                lo += t.coefficient * *for_lo;
            } else {
                lo_finite = false;
            }
        }
        if (hi_finite) {
            if (for_hi) {
                hi += t.coefficient * *for_hi;
            } else {
                hi_finite = false;
            }
        }
    }
    return {lo_finite ? Bound(lo) : std::nullopt, hi_finite ? Bound(hi) : std::nullopt};
}

}  // namespace detail

/// Tightens `lower`/`upper` in place to a fixpoint of forward row
/// propagation (each row bounds its defined variable) and the ReLU rules
/// f in [max(0, lo b), max(0, hi b)], b <= hi f, lo f > 0 => b >= lo f,
/// d >= 0. Never widens a bound.
inline PropagationStatus propagate_bounds(const std::vector<LinearRow>& rows, const std::vector<ReluPair>& pairs,
                                          std::vector<Bound>& lower, std::vector<Bound>& upper) {
    std::unordered_map<VarId, std::size_t> pair_of_b;
    for (std::size_t i = 0; i < pairs.size(); ++i) pair_of_b.emplace(pairs[i].b, i);

    auto crossed = [&](VarId v) { return bounds_cross(lower[v], upper[v]); };
    for (std::size_t v = 0; v < lower.size(); ++v) {
        if (crossed(v)) return PropagationStatus::Infeasible;
    }

    auto relu_rules = [&](const ReluPair& pair, bool& changed) {
        const Rational zero = 0;
        changed |= tighten_lower(lower, pair.f, zero);
        changed |= tighten_lower(lower, pair.d, zero);
        if (upper[pair.b]) changed |= tighten_upper(upper, pair.f, std::max(zero, *upper[pair.b]));
        if (lower[pair.b]) changed |= tighten_lower(lower, pair.f, std::max(zero, *lower[pair.b]));
        if (upper[pair.f]) changed |= tighten_upper(upper, pair.b, *upper[pair.f]);
        if (lower[pair.f] && sgn(*lower[pair.f]) > 0) changed |= tighten_lower(lower, pair.b, *lower[pair.f]);
        return !(crossed(pair.b) || crossed(pair.f) || crossed(pair.d));
    };

    constexpr int kMaxPasses = 64;
    for (int pass = 0; pass < kMaxPasses; ++pass) {
        bool changed = false;
        for (const auto& row : rows) {
            Rational coefficient = 0;
            for (const auto& t : row.terms) {
                if (t.var == row.defined) coefficient = t.coefficient;
            }
            if (sgn(coefficient) == 0) continue;
            auto [rest_lo, rest_hi] = detail::row_interval(row, row.defined, lower, upper);
            // coefficient * v = constant - rest
            Bound v_lo, v_hi;
            if (sgn(coefficient) > 0) {
                if (rest_hi) v_lo = (row.constant - *rest_hi) / coefficient;
                if (rest_lo) v_hi = (row.constant - *rest_lo) / coefficient;
            } else {
                if (rest_lo) v_lo = (row.constant - *rest_lo) / coefficient;
                if (rest_hi) v_hi = (row.constant - *rest_hi) / coefficient;
            }
            if (v_lo) changed |= tighten_lower(lower, row.defined, *v_lo);
            if (v_hi) changed |= tighten_upper(upper, row.defined, *v_hi);
            if (crossed(row.defined)) return PropagationStatus::Infeasible;
            if (auto it = pair_of_b.find(row.defined); it != pair_of_b.end()) {
                if (!relu_rules(pairs[it->second], changed)) return PropagationStatus::Infeasible;
            }
        }
        for (const auto& pair : pairs) {
            if (!relu_rules(pair, changed)) return PropagationStatus::Infeasible;
        }
        if (!changed) break;
    }
    return PropagationStatus::Ok;
}

/// Returns the tightened problem, or nullopt when some variable's bounds
/// cross (the query is infeasible).
inline std::optional<VerificationProblem> propagate_bounds(const VerificationProblem& problem) {
    VerificationProblem tightened = problem;
    if (propagate_bounds(tightened.rows, tightened.pairs, tightened.lower, tightened.upper) ==
        PropagationStatus::Infeasible) {
        return std::nullopt;
    }
    return tightened;
}

enum class FixablePhase { None, Active, Inactive };

inline FixablePhase fixable_phase(const ReluPair& pair, const std::vector<Bound>& lower,
                                  const std::vector<Bound>& upper) {
    if (lower[pair.b] && sgn(*lower[pair.b]) >= 0) return FixablePhase::Active;
    if (upper[pair.b] && sgn(*upper[pair.b]) <= 0) return FixablePhase::Inactive;
    return FixablePhase::None;
}

/// Plain-text dump: a `var` line per variable (id, name, role, bounds),
/// a `row` line per equality, a `pair` line per ReLU pair.
inline void dump_problem(const VerificationProblem& p, std::ostream& out) {
    out << "vars " << p.num_vars() << "\n";
    for (VarId v = 0; v < p.num_vars(); ++v) {
        out << "var " << v << ' ' << p.vars[v].name() << ' ' << role_name(p.vars[v].role) << " ["
            << bound_to_string(p.lower[v], true) << ", " << bound_to_string(p.upper[v], false) << "]\n";
    }
    out << "rows " << p.rows.size() << "\n";
    for (std::size_t r = 0; r < p.rows.size(); ++r) {
        out << "row " << r << ' ' << p.vars[p.rows[r].defined].name() << ':';
        for (const auto& t : p.rows[r].terms) out << ' ' << to_exact_string(t.coefficient) << '*' << p.vars[t.var].name();
        out << " = " << to_exact_string(p.rows[r].constant) << "\n";
    }
    out << "pairs " << p.pairs.size() << "\n";
    for (std::size_t i = 0; i < p.pairs.size(); ++i) {
        const auto& pair = p.pairs[i];
        out << "pair " << i << ' ' << p.vars[pair.b].name() << ' ' << p.vars[pair.f].name() << ' '
            << p.vars[pair.d].name() << "\n";
    }
}

}  // namespace lazyrelu
