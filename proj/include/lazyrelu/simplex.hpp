#pragma once

// Bound-satisfaction simplex over exact rationals. There is no objective:
// check_feasible looks for any assignment meeting every row and every
// variable bound, pivoting with Bland's minimal-index rule.

#include "lazyrelu/problem.hpp"
#include "lazyrelu/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace lazyrelu {

enum class BoundKind { Lower, Upper };

enum class AssertResult { Ok, ImmediateConflict };

struct FeasResult {
    enum class Status { Feasible, Infeasible };
    Status status = Status::Feasible;
    VarId witness = 0;  // the unrepairable basic variable when Infeasible

    bool feasible() const { return status == Status::Feasible; }
};

struct BoundsSnapshot {
    std::vector<Bound> lower;
    std::vector<Bound> upper;

    bool operator==(const BoundsSnapshot&) const = default;
};

class Tableau {
public:
    /// Each row's defined variable starts basic; everything else starts
    /// nonbasic at its lower bound, else its upper bound, else zero.
    explicit Tableau(const VerificationProblem& problem)
        : problem_rows_(problem.rows),
          lower_(problem.lower),
          upper_(problem.upper),
          value_(problem.num_vars()),
          row_of_(problem.num_vars(), kNonbasic) {
        names_.reserve(problem.num_vars());
        for (const auto& info : problem.vars) names_.push_back(info.name());
        for (const auto& row : problem.rows) add_problem_row(row);
        for (VarId v = 0; v < num_vars(); ++v) {
            if (is_basic(v)) continue;
            if (lower_[v]) {
                value_[v] = *lower_[v];
            } else if (upper_[v]) {
                value_[v] = *upper_[v];
            }
        }
        recompute_basics();
    }

    std::size_t num_vars() const { return value_.size(); }
    std::size_t num_rows() const { return rows_.size(); }
    bool is_basic(VarId v) const { return row_of_[v] != kNonbasic; }
    const Rational& value(VarId v) const { return value_[v]; }
    const std::vector<Rational>& assignment() const { return value_; }
    const Bound& lower(VarId v) const { return lower_[v]; }
    const Bound& upper(VarId v) const { return upper_[v]; }
    const std::vector<Bound>& lower_bounds() const { return lower_; }
    const std::vector<Bound>& upper_bounds() const { return upper_; }
    std::uint64_t pivot_count() const { return pivots_; }
    const std::string& name(VarId v) const { return names_[v]; }

    void set_trace(std::ostream* trace) { trace_ = trace; }

    bool within_bounds(VarId v) const {
        return !(lower_[v] && value_[v] < *lower_[v]) && !(upper_[v] && value_[v] > *upper_[v]);
    }

    /// True iff the current assignment satisfies every original problem row.
    bool rows_hold() const {
        for (const auto& row : problem_rows_) {
            if (sgn(row.residual(value_)) != 0) return false;
        }
        return true;
    }

    /// Coefficient of nonbasic `var` in the row of basic `basic` (zero if absent).
    Rational coefficient(VarId basic, VarId var) const {
        const Row& row = rows_[row_of_[basic]];
        auto it = find_entry(row.entries, var);
        return it != row.entries.end() && it->var == var ? it->coefficient : Rational(0);
    }

    AssertResult assert_bound(VarId v, BoundKind kind, const Rational& value) {
        if (kind == BoundKind::Lower) {
            tighten_lower(lower_, v, value);
        } else {
            tighten_upper(upper_, v, value);
        }
        if (bounds_cross(lower_[v], upper_[v])) return AssertResult::ImmediateConflict;
        snap_nonbasic(v);
        return AssertResult::Ok;
    }

    /// Sets nonbasic v and moves every basic variable along its row.
    void update_nonbasic(VarId v, const Rational& value) {
        if (is_basic(v)) throw std::logic_error("update_nonbasic on basic variable " + names_[v]);
        if ((lower_[v] && value < *lower_[v]) || (upper_[v] && value > *upper_[v])) {
            throw std::logic_error("update_nonbasic would place " + names_[v] + " outside its bounds");
        }
        Rational delta = value - value_[v];
        if (sgn(delta) == 0) return;
        shift_nonbasic(v, delta);
        if (trace_) *trace_ << "update " << names_[v] << " = " << to_exact_string(value_[v]) << "\n";
    }

    FeasResult check_feasible() {
        if (inconsistent_row_) return {FeasResult::Status::Infeasible, *inconsistent_row_};
        for (VarId v = 0; v < num_vars(); ++v) {
            if (bounds_cross(lower_[v], upper_[v])) return {FeasResult::Status::Infeasible, v};
        }
        while (true) {
            VarId leaving = num_vars();
            for (VarId v = 0; v < num_vars(); ++v) {
                if (is_basic(v) && !within_bounds(v)) {
                    leaving = v;
                    break;
                }
            }
            if (leaving == num_vars()) return {FeasResult::Status::Feasible, 0};

            const bool increase = lower_[leaving] && value_[leaving] < *lower_[leaving];
            const Rational target = increase ? *lower_[leaving] : *upper_[leaving];
            const Row& row = rows_[row_of_[leaving]];
            const Entry* entering = nullptr;
            for (const auto& e : row.entries) {
                const bool positive = sgn(e.coefficient) > 0;
                const bool up = positive == increase;  // direction the entering variable must move
                const bool room = up ? !upper_[e.var] || value_[e.var] < *upper_[e.var]
                                     : !lower_[e.var] || value_[e.var] > *lower_[e.var];
                if (room) {
                    entering = &e;
                    break;  // entries are sorted by variable id
                }
            }
            if (!entering) return {FeasResult::Status::Infeasible, leaving};
            pivot_and_update(leaving, entering->var, target);
        }
    }

    BoundsSnapshot snapshot() const { return {lower_, upper_}; }

    void restore(const BoundsSnapshot& snap) {
        lower_ = snap.lower;
        upper_ = snap.upper;
        for (VarId v = 0; v < num_vars(); ++v) {
            if (!is_basic(v) && !bounds_cross(lower_[v], upper_[v])) snap_nonbasic(v);
        }
    }

    /// Basic and nonbasic variables partition the variable set, every
    /// nonbasic value is in bounds, and every problem row holds.
    bool invariants_hold() const {
        for (VarId v = 0; v < num_vars(); ++v) {
            if (!is_basic(v) && !bounds_cross(lower_[v], upper_[v]) && !within_bounds(v)) return false;
        }
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            if (row_of_[rows_[r].basic] != r) return false;
            for (const auto& e : rows_[r].entries) {
                if (is_basic(e.var)) return false;
            }
        }
        return rows_hold();
    }

private:
    static constexpr std::size_t kNonbasic = static_cast<std::size_t>(-1);

    struct Entry {
        VarId var;
        Rational coefficient;
    };

    // basic = sum(entries) + constant, entries sorted by var, all nonbasic.
    struct Row {
        VarId basic = 0;
        std::vector<Entry> entries;
        Rational constant;
    };

    static std::vector<Entry>::const_iterator find_entry(const std::vector<Entry>& entries, VarId var) {
        return std::lower_bound(entries.begin(), entries.end(), var,
                                [](const Entry& e, VarId v) { return e.var < v; });
    }

    // out = a + scale * b, dropping zeros. Both inputs sorted.
    static std::vector<Entry> combine(const std::vector<Entry>& a, const Rational& scale, const std::vector<Entry>& b) {
        std::vector<Entry> out;
        out.reserve(a.size() + b.size());
        std::size_t i = 0, j = 0;
        while (i < a.size() || j < b.size()) {
            if (j == b.size() || (i < a.size() && a[i].var < b[j].var)) {
                out.push_back(a[i++]);
            } else if (i == a.size() || b[j].var < a[i].var) {
                out.push_back({b[j].var, scale * b[j].coefficient});
                ++j;
            } else {
                Rational c = a[i].coefficient + scale * b[j].coefficient;
                if (sgn(c) != 0) out.push_back({a[i].var, std::move(c)});
                ++i;
                ++j;
            }
        }
        return out;
    }

    // Replaces nonbasic `var` in row `row` by `basic_var = repl + repl_const`
    // solved for var, i.e. var = entries + constant.
    static void substitute(Row& row, VarId var, const std::vector<Entry>& entries, const Rational& constant) {
        auto it = find_entry(row.entries, var);
        if (it == row.entries.end() || it->var != var) return;
        Rational scale = it->coefficient;
        std::vector<Entry> rest(row.entries.begin(), row.entries.end());
        rest.erase(rest.begin() + (it - row.entries.begin()));
        row.entries = combine(rest, scale, entries);
        row.constant += scale * constant;
    }

    void add_problem_row(const LinearRow& source) {
        // Express sum(c_i v_i) - k = 0 over current nonbasic variables.
        std::vector<Entry> form;
        for (const auto& t : source.terms) {
            if (sgn(t.coefficient) == 0) continue;
            std::vector<Entry> single{{t.var, t.coefficient}};
            form = combine(form, Rational(1), single);
        }
        Rational constant = -source.constant;
        for (VarId v = 0; v < num_vars(); ++v) {
            if (!is_basic(v)) continue;
            const Row& def = rows_[row_of_[v]];
            auto it = find_entry(form, v);
            if (it == form.end() || it->var != v) continue;
            Rational scale = it->coefficient;
            std::vector<Entry> rest = form;
            rest.erase(rest.begin() + (it - form.begin()));
            form = combine(rest, scale, def.entries);
            constant += scale * def.constant;
        }
        if (form.empty()) {
            if (sgn(constant) != 0 && !inconsistent_row_) inconsistent_row_ = source.defined;
            return;
        }
        auto chosen = find_entry(form, source.defined);
        if (chosen == form.end() || chosen->var != source.defined) chosen = form.begin();
        const VarId basic = chosen->var;
        const Rational a = chosen->coefficient;
        Row row;
        row.basic = basic;
        for (const auto& e : form) {
            if (e.var != basic) row.entries.push_back({e.var, -e.coefficient / a});
        }
        row.constant = -constant / a;
        for (auto& other : rows_) substitute(other, basic, row.entries, row.constant);
        row_of_[basic] = rows_.size();
        rows_.push_back(std::move(row));
    }

    void recompute_basics() {
        for (const auto& row : rows_) {
            Rational sum = row.constant;
            for (const auto& e : row.entries) sum += e.coefficient * value_[e.var];
            value_[row.basic] = std::move(sum);
        }
    }

    void shift_nonbasic(VarId v, const Rational& delta) {
        value_[v] += delta;
        for (const auto& row : rows_) {
            auto it = find_entry(row.entries, v);
            if (it != row.entries.end() && it->var == v) value_[row.basic] += it->coefficient * delta;
        }
    }

    void snap_nonbasic(VarId v) {
        if (is_basic(v)) return;
        if (lower_[v] && value_[v] < *lower_[v]) {
            update_nonbasic(v, *lower_[v]);
        } else if (upper_[v] && value_[v] > *upper_[v]) {
            update_nonbasic(v, *upper_[v]);
        }
    }

    void pivot_and_update(VarId leaving, VarId entering, const Rational& target) {
        const std::size_t r = row_of_[leaving];
        Rational a = coefficient(leaving, entering);
        Rational theta = (target - value_[leaving]) / a;
        shift_nonbasic(entering, theta);

        // leaving = a * entering + rest + c  =>  entering = (leaving - rest - c) / a
        Row& row = rows_[r];
        std::vector<Entry> entries;
        entries.reserve(row.entries.size());
        for (const auto& e : row.entries) {
            if (e.var == entering) continue;
            entries.push_back({e.var, -e.coefficient / a});
        }
        std::vector<Entry> leaving_entry{{leaving, 1 / a}};
        entries = combine(entries, Rational(1), leaving_entry);
        Rational constant = -row.constant / a;
        for (std::size_t s = 0; s < rows_.size(); ++s) {
            if (s != r) substitute(rows_[s], entering, entries, constant);
        }
        row.basic = entering;
        row.entries = std::move(entries);
        row.constant = std::move(constant);
        row_of_[entering] = r;
        row_of_[leaving] = kNonbasic;
        ++pivots_;
        if (trace_) {
            *trace_ << "pivot leave " << names_[leaving] << " enter " << names_[entering] << " ("
                    << names_[leaving] << " := " << to_exact_string(value_[leaving]) << ")\n";
        }
    }

    std::vector<LinearRow> problem_rows_;
    std::vector<std::string> names_;
    std::vector<Bound> lower_;
    std::vector<Bound> upper_;
    std::vector<Rational> value_;
    std::vector<std::size_t> row_of_;
    std::vector<Row> rows_;
    std::optional<VarId> inconsistent_row_;
    std::uint64_t pivots_ = 0;
    std::ostream* trace_ = nullptr;
};

}  // namespace lazyrelu
