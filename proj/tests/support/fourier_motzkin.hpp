#pragma once

// Independent feasibility oracle for small linear systems: Gaussian
// substitution of equalities followed by Fourier-Motzkin elimination of
// the remaining inequalities. Shares only the Rational type with the
// library; none of the simplex code is used.

#include "lazyrelu/problem.hpp"

#include <map>
#include <vector>

namespace lazyrelu::testing {

struct FmConstraint {
    std::vector<Rational> coeffs;  // sum(coeffs[i] * x_i) <= rhs, or == rhs
    Rational rhs;
};

struct FmSystem {
    std::size_t num_vars = 0;
    std::vector<FmConstraint> equalities;
    std::vector<FmConstraint> inequalities;

    void add_le(std::vector<Rational> c, Rational rhs) { inequalities.push_back({std::move(c), std::move(rhs)}); }
    void add_eq(std::vector<Rational> c, Rational rhs) { equalities.push_back({std::move(c), std::move(rhs)}); }

    void add_lower(std::size_t v, const Rational& value) {
        std::vector<Rational> c(num_vars);
        c[v] = -1;
        add_le(std::move(c), -value);
    }
    void add_upper(std::size_t v, const Rational& value) {
        std::vector<Rational> c(num_vars);
        c[v] = 1;
        add_le(std::move(c), value);
    }
    void add_fixed(std::size_t v, const Rational& value) {
        std::vector<Rational> c(num_vars);
        c[v] = 1;
        add_eq(std::move(c), value);
    }
};

/// Rows and bounds of the problem; ReLU pairs are ignored.
inline FmSystem fm_from_problem(const VerificationProblem& p) {
    FmSystem s;
    s.num_vars = p.num_vars();
    for (const auto& row : p.rows) {
        std::vector<Rational> c(s.num_vars);
        for (const auto& t : row.terms) c[t.var] += t.coefficient;
        s.add_eq(std::move(c), row.constant);
    }
    for (VarId v = 0; v < p.num_vars(); ++v) {
        if (p.lower[v] && p.upper[v] && *p.lower[v] == *p.upper[v]) {
            s.add_fixed(v, *p.lower[v]);
            continue;
        }
        if (p.lower[v]) s.add_lower(v, *p.lower[v]);
        if (p.upper[v]) s.add_upper(v, *p.upper[v]);
    }
    return s;
}

namespace detail {

inline void normalize(FmConstraint& c) {
    // Scale so the first nonzero coefficient has magnitude 1 (keeps the
    // duplicate filter effective).
    for (const auto& a : c.coeffs) {
        if (sgn(a) != 0) {
            Rational scale = abs(a);
            for (auto& x : c.coeffs) x /= scale;
            c.rhs /= scale;
            return;
        }
    }
}

// Left-hand side only; among parallel constraints the smallest rhs wins.
inline std::string key(const FmConstraint& c) {
    std::string k;
    for (const auto& a : c.coeffs) k += a.get_str() + ",";
    return k;
}

}  // namespace detail

inline bool fm_feasible(FmSystem s) {
    const std::size_t n = s.num_vars;
    // Substitute equalities.
    while (!s.equalities.empty()) {
        FmConstraint eq = std::move(s.equalities.back());
        s.equalities.pop_back();
        std::size_t pivot = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (sgn(eq.coeffs[i]) != 0) {
                pivot = i;
                break;
            }
        }
        if (pivot == n) {
            if (sgn(eq.rhs) != 0) return false;
            continue;
        }
        auto eliminate = [&](FmConstraint& c) {
            if (sgn(c.coeffs[pivot]) == 0) return;
            Rational factor = c.coeffs[pivot] / eq.coeffs[pivot];
            for (std::size_t i = 0; i < n; ++i) c.coeffs[i] -= factor * eq.coeffs[i];
            c.rhs -= factor * eq.rhs;
        };
        for (auto& c : s.equalities) eliminate(c);
        for (auto& c : s.inequalities) eliminate(c);
    }
    std::vector<FmConstraint> current = std::move(s.inequalities);
    std::vector<bool> eliminated(n, false);
    for (std::size_t round = 0; round < n; ++round) {
        // Eliminate the variable producing the fewest new constraints.
        std::size_t v = n;
        std::size_t best = 0;
        for (std::size_t cand = 0; cand < n; ++cand) {
            if (eliminated[cand]) continue;
            std::size_t np = 0, nn = 0;
            for (const auto& c : current) {
                const int sign = sgn(c.coeffs[cand]);
                np += sign > 0;
                nn += sign < 0;
            }
            if (v == n || np * nn < best) {
                v = cand;
                best = np * nn;
            }
        }
        eliminated[v] = true;
        std::vector<FmConstraint> pos, neg, next;
        for (auto& c : current) {
            const int sign = sgn(c.coeffs[v]);
            if (sign > 0) {
                pos.push_back(std::move(c));
            } else if (sign < 0) {
                neg.push_back(std::move(c));
            } else {
                next.push_back(std::move(c));
            }
        }
        for (const auto& p : pos) {
            for (const auto& q : neg) {
                // p/p_v - q/q_v eliminates v (q_v < 0).
                FmConstraint c;
                c.coeffs.resize(n);
                const Rational& a = p.coeffs[v];
                const Rational b = -q.coeffs[v];
                for (std::size_t i = 0; i < n; ++i) c.coeffs[i] = p.coeffs[i] / a + q.coeffs[i] / b;
                c.coeffs[v] = 0;
                c.rhs = p.rhs / a + q.rhs / b;
                next.push_back(std::move(c));
            }
        }
        std::map<std::string, std::size_t> seen;
        current.clear();
        for (auto& c : next) {
            bool constant = true;
            for (const auto& a : c.coeffs) constant = constant && sgn(a) == 0;
            if (constant) {
                if (sgn(c.rhs) < 0) return false;
                continue;
            }
            detail::normalize(c);
            auto [it, fresh] = seen.emplace(detail::key(c), current.size());
            if (fresh) {
                current.push_back(std::move(c));
            } else if (c.rhs < current[it->second].rhs) {
                current[it->second].rhs = c.rhs;
            }
        }
    }
    for (const auto& c : current) {
        if (sgn(c.rhs) < 0) return false;
    }
    return true;
}

/// Feasibility of the problem with every pair fixed by `active` (true =
/// active phase), decided by elimination.
inline bool fm_pattern_feasible(const VerificationProblem& p, const std::vector<bool>& active) {
    FmSystem s = fm_from_problem(p);
    for (std::size_t i = 0; i < p.pairs.size(); ++i) {
        const auto& pair = p.pairs[i];
        if (active[i]) {
            s.add_lower(pair.b, 0);
            s.add_fixed(pair.d, 0);
        } else {
            s.add_upper(pair.b, 0);
            s.add_fixed(pair.f, 0);
        }
    }
    return fm_feasible(std::move(s));
}

/// Exhaustive phase enumeration with elimination per pattern.
inline bool fm_problem_sat(const VerificationProblem& p) {
    const std::size_t r = p.pairs.size();
    for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << r); ++pattern) {
        std::vector<bool> active(r);
        for (std::size_t i = 0; i < r; ++i) active[i] = (pattern >> i) & 1U;
        if (fm_pattern_feasible(p, active)) return true;
    }
    return false;
}

}  // namespace lazyrelu::testing
