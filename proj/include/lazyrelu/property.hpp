#pragma once

// Conjunctive linear properties over network inputs (x0, x1, ...) and
// outputs (y0, y1, ...). A property is a counterexample query: SAT means an
// input/output pair satisfying every atom exists.

#include "lazyrelu/network.hpp"
#include "lazyrelu/rational.hpp"

#include <cctype>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

namespace lazyrelu {

struct VarRef {
    enum class Kind { Input, Output };
    Kind kind = Kind::Input;
    std::size_t index = 0;

    bool operator==(const VarRef&) const = default;

    std::string name() const { return (kind == Kind::Input ? "x" : "y") + std::to_string(index); }
};

enum class Relation { LessEq, GreaterEq, Equal };

inline const char* relation_symbol(Relation r) {
    switch (r) {
        case Relation::LessEq: return "<=";
        case Relation::GreaterEq: return ">=";
        case Relation::Equal: return "=";
    }
    return "?";
}

struct Term {
    Rational coefficient;
    VarRef var;

    bool operator==(const Term& other) const { return coefficient == other.coefficient && var == other.var; }
};

/// sum(terms) <relation> constant. Variables are unique within an atom.
struct LinearAtom {
    std::vector<Term> terms;
    Relation relation = Relation::LessEq;
    Rational constant;

    bool operator==(const LinearAtom& other) const {
        return terms == other.terms && relation == other.relation && constant == other.constant;
    }

    /// Exact truth value under the given inputs and outputs.
    bool holds(std::span<const Rational> inputs, std::span<const Rational> outputs) const {
        Rational lhs = 0;
        for (const auto& t : terms) {
            const auto& values = t.var.kind == VarRef::Kind::Input ? inputs : outputs;
            lhs += t.coefficient * values[t.var.index];
        }
        switch (relation) {
            case Relation::LessEq: return lhs <= constant;
            case Relation::GreaterEq: return lhs >= constant;
            case Relation::Equal: return lhs == constant;
        }
        return false;
    }
};

struct Property {
    std::vector<LinearAtom> atoms;

    bool operator==(const Property&) const = default;

    /// Throws std::invalid_argument if an atom names a variable outside the
    /// network's input or output range.
    void check_against(const Network& net) const {
        for (std::size_t a = 0; a < atoms.size(); ++a) {
            for (const auto& t : atoms[a].terms) {
                const std::size_t limit =
                    t.var.kind == VarRef::Kind::Input ? net.input_size() : net.output_size();
                if (t.var.index >= limit) {
                    throw std::invalid_argument("atom " + std::to_string(a + 1) + " references " + t.var.name() +
                                                " but the network has only " + std::to_string(limit) +
                                                (t.var.kind == VarRef::Kind::Input ? " inputs" : " outputs"));
                }
            }
        }
    }
};

namespace detail {

class AtomLexer {
public:
    AtomLexer(const std::string& text, std::size_t line) : text_(text), line_(line) {}

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool at_end() {
        skip_space();
        return pos_ >= text_.size();
    }

    char peek() {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool accept(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }

    [[noreturn]] void fail(const std::string& reason) const { throw ParseError(line_, pos_ + 1, reason); }

    /// Digits, '.', and an exponent. A sign is handled by the caller.
    std::optional<Rational> number() {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
            ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E') && pos_ > start) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
                pos_ = p;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            }
        }
        if (pos_ == start) return std::nullopt;
        auto r = parse_decimal(std::string_view(text_).substr(start, pos_ - start));
        if (!r) {
            pos_ = start;
            fail("malformed number");
        }
        return r;
    }

    VarRef variable() {
        skip_space();
        const std::size_t start = pos_;
        if (pos_ >= text_.size() || !std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
            fail("expected a variable");
        }
        const char prefix = text_[pos_];
        if (prefix != 'x' && prefix != 'y') {
            fail(std::string("unknown variable prefix '") + prefix + "' (expected x or y)");
        }
        ++pos_;
        const std::size_t digits = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == digits) {
            pos_ = start;
            fail("variable needs an index");
        }
        if (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            fail("malformed variable name");
        }
        const auto index = std::stoull(text_.substr(digits, pos_ - digits));
        return {prefix == 'x' ? VarRef::Kind::Input : VarRef::Kind::Output, static_cast<std::size_t>(index)};
    }

    std::optional<Relation> relation() {
        skip_space();
        if (text_.compare(pos_, 2, "<=") == 0) {
            pos_ += 2;
            return Relation::LessEq;
        }
        if (text_.compare(pos_, 2, ">=") == 0) {
            pos_ += 2;
            return Relation::GreaterEq;
        }
        if (pos_ < text_.size() && text_[pos_] == '=') {
            ++pos_;
            return Relation::Equal;
        }
        return std::nullopt;
    }

private:
    const std::string& text_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

inline void add_term(LinearAtom& atom, Rational coefficient, VarRef var) {
    for (auto& t : atom.terms) {
        if (t.var == var) {
            t.coefficient += coefficient;
            return;
        }
    }
    atom.terms.push_back({std::move(coefficient), var});
}

inline LinearAtom parse_atom(const std::string& text, std::size_t line) {
    AtomLexer lex(text, line);
    LinearAtom atom;
    bool first = true;
    while (true) {
        Rational sign = 1;
        if (lex.accept('+')) {
            if (first) lex.fail("unexpected '+'");
        } else if (lex.accept('-')) {
            sign = -1;
        } else if (!first) {
            break;
        }
        Rational coefficient = 1;
        if (auto num = lex.number()) {
            coefficient = *num;
            if (!lex.accept('*')) lex.fail("expected '*' after coefficient");
        }
        add_term(atom, sign * coefficient, lex.variable());
        first = false;
    }
    auto rel = lex.relation();
    if (!rel) lex.fail("expected '<=', '>=' or '='");
    atom.relation = *rel;
    Rational sign = 1;
    if (lex.accept('-')) {
        sign = -1;
    } else {
        lex.accept('+');
    }
    auto constant = lex.number();
    if (!constant) lex.fail("expected a decimal constant");
    atom.constant = sign * *constant;
    if (!lex.at_end()) lex.fail("unexpected trailing input");
    return atom;
}

}  // namespace detail

/// One atom per line; `#` starts a comment; blank lines are ignored.
inline Property parse_property(std::istream& in) {
    Property prop;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        if (detail::trim(raw).empty()) continue;
        prop.atoms.push_back(detail::parse_atom(raw, line));
    }
    if (prop.atoms.empty()) throw ParseError(line == 0 ? 1 : line, 0, "empty property");
    return prop;
}

inline Property parse_property(const std::string& text) {
    std::istringstream in(text);
    return parse_property(in);
}

inline std::string to_string(const LinearAtom& atom) {
    std::string s;
    for (std::size_t i = 0; i < atom.terms.size(); ++i) {
        const auto& t = atom.terms[i];
        Rational magnitude = abs(t.coefficient);
        if (i == 0) {
            if (sgn(t.coefficient) < 0) s += "-";
        } else {
            s += sgn(t.coefficient) < 0 ? " - " : " + ";
        }
        if (magnitude != 1) s += to_exact_decimal(magnitude) + "*";
        s += t.var.name();
    }
    s += " ";
    s += relation_symbol(atom.relation);
    s += " " + to_exact_decimal(atom.constant);
    return s;
}

inline std::string to_string(const Property& prop) {
    std::string s;
    for (const auto& atom : prop.atoms) s += to_string(atom) + "\n";
    return s;
}

}  // namespace lazyrelu
