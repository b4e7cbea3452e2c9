#pragma once

// Feed-forward ReLU networks: representation, NNet-style text I/O, exact
// forward evaluation, and the seeded synthetic generator.

#include "lazyrelu/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lazyrelu {

/// Raised by every text parser in the library. `line` is 1-based; `column`
/// is 1-based or 0 when not meaningful.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& reason)
        : std::runtime_error(format(line, column, reason)), line_(line), column_(column), reason_(reason) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }
    const std::string& reason() const { return reason_; }

private:
    static std::string format(std::size_t line, std::size_t column, const std::string& reason) {
        std::string s = "line " + std::to_string(line);
        if (column > 0) s += ", column " + std::to_string(column);
        return s + ": " + reason;
    }

    std::size_t line_;
    std::size_t column_;
    std::string reason_;
};

/// Dense row-major matrix of rationals.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Rational> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

    Rational& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const Rational& at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool operator==(const Matrix& other) const {
        return rows == other.rows && cols == other.cols && data == other.data;
    }
};

/// A feed-forward network. Layer k maps dims[k] values to dims[k+1] values
/// through weights[k] (dims[k+1] x dims[k]) and biases[k]. Every layer but
/// the last applies ReLU; the last one is affine unless `relu_output`.
struct Network {
    std::vector<std::size_t> layer_dims;
    std::vector<Matrix> weights;
    std::vector<std::vector<Rational>> biases;
    std::vector<Bound> input_lower;
    std::vector<Bound> input_upper;
    // Normalization constants from the file header, kept as metadata only.
    std::vector<Rational> input_means;
    std::vector<Rational> input_ranges;
    bool relu_output = false;

    std::size_t layer_count() const { return weights.size(); }
    std::size_t input_size() const { return layer_dims.front(); }
    std::size_t output_size() const { return layer_dims.back(); }
    std::size_t hidden_neuron_count() const {
        std::size_t n = 0;
        for (std::size_t k = 1; k + 1 < layer_dims.size(); ++k) n += layer_dims[k];
        if (relu_output) n += output_size();
        return n;
    }

    /// Throws std::invalid_argument when shapes do not chain or input
    /// bounds cross.
    void validate() const {
        if (layer_dims.size() < 2) throw std::invalid_argument("network needs at least an input and an output layer");
        for (auto d : layer_dims) {
            if (d == 0) throw std::invalid_argument("layer sizes must be positive");
        }
        if (weights.size() != layer_dims.size() - 1 || biases.size() != weights.size()) {
            throw std::invalid_argument("weight/bias block count does not match layer count");
        }
        for (std::size_t k = 0; k < weights.size(); ++k) {
            if (weights[k].rows != layer_dims[k + 1] || weights[k].cols != layer_dims[k] ||
                weights[k].data.size() != weights[k].rows * weights[k].cols) {
                throw std::invalid_argument("weight matrix " + std::to_string(k) + " has the wrong shape");
            }
            if (biases[k].size() != layer_dims[k + 1]) {
                throw std::invalid_argument("bias vector " + std::to_string(k) + " has the wrong length");
            }
        }
        if (input_lower.size() != input_size() || input_upper.size() != input_size()) {
            throw std::invalid_argument("input bound vectors must match the input size");
        }
        for (std::size_t i = 0; i < input_size(); ++i) {
            if (input_lower[i] && input_upper[i] && *input_lower[i] > *input_upper[i]) {
                throw std::invalid_argument("input " + std::to_string(i) + " has crossed bounds");
            }
        }
    }

    bool operator==(const Network& other) const {
        return layer_dims == other.layer_dims && weights == other.weights && biases == other.biases &&
               input_lower == other.input_lower && input_upper == other.input_upper &&
               input_means == other.input_means && input_ranges == other.input_ranges &&
               relu_output == other.relu_output;
    }
};

/// Exact forward pass.
inline std::vector<Rational> evaluate(const Network& net, std::span<const Rational> input) {
    if (input.size() != net.input_size()) {
        throw std::invalid_argument("input has " + std::to_string(input.size()) + " values, network expects " +
                                    std::to_string(net.input_size()));
    }
    std::vector<Rational> current(input.begin(), input.end());
    for (std::size_t k = 0; k < net.layer_count(); ++k) {
        const Matrix& w = net.weights[k];
        std::vector<Rational> next(w.rows);
        for (std::size_t r = 0; r < w.rows; ++r) {
            Rational sum = net.biases[k][r];
            for (std::size_t c = 0; c < w.cols; ++c) sum += w.at(r, c) * current[c];
            const bool hidden = k + 1 < net.layer_count() || net.relu_output;
            if (hidden && sgn(sum) < 0) sum = 0;
            next[r] = std::move(sum);
        }
        current = std::move(next);
    }
    return current;
}

inline std::vector<Rational> evaluate(const Network& net, const std::vector<Rational>& input) {
    return evaluate(net, std::span<const Rational>(input));
}

/// Folds input normalization `(x - mean) / range` into the first layer so
/// that the returned network consumes raw inputs. Input bounds are left in
/// raw units.
inline Network with_input_normalization(const Network& net) {
    if (net.input_means.size() < net.input_size() || net.input_ranges.size() < net.input_size()) {
        throw std::invalid_argument("network carries no normalization constants");
    }
    Network folded = net;
    Matrix& w = folded.weights.front();
    for (std::size_t c = 0; c < w.cols; ++c) {
        const Rational& range = net.input_ranges[c];
        if (sgn(range) == 0) throw std::invalid_argument("normalization range of input " + std::to_string(c) + " is zero");
        for (std::size_t r = 0; r < w.rows; ++r) {
            Rational scaled = w.at(r, c) / range;
            folded.biases.front()[r] -= scaled * net.input_means[c];
            w.at(r, c) = scaled;
        }
    }
    return folded;
}

// ---------------------------------------------------------------------------
// NNet text format

struct NetworkParseOptions {
    bool relu_output = false;
};

namespace detail {

struct NnetLine {
    std::size_t number = 0;
    std::vector<std::string> tokens;
};

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<NnetLine> split_nnet(std::istream& in) {
    std::vector<NnetLine> lines;
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        std::string line = trim(raw);
        if (line.empty() || line.starts_with("//")) continue;
        NnetLine parsed{number, {}};
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) comma = line.size();
            std::string token = trim(std::string_view(line).substr(start, comma - start));
            if (!token.empty()) parsed.tokens.push_back(std::move(token));
            start = comma + 1;
        }
        lines.push_back(std::move(parsed));
    }
    return lines;
}

class NnetCursor {
public:
    explicit NnetCursor(std::vector<NnetLine> lines) : lines_(std::move(lines)) {}

    const NnetLine& next(const std::string& what) {
        if (pos_ >= lines_.size()) {
            const std::size_t at = lines_.empty() ? 1 : lines_.back().number + 1;
            throw ParseError(at, 0, "dimension mismatch: file ended while reading " + what);
        }
        return lines_[pos_++];
    }

    bool done() const { return pos_ >= lines_.size(); }
    const NnetLine& peek() const { return lines_[pos_]; }

private:
    std::vector<NnetLine> lines_;
    std::size_t pos_ = 0;
};

inline Rational number_at(const NnetLine& line, std::size_t i) {
    auto r = parse_decimal(line.tokens[i]);
    if (!r) throw ParseError(line.number, 0, "non-numeric token '" + line.tokens[i] + "'");
    return *r;
}

inline std::size_t positive_int_at(const NnetLine& line, std::size_t i, const std::string& what) {
    Rational r = number_at(line, i);
    if (r.get_den() != 1 || sgn(r) <= 0 || !r.get_num().fits_ulong_p()) {
        throw ParseError(line.number, 0, "malformed header: " + what + " must be a positive integer, got '" +
                                             line.tokens[i] + "'");
    }
    return r.get_num().get_ui();
}

inline std::vector<Rational> numbers(const NnetLine& line, std::size_t expected, const std::string& what) {
    if (line.tokens.size() < expected) {
        throw ParseError(line.number, 0,
                         "dimension mismatch: " + what + " expects " + std::to_string(expected) + " values, found " +
                             std::to_string(line.tokens.size()));
    }
    std::vector<Rational> out;
    out.reserve(line.tokens.size());
    for (std::size_t i = 0; i < line.tokens.size(); ++i) out.push_back(number_at(line, i));
    return out;
}

inline std::vector<Bound> bounds(const NnetLine& line, std::size_t expected, const std::string& what, bool lower) {
    if (line.tokens.size() < expected) {
        throw ParseError(line.number, 0,
                         "dimension mismatch: " + what + " expects " + std::to_string(expected) + " values, found " +
                             std::to_string(line.tokens.size()));
    }
    std::vector<Bound> out;
    for (std::size_t i = 0; i < expected; ++i) {
        const std::string& t = line.tokens[i];
        if (t == "inf" || t == "+inf" || t == "-inf") {
            if ((t == "-inf") != lower) throw ParseError(line.number, 0, "infinite bound has the wrong sign in " + what);
            out.emplace_back(std::nullopt);
        } else {
            out.emplace_back(number_at(line, i));
        }
    }
    return out;
}

}  // namespace detail

/// Parses an NNet-style file. Every literal is converted exactly.
inline Network parse_network(std::istream& in, const NetworkParseOptions& options = {}) {
    detail::NnetCursor cursor(detail::split_nnet(in));
    if (cursor.done()) throw ParseError(1, 0, "empty file");

    const auto& header = cursor.next("header");
    if (header.tokens.size() < 4) throw ParseError(header.number, 0, "malformed header: expected 4 values");
    const std::size_t layer_count = detail::positive_int_at(header, 0, "layer count");
    const std::size_t input_size = detail::positive_int_at(header, 1, "input size");
    const std::size_t output_size = detail::positive_int_at(header, 2, "output size");
    const std::size_t max_layer = detail::positive_int_at(header, 3, "max layer size");

    const auto& sizes_line = cursor.next("layer sizes");
    if (sizes_line.tokens.size() != layer_count + 1) {
        throw ParseError(sizes_line.number, 0,
                         "malformed header: expected " + std::to_string(layer_count + 1) + " layer sizes, found " +
                             std::to_string(sizes_line.tokens.size()));
    }
    Network net;
    net.relu_output = options.relu_output;
    for (std::size_t i = 0; i <= layer_count; ++i) {
        net.layer_dims.push_back(detail::positive_int_at(sizes_line, i, "layer size"));
    }
    if (net.layer_dims.front() != input_size || net.layer_dims.back() != output_size) {
        throw ParseError(sizes_line.number, 0, "malformed header: layer sizes disagree with input/output size");
    }
    if (*std::max_element(net.layer_dims.begin(), net.layer_dims.end()) != max_layer) {
        throw ParseError(sizes_line.number, 0, "malformed header: max layer size disagrees with layer sizes");
    }

    cursor.next("flag line");
    net.input_lower = detail::bounds(cursor.next("input minimums"), input_size, "input minimums", true);
    net.input_upper = detail::bounds(cursor.next("input maximums"), input_size, "input maximums", false);
    net.input_means = detail::numbers(cursor.next("normalization means"), input_size, "normalization means");
    net.input_ranges = detail::numbers(cursor.next("normalization ranges"), input_size, "normalization ranges");

    for (std::size_t k = 0; k < layer_count; ++k) {
        const std::size_t rows = net.layer_dims[k + 1];
        const std::size_t cols = net.layer_dims[k];
        const std::string block = "layer " + std::to_string(k + 1);
        Matrix w(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            const auto& line = cursor.next(block + " weights");
            if (line.tokens.size() != cols) {
                throw ParseError(line.number, 0,
                                 "dimension mismatch: " + block + " weight row has " +
                                     std::to_string(line.tokens.size()) + " values, expected " + std::to_string(cols));
            }
            for (std::size_t c = 0; c < cols; ++c) w.at(r, c) = detail::number_at(line, c);
        }
        std::vector<Rational> b(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            const auto& line = cursor.next(block + " biases");
            if (line.tokens.size() != 1) {
                throw ParseError(line.number, 0,
                                 "dimension mismatch: " + block + " bias line has " +
                                     std::to_string(line.tokens.size()) + " values, expected 1");
            }
            b[r] = detail::number_at(line, 0);
        }
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    if (!cursor.done()) {
        throw ParseError(cursor.peek().number, 0, "dimension mismatch: unexpected data after the last layer");
    }
    for (std::size_t i = 0; i < input_size; ++i) {
        if (net.input_lower[i] && net.input_upper[i] && *net.input_lower[i] > *net.input_upper[i]) {
            throw ParseError(1, 0, "input " + std::to_string(i) + " has minimum above maximum");
        }
    }
    return net;
}

inline Network parse_network(const std::string& text, const NetworkParseOptions& options = {}) {
    std::istringstream in(text);
    return parse_network(in, options);
}

/// Writes the NNet layout with exact decimal literals. Throws
/// std::domain_error for values without a finite decimal expansion.
inline void serialize_network(const Network& net, std::ostream& out) {
    net.validate();
    auto row = [&out](const auto& values, auto&& render) {
        for (const auto& v : values) out << render(v) << ',';
        out << '\n';
    };
    auto exact = [](const Rational& r) { return to_exact_decimal(r); };

    out << "// Feed-forward ReLU network\n";
    out << net.layer_count() << ',' << net.input_size() << ',' << net.output_size() << ','
        << *std::max_element(net.layer_dims.begin(), net.layer_dims.end()) << ",\n";
    row(net.layer_dims, [](std::size_t d) { return std::to_string(d); });
    out << "0,\n";
    row(net.input_lower, [](const Bound& b) { return b ? to_exact_decimal(*b) : std::string("-inf"); });
    row(net.input_upper, [](const Bound& b) { return b ? to_exact_decimal(*b) : std::string("inf"); });
    std::vector<Rational> means = net.input_means, ranges = net.input_ranges;
    if (means.size() < net.input_size()) means.assign(net.input_size() + 1, Rational(0));
    if (ranges.size() < net.input_size()) ranges.assign(net.input_size() + 1, Rational(1));
    row(means, exact);
    row(ranges, exact);
    for (std::size_t k = 0; k < net.layer_count(); ++k) {
        const Matrix& w = net.weights[k];
        for (std::size_t r = 0; r < w.rows; ++r) {
            for (std::size_t c = 0; c < w.cols; ++c) out << to_exact_decimal(w.at(r, c)) << ',';
            out << '\n';
        }
        for (const auto& b : net.biases[k]) out << to_exact_decimal(b) << ",\n";
    }
}

inline std::string serialize_network(const Network& net) {
    std::ostringstream out;
    serialize_network(net, out);
    return out.str();
}

// ---------------------------------------------------------------------------
// Synthetic networks

/// Parameters for generate_network. Every weight and bias is n / 10 where
/// n is an integer drawn uniformly from the grid points of weight_range.
struct NetGenSpec {
    std::vector<std::size_t> layer_dims;
    Rational weight_lower = -1;
    Rational weight_upper = 1;
    std::uint64_t seed = 0;
};

inline constexpr long kWeightDenominator = 10;

/// 64-bit linear congruential generator (Knuth's MMIX constants). The draw
/// in [0, n) is `(state >> 33) % n` taken after advancing the state.
class Lcg {
public:
    explicit Lcg(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return state_ >> 33;
    }

    std::uint64_t below(std::uint64_t n) { return next() % n; }

private:
    std::uint64_t state_;
};

/// Deterministic in (layer_dims, weight range, seed). Draw order: for each
/// layer, weights row-major, then biases. Input bounds are [-1, 1].
inline Network generate_network(const NetGenSpec& spec) {
    if (spec.layer_dims.size() < 2) throw std::invalid_argument("generate_network needs at least 2 layer sizes");
    for (auto d : spec.layer_dims) {
        if (d == 0) throw std::invalid_argument("layer sizes must be positive");
    }
    if (spec.weight_lower > spec.weight_upper) throw std::invalid_argument("weight range is empty");

    Rational lo_scaled = spec.weight_lower * kWeightDenominator;
    Rational hi_scaled = spec.weight_upper * kWeightDenominator;
    mpz_class lo_num, hi_num;
    mpz_cdiv_q(lo_num.get_mpz_t(), lo_scaled.get_num_mpz_t(), lo_scaled.get_den_mpz_t());
    mpz_fdiv_q(hi_num.get_mpz_t(), hi_scaled.get_num_mpz_t(), hi_scaled.get_den_mpz_t());
    if (lo_num > hi_num) throw std::invalid_argument("weight range contains no multiple of 1/10");
    const mpz_class span = hi_num - lo_num + 1;
    if (!span.fits_ulong_p()) throw std::invalid_argument("weight range too wide");

    Lcg rng(spec.seed);
    auto draw = [&] {
        mpz_class n = lo_num + static_cast<unsigned long>(rng.below(span.get_ui()));
        Rational r(n, kWeightDenominator);
        r.canonicalize();
        return r;
    };

    Network net;
    net.layer_dims = spec.layer_dims;
    for (std::size_t k = 0; k + 1 < spec.layer_dims.size(); ++k) {
        Matrix w(spec.layer_dims[k + 1], spec.layer_dims[k]);
        for (auto& v : w.data) v = draw();
        std::vector<Rational> b(spec.layer_dims[k + 1]);
        for (auto& v : b) v = draw();
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    net.input_lower.assign(net.input_size(), Rational(-1));
    net.input_upper.assign(net.input_size(), Rational(1));
    net.input_means.assign(net.input_size() + 1, Rational(0));
    net.input_ranges.assign(net.input_size() + 1, Rational(1));
    return net;
}

}  // namespace lazyrelu
