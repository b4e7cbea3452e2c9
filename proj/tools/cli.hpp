#pragma once

// Command-line front end. run_cli is callable in-process so the test suite
// can drive every subcommand without spawning processes.
//
// Exit status for `verify`: 0 unsat, 1 sat, 2 resource-out, 3 usage/parse
// error. Other subcommands return 0 on success and 3 on error.

#include "lazyrelu/lazyrelu.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace lazyrelu::cli {

enum ExitStatus : int { kUnsat = 0, kSat = 1, kResourceOut = 2, kUsageError = 3 };

inline constexpr const char* kTimeoutEnv = "LAZYRELU_TIMEOUT";

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline Network load_network(const std::string& path, bool relu_output, bool normalize) {
    std::istringstream in(read_file(path));
    Network net;
    try {
        net = parse_network(in, {relu_output});
    } catch (const ParseError& e) {
        throw UsageError(path + ": " + e.what());
    }
    return normalize ? with_input_normalization(net) : net;
}

inline std::vector<Rational> parse_value_list(const std::string& text) {
    std::vector<Rational> values;
    std::stringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        token = detail::trim(token);
        if (token.empty()) continue;
        auto value = parse_decimal(token);
        if (!value) value = parse_exact_string(token);
        if (!value) throw UsageError("not a number: '" + token + "'");
        values.push_back(*value);
    }
    return values;
}

inline nlohmann::json value_json(const Rational& r) {
    return {{"exact", to_exact_string(r)}, {"decimal", to_decimal(r)}};
}

inline nlohmann::json values_json(const std::vector<Rational>& values) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& v : values) arr.push_back(value_json(v));
    return arr;
}

inline std::chrono::milliseconds default_timeout() {
    if (const char* env = std::getenv(kTimeoutEnv)) {
        try {
            return std::chrono::milliseconds(static_cast<long long>(std::stod(env) * 1000));
        } catch (const std::exception&) {
            throw UsageError(std::string(kTimeoutEnv) + " is not a number of seconds: '" + env + "'");
        }
    }
    return std::chrono::milliseconds(60'000);
}

struct VerifyOptions {
    std::string network;
    std::string property;
    std::optional<double> timeout_secs;
    unsigned split_threshold = 5;
    std::optional<std::uint64_t> max_splits;
    bool oracle = false;
    bool normalize = false;
    bool relu_output = false;
    std::string output = "text";
    bool trace = false;
    std::string dump_encoding;
};

inline int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
    const Network net = load_network(opt.network, opt.relu_output, opt.normalize);
    Property prop;
    try {
        std::istringstream in(read_file(opt.property));
        prop = parse_property(in);
    } catch (const ParseError& e) {
        throw UsageError(opt.property + ": " + e.what());
    }
    VerificationProblem problem;
    try {
        problem = encode(net, prop);
    } catch (const std::invalid_argument& e) {
        throw UsageError(opt.property + ": " + e.what());
    }
    if (!opt.dump_encoding.empty()) {
        std::ofstream dump(opt.dump_encoding);
        if (!dump) throw UsageError("cannot write '" + opt.dump_encoding + "'");
        dump_problem(problem, dump);
    }

    SolveConfig config;
    config.split_threshold = opt.split_threshold;
    config.timeout = opt.timeout_secs ? std::chrono::milliseconds(static_cast<long long>(*opt.timeout_secs * 1000))
                                      : default_timeout();
    config.max_splits = opt.max_splits;
    if (opt.trace) config.trace = &err;

    SolveResult result;
    if (opt.oracle) {
        try {
            result = oracle_solve(problem);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    } else {
        result = solve(problem, config);
    }

    std::optional<Validation> validation;
    std::vector<Rational> outputs;
    if (result.verdict.sat()) {
        validation = validate_counterexample(net, prop, problem, result.verdict);
        if (!validation->pass) {
            err << "error: internal soundness failure, counterexample rejected: " << validation->reason << "\n";
            return kUsageError;
        }
        for (VarId y : problem.outputs) outputs.push_back(result.verdict.assignment[y]);
    }

    if (opt.output == "json") {
        nlohmann::json j = {{"verdict", verdict_name(result.verdict)},
                            {"engine", opt.oracle ? "oracle" : "lazy"},
                            {"problem",
                             {{"variables", problem.num_vars()},
                              {"rows", problem.rows.size()},
                              {"pairs", problem.pairs.size()}}},
                            {"stats", stats_to_json(result.stats, true)}};
        if (result.verdict.kind == Verdict::Kind::ResourceOut) j["reason"] = reason_name(result.verdict.reason);
        if (result.verdict.sat()) {
            j["counterexample"] = {{"inputs", values_json(result.verdict.counterexample)},
                                   {"outputs", values_json(outputs)}};
            j["validation"] = "pass";
        } else {
            j["counterexample"] = nullptr;
            j["validation"] = nullptr;
        }
        out << j.dump(2) << "\n";
    } else {
        out << "verdict: " << verdict_name(result.verdict);
        if (result.verdict.kind == Verdict::Kind::ResourceOut) out << " (" << reason_name(result.verdict.reason) << ")";
        out << "\n";
        if (result.verdict.sat()) {
            for (std::size_t i = 0; i < result.verdict.counterexample.size(); ++i) {
                const auto& v = result.verdict.counterexample[i];
                out << "x" << i << " = " << to_decimal(v) << "  (" << to_exact_string(v) << ")\n";
            }
            for (std::size_t j = 0; j < outputs.size(); ++j) {
                out << "y" << j << " = " << to_decimal(outputs[j]) << "  (" << to_exact_string(outputs[j]) << ")\n";
            }
            out << "validation: pass\n";
        }
        const auto& s = result.stats;
        out << "stats: lp_checks=" << s.lp_checks << " pivots=" << s.pivots << " fixes=" << s.fixes << "/"
            << s.fix_attempts << " splits=" << s.splits << " backtracks=" << s.backtracks
            << " max_depth=" << s.max_trail_depth << " propagated=" << s.propagated_fixes;
        if (opt.oracle) out << " patterns=" << s.patterns_checked;
        out << " time_ms=" << s.wall_ms << "\n";
    }
    switch (result.verdict.kind) {
        case Verdict::Kind::Unsat: return kUnsat;
        case Verdict::Kind::Sat: return kSat;
        case Verdict::Kind::ResourceOut: return kResourceOut;
    }
    return kUsageError;
}

inline int cmd_eval(const std::string& network, const std::string& input, bool normalize, bool relu_output,
                    const std::string& output, std::ostream& out) {
    const Network net = load_network(network, relu_output, normalize);
    const auto values = parse_value_list(input);
    if (values.size() != net.input_size()) {
        throw UsageError("expected " + std::to_string(net.input_size()) + " input values, got " +
                         std::to_string(values.size()));
    }
    const auto result = evaluate(net, values);
    if (output == "json") {
        out << nlohmann::json{{"outputs", values_json(result)}}.dump(2) << "\n";
    } else {
        for (const auto& v : result) out << to_decimal(v) << "\n";
    }
    return 0;
}

inline int cmd_generate(const std::string& dims, std::uint64_t seed, const std::string& weight_range,
                        const std::string& path) {
    NetGenSpec spec;
    for (const auto& d : parse_value_list(dims)) {
        if (d.get_den() != 1 || sgn(d) <= 0 || !d.get_num().fits_ulong_p()) {
            throw UsageError("layer sizes must be positive integers");
        }
        spec.layer_dims.push_back(d.get_num().get_ui());
    }
    const auto range = parse_value_list(weight_range);
    if (range.size() != 2) throw UsageError("--weight-range expects 'lo,hi'");
    spec.weight_lower = range[0];
    spec.weight_upper = range[1];
    spec.seed = seed;
    Network net;
    try {
        net = generate_network(spec);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    std::ofstream file(path);
    if (!file) throw UsageError("cannot write '" + path + "'");
    serialize_network(net, file);
    return 0;
}

inline int cmd_bench(std::uint64_t seed, std::size_t instances, const std::string& path, const std::string& format,
                     bool timing, std::optional<double> timeout_secs, unsigned split_threshold, std::ostream& out) {
    SolveConfig config;
    config.split_threshold = split_threshold;
    config.timeout = timeout_secs ? std::chrono::milliseconds(static_cast<long long>(*timeout_secs * 1000))
                                  : default_timeout();
    if (instances == 0) throw UsageError("--instances must be at least 1");
    const BenchReport report = run_bench(seed, instances, config);
    const std::string json = to_json(report, timing).dump(2) + "\n";
    const std::string table = to_text_table(report, timing);
    if (!path.empty()) {
        std::ofstream file(path);
        if (!file) throw UsageError("cannot write '" + path + "'");
        file << (format == "text" ? table : json);
    }
    out << (format == "json" && path.empty() ? json : table);
    return 0;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Exact lazy-ReLU satisfiability checking for feed-forward networks", "lazyrelu"};
    app.require_subcommand(1);

    VerifyOptions vopt;
    auto* verify = app.add_subcommand("verify", "search for an input/output pair satisfying a property");
    verify->add_option("--network", vopt.network, "NNet-style network file")->required();
    verify->add_option("--property", vopt.property, "property file (conjunction of linear atoms)")->required();
    verify->add_option("--timeout", vopt.timeout_secs, "seconds (default 60, or $LAZYRELU_TIMEOUT)");
    verify->add_option("--split-threshold", vopt.split_threshold, "failed repairs per pair before splitting")
        ->check(CLI::PositiveNumber);
    verify->add_option("--max-splits", vopt.max_splits, "give up after this many splits");
    verify->add_flag("--oracle", vopt.oracle, "use eager phase-pattern enumeration (at most 10 ReLUs)");
    verify->add_flag("--apply-normalization", vopt.normalize, "apply the file's input normalization");
    verify->add_flag("--relu-output", vopt.relu_output, "treat the output layer as ReLU-activated");
    verify->add_option("--output", vopt.output, "json or text")->check(CLI::IsMember({"json", "text"}));
    verify->add_flag("--trace", vopt.trace, "pivot/update/split trace on stderr");
    verify->add_option("--dump-encoding", vopt.dump_encoding, "write the encoded problem to this file");

    std::string eval_network, eval_input, eval_output = "text";
    bool eval_normalize = false, eval_relu_output = false;
    auto* eval = app.add_subcommand("eval", "exact forward pass");
    eval->add_option("--network", eval_network, "NNet-style network file")->required();
    eval->add_option("--input", eval_input, "comma-separated input values")->required();
    eval->add_flag("--apply-normalization", eval_normalize, "apply the file's input normalization");
    eval->add_flag("--relu-output", eval_relu_output, "treat the output layer as ReLU-activated");
    eval->add_option("--output", eval_output, "json or text")->check(CLI::IsMember({"json", "text"}));

    std::string gen_dims, gen_out, gen_range = "-1,1";
    std::uint64_t gen_seed = 0;
    auto* generate = app.add_subcommand("generate", "write a seeded random network");
    generate->add_option("--dims", gen_dims, "layer sizes, input first")->required();
    generate->add_option("--seed", gen_seed, "generator seed")->required();
    generate->add_option("--weight-range", gen_range, "lo,hi (default -1,1)");
    generate->add_option("--out", gen_out, "output path")->required();

    std::uint64_t bench_seed_value = 1;
    std::size_t bench_instances = 20;
    std::string bench_out, bench_format = "json";
    bool bench_no_timing = false;
    std::optional<double> bench_timeout;
    unsigned bench_threshold = 5;
    auto* bench = app.add_subcommand("bench", "deep-narrow vs. shallow-wide comparison");
    bench->add_option("--seed", bench_seed_value, "base seed (default 1)");
    bench->add_option("--instances", bench_instances, "instances per topology (default 20)");
    bench->add_option("--out", bench_out, "report path");
    bench->add_option("--format", bench_format, "json or text")->check(CLI::IsMember({"json", "text"}));
    bench->add_flag("--no-timing", bench_no_timing, "omit wall-clock fields (byte-reproducible output)");
    bench->add_option("--timeout", bench_timeout, "per-instance seconds");
    bench->add_option("--split-threshold", bench_threshold, "failed repairs per pair before splitting")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }

    try {
        if (*verify) return cmd_verify(vopt, out, err);
        if (*eval) return cmd_eval(eval_network, eval_input, eval_normalize, eval_relu_output, eval_output, out);
        if (*generate) return cmd_generate(gen_dims, gen_seed, gen_range, gen_out);
        if (*bench) {
            return cmd_bench(bench_seed_value, bench_instances, bench_out, bench_format, !bench_no_timing,
                             bench_timeout, bench_threshold, out);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }
    return kUsageError;
}

}  // namespace lazyrelu::cli
