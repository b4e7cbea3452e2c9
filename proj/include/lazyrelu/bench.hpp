#pragma once

// Deep-narrow vs. shallow-wide comparison at matched parameter counts.
//
// Instance i of every topology uses generator seed `seed * 1000003 + i`
// and the query "inputs within the network box and y0 <= t_i", with t_i
// cycling through {-1, -1/2, 0, 1/2, 1}.

#include "lazyrelu/network.hpp"
#include "lazyrelu/problem.hpp"
#include "lazyrelu/property.hpp"
#include "lazyrelu/search.hpp"

#include "json.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lazyrelu {

struct BenchTopology {
    std::string label;
    std::vector<std::size_t> layer_dims;
};

/// Both have 12 hidden ReLUs and 49 parameters.
inline std::vector<BenchTopology> default_topologies() {
    return {{"deep-narrow", {2, 3, 3, 3, 3, 1}}, {"shallow-wide", {2, 12, 1}}};
}

struct BenchRecord {
    std::string topology;
    std::vector<std::size_t> layer_dims;
    std::size_t instance = 0;
    std::uint64_t seed = 0;
    Rational threshold;
    std::size_t pairs = 0;
    Verdict::Kind verdict = Verdict::Kind::Unsat;
    Verdict::Reason reason = Verdict::Reason::None;
    SolveStats stats;
};

struct TopologySummary {
    std::string topology;
    std::size_t completed = 0;
    std::size_t resource_out = 0;
    std::size_t sat = 0;
    std::size_t unsat = 0;
    double median_splits = 0;
    double median_pivots = 0;
    double median_lp_checks = 0;
    double median_wall_ms = 0;
};

struct BenchReport {
    std::uint64_t seed = 0;
    std::size_t instances_per_topology = 0;
    std::vector<BenchRecord> records;
    std::vector<TopologySummary> summaries;
};

inline Rational bench_threshold(std::size_t instance) {
    static const long halves[] = {-2, -1, 0, 1, 2};
    return make_rational(halves[instance % 5], 2);
}

inline std::uint64_t bench_seed(std::uint64_t seed, std::size_t instance) { return seed * 1000003ULL + instance; }

namespace detail {

inline double median(std::vector<double> values) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2;
}

}  // namespace detail

/// Runs every topology on the same instance family. Throws
/// std::logic_error if a Sat verdict fails counterexample validation.
inline BenchReport run_bench(std::uint64_t seed, std::size_t instances_per_topology, const SolveConfig& config,
                             const std::vector<BenchTopology>& topologies = default_topologies()) {
    if (instances_per_topology == 0) throw std::invalid_argument("instances_per_topology must be at least 1");
    BenchReport report;
    report.seed = seed;
    report.instances_per_topology = instances_per_topology;
    for (const auto& topo : topologies) {
        for (std::size_t i = 0; i < instances_per_topology; ++i) {
            NetGenSpec spec;
            spec.layer_dims = topo.layer_dims;
            spec.seed = bench_seed(seed, i);
            const Network net = generate_network(spec);
            Property prop;
            prop.atoms.push_back({{{Rational(1), {VarRef::Kind::Output, 0}}}, Relation::LessEq, bench_threshold(i)});
            const VerificationProblem problem = encode(net, prop);
            const SolveResult result = solve(problem, config);
            if (result.verdict.sat()) {
                const Validation check = validate_counterexample(net, prop, problem, result.verdict);
                if (!check.pass) throw std::logic_error("bench counterexample failed validation: " + check.reason);
            }
            BenchRecord record;
            record.topology = topo.label;
            record.layer_dims = topo.layer_dims;
            record.instance = i;
            record.seed = spec.seed;
            record.threshold = bench_threshold(i);
            record.pairs = problem.pairs.size();
            record.verdict = result.verdict.kind;
            record.reason = result.verdict.reason;
            record.stats = result.stats;
            report.records.push_back(std::move(record));
        }
    }
    for (const auto& topo : topologies) {
        TopologySummary summary;
        summary.topology = topo.label;
        std::vector<double> splits, pivots, checks, wall;
        for (const auto& r : report.records) {
            if (r.topology != topo.label) continue;
            if (r.verdict == Verdict::Kind::ResourceOut) {
                ++summary.resource_out;
                continue;
            }
            ++summary.completed;
            ++(r.verdict == Verdict::Kind::Sat ? summary.sat : summary.unsat);
            splits.push_back(static_cast<double>(r.stats.splits));
            pivots.push_back(static_cast<double>(r.stats.pivots));
            checks.push_back(static_cast<double>(r.stats.lp_checks));
            wall.push_back(r.stats.wall_ms);
        }
        summary.median_splits = detail::median(splits);
        summary.median_pivots = detail::median(pivots);
        summary.median_lp_checks = detail::median(checks);
        summary.median_wall_ms = detail::median(wall);
        report.summaries.push_back(summary);
    }
    return report;
}

inline std::string verdict_kind_name(Verdict::Kind k) {
    Verdict v;
    v.kind = k;
    return verdict_name(v);
}

inline nlohmann::json stats_to_json(const SolveStats& s, bool include_timing) {
    nlohmann::json j = {{"pivots", s.pivots},
                        {"lp_checks", s.lp_checks},
                        {"fix_attempts", s.fix_attempts},
                        {"fixes", s.fixes},
                        {"splits", s.splits},
                        {"backtracks", s.backtracks},
                        {"max_trail_depth", s.max_trail_depth},
                        {"propagated_fixes", s.propagated_fixes},
                        {"patterns_checked", s.patterns_checked}};
    if (include_timing) j["wall_ms"] = s.wall_ms;
    return j;
}

/// Everything except wall-clock fields is a pure function of (seed, config);
/// pass include_timing = false for a byte-reproducible document.
inline nlohmann::json to_json(const BenchReport& report, bool include_timing = true) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : report.records) {
        nlohmann::json j = {{"topology", r.topology},
                            {"layer_dims", r.layer_dims},
                            {"instance", r.instance},
                            {"seed", r.seed},
                            {"threshold", to_exact_string(r.threshold)},
                            {"pairs", r.pairs},
                            {"verdict", verdict_kind_name(r.verdict)},
                            {"stats", stats_to_json(r.stats, include_timing)}};
        if (r.verdict == Verdict::Kind::ResourceOut) j["reason"] = reason_name(r.reason);
        records.push_back(std::move(j));
    }
    nlohmann::json summaries = nlohmann::json::array();
    for (const auto& s : report.summaries) {
        nlohmann::json j = {{"topology", s.topology},
                            {"completed", s.completed},
                            {"resource_out", s.resource_out},
                            {"sat", s.sat},
                            {"unsat", s.unsat},
                            {"median_splits", s.median_splits},
                            {"median_pivots", s.median_pivots},
                            {"median_lp_checks", s.median_lp_checks}};
        if (include_timing) j["median_wall_ms"] = s.median_wall_ms;
        summaries.push_back(std::move(j));
    }
    return {{"seed", report.seed},
            {"instances_per_topology", report.instances_per_topology},
            {"records", std::move(records)},
            {"summary", std::move(summaries)}};
}

inline std::string to_text_table(const BenchReport& report, bool include_timing = true) {
    std::ostringstream out;
    out << "seed " << report.seed << ", " << report.instances_per_topology << " instances per topology\n\n";
    out << std::left << std::setw(14) << "topology" << std::right << std::setw(6) << "done" << std::setw(6) << "out"
        << std::setw(6) << "sat" << std::setw(7) << "unsat" << std::setw(10) << "splits" << std::setw(10) << "pivots"
        << std::setw(10) << "lp";
    if (include_timing) out << std::setw(12) << "ms";
    out << "\n";
    out << std::fixed << std::setprecision(1);
    for (const auto& s : report.summaries) {
        out << std::left << std::setw(14) << s.topology << std::right << std::setw(6) << s.completed << std::setw(6)
            << s.resource_out << std::setw(6) << s.sat << std::setw(7) << s.unsat << std::setw(10) << s.median_splits
            << std::setw(10) << s.median_pivots << std::setw(10) << s.median_lp_checks;
        if (include_timing) out << std::setw(12) << std::setprecision(3) << s.median_wall_ms << std::setprecision(1);
        out << "\n";
    }
    out << "\n(medians over completed instances; resource-outs counted separately)\n";
    return out.str();
}

}  // namespace lazyrelu
