#include "lazyrelu/bench.hpp"

#include <gtest/gtest.h>

using namespace lazyrelu;

namespace {

std::size_t param_count(const std::vector<std::size_t>& dims) {
    std::size_t n = 0;
    for (std::size_t l = 1; l < dims.size(); ++l) n += dims[l] * dims[l - 1] + dims[l];
    return n;
}

}  // namespace

TEST(Bench, TopologiesMatchInReluAndParameterCounts) {
    const auto topo = default_topologies();
    ASSERT_EQ(topo.size(), 2u);
    auto relus = [](const std::vector<std::size_t>& d) {
        std::size_t n = 0;
        for (std::size_t l = 1; l + 1 < d.size(); ++l) n += d[l];
        return n;
    };
    EXPECT_EQ(relus(topo[0].layer_dims), 12u);
    EXPECT_EQ(relus(topo[1].layer_dims), 12u);
    EXPECT_EQ(param_count(topo[0].layer_dims), param_count(topo[1].layer_dims));
}

TEST(Bench, OneInstanceGivesTwoRecords) {
    const auto report = run_bench(1, 1, SolveConfig{});
    ASSERT_EQ(report.records.size(), 2u);
    EXPECT_EQ(report.records[0].topology, "deep-narrow");
    EXPECT_EQ(report.records[1].topology, "shallow-wide");
    EXPECT_EQ(report.records[0].seed, report.records[1].seed);
    EXPECT_EQ(report.records[0].pairs, 12u);
    ASSERT_EQ(report.summaries.size(), 2u);
}

TEST(Bench, SameSeedSameReport) {
    const auto a = to_json(run_bench(7, 5, SolveConfig{}), false).dump(2);
    const auto b = to_json(run_bench(7, 5, SolveConfig{}), false).dump(2);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.find("wall_ms"), std::string::npos);
    const auto c = to_json(run_bench(8, 5, SolveConfig{}), false).dump(2);
    EXPECT_NE(a, c);
}

TEST(Bench, ThresholdsAndSeeds) {
    EXPECT_EQ(bench_threshold(0), make_rational(-1, 1));
    EXPECT_EQ(bench_threshold(2), Rational(0));
    EXPECT_EQ(bench_threshold(5), bench_threshold(0));
    EXPECT_EQ(bench_seed(1, 3), 1000006u);
    EXPECT_THROW(run_bench(1, 0, SolveConfig{}), std::invalid_argument);
}

TEST(Bench, ResourceOutsCountedSeparately) {
    SolveConfig cfg;
    cfg.timeout = std::chrono::milliseconds(-1);
    const auto report = run_bench(1, 5, cfg);
    // Instances refuted by propagation alone finish before the clock is read.
    std::size_t out = 0;
    for (const auto& s : report.summaries) {
        EXPECT_EQ(s.resource_out + s.completed, 5u);
        out += s.resource_out;
        if (s.completed == 0) {
            EXPECT_EQ(s.median_splits, 0);
        }
    }
    EXPECT_GT(out, 0u);
    const auto j = to_json(report, false);
    for (std::size_t i = 0; i < report.records.size(); ++i) {
        if (report.records[i].verdict == Verdict::Kind::ResourceOut) {
            EXPECT_EQ(j["records"][i]["reason"], "timeout");
        } else {
            EXPECT_FALSE(j["records"][i].contains("reason"));
        }
    }
}

TEST(Bench, SummaryCountsAddUp) {
    const auto report = run_bench(3, 6, SolveConfig{});
    for (const auto& s : report.summaries) {
        EXPECT_EQ(s.completed + s.resource_out, 6u);
        EXPECT_EQ(s.sat + s.unsat, s.completed);
    }
    const auto table = to_text_table(report, false);
    EXPECT_NE(table.find("deep-narrow"), std::string::npos);
    EXPECT_NE(table.find("shallow-wide"), std::string::npos);
}
