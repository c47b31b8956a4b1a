// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "liftex/driver.hpp"
#include "oracles.hpp"

using namespace liftex;

namespace {

RunConfig config(const std::string& file, const std::string& query, Mode mode,
                 std::map<std::string, std::int64_t> pops) {
    RunConfig c;
    c.program_path = std::string(LIFTEX_CORPUS_DIR) + "/" + file;
    c.query = query;
    c.mode = mode;
    c.populations = std::move(pops);
    return c;
}

int exit_code_of(const RunConfig& c) {
    try {
        (void)run(c);
        return kExitOk;
    } catch (const RunError& e) {
        return e.code();
    }
}

}  // namespace

TEST(Driver, Examples) {
    RunReport r = run(config("twoheads.px", "twoheads", Mode::Auto, {{"coins", 3}}));
    EXPECT_NEAR(r.probability, 0.5, 1e-12);
    EXPECT_EQ(r.mode_used, Mode::Lifted);
    EXPECT_FALSE(r.ground_nodes.has_value());
    EXPECT_EQ(r.lifted_nodes, std::optional<std::size_t>(4));
    EXPECT_EQ(r.subsumption, (std::map<std::string, bool>{{"X", true}, {"Y", true}}));
    EXPECT_GT(r.cells, 0u);

    r = run(config("dice.px", "q", Mode::Auto, {{"dice", 2}}));
    EXPECT_NEAR(r.probability, 1.0 / 18.0, 1e-9);
    EXPECT_EQ(r.mode_used, Mode::Ground);
    EXPECT_EQ(format_prob(r.probability), "0.0555555555556");
    EXPECT_FALSE(r.note.empty());

    r = run(config("twoheads.px", "twoheads", Mode::Compare, {{"coins", 4}}));
    EXPECT_NEAR(*r.p_lifted, 0.6875, 1e-12);
    EXPECT_NEAR(*r.p_ground, 0.6875, 1e-12);
    EXPECT_EQ(r.lifted_source, "recurrences");
    EXPECT_FALSE(r.mismatch());
}

TEST(Driver, DiceAutoMatchesEnumeration) {
    const std::vector<double> roll(6, 1.0 / 6.0);
    for (int n = 2; n <= 4; ++n) {
        const RunReport r = run(config("dice.px", "q", Mode::Auto, {{"dice", n}}));
        EXPECT_NEAR(r.probability, oracle::two_of_either_enum(n, roll, 0, 1), 1e-9) << n;
    }
}

TEST(Driver, CompareOverCorpus) {
    const std::vector<std::tuple<const char*, const char*, const char*>> progs{
        {"twoheads.px", "twoheads", "coins"}, {"dice.px", "q", "dice"}, {"urn.px", "q", "balls"}};
    for (const auto& [file, query, pop] : progs) {
        for (int n = 2; n <= 5; ++n) {
            const RunReport r = run(config(file, query, Mode::Compare, {{pop, n}}));
            EXPECT_FALSE(r.mismatch()) << file << " " << n;
            EXPECT_GE(r.probability, 0.0);
            EXPECT_LE(r.probability, 1.0);
        }
    }
    const RunReport u = run(config("urn.px", "q", Mode::Compare, {{"balls", 4}}));
    EXPECT_NEAR(*u.p_ground, oracle::two_of_either_enum(4, {0.3, 0.5, 0.2}, 0, 1), 1e-12);
}

TEST(Driver, ExitCodes) {
    EXPECT_EQ(exit_code_of(config("missing.px", "q", Mode::Auto, {})), kExitUsage);
    EXPECT_EQ(exit_code_of(config("twoheads.px", "twoheads", Mode::Auto, {{"nope", 3}})), kExitUsage);
    EXPECT_EQ(exit_code_of(config("twoheads.px", "other", Mode::Auto, {})), kExitUnsupported);
    EXPECT_EQ(exit_code_of(config("twoheads.px", "twoheads(", Mode::Auto, {})), kExitParse);
    EXPECT_EQ(exit_code_of(config("dice.px", "q", Mode::Lifted, {{"dice", 3}})), kExitUnsupported);

    RunConfig bad = config("", "p", Mode::Auto, {});
    bad.program_path = "inline.px";
    bad.program_text = "p :- foo(.\n";
    try {
        (void)run(bad);
        FAIL();
    } catch (const RunError& e) {
        EXPECT_EQ(e.code(), kExitParse);
        EXPECT_EQ(std::string(e.what()).rfind("inline.px:1:10: ", 0), 0u) << e.what();
    }
    bad.program_text = "p :- X in c, msw(s, X, a).\n:- set_sw(s, categorical([a:0.5, b:0.5])).\n";
    try {
        (void)run(bad);
        FAIL();
    } catch (const RunError& e) {
        EXPECT_EQ(e.code(), kExitType);
    }
    bad.program_text =
        "q(X) :- X in c, msw(s, X, a).\n:- population(c, 3).\n:- set_sw(s, categorical([a:0.5, b:0.5])).\n";
    bad.query = "q(Z)";
    EXPECT_EQ(exit_code_of(bad), kExitUnsupported);
    bad.query = "q(zz)";
    EXPECT_EQ(exit_code_of(bad), kExitUnsupported);
    bad.mode = Mode::Ground;
    EXPECT_EQ(exit_code_of(bad), kExitUnsupported);
}

TEST(Driver, JsonFields) {
    for (Mode m : {Mode::Lifted, Mode::Ground, Mode::Auto, Mode::Compare}) {
        const auto j = report_json(run(config("twoheads.px", "twoheads", m, {{"coins", 5}})));
        for (const char* k : {"probability", "mode", "subsumption", "lifted_nodes", "ground_nodes", "time_s", "cells"}) {
            EXPECT_TRUE(j.contains(k)) << k;
        }
        EXPECT_GE(j["probability"].get<double>(), 0.0);
        EXPECT_LE(j["probability"].get<double>(), 1.0);
        EXPECT_EQ(j.contains("p_lifted"), m == Mode::Compare);
    }
    const auto j = report_json(run(config("twoheads.px", "twoheads", Mode::Lifted, {{"coins", 5}})));
    EXPECT_EQ(j["ground_nodes"], "skipped");
    EXPECT_EQ(j["mode"], "lifted");
}

TEST(Driver, DotAndRecurrences) {
    RunConfig c = config("twoheads.px", "twoheads", Mode::Auto, {{"coins", 6}});
    c.dot_path = testing::TempDir() + "liftex_twoheads.dot";
    c.recurrences = true;
    const RunReport r = run(c);
    std::ifstream in(*c.dot_path);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), r.dot);
    EXPECT_EQ(r.dot.rfind("digraph lifted {", 0), 0u);
    EXPECT_NE(r.recurrences.find("fhat2 = 0.5"), std::string::npos);
    std::remove(c.dot_path->c_str());

    c.mode = Mode::Ground;
    c.dot_path = testing::TempDir() + "liftex_twoheads_ground.dot";
    EXPECT_EQ(run(c).dot.rfind("digraph ground {", 0), 0u);
    std::remove(c.dot_path->c_str());
}

TEST(Driver, Bench) {
    RunConfig c = config("twoheads.px", "twoheads", Mode::Auto, {});
    c.bench = BenchSpec{"coins", {10, 100, 1000}};
    BenchTable t = bench(c);
    ASSERT_EQ(t.rows.size(), 3u);
    EXPECT_TRUE(t.nodes_constant());
    EXPECT_NEAR(t.rows[0].probability, oracle::twoheads_closed(10, 0.5), 1e-12);

    c.bench = BenchSpec{"coins", {1000, 2000}};
    t = bench(c);
    const double ratio = static_cast<double>(t.rows[1].cells) / static_cast<double>(t.rows[0].cells);
    EXPECT_GE(ratio, 1.8);
    EXPECT_LE(ratio, 2.2);

    c.bench = BenchSpec{"coins", {7}};
    EXPECT_EQ(bench(c).rows.size(), 1u);

    c.mode = Mode::Compare;
    EXPECT_THROW((void)bench(c), RunError);
    c.mode = Mode::Auto;
    c.program_path = std::string(LIFTEX_CORPUS_DIR) + "/dice.px";
    c.query = "q";
    c.bench = BenchSpec{"dice", {3}};
    try {
        (void)bench(c);
        FAIL();
    } catch (const RunError& e) {
        EXPECT_EQ(e.code(), kExitUnsupported);
    }
}
