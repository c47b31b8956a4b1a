// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "liftex/program.hpp"

using namespace liftex;

namespace {

std::string slurp(const std::string& name) {
    std::ifstream in(std::string(LIFTEX_CORPUS_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class T>
int count_goals(const Clause& c) {
    int n = 0;
    for (const auto& g : c.body) n += std::holds_alternative<T>(g);
    return n;
}

}  // namespace

TEST(Parse, Twoheads) {
    Program p = parse_program(slurp("twoheads.px"));
    ASSERT_EQ(p.clauses.size(), 1u);
    EXPECT_EQ(p.clauses[0].head.pred, "twoheads");
    ASSERT_EQ(p.populations.size(), 1u);
    EXPECT_EQ(p.populations[0].name, "coins");
    EXPECT_EQ(p.populations[0].size, 100);
    ASSERT_EQ(p.switches.size(), 1u);
    EXPECT_EQ(p.switches[0].name, "toss");
    EXPECT_EQ(p.switches[0].outcomes, (std::vector<PTerm>{PTerm::atom("h"), PTerm::atom("t")}));
    EXPECT_EQ(p.switches[0].probs, (std::vector<double>{0.5, 0.5}));
}

TEST(Parse, Empty) {
    EXPECT_EQ(parse_program(""), Program{});
    EXPECT_EQ(parse_program("% only a comment\n"), Program{});
}

TEST(Parse, Dice) {
    Program p = parse_program(slurp("dice.px"));
    ASSERT_EQ(p.clauses.size(), 2u);
    EXPECT_EQ(p.clauses[0].head.pred, "q");
    EXPECT_EQ(p.populations[0].size, 100);
    ASSERT_EQ(p.switches[0].outcomes.size(), 6u);
    for (double q : p.switches[0].probs) EXPECT_NEAR(q, 1.0 / 6, 1e-15);
    EXPECT_EQ(p.switches[0].outcomes[0], PTerm::integer(1));
}

TEST(Parse, RoundTripCorpus) {
    for (const char* f : {"twoheads.px", "dice.px", "urn.px"}) {
        Program p = parse_program(slurp(f));
        Program q = parse_program(render(p));
        EXPECT_EQ(p, q) << f;
        EXPECT_EQ(render(p), render(q)) << f;
    }
}

TEST(Parse, ErrorsCarryPosition) {
    try {
        (void)parse_program("p :-\n    msw(toss, X h).\n");
        FAIL() << "expected parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.loc().line, 2);
        EXPECT_EQ(e.loc().col, 17);
    }
}

TEST(Parse, RejectsBadDirectives) {
    EXPECT_THROW((void)parse_program(":- frobnicate(x).\n"), ParseError);
    EXPECT_THROW((void)parse_program(":- population(a, 2).\n:- population(a, 3).\n"), ParseError);
    EXPECT_THROW((void)parse_program(":- set_sw(s, categorical([a:0.5, b:0.6])).\n"), ParseError);
    EXPECT_THROW((void)parse_program(":- set_sw(s, uniform([a, b])).\n"), ParseError);
    EXPECT_THROW((void)parse_program(":- element(fred, persons).\n"), ParseError);
    EXPECT_THROW((void)parse_program(":- population(p, 1).\n:- element(a, p).\n:- element(b, p).\n"), ParseError);
    EXPECT_NO_THROW((void)parse_program(":- set_sw(s, categorical([a:1/3, b:2/3])).\n"));
}

TEST(Parse, Query) {
    EXPECT_EQ(parse_query("twoheads").pred, "twoheads");
    auto q = parse_query("p(fred, 3).");
    ASSERT_EQ(q.args.size(), 2u);
    EXPECT_EQ(q.args[0], PTerm::atom("fred"));
    EXPECT_EQ(q.args[1], PTerm::integer(3));
    EXPECT_THROW((void)parse_query("p(a) q"), ParseError);
}

TEST(Typing, Twoheads) {
    auto t = check_well_typed(parse_program(slurp("twoheads.px")));
    ASSERT_EQ(t.types.var_types.size(), 1u);
    EXPECT_EQ(t.types.var_types[0].at("X"), "coins");
    EXPECT_EQ(t.types.var_types[0].at("Y"), "coins");
    EXPECT_EQ(t.types.switch_types.at("toss"), "coins");
    // already explicit: nothing inserted
    EXPECT_EQ(t.program, parse_program(slurp("twoheads.px")));
}

TEST(Typing, ConstraintAcrossPopulations) {
    const char* src =
        "p :- X in coins, Y in dice, {X < Y}.\n"
        ":- population(coins, 3).\n:- population(dice, 3).\n";
    EXPECT_THROW((void)check_well_typed(parse_program(src)), TypeError);
}

TEST(Typing, SwitchAtTwoTypes) {
    const char* src =
        "p :- X in coins, msw(toss, X, _).\n"
        "r :- X in dice, msw(toss, X, _).\n"
        ":- population(coins, 3).\n:- population(dice, 3).\n"
        ":- set_sw(toss, categorical([h:0.5, t:0.5])).\n";
    try {
        (void)check_well_typed(parse_program(src));
        FAIL() << "expected type error";
    } catch (const TypeError& e) {
        EXPECT_NE(std::string(e.what()).find("toss"), std::string::npos);
        EXPECT_EQ(e.loc().line, 2);
    }
}

TEST(Typing, InfersMissingInGoals) {
    const char* src =
        "p :- msw(toss, X, h), q(X).\n"
        "q(Y) :- {Y = Y}.\n"
        "r :- X in coins, msw(toss, X, h).\n"
        ":- population(coins, 3).\n"
        ":- set_sw(toss, categorical([h:0.5, t:0.5])).\n";
    auto t = check_well_typed(parse_program(src));
    const Clause& c = t.program.clauses[0];
    ASSERT_EQ(c.body.size(), 3u);
    ASSERT_TRUE(std::holds_alternative<InGoal>(c.body[0]));
    EXPECT_EQ(std::get<InGoal>(c.body[0]).var, "X");
    EXPECT_EQ(std::get<InGoal>(c.body[0]).population, "coins");
    EXPECT_EQ(t.types.param_types.at("q/1"), std::vector<std::string>{"coins"});
    EXPECT_EQ(t.types.var_types[1].at("Y"), "coins");
    EXPECT_EQ(count_goals<InGoal>(t.program.clauses[1]), 1);
}

TEST(Typing, RejectsRecursion) {
    const char* src = "p :- q.\nq :- p.\n";
    EXPECT_THROW((void)check_well_typed(parse_program(src)), TypeError);
}

TEST(Typing, RejectsUntypedSwitchAndUnknownNames) {
    EXPECT_THROW((void)check_well_typed(parse_program(
                     "p :- msw(s, a, h).\n:- set_sw(s, categorical([h:1])).\n")),
                 TypeError);
    EXPECT_THROW((void)check_well_typed(parse_program("p :- X in nowhere.\n")), TypeError);
    EXPECT_THROW((void)check_well_typed(parse_program("p :- q.\n")), TypeError);
    EXPECT_THROW((void)check_well_typed(parse_program(
                     "p :- X in c, msw(s, X, z).\n:- population(c, 2).\n:- set_sw(s, categorical([h:1])).\n")),
                 TypeError);
}

TEST(Typing, ElementConstantsAreTyped) {
    const char* src =
        "p :- X in persons, {fred < X}.\n"
        ":- population(persons, 10).\n:- element(fred, persons).\n";
    auto t = check_well_typed(parse_program(src));
    EXPECT_EQ(t.types.constant_types.at("fred"), "persons");
    EXPECT_THROW((void)check_well_typed(parse_program("p :- X in persons, {bob < X}.\n:- population(persons, 2).\n")),
                 TypeError);
}

TEST(Disequality, SplitsIntoTwoClauses) {
    Program p = parse_program("p :- X in c, Y in c, {X \\= Y}.\n:- population(c, 3).\n");
    Program q = eliminate_disequality(p);
    ASSERT_EQ(q.clauses.size(), 2u);
    const auto& a = std::get<ConstraintGoal>(q.clauses[0].body[2]);
    const auto& b = std::get<ConstraintGoal>(q.clauses[1].body[2]);
    EXPECT_EQ(a.op, CmpOp::LT);
    EXPECT_EQ(a.lhs, PTerm::var("X"));
    EXPECT_EQ(b.op, CmpOp::LT);
    EXPECT_EQ(b.lhs, PTerm::var("Y"));
}

TEST(Disequality, NoDisequalityUnchanged) {
    Program p = parse_program(slurp("dice.px"));
    EXPECT_EQ(eliminate_disequality(p), p);
}

TEST(Disequality, TwoDisequalitiesGiveFour) {
    Program p = parse_program("p :- X in c, Y in c, Z in c, {X \\= Y}, {Y \\= Z}.\n:- population(c, 3).\n");
    Program q = eliminate_disequality(p);
    ASSERT_EQ(q.clauses.size(), 4u);
    for (const auto& c : q.clauses) {
        for (const auto& g : c.body) {
            if (const auto* k = std::get_if<ConstraintGoal>(&g)) EXPECT_NE(k->op, CmpOp::NE);
        }
    }
}

TEST(Populations, SingleAndOrdered) {
    auto m1 = map_populations(parse_program(":- population(coins, 100).\n"));
    EXPECT_EQ(m1.range("coins"), (Interval{1, 100}));
    EXPECT_EQ(m1.m, 100);
    auto m2 = map_populations(parse_program(":- population(coins, 3).\n:- population(dice, 2).\n"));
    EXPECT_EQ(m2.range("coins"), (Interval{1, 3}));
    EXPECT_EQ(m2.range("dice"), (Interval{4, 5}));
    EXPECT_EQ(m2.m, 5);
}

TEST(Populations, ElementsAtLowEnd) {
    auto m = map_populations(parse_program(
        ":- population(other, 2).\n:- population(persons, 10).\n:- element(fred, persons).\n:- element(ann, persons).\n"));
    EXPECT_EQ(m.constants.at("fred"), 3);
    EXPECT_EQ(m.constants.at("ann"), 4);
    auto solo = map_populations(parse_program(":- population(persons, 10).\n:- element(fred, persons).\n"));
    EXPECT_EQ(solo.constants.at("fred"), 1);
}

TEST(Populations, OverridesAndPartition) {
    Program p = parse_program(":- population(a, 3).\n:- population(b, 4).\n:- population(c, 0).\n");
    auto m = map_populations(p, {{"b", 7}});
    std::int64_t next = 1;
    for (const auto& pop : p.populations) {
        auto r = m.range(pop.name);
        EXPECT_EQ(r.lo, next);
        next = r.hi + 1;
    }
    EXPECT_EQ(next - 1, m.m);
    EXPECT_EQ(m.range("b").size(), 7);
    EXPECT_THROW((void)map_populations(p, {{"zzz", 1}}), std::invalid_argument);
}
