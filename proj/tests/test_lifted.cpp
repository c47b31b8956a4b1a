// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "liftex/lifted.hpp"
#include "oracles.hpp"

using namespace liftex;

namespace {

struct Loaded {
    TypedProgram tp;
    SwitchTable sw;
    PopulationMap pops;
};

Loaded load(const std::string& src, const std::map<std::string, std::int64_t>& sizes) {
    Loaded l;
    l.tp = check_well_typed(eliminate_disequality(parse_program(src)));
    l.sw = SwitchTable(l.tp.program);
    l.pops = map_populations(l.tp.program, sizes);
    return l;
}

const char* kSwitches =
    ":- set_sw(toss, categorical([h:0.5, t:0.5])).\n"
    ":- set_sw(roll, categorical([1:1/6, 2:1/6, 3:1/6, 4:1/6, 5:1/6, 6:1/6])).\n";

AtomicConstraint lt(VarId a, VarId b) { return {Rel::LT, Term::of(a), Term::of(b)}; }

// The coin graph built from the operations, as the clause would be.
LiftedGraph twoheads_graph(LiftedContext& ctx, std::int64_t n, VarId* xo = nullptr, VarId* yo = nullptr) {
    const VarId x = ctx.new_var("X", {1, n}), y = ctx.new_var("Y", {1, n});
    const int toss = ctx.switches().index("toss");
    AnswerSet s{true_graph(ctx, {x})};
    s = set_and(ctx, s, {lifted_rv(ctx, toss, LTerm::of(x), 0)});
    s = set_and(ctx, s, {true_graph(ctx, {y})});
    s = set_and(ctx, s, {constraint_graph(ctx, lt(x, y))});
    s = set_and(ctx, s, {lifted_rv(ctx, toss, LTerm::of(y), 0)});
    s = quantify(ctx, s, x);
    s = quantify(ctx, s, y);
    if (xo) *xo = x;
    if (yo) *yo = y;
    return s.size() == 1 ? s.front() : LiftedGraph::False();
}

}  // namespace

TEST(Lifted, RvAndConstraintGraphs) {
    SwitchTable sw(parse_program(kSwitches));
    LiftedContext ctx(sw);
    const VarId x = ctx.new_var("X", {1, 100});
    const int toss = sw.index("toss"), roll = sw.index("roll");
    LiftedGraph g = lifted_rv(ctx, toss, LTerm::of(x), 0, domain_box(ctx, {x}));
    EXPECT_TRUE(g.omega.empty());
    EXPECT_EQ(ctx.node(g.psi).kids, (std::vector<LId>{kL1, kL0}));
    LiftedGraph r = lifted_rv(ctx, roll, LTerm::of(x), 0);
    EXPECT_EQ(ctx.node(r.psi).kids.size(), 6u);

    GroundEngine e(sw);
    EXPECT_EQ(ground(ctx, substitute(ctx, g, 1, x), e), e.rv(toss, 1, 0));
    EXPECT_THROW((void)lifted_rv(ctx, toss, LTerm::of(x), 2), std::invalid_argument);

    const VarId y = ctx.new_var("Y", {1, 100});
    LiftedGraph c = constraint_graph(ctx, lt(x, y));
    EXPECT_EQ(c.psi, kL1);
    EXPECT_TRUE(c.eta.entails(lt(x, y)));
    LiftedGraph t = constraint_graph(ctx, {Rel::LT, Term::constant(1), Term::constant(2)});
    EXPECT_EQ(t.psi, kL1);
    EXPECT_TRUE(t.eta.vars().empty());
    LiftedGraph f = constraint_graph(ctx, lt(x, x));
    EXPECT_TRUE(f.is_false());
    EXPECT_EQ(f.psi, kL0);
    EXPECT_FALSE(validate(ctx, f).has_value());
}

TEST(Lifted, TwoheadsStructure) {
    SwitchTable sw(parse_program(kSwitches));
    LiftedContext ctx(sw);
    VarId x, y;
    LiftedGraph g = twoheads_graph(ctx, 100, &x, &y);
    EXPECT_EQ(header_text(ctx, g), "∃X.∃Y. X<Y");
    EXPECT_EQ(g.omega, (std::vector<VarId>{x, y}));
    const LNode& root = ctx.node(g.psi);
    EXPECT_EQ(ctx.label_text(root), "(toss,X)");
    EXPECT_EQ(root.kids[1], kL0);
    EXPECT_EQ(ctx.label_text(ctx.node(root.kids[0])), "(toss,Y)");
    EXPECT_EQ(ctx.node(root.kids[0]).kids, (std::vector<LId>{kL1, kL0}));
    EXPECT_EQ(node_count(ctx, g), 4u);
    EXPECT_TRUE(check_well_structured(ctx, g));
    EXPECT_FALSE(validate(ctx, g).has_value());

    auto ex = lifted_explanations(ctx, g.psi);
    ASSERT_EQ(ex.size(), 1u);
    EXPECT_EQ(explanation_text(ctx, ex[0]), "{toss[X]=h, toss[Y]=h}");
    EXPECT_TRUE(lifted_explanations(ctx, kL0).empty());

    const std::string dot = to_dot(ctx, g);
    EXPECT_NE(dot.find("∃X.∃Y. X<Y"), std::string::npos);
    EXPECT_NE(dot.find("style=rounded"), std::string::npos);
}

TEST(Lifted, Substitution) {
    SwitchTable sw(parse_program(kSwitches));
    LiftedContext ctx(sw);
    VarId x, y;
    LiftedGraph g = twoheads_graph(ctx, 100, &x, &y);
    LiftedGraph g1 = substitute(ctx, g, 1, x);
    EXPECT_EQ(g1.omega, (std::vector<VarId>{y}));
    EXPECT_EQ(g1.eta.range(y), (Interval{2, 100}));
    EXPECT_EQ(ctx.label_text(ctx.node(g1.psi)), "(toss,1)");
    EXPECT_FALSE(validate(ctx, g1).has_value());

    LiftedGraph g100 = substitute(ctx, g, 100, x);
    EXPECT_TRUE(g100.is_false());
    EXPECT_EQ(g100.psi, kL0);

    // variable not in psi: psi unchanged
    const VarId z = ctx.new_var("Z", {1, 5});
    LiftedGraph h = twoheads_graph(ctx, 5);
    h.eta = h.eta.with_var(z, {1, 5});
    LiftedGraph h3 = substitute(ctx, h, 3, z);
    EXPECT_EQ(h3.psi, h.psi);
    EXPECT_FALSE(h3.eta.has_var(z));
}

TEST(Lifted, CompareNodes) {
    SwitchTable sw(parse_program(kSwitches));
    LiftedContext ctx(sw);
    const VarId x = ctx.new_var("X", {1, 6}), y = ctx.new_var("Y", {1, 6});
    const int roll = sw.index("roll"), toss = sw.index("toss");
    ConstraintFormula e = domain_box(ctx, {x, y}).add(lt(x, y));
    EXPECT_EQ(compare_nodes(e, toss, LTerm::of(x), toss, LTerm::of(y)), NodeOrder::LT);
    EXPECT_EQ(compare_nodes(e, toss, LTerm::of(y), toss, LTerm::of(x)), NodeOrder::GT);
    ASSERT_LT(roll, toss);
    EXPECT_EQ(compare_nodes(domain_box(ctx, {x}), roll, LTerm::of(x), toss, LTerm::of(x)), NodeOrder::LT);
    EXPECT_EQ(compare_nodes(domain_box(ctx, {x}), roll, LTerm::of(x), roll, LTerm::of(x)), NodeOrder::EQ);
    EXPECT_EQ(compare_nodes(domain_box(ctx, {x, y}), roll, LTerm::of(x), roll, LTerm::of(y)),
              NodeOrder::INCOMPARABLE);
    EXPECT_EQ(compare_nodes(ConstraintFormula(), roll, LTerm::constant(2), roll, LTerm::constant(3)), NodeOrder::LT);
}

TEST(Lifted, StandardizeApart) {
    SwitchTable sw(parse_program(kSwitches));
    LiftedContext ctx(sw);
    VarId x, y;
    LiftedGraph a = twoheads_graph(ctx, 4, &x, &y);
    auto [a1, b1] = standardize_apart(ctx, a, a);
    EXPECT_EQ(a1.omega, a.omega);
    ASSERT_EQ(b1.omega.size(), 2u);
    EXPECT_NE(b1.omega, a.omega);
    EXPECT_EQ(ctx.name(b1.omega[0]), "X'");
    GroundEngine e(sw);
    EXPECT_EQ(ground(ctx, a, e), ground(ctx, b1, e));

    LiftedGraph c = twoheads_graph(ctx, 4);
    auto [a2, c2] = standardize_apart(ctx, a, c);
    EXPECT_EQ(a2.omega, a.omega);
    EXPECT_EQ(c2.omega, c.omega);
}

TEST(Lifted, QuantifyErrors) {
    SwitchTable sw(parse_program(kSwitches));
    LiftedContext ctx(sw);
    const VarId x = ctx.new_var("X", {1, 3}), z = ctx.new_var("Z", {1, 3});
    LiftedGraph g = lifted_rv(ctx, 0, LTerm::of(x), 0);
    EXPECT_THROW((void)quantify(g, z), std::invalid_argument);
    LiftedGraph q = quantify(g, x);
    EXPECT_THROW((void)quantify(q, x), std::invalid_argument);
    EXPECT_TRUE(q.is_closed());
}

TEST(Lifted, OrIdentities) {
    SwitchTable sw(parse_program(kSwitches));
    LiftedContext ctx(sw);
    LiftedGraph g = twoheads_graph(ctx, 5);
    AnswerSet r = l_or(ctx, g, LiftedGraph::False());
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].psi, g.psi);
    EXPECT_EQ(r[0].eta, g.eta);
    AnswerSet f = l_and(ctx, g, LiftedGraph::False());
    ASSERT_EQ(f.size(), 1u);
    EXPECT_TRUE(f[0].is_false());
}

TEST(Lifted, DiceMerge) {
    auto l = load(oracle::slurp_corpus("dice.px"), {{"dice", 6}});
    LiftedContext ctx(l.sw);
    LiftedGraph g = lifted_query(ctx, l.tp, l.pops, parse_query("q"));
    ASSERT_FALSE(g.is_false());
    EXPECT_FALSE(validate(ctx, g).has_value());
    const LNode& root = ctx.node(g.psi);
    EXPECT_EQ(ctx.label_text(root), "(roll,X'')");
    std::vector<std::string> kids;
    for (LId k : root.kids) kids.push_back(LiftedContext::is_leaf(k) ? std::to_string(k) : ctx.label_text(ctx.node(k)));
    EXPECT_EQ(kids, (std::vector<std::string>{"(roll,Y)", "(roll,Y')", "0", "0", "0", "0"}));
    const VarId x2 = *ctx.find_var("X''"), y = *ctx.find_var("Y"), y1 = *ctx.find_var("Y'");
    EXPECT_EQ(g.omega, (std::vector<VarId>{y, y1, x2}));
    ConstraintFormula expect = domain_box(ctx, {x2, y, y1}).add(lt(x2, y)).add(lt(x2, y1));
    EXPECT_EQ(g.eta, expect);
    EXPECT_TRUE(check_well_structured(ctx, g));

    auto ex = lifted_explanations(ctx, g.psi);
    ASSERT_EQ(ex.size(), 2u);
    EXPECT_EQ(explanation_text(ctx, ex[0]), "{roll[X'']=1, roll[Y]=1}");
    EXPECT_EQ(explanation_text(ctx, ex[1]), "{roll[X'']=2, roll[Y']=2}");
}

TEST(Lifted, WellStructuredViolation) {
    SwitchTable sw(parse_program(kSwitches));
    LiftedContext ctx(sw);
    const VarId x = ctx.new_var("X", {1, 4}), z = ctx.new_var("Z", {1, 4});
    const int roll = sw.index("roll"), toss = sw.index("toss");
    // (toss,Z) with two different subtrees each testing (roll,X), X not above
    const LId a = ctx.mk(roll, LTerm::of(x), {kL1, kL0, kL0, kL0, kL0, kL0});
    const LId b = ctx.mk(roll, LTerm::of(x), {kL0, kL1, kL0, kL0, kL0, kL0});
    const LId root = ctx.mk(toss, LTerm::of(z), {a, b});
    ConstraintFormula eta = domain_box(ctx, {x, z}).add(lt(z, x));
    LiftedGraph g{{x, z}, eta, root};
    EXPECT_FALSE(validate(ctx, g).has_value());
    EXPECT_FALSE(check_well_structured(ctx, g));
    // same shape with X free is fine
    LiftedGraph h{{z}, eta, root};
    EXPECT_TRUE(check_well_structured(ctx, h));
    LiftedGraph single{{x}, domain_box(ctx, {x}), a};
    EXPECT_TRUE(check_well_structured(ctx, single));
}

TEST(Lifted, GroundCoinsTwoAndThree) {
    SwitchTable sw(parse_program(kSwitches));
    LiftedContext ctx(sw);
    GroundEngine e(sw);
    LiftedGraph g2 = twoheads_graph(ctx, 2);
    EXPECT_EQ(ground(ctx, g2, e), e.g_and(e.rv(1, 1, 0), e.rv(1, 2, 0)));
    LiftedGraph g3 = twoheads_graph(ctx, 3);
    const NodeId n3 = ground(ctx, g3, e);
    NodeId expect = kZero;
    for (int i = 1; i <= 3; ++i) {
        for (int j = i + 1; j <= 3; ++j) expect = e.g_or(expect, e.g_and(e.rv(1, i, 0), e.rv(1, j, 0)));
    }
    EXPECT_EQ(n3, expect);
    EXPECT_EQ(ground(ctx, LiftedGraph::False(), e), kZero);
    const VarId free = ctx.new_var("F", {1, 3});
    EXPECT_THROW((void)ground(ctx, lifted_rv(ctx, 1, LTerm::of(free), 0), e), std::invalid_argument);
}

TEST(Lifted, GroundMatchesGroundQueryOnCorpus) {
    for (const char* file : {"twoheads.px", "dice.px", "urn.px"}) {
        const std::string src = oracle::slurp_corpus(file);
        const std::string pop = std::string(file) == "twoheads.px" ? "coins"
                                : std::string(file) == "dice.px"   ? "dice"
                                                                   : "balls";
        const std::string q = std::string(file) == "twoheads.px" ? "twoheads" : "q";
        for (int n = 2; n <= 4; ++n) {
            auto l = load(src, {{pop, n}});
            LiftedContext ctx(l.sw);
            GroundEngine e(l.sw);
            LiftedGraph g = lifted_query(ctx, l.tp, l.pops, parse_query(q));
            const NodeId a = ground(ctx, g, e);
            EXPECT_EQ(a, ground_query(l.tp, l.pops, e, parse_query(q))) << file << " n=" << n;
            EXPECT_EQ(a, ground_by_enumeration(ctx, g, e)) << file << " n=" << n;
        }
    }
}

TEST(Lifted, ProgramsWithCallsConstantsAndBranching) {
    const std::string src =
        "p :- X in c, q(X), Y in c, {X < Y}, msw(s, Y, a).\n"
        "q(X) :- msw(s, X, a).\n"
        "q(X) :- msw(t, X, b).\n"
        "r :- X in c, msw(s, X, V), msw(t, X, V2), same(V, V2).\n"
        "same(V, V).\n"
        "k :- msw(s, bob, a), X in c, {bob < X}, msw(t, X, a).\n"
        "w :- q(bob).\n"
        "d :- X in c, Y in c, {X \\= Y}, msw(s, X, a), msw(s, Y, b).\n"
        "u :- X in c, msw(s, X, V), msw(t, X, V).\n"
        ":- population(c, 4).\n:- element(bob, c).\n"
        ":- set_sw(s, categorical([a:0.3, b:0.7])).\n:- set_sw(t, categorical([a:0.6, b:0.4])).\n";
    for (int n = 2; n <= 4; ++n) {
        Loaded l;
        l.tp = check_well_typed(eliminate_disequality(parse_program(src)));
        l.sw = SwitchTable(l.tp.program);
        l.pops = map_populations(l.tp.program, {{"c", n}});
        for (const char* q : {"p", "k", "w", "d", "u"}) {
            LiftedContext ctx(l.sw);
            GroundEngine e(l.sw);
            LiftedGraph g = lifted_query(ctx, l.tp, l.pops, parse_query(q));
            EXPECT_FALSE(validate(ctx, g).has_value()) << q;
            EXPECT_EQ(ground(ctx, g, e), ground_query(l.tp, l.pops, e, parse_query(q))) << q << " n=" << n;
        }
        LiftedContext ctx(l.sw);
        EXPECT_THROW((void)lifted_query(ctx, l.tp, l.pops, parse_query("r")), LiftError);
    }
}
