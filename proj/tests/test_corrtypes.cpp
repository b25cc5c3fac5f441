#include <gtest/gtest.h>

#include <random>
#include <set>

#include "fixture.hpp"
#include "helpers.hpp"
#include "praline/corrtypes.hpp"
#include "praline/oracle.hpp"

using namespace praline;

namespace {

struct Corr : Exact {
    CorrAnalysis ca;
    explicit Corr(const std::string& src, CorrOptions o = {}) : Exact(src), ca(p, gr.graph, phi, opt, o) {}
    CorrType facts(const std::string& a, const std::string& b) const { return ca.input_pair(p.fact(a), p.fact(b)); }
    CorrType nodes(const std::string& a, const std::string& b) { return ca.node_pair(node(a), node(b)); }
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

}  // namespace

TEST(Corr, EdgesInputPairs) {
    Corr c(slurp("edges.pl"));
    EXPECT_EQ(c.facts("edge(2,5)", "edge(2,6)"), CorrType::Pos);
    EXPECT_EQ(c.facts("edge(2,6)", "edge(2,5)"), CorrType::Pos);
    EXPECT_EQ(c.facts("edge(2,5)", "edge(1,4)"), CorrType::Pos);   // 0.8 > 0.6
    EXPECT_EQ(c.facts("edge(2,5)", "edge(2,5)"), CorrType::Pos);
    EXPECT_EQ(c.facts("edge(1,2)", "edge(2,5)"), CorrType::Indep);
    EXPECT_EQ(c.facts("edge(5,7)", "edge(6,7)"), CorrType::Indep);
}

TEST(Corr, EdgesExpressionPairs) {
    Corr c(slurp("edges.pl"));
    EXPECT_EQ(c.nodes("path(1,5)", "path(1,6)"), CorrType::Pos);
    EXPECT_EQ(c.nodes("path(1,6)", "path(1,5)"), CorrType::Pos);
    EXPECT_EQ(c.nodes("path(1,2)", "edge(5,7)"), CorrType::Indep);
    // path(1,5) & edge(5,7) touch disjoint classes
    EXPECT_EQ(c.nodes("path(1,5)", "edge(5,7)"), CorrType::Indep);
    auto& d = c.ca.node_dep(c.node("path(1,5)"));
    ASSERT_EQ(d.e.size(), 2u);
    for (auto& x : d.e) EXPECT_EQ(x.sign, 1);
    EXPECT_TRUE(d.chi);
    // path(1,7) touches two members of V4
    EXPECT_FALSE(c.ca.node_dep(c.node("path(1,7)")).chi);
}

TEST(Corr, NegationSwapsSigns) {
    Corr c("0.5::i. 0.5::j. 1::o :- j, \\+i. 1::x :- \\+o, i.");
    auto& o = c.ca.node_dep(c.node("o"));
    auto neg = dep_negate(o);
    for (auto& x : neg.e) {
        if (x.member == c.p.fact("i")) EXPECT_EQ(x.sign, 1);
        if (x.member == c.p.fact("j")) EXPECT_EQ(x.sign, 2);
    }
    EXPECT_EQ(dep_negate(neg).digest, o.digest);
    auto& x = c.ca.node_dep(c.node("x"));
    for (auto& en : x.e)
        if (en.member == c.p.fact("i")) EXPECT_EQ(en.sign, 1);   // \+o brings i back positive
}

TEST(Corr, DistinctClassesAreIndependent) {
    Corr c("0.3::a. 0.4::b. 0.9::x :- a. 0.8::y :- b.");
    EXPECT_EQ(c.facts("a", "b"), CorrType::Indep);
    EXPECT_EQ(c.nodes("x", "y"), CorrType::Indep);
    EXPECT_EQ(c.nodes("x", "x"), CorrType::Pos);
}

TEST(Corr, SharedEventIsPositive) {
    // both heads fire off the same rule event chain through z
    Corr c("0.3::a. 0.5::z :- a. 1::x :- z. 1::y :- z.");
    EXPECT_EQ(c.nodes("x", "y"), CorrType::Pos);
}

TEST(Corr, NegatedBodyFlips) {
    Corr c("0.3::a. 1::x :- a. 0.5::b. 1::y :- b, \\+a.");
    EXPECT_EQ(c.nodes("x", "y"), CorrType::Neg);
}

TEST(Corr, RandomTwoFactClassMatchesClosedForm) {
    // full table: P(a|b) = r against P(a) = pa decides the sign
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(0.1, 0.9);
    for (int t = 0; t < 100; ++t) {
        double pb = U(rng), pab = U(rng) * pb;
        double pa = pab + U(rng) * (1 - pb);
        double r = pab / pb;
        std::string src = fmt(pa) + "::a. " + fmt(pb) + "::b. " + fmt(r) + "::a | b.";
        Corr c(src);
        double ra = std::stod(fmt(r)), qa = std::stod(fmt(pa));
        CorrType want = ra > qa + 1e-6 ? CorrType::Pos : ra < qa - 1e-6 ? CorrType::Neg : CorrType::Top;
        if (want == CorrType::Top) continue;
        EXPECT_EQ(c.facts("a", "b"), want) << src;
        EXPECT_EQ(c.facts("b", "a"), want) << src;
    }
}

TEST(Corr, UnderdeterminedClassIsUnknown) {
    Corr c("0.5::b. 0.7::a | b.");
    EXPECT_EQ(c.facts("a", "b"), CorrType::Top);
    Corr d("0.5::a. 0.5::b. corr(a, b).");
    EXPECT_EQ(d.facts("a", "b"), CorrType::Top);
}

TEST(Corr, ExactIndependenceInsideClass) {
    Corr c("0.5::a. 0.4::b. 0.5::a | b.");
    EXPECT_EQ(c.facts("a", "b"), CorrType::Indep);
}

TEST(Corr, AllTopOption) {
    CorrOptions o;
    o.all_top = true;
    Corr c(slurp("edges.pl"), o);
    EXPECT_EQ(c.nodes("path(1,5)", "path(1,6)"), CorrType::Top);
    EXPECT_EQ(c.nodes("path(1,2)", "edge(5,7)"), CorrType::Indep);
    EXPECT_EQ(c.facts("edge(2,5)", "edge(2,6)"), CorrType::Top);
}

TEST(Corr, BudgetDegradesToTop) {
    CorrOptions o;
    o.budget = 0;
    Corr c(slurp("edges.pl"), o);
    EXPECT_EQ(c.nodes("path(1,5)", "path(1,6)"), CorrType::Top);
    EXPECT_TRUE(c.ca.degraded());
}

TEST(Corr, DumpListsPairs) {
    Corr c(slurp("edges.pl"));
    auto s = c.ca.dump_inputs();
    EXPECT_NE(s.find("edge(2,5) ~ edge(2,6): pos"), std::string::npos) << s;
}

TEST(Corr, DepIsLeafReachability) {
    for (uint64_t seed = 0; seed < 30; ++seed) {
        Corr c(random_program(seed));
        const auto& g = c.gr.graph;
        FlatGraph fg = flatten(g);
        for (size_t v = 0; v < g.nodes.size(); ++v) {
            std::set<int> want;
            for (size_t i = 0; i < g.nodes.size(); ++i)
                if (g.nodes[i].input && depends(fg, static_cast<int>(v), static_cast<int>(i)) != Polarity::None)
                    want.insert(g.nodes[i].fact);
            std::set<int> got;
            for (auto& x : c.ca.node_dep(static_cast<int>(v)).e)
                if (x.member < static_cast<int>(c.p.facts.size())) got.insert(x.member);
            EXPECT_EQ(got, want) << g.nodes[v].name;
            // signs follow path polarity
            for (auto& x : c.ca.node_dep(static_cast<int>(v)).e) {
                if (x.member >= static_cast<int>(c.p.facts.size())) continue;
                Polarity pol = depends(fg, static_cast<int>(v), g.find(c.p.facts[x.member]));
                uint8_t s = pol == Polarity::Pos ? 1 : pol == Polarity::Neg ? 2 : 3;
                if (g.nodes[v].input) s = 1;
                EXPECT_EQ(x.sign, s) << g.nodes[v].name << " " << c.p.facts[x.member];
            }
        }
    }
}

TEST(Corr, RaisingClassCapKeepsDefiniteVerdicts) {
    std::string src = slurp("edges.pl");
    CorrOptions small;
    small.max_class_size = 2;
    Exact a(src);
    Program p = a.p;
    GroundResult gr = solve_standard(p);
    ConstraintSystem narrow = gen_constraints(p, gr.graph, 2);
    Optimizer o2(narrow.classes);
    CorrAnalysis lo(p, gr.graph, narrow, o2, small);
    Corr hi(src);
    for (auto& x : p.facts)
        for (auto& y : p.facts) {
            CorrType t1 = lo.input_pair(p.fact(x), p.fact(y)), t2 = hi.facts(x, y);
            if (t1 != CorrType::Top && t2 != CorrType::Top) EXPECT_EQ(t1, t2) << x << " " << y;
        }
}
