#include <gtest/gtest.h>

#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <set>

#include "helpers.hpp"
#include "praline/grounder.hpp"

using namespace praline;

namespace {

int edges_of(const DerivationGraph& g, const std::string& head) {
    int v = g.find(head);
    return v < 0 ? -1 : static_cast<int>(g.out[v].size());
}

// all-paths enumeration on a DAG; returns {has positive path, has negative path}
std::pair<bool, bool> all_paths(const FlatGraph& fg, int v, int target, int sign) {
    if (v == target) return {sign > 0, sign < 0};
    bool p = false, n = false;
    for (int e : fg.adj[v]) {
        auto [a, b] = all_paths(fg, fg.edges[e].to, target, sign * fg.edges[e].sign);
        p = p || a;
        n = n || b;
    }
    return {p, n};
}

}  // namespace

TEST(Grounder, EdgesDerivationGraph) {
    Program p = parse_file(data_path("edges.pl"));
    GroundResult r = solve_standard(p);
    const auto& g = r.graph;
    EXPECT_EQ(edges_of(g, "path(1,7)"), 2);
    EXPECT_EQ(edges_of(g, "path(1,2)"), 1);
    EXPECT_EQ(edges_of(g, "path(1,5)"), 1);
    EXPECT_EQ(edges_of(g, "path(1,6)"), 1);
    EXPECT_FALSE(g.cyclic());
    for (size_t v = 0; v < g.nodes.size(); ++v) {
        if (g.nodes[v].input)
            EXPECT_TRUE(g.leaf(static_cast<int>(v)));
        else
            EXPECT_FALSE(g.leaf(static_cast<int>(v))) << g.nodes[v].name;
    }
    // rule probabilities are 1, so no events
    EXPECT_EQ(g.num_events, 0);
}

TEST(Grounder, NoRulesGivesIsolatedLeaves) {
    Program p = parse("0.1::a. 0.2::b.");
    GroundResult r = solve_standard(p);
    EXPECT_EQ(r.graph.nodes.size(), 2u);
    EXPECT_TRUE(r.graph.edges.empty());
    EXPECT_TRUE(r.outputs.empty());
}

TEST(Grounder, ChainFiringCount) {
    // 4-node chain: path(i,j) for i<j, each path(i,j) with j-i>1 has exactly one recursive firing
    Program p = parse(
        "0.5::e(1,2). 0.5::e(2,3). 0.5::e(3,4).\n"
        "1::path(X,Y) :- e(X,Y).\n"
        "1::path(X,Y) :- path(X,Z), e(Z,Y).\n");
    GroundResult r = solve_standard(p);
    // base firings: 3; recursive: path(1,3), path(2,4), path(1,4)
    EXPECT_EQ(r.graph.edges.size(), 6u);
    EXPECT_EQ(r.outputs.size(), 6u);
    std::set<std::string> rules;
    for (auto& gr : r.graph.ground_rules) rules.insert(gr.name);
    EXPECT_EQ(rules.size(), 6u);   // distinct substitutions, distinct ids
}

TEST(Grounder, DuplicateApplicationsAreOneEdge) {
    Program p = parse("0.5::a. 0.6::b :- a, a.");
    GroundResult r = solve_standard(p);
    EXPECT_EQ(r.graph.edges.size(), 1u);
    EXPECT_EQ(r.graph.num_events, 1);
}

TEST(Grounder, NonStratifiedNegation) {
    EXPECT_THROW(solve_standard(parse("0.5::a. 1::p :- a, \\+q. 1::q :- p.")), NonStratifiedError);
    EXPECT_NO_THROW(solve_standard(parse("0.5::a. 1::p :- a. 1::q :- a, \\+p.")));
}

TEST(Grounder, MutualRecursionUnfolds) {
    Program p = parse(
        "0.5::a. 0.5::b.\n"
        "0.9::p :- a.\n"
        "1::p :- q.\n"
        "0.8::q :- b.\n"
        "1::q :- p.\n");
    GroundResult r = solve_standard(p);
    const auto& g = r.graph;
    EXPECT_FALSE(g.cyclic());
    EXPECT_GE(g.find("p"), 0);
    EXPECT_GE(g.find("q"), 0);
    EXPECT_GE(g.find("p@1"), 0);
    EXPECT_GE(g.find("q@1"), 0);
    EXPECT_EQ(g.nodes[g.find("p@1")].origin, g.find("p"));
    // copies share the original ground rule events
    EXPECT_EQ(g.num_events, 2);
    EXPECT_FALSE(r.unfold_capped);
}

TEST(Grounder, RecursiveFixpointMatchesNodeSet) {
    // cyclic edge relation: ground path graph contains cycles
    Program p = parse(
        "0.5::e(1,2). 0.5::e(2,3). 0.5::e(3,1). 0.5::e(3,4).\n"
        "1::path(X,Y) :- e(X,Y).\n"
        "1::path(X,Y) :- path(X,Z), e(Z,Y).\n");
    GroundResult r = solve_standard(p);
    std::set<std::string> derived;
    for (int v : r.outputs) derived.insert(r.graph.nodes[v].name);
    std::set<std::string> want;
    for (int x : {1, 2, 3})
        for (int y : {1, 2, 3, 4}) want.insert("path(" + std::to_string(x) + "," + std::to_string(y) + ")");
    EXPECT_EQ(derived, want);
    EXPECT_FALSE(r.graph.cyclic());
    for (int v : r.outputs) EXPECT_FALSE(r.graph.leaf(v)) << r.graph.nodes[v].name;
}

TEST(Grounder, AcyclicGraphUnchangedByBreakCycles) {
    Program p = parse_file(data_path("edges.pl"));
    GroundResult r = solve_standard(p);
    DerivationGraph g = r.graph;
    EXPECT_FALSE(break_cycles(g));
    EXPECT_EQ(g.nodes.size(), r.graph.nodes.size());
    EXPECT_EQ(g.edges.size(), r.graph.edges.size());
}

TEST(Grounder, FlattenEdges) {
    Program p = parse_file(data_path("edges.pl"));
    const auto& g = solve_standard(p).graph;
    FlatGraph fg = flatten(g);
    size_t want = 0;
    for (auto& h : g.edges) want += h.pos.size() + h.neg.size();
    EXPECT_EQ(fg.edges.size(), want);
    int p15 = g.find("path(1,5)");
    std::set<std::string> kids;
    for (int e : fg.adj[p15]) {
        EXPECT_EQ(fg.edges[e].sign, 1);
        kids.insert(g.nodes[fg.edges[e].to].name);
    }
    EXPECT_EQ(kids, (std::set<std::string>{"path(1,2)", "edge(2,5)"}));
    EXPECT_EQ(depends(fg, g.find("path(1,7)"), g.find("edge(2,5)")), Polarity::Pos);
    EXPECT_EQ(depends(fg, g.find("path(1,5)"), g.find("edge(2,6)")), Polarity::None);
}

TEST(Grounder, NegativeEdgePolarity) {
    Program p = parse("0.5::i. 0.5::j. 1::o :- j, \\+i. 1::x :- \\+o, i. 1::y :- o, i.");
    const auto& g = solve_standard(p).graph;
    FlatGraph fg = flatten(g);
    EXPECT_EQ(depends(fg, g.find("o"), g.find("i")), Polarity::Neg);
    EXPECT_EQ(depends(fg, g.find("x"), g.find("i")), Polarity::Pos);   // two negations cancel
    EXPECT_EQ(depends(fg, g.find("y"), g.find("i")), Polarity::Both);
    EXPECT_EQ(depends(fg, g.find("x"), g.find("j")), Polarity::Neg);
}

TEST(Grounder, PolarityMatchesAllPaths) {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        // random layered program with mixed negation
        std::string src;
        for (int i = 0; i < 4; ++i) src += "0.5::i" + std::to_string(i) + ".\n";
        std::vector<std::string> avail{"i0", "i1", "i2", "i3"};
        for (int k = 0; k < 6; ++k) {
            std::string head = "d" + std::to_string(k);
            int nb = 1 + static_cast<int>(rng() % 3);
            std::string body;
            bool has_pos = false;
            for (int b = 0; b < nb; ++b) {
                std::string a = avail[rng() % avail.size()];
                bool neg = has_pos && rng() % 2;
                if (!neg) has_pos = true;
                body += std::string(body.empty() ? "" : ", ") + (neg ? "\\+" : "") + a;
            }
            src += "1::" + head + " :- " + body + ".\n";
            avail.push_back(head);
        }
        Program p = parse(src);
        const auto& g = solve_standard(p).graph;
        FlatGraph fg = flatten(g);
        for (size_t o = 0; o < g.nodes.size(); ++o)
            for (size_t i = 0; i < g.nodes.size(); ++i) {
                if (!g.nodes[i].input) continue;
                auto [pp, nn] = all_paths(fg, static_cast<int>(o), static_cast<int>(i), 1);
                Polarity want = pp && nn ? Polarity::Both : pp ? Polarity::Pos : nn ? Polarity::Neg : Polarity::None;
                EXPECT_EQ(depends(fg, static_cast<int>(o), static_cast<int>(i)), want) << src;
            }
    }
}

TEST(Grounder, JsonDump) {
    Program p = parse_file(data_path("edges.pl"));
    const auto& g = solve_standard(p).graph;
    auto j = nlohmann::json::parse(to_json(g));
    EXPECT_EQ(j["nodes"].size(), g.nodes.size());
    EXPECT_EQ(j["hyperedges"].size(), g.edges.size());
}
