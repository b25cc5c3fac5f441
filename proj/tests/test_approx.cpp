#include <gtest/gtest.h>

#include <random>

#include "fixture.hpp"
#include "helpers.hpp"
#include "praline/approx.hpp"

using namespace praline;

namespace {

struct Pipe : Exact {
    CorrAnalysis ca;
    Approx ap;
    explicit Pipe(const std::string& src, CorrOptions o = {})
        : Exact(src), ca(p, gr.graph, phi, opt, o), ap(p, gr.graph, phi, ca) {}
    Interval at(const std::string& n) const { return ap.of(node(n)); }
};

const CorrType kTypes[] = {CorrType::Pos, CorrType::Neg, CorrType::Indep, CorrType::Top};

}  // namespace

TEST(Approx, CombinatorTable) {
    double a = 0.3, b = 0.6;
    EXPECT_DOUBLE_EQ(combine(Comb::CL, a, b, CorrType::Pos), 0.18);
    EXPECT_DOUBLE_EQ(combine(Comb::CL, a, b, CorrType::Neg), 0.0);
    EXPECT_DOUBLE_EQ(combine(Comb::CL, 0.7, 0.6, CorrType::Top), 0.7 + 0.6 - 1);
    EXPECT_DOUBLE_EQ(combine(Comb::CL, a, b, CorrType::Indep), 0.18);
    EXPECT_DOUBLE_EQ(combine(Comb::CU, a, b, CorrType::Pos), 0.3);
    EXPECT_DOUBLE_EQ(combine(Comb::CU, a, b, CorrType::Neg), 0.18);
    EXPECT_DOUBLE_EQ(combine(Comb::CU, a, b, CorrType::Indep), 0.18);
    EXPECT_DOUBLE_EQ(combine(Comb::CU, a, b, CorrType::Top), 0.3);
    EXPECT_DOUBLE_EQ(combine(Comb::DL, a, b, CorrType::Pos), 0.6);
    EXPECT_DOUBLE_EQ(combine(Comb::DL, a, b, CorrType::Neg), 1 - 0.7 * 0.4);
    EXPECT_DOUBLE_EQ(combine(Comb::DL, a, b, CorrType::Indep), 1 - 0.7 * 0.4);
    EXPECT_DOUBLE_EQ(combine(Comb::DL, a, b, CorrType::Top), 0.6);
    EXPECT_DOUBLE_EQ(combine(Comb::DU, a, b, CorrType::Pos), 1 - 0.7 * 0.4);
    EXPECT_DOUBLE_EQ(combine(Comb::DU, a, b, CorrType::Neg), 0.9);
    EXPECT_DOUBLE_EQ(combine(Comb::DU, a, b, CorrType::Indep), 1 - 0.7 * 0.4);
    EXPECT_DOUBLE_EQ(combine(Comb::DU, 0.7, 0.6, CorrType::Top), 1.0);
    EXPECT_DOUBLE_EQ(combine(Comb::CL, 0.6, 0.6, CorrType::Pos), 0.36);
    EXPECT_DOUBLE_EQ(combine(Comb::DU, 0.7 * 0.36, 0.8 * 0.36, CorrType::Top), 0.54);
}

TEST(Approx, ConstantOperands) {
    for (auto t : kTypes)
        for (double e : {0.0, 0.25, 1.0}) {
            EXPECT_DOUBLE_EQ(combine(Comb::CL, e, 1.0, t), e);
            EXPECT_DOUBLE_EQ(combine(Comb::CU, e, 1.0, t), e);
            EXPECT_DOUBLE_EQ(combine(Comb::CL, e, 0.0, t), 0.0);
            EXPECT_DOUBLE_EQ(combine(Comb::CU, e, 0.0, t), 0.0);
            EXPECT_DOUBLE_EQ(combine(Comb::DL, e, 0.0, t), e);
            EXPECT_DOUBLE_EQ(combine(Comb::DU, e, 0.0, t), e);
            EXPECT_DOUBLE_EQ(combine(Comb::DL, e, 1.0, t), 1.0);
            EXPECT_DOUBLE_EQ(combine(Comb::DU, e, 1.0, t), 1.0);
        }
}

TEST(Approx, CombinatorsMonotoneAndOrdered) {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> U(0, 1);
    for (int i = 0; i < 2000; ++i) {
        double a = U(rng), b = U(rng), d = U(rng) * (1 - a);
        for (auto t : kTypes) {
            EXPECT_LE(combine(Comb::CL, a, b, t), combine(Comb::CU, a, b, t) + 1e-15);
            EXPECT_LE(combine(Comb::DL, a, b, t), combine(Comb::DU, a, b, t) + 1e-15);
            for (auto op : {Comb::CL, Comb::CU, Comb::DL, Comb::DU})
                EXPECT_LE(combine(op, a, b, t), combine(op, a + d, b, t) + 1e-15);
        }
        // Top is the loosest
        for (auto t : kTypes) {
            EXPECT_LE(combine(Comb::CL, a, b, CorrType::Top), combine(Comb::CL, a, b, t) + 1e-15);
            EXPECT_GE(combine(Comb::CU, a, b, CorrType::Top), combine(Comb::CU, a, b, t) - 1e-15);
            EXPECT_LE(combine(Comb::DL, a, b, CorrType::Top), combine(Comb::DL, a, b, t) + 1e-15);
            EXPECT_GE(combine(Comb::DU, a, b, CorrType::Top), combine(Comb::DU, a, b, t) - 1e-15);
        }
    }
}

TEST(Approx, EdgesBounds) {
    Pipe r(slurp("edges.pl"));
    auto i = r.at("path(1,7)");
    EXPECT_NEAR(i.l, 0.288, 1e-3);
    EXPECT_NEAR(i.u, 0.467, 1e-3);
    EXPECT_NEAR(i.u, 1 - (1 - 0.7 * 0.36) * (1 - 0.8 * 0.36), 1e-12);
    for (auto n : {"path(1,5)", "path(1,6)"}) {
        EXPECT_NEAR(r.at(n).l, 0.36, 1e-12) << n;
        EXPECT_NEAR(r.at(n).u, 0.36, 1e-12) << n;
    }
    EXPECT_NEAR(r.at("edge(2,5)").l, 0.6, 1e-12);
}

TEST(Approx, EdgesAllTopUpperIsFrechet) {
    CorrOptions o;
    o.all_top = true;
    Pipe r(slurp("edges.pl"), o);
    EXPECT_NEAR(r.at("path(1,7)").u, 0.54, 1e-9);
}

TEST(Approx, ContainsExactOnChain) {
    Pipe r(slurp("chain.pl"));
    for (auto n : {"a", "b", "c", "d", "e"}) {
        auto ex = r.opt.optimize_exact(r.tensor(n));
        auto i = r.at(n);
        EXPECT_LE(i.l, ex.min + 1e-9) << n;
        EXPECT_GE(i.u, ex.max - 1e-9) << n;
        EXPECT_LE(i.l, i.u);
    }
}

TEST(Approx, IndependentChainIsExact) {
    Pipe r("0.3::a. 0.6::b. 0.5::c. 0.9::x :- a, b. 0.4::x :- \\+c.");
    double px = 1 - (1 - 0.9 * 0.18) * (1 - 0.4 * 0.5);
    EXPECT_NEAR(r.at("x").l, px, 1e-12);
    EXPECT_NEAR(r.at("x").u, px, 1e-12);
}

TEST(Approx, TopNeverTighter) {
    CorrOptions o;
    o.all_top = true;
    Pipe a(slurp("chain.pl")), b(slurp("chain.pl"), o);
    for (size_t v = 0; v < a.gr.graph.nodes.size(); ++v) {
        EXPECT_LE(b.ap.of(v).l, a.ap.of(v).l + 1e-12);
        EXPECT_GE(b.ap.of(v).u, a.ap.of(v).u - 1e-12);
    }
}
