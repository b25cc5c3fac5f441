#include <gtest/gtest.h>

#include "fixture.hpp"
#include "helpers.hpp"
#include "praline/oracle.hpp"
#include "praline/refine.hpp"

using namespace praline;

namespace {

struct Pipe : Exact {
    CorrAnalysis ca;
    Approx ap;
    explicit Pipe(const std::string& src) : Exact(src), ca(p, gr.graph, phi, opt), ap(p, gr.graph, phi, ca) {}
    RefineResult refine(const std::string& n, double delta) {
        RefineOptions o;
        o.delta = delta;
        return Refiner(p, gr.graph, phi, opt, ap, ca, o).run(node(n));
    }
};

// satisfiable iff the window meets [a, b]
SatFn range_sat(double a, double b, int* calls = nullptr) {
    return [=](double lo, double hi) {
        if (calls) ++*calls;
        return a <= hi + kSatTol && b >= lo - kSatTol;
    };
}

}  // namespace

TEST(Refine, MakeSatAlreadySatisfiable) {
    int calls = 0;
    auto [lo, hi] = make_sat(0.3, 0.05, true, range_sat(0.2, 0.5, &calls));
    EXPECT_EQ(calls, 1);
    EXPECT_NEAR(lo, 0.3, 1e-8);
    EXPECT_NEAR(hi, 0.3, 1e-8);
}

TEST(Refine, MakeSatSteps) {
    auto [lo, hi] = make_sat(0.288, 0.05, true, range_sat(0.344448, 0.412992));
    EXPECT_LE(lo, 0.344448);
    EXPECT_GE(hi, 0.344448);
    EXPECT_NEAR(lo, 0.338, 1e-6);
    auto [ulo, uhi] = make_sat(0.467424, 0.05, false, range_sat(0.344448, 0.412992));
    EXPECT_LE(ulo, 0.412992);
    EXPECT_GE(uhi, 0.412992);
    EXPECT_NEAR(uhi, 0.417424, 1e-6);
}

TEST(Refine, MakeSatBudget) {
    EXPECT_THROW(make_sat(0.0, 0.1, true, [](double, double) { return false; }), BudgetExceeded);
}

TEST(Refine, BinarySearchBracketsTarget) {
    for (double target : {0.01, 0.3337, 0.5, 0.9999}) {
        auto [lo, hi] = binary_search(0.0, 1.0, 0.01, true, range_sat(target, 1.0));
        EXPECT_LT(hi - lo, 0.01);
        EXPECT_LE(lo, target);
        EXPECT_GE(hi, target);
        auto [ulo, uhi] = binary_search(0.0, 1.0, 0.01, false, range_sat(0.0, target));
        EXPECT_LE(ulo, target);
        EXPECT_GE(uhi, target);
    }
    int calls = 0;
    binary_search(0.3, 0.31, 0.05, true, range_sat(0, 1, &calls));
    EXPECT_EQ(calls, 0);
}

TEST(Refine, EdgesDeltaPointZeroFive) {
    Pipe r(slurp("edges.pl"));
    auto res = r.refine("path(1,7)", 0.05);
    EXPECT_TRUE(res.refined);
    EXPECT_TRUE(res.exact_reachable);
    EXPECT_NEAR(res.iv.l, 0.338, 0.005);
    EXPECT_NEAR(res.iv.u, 0.417, 0.005);
    auto ex = r.opt.optimize_exact(r.tensor("path(1,7)"));
    EXPECT_LE(res.iv.l, ex.min);
    EXPECT_GE(res.iv.l, ex.min - 0.05);
    EXPECT_GE(res.iv.u, ex.max);
    EXPECT_LE(res.iv.u, ex.max + 0.05);
}

TEST(Refine, EdgesSmallDelta) {
    Pipe r(slurp("edges.pl"));
    auto ex = r.opt.optimize_exact(r.tensor("path(1,7)"));
    for (double d : {0.01, 0.001}) {
        auto res = r.refine("path(1,7)", d);
        EXPECT_LE(res.iv.l, ex.min + 1e-12);
        EXPECT_GE(res.iv.l, ex.min - d);
        EXPECT_GE(res.iv.u, ex.max - 1e-12);
        EXPECT_LE(res.iv.u, ex.max + d);
    }
}

TEST(Refine, DeltaOneKeepsApprox) {
    Pipe r(slurp("edges.pl"));
    auto res = r.refine("path(1,7)", 1.0);
    EXPECT_FALSE(res.refined);
    EXPECT_DOUBLE_EQ(res.iv.l, r.ap.of(r.node("path(1,7)")).l);
    EXPECT_DOUBLE_EQ(res.iv.u, r.ap.of(r.node("path(1,7)")).u);
}

TEST(Refine, CutSystemContainsExact) {
    Pipe r(slurp("edges.pl"));
    RefineOptions o;
    auto cs = build_cut_system(r.p, r.gr.graph, r.ap, r.ca, r.node("path(1,7)"), o);
    ASSERT_TRUE(cs.ok) << cs.why;
    auto ex = r.opt.optimize_exact(r.tensor("path(1,7)"));
    EXPECT_LE(cs.min, ex.min + 1e-9);
    EXPECT_GE(cs.max, ex.max - 1e-9);
    // e25/e26 joined with a positive pair row: P(both) in [0.36, 0.6]
    EXPECT_NEAR(cs.min, 0.6 * (0.9 - 0.56 * 0.6), 1e-9);
    EXPECT_NEAR(cs.max, 0.6 * (0.9 - 0.56 * 0.36), 1e-9);
}

TEST(Refine, CutSystemJointSizeSmallerThanInputs) {
    // only the two correlated facts share a group
    Pipe r(slurp("edges.pl"));
    RefineOptions o;
    auto cs = build_cut_system(r.p, r.gr.graph, r.ap, r.ca, r.node("path(1,7)"), o);
    ASSERT_TRUE(cs.ok);
    size_t vars = 0;
    for (auto& poly : cs.polys) vars += poly.dim;
    EXPECT_LT(vars, size_t{1} << (r.p.facts.size()));
}

TEST(Refine, CutRejectionsAreExactRejections) {
    Pipe r(slurp("chain.pl"));
    for (auto n : {"a", "b", "c", "d", "e"}) {
        auto ex = r.opt.optimize_exact(r.tensor(n));
        auto res = r.refine(n, 0.001);
        for (auto [lo, hi] : res.cut_unsat) EXPECT_TRUE(ex.min > hi || ex.max < lo) << n;
        EXPECT_LE(res.iv.l, ex.min + 1e-9) << n;
        EXPECT_GE(res.iv.u, ex.max - 1e-9) << n;
        EXPECT_GE(res.iv.l, ex.min - 0.001) << n;
        EXPECT_LE(res.iv.u, ex.max + 0.001) << n;
    }
}

TEST(Refine, RandomProgramsKeepContract) {
    for (uint64_t seed = 300; seed < 350; ++seed) {
        std::string src = random_program(seed);
        Pipe r(src);
        for (int v : r.gr.outputs) {
            const std::string& n = r.gr.graph.nodes[v].name;
            auto ex = exact_interval_oracle(r.p, r.gr.graph, r.phi, r.opt, v);
            RefineOptions o;
            o.delta = 0.01;
            auto cs = build_cut_system(r.p, r.gr.graph, r.ap, r.ca, v, o);
            if (cs.ok) {
                EXPECT_LE(cs.min, ex.l + 1e-9) << n << "\n" << src;
                EXPECT_GE(cs.max, ex.u - 1e-9) << n << "\n" << src;
            }
            auto res = r.refine(n, 0.01);
            for (auto [lo, hi] : res.cut_unsat) EXPECT_TRUE(ex.l > hi || ex.u < lo) << n << "\n" << src;
            EXPECT_LE(res.iv.l, ex.l + 1e-9) << n;
            EXPECT_GE(res.iv.l, ex.l - 0.01) << n;
            EXPECT_GE(res.iv.u, ex.u - 1e-9) << n;
            EXPECT_LE(res.iv.u, ex.u + 0.01) << n;
            auto a = r.ap.of(v);
            EXPECT_GE(res.iv.l, a.l - 1e-12);
            EXPECT_LE(res.iv.u, a.u + 1e-12);
        }
    }
}
