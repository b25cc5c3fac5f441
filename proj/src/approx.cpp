#include "praline/approx.hpp"

#include <algorithm>

namespace praline {

namespace {

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

double combine(Comb op, double a, double b, CorrType t) {
    switch (op) {
        case Comb::CL:
            if (t == CorrType::Pos || t == CorrType::Indep) return a * b;
            return std::max(a + b - 1.0, 0.0);
        case Comb::CU:
            if (t == CorrType::Pos || t == CorrType::Top) return std::min(a, b);
            return a * b;
        case Comb::DL:
            if (t == CorrType::Pos || t == CorrType::Top) return std::max(a, b);
            return 1.0 - (1.0 - a) * (1.0 - b);
        case Comb::DU:
            if (t == CorrType::Pos || t == CorrType::Indep) return 1.0 - (1.0 - a) * (1.0 - b);
            return std::min(1.0, a + b);
    }
    return 0.0;
}

Approx::Approx(const Program& p, const DerivationGraph& g, const ConstraintSystem& phi, CorrAnalysis& ca)
    : p_(p), g_(g), phi_(phi), ca_(ca) {
    iv_.assign(g.nodes.size(), Interval{0, 0});
    for (int v : g.topo) {
        const Node& n = g.nodes[v];
        if (n.input) {
            iv_[v] = leaf(n.fact);
            continue;
        }
        // disjunction over out-edges, folded left to right
        bool first = true;
        Interval acc{0, 0};
        Dep acc_dep;
        for (int e : g.out[v]) {
            Interval b = body(e);
            Dep d = ca_.edge_body_dep(e);
            int ev = g.event_of_rule[g.edges[e].ground_rule];
            if (ev >= 0) {
                double pr = g.ground_rules[g.edges[e].ground_rule].prob;
                Dep rd = ca_.event_dep(ev);
                CorrType t = ca_.expr_pair(d, rd);
                b = {combine(Comb::CL, b.l, pr, t), combine(Comb::CU, b.u, pr, t)};
                d = dep_union(d, rd);
            }
            if (first) {
                acc = b;
                acc_dep = d;
                first = false;
                continue;
            }
            CorrType t = ca_.expr_pair(acc_dep, d);
            acc = {combine(Comb::DL, acc.l, b.l, t), combine(Comb::DU, acc.u, b.u, t)};
            acc_dep = dep_union(acc_dep, d);
        }
        iv_[v] = {clamp01(acc.l), clamp01(std::max(acc.l, acc.u))};
    }
}

Interval Approx::leaf(int fact) const {
    int c = p_.class_of[fact];
    if (!phi_.built[c]) {
        for (auto& d : p_.input_probs)
            if (d.given.empty() && d.target == p_.facts[fact]) return {d.prob, d.prob};
        return {0, 1};
    }
    const Polytope& poly = phi_.classes[c];
    int m = p_.classes[c].index.at(p_.facts[fact]);
    std::vector<double> w(poly.dim);
    for (int b = 0; b < poly.dim; ++b) w[b] = (b >> m) & 1;
    auto lo = solve_lp(poly, w, false), hi = solve_lp(poly, w, true);
    if (lo.status != LpStatus::Optimal || hi.status != LpStatus::Optimal) return {0, 1};
    double l = clamp01(lo.value), u = clamp01(hi.value);
    if (u - l < 1e-12) l = u = 0.5 * (l + u);
    return {l, std::max(l, u)};
}

Interval Approx::body(int e) const {
    const Hyperedge& h = g_.edges[e];
    bool first = true;
    Interval acc{1, 1};
    Dep acc_dep;
    auto step = [&](Interval x, const Dep& d) {
        if (first) {
            acc = x;
            acc_dep = d;
            first = false;
            return;
        }
        CorrType t = ca_.expr_pair(acc_dep, d);
        acc = {combine(Comb::CL, acc.l, x.l, t), combine(Comb::CU, acc.u, x.u, t)};
        acc_dep = dep_union(acc_dep, d);
    };
    for (int b : h.pos) step(iv_[b], ca_.node_dep(b));
    for (int b : h.neg) step({1.0 - iv_[b].u, 1.0 - iv_[b].l}, dep_negate(ca_.node_dep(b)));
    return acc;
}

}  // namespace praline
