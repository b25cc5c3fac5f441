#include "praline/refine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace praline {

std::pair<double, double> make_sat(double start, double eps, bool lower, const SatFn& sat) {
    double lo = start - kSatTol, hi = start + kSatTol;
    long cap = static_cast<long>(std::ceil(1.0 / eps)) + 2;
    for (long it = 0; !sat(lo, hi); ++it) {
        if (it >= cap) throw BudgetExceeded("no satisfiable window found");
        if (lower) {
            lo = hi;
            hi += eps;
        } else {
            hi = lo;
            lo -= eps;
        }
    }
    return {lo, hi};
}

std::pair<double, double> binary_search(double lo, double hi, double delta, bool lower, const SatFn& sat) {
    while (hi - lo >= delta) {
        double mid = 0.5 * (lo + hi);
        if (lower) {
            if (!sat(lo, mid))
                lo = mid;
            else
                hi = mid;
        } else {
            if (!sat(mid, hi))
                hi = mid;
            else
                lo = mid;
        }
    }
    return {lo, hi};
}

namespace {

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
    void unite(int a, int b) { p[find(a)] = find(b); }
};

struct CutShape {
    bool ok = false;
    std::vector<std::vector<int>> groups;
};

}  // namespace

CutSystem build_cut_system(const Program& p, const DerivationGraph& g, const Approx& ap, CorrAnalysis& ca,
                           int root, const RefineOptions& o) {
    CutSystem cs;
    int n_classes = static_cast<int>(p.classes.size());
    std::set<int> above{root}, cut;
    for (int e : g.out[root]) {
        for (int b : g.edges[e].pos) cut.insert(b);
        for (int b : g.edges[e].neg) cut.insert(b);
    }
    if (cut.empty()) {
        cs.why = "no body atoms";
        return cs;
    }

    auto shape = [&](const std::set<int>& K, const std::set<int>& A) {
        CutShape s;
        // events fired above the cut must not reappear inside a cut node
        std::set<int> events;
        for (int v : A)
            for (int e : g.out[v]) {
                int ev = g.event_of_rule[g.edges[e].ground_rule];
                if (ev >= 0) events.insert(n_classes + ev);
            }
        std::vector<int> ks(K.begin(), K.end());
        UnionFind uf(static_cast<int>(ks.size()));
        std::map<int, int> owner;
        for (size_t i = 0; i < ks.size(); ++i)
            for (auto& x : ca.node_dep(ks[i]).e) {
                if (events.count(x.cls)) return s;
                auto [it, ins] = owner.emplace(x.cls, static_cast<int>(i));
                if (!ins) uf.unite(static_cast<int>(i), it->second);
            }
        std::map<int, std::vector<int>> by_root;
        for (size_t i = 0; i < ks.size(); ++i) by_root[uf.find(static_cast<int>(i))].push_back(ks[i]);
        long vars = 0;
        int bits = 0;
        for (auto& [r, members] : by_root) {
            int w = static_cast<int>(members.size());
            if (w > o.max_group) return s;
            bits += w;
            vars += 1L << w;
            s.groups.push_back(members);
        }
        s.ok = bits <= o.max_cut_bits && vars <= o.cut_cap;
        return s;
    };

    CutShape cur = shape(cut, above);
    if (!cur.ok) {
        cs.why = "root cut too wide";
        return cs;
    }
    std::vector<int> indeg(g.nodes.size(), 0);
    for (auto& h : g.edges) {
        for (int b : h.pos) ++indeg[b];
        for (int b : h.neg) ++indeg[b];
    }
    // greedy: expand the frontier node with most incoming edges while the cut stays small
    std::set<int> tried;
    for (int step = 0; step < 64; ++step) {
        int best = -1;
        for (int v : cut)
            if (!g.leaf(v) && !tried.count(v) && (best < 0 || indeg[v] > indeg[best])) best = v;
        if (best < 0) break;
        auto K = cut, A = above;
        K.erase(best);
        A.insert(best);
        for (int e : g.out[best]) {
            for (int b : g.edges[e].pos)
                if (!A.count(b)) K.insert(b);
            for (int b : g.edges[e].neg)
                if (!A.count(b)) K.insert(b);
        }
        CutShape s = shape(K, A);
        if (!s.ok) {
            tried.insert(best);
            continue;
        }
        cut = std::move(K);
        above = std::move(A);
        cur = std::move(s);
    }

    cs.cut.assign(cut.begin(), cut.end());
    cs.groups = cur.groups;
    std::vector<int> widths;
    std::vector<LeafRef> leaves(g.nodes.size());
    for (size_t gi = 0; gi < cs.groups.size(); ++gi) {
        const auto& mem = cs.groups[gi];
        int w = static_cast<int>(mem.size());
        widths.push_back(w);
        int dim = 1 << w;
        Polytope poly;
        poly.dim = dim;
        poly.rows.push_back({std::vector<double>(dim, 1.0), '=', 1.0});
        auto marg = [&](int i) {
            std::vector<double> a(dim);
            for (int b = 0; b < dim; ++b) a[b] = (b >> i) & 1;
            return a;
        };
        for (int i = 0; i < w; ++i) {
            leaves[mem[i]] = {static_cast<int>(gi), i};
            Interval iv = ap.of(mem[i]);
            if (iv.u - iv.l < 1e-12) {
                poly.rows.push_back({marg(i), '=', iv.l});
                continue;
            }
            if (iv.l > 0) poly.rows.push_back({marg(i), '>', iv.l});
            if (iv.u < 1) poly.rows.push_back({marg(i), '<', iv.u});
        }
        for (int i = 0; i < w; ++i)
            for (int j = i + 1; j < w; ++j) {
                CorrType t = ca.node_pair(mem[i], mem[j]);
                if (t == CorrType::Top) continue;
                std::vector<double> a(dim);
                for (int b = 0; b < dim; ++b) a[b] = ((b >> i) & 1) && ((b >> j) & 1);
                Interval x = ap.of(mem[i]), y = ap.of(mem[j]);
                if (t == CorrType::Pos || t == CorrType::Indep) poly.rows.push_back({a, '>', x.l * y.l});
                if (t == CorrType::Neg || t == CorrType::Indep) poly.rows.push_back({a, '<', x.u * y.u});
            }
        cs.polys.push_back(std::move(poly));
    }
    try {
        Algebra alg(widths);
        ObjectiveBuilder ob(g, alg, leaves);
        ProbExpr e = ob.of(root);
        Tensor t = to_tensor(alg, e, [&] {
            std::vector<double> pr(g.num_events);
            for (size_t r = 0; r < g.ground_rules.size(); ++r)
                if (g.event_of_rule[r] >= 0) pr[g.event_of_rule[r]] = g.ground_rules[r].prob;
            return pr;
        }());
        Optimizer opt(cs.polys);
        OptResult r = opt.optimize_exact(t);
        cs.min = r.min;
        cs.max = r.max;
        cs.ok = true;
    } catch (const CapExceeded&) {
        cs.why = "cut objective over caps";
    } catch (const InfeasibleError&) {
        cs.why = "cut system infeasible";
    }
    return cs;
}

Refiner::Refiner(const Program& p, const DerivationGraph& g, const ConstraintSystem& phi, const Optimizer& opt,
                 const Approx& ap, CorrAnalysis& ca, RefineOptions o)
    : p_(p), g_(g), phi_(phi), opt_(opt), ap_(ap), ca_(ca), o_(o) {}

bool Refiner::exact_range(int node, OptResult& out) const {
    int n_classes = static_cast<int>(p_.classes.size());
    for (auto& x : ca_.node_dep(node).e)
        if (x.cls < n_classes &&
            (!phi_.built[x.cls] || static_cast<int>(p_.classes[x.cls].members.size()) > o_.max_class_size))
            return false;
    try {
        Algebra alg(class_widths(p_));
        Tensor t = to_tensor(alg, gen_objective(node, g_, p_, alg), phi_.event_probs);
        if (!opt_.exact_possible(t)) return false;
        out = opt_.optimize_exact(t);
        return true;
    } catch (const CapExceeded&) {
        return false;
    }
}

RefineResult Refiner::run(int node) const {
    RefineResult res;
    Interval a = ap_.of(node);
    res.iv = a;
    if (a.width() < 1e-12) return res;
    if (a.width() < o_.delta) {
        // already delta-tight; only a point optimum can improve on it
        OptResult ex;
        if (exact_range(node, ex) && ex.max - ex.min < 1e-12) {
            res.iv = {ex.min, ex.max};
            res.refined = res.exact_reachable = true;
        }
        return res;
    }

    enum class Stage { Cut, Exact, CutOnly } stage;
    CutSystem cs = build_cut_system(p_, g_, ap_, ca_, node, o_);
    OptResult ex;
    bool have_exact = false;
    if (cs.ok) {
        stage = Stage::Cut;
        res.used_cut = true;
    } else {
        have_exact = exact_range(node, ex);
        if (!have_exact) return res;
        stage = Stage::Exact;
    }
    res.exact_reachable = have_exact;

    auto hits = [](double mn, double mx, double lo, double hi) { return mn <= hi + kSatTol && mx >= lo - kSatTol; };
    SatFn sat = [&](double lo, double hi) {
        ++res.checks;
        if (stage == Stage::Exact) return hits(ex.min, ex.max, lo, hi);
        bool cut_sat = hits(cs.min, cs.max, lo, hi);
        if (!cut_sat) {
            res.cut_unsat.push_back({lo, hi});
            return false;
        }
        if (stage == Stage::CutOnly) return true;
        // first satisfiable answer on the cut: move to the exact encoding when possible
        have_exact = exact_range(node, ex);
        res.exact_reachable = have_exact;
        if (!have_exact) {
            stage = Stage::CutOnly;
            return true;
        }
        stage = Stage::Exact;
        return hits(ex.min, ex.max, lo, hi);
    };

    double eps = std::max(o_.delta, a.width() / 16.0);
    // a point optimum is already as tight as it gets
    auto point = [&] {
        if (stage != Stage::Exact || ex.max - ex.min >= 1e-12) return false;
        res.iv = {ex.min, ex.max};
        res.refined = true;
        return true;
    };
    auto [l_lo, l_hi] = make_sat(a.l, eps, true, sat);
    if (point()) return res;
    auto [u_lo, u_hi] = make_sat(a.u, eps, false, sat);
    if (point()) return res;
    std::tie(l_lo, l_hi) = binary_search(l_lo, l_hi, o_.delta, true, sat);
    std::tie(u_lo, u_hi) = binary_search(u_lo, u_hi, o_.delta, false, sat);
    double l = std::max(l_lo, a.l), u = std::min(u_hi, a.u);
    res.iv = {std::min(l, u), std::max(l, u)};
    res.refined = true;
    return res;
}

}  // namespace praline
