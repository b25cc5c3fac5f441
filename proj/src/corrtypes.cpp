#include "praline/corrtypes.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace praline {

namespace {

constexpr double kVerdictTol = 1e-7;

uint64_t mix(uint64_t h, uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= h >> 31;
    h *= 0xbf58476d1ce4e5b9ULL;
    return h ^ (h >> 29);
}

CorrType verdict(double lo, double hi) {
    if (lo > kVerdictTol) return CorrType::Pos;
    if (hi < -kVerdictTol) return CorrType::Neg;
    if (lo >= -kVerdictTol && hi <= kVerdictTol) return CorrType::Indep;
    return CorrType::Top;
}

}  // namespace

const char* corr_name(CorrType t) {
    switch (t) {
        case CorrType::Pos: return "pos";
        case CorrType::Neg: return "neg";
        case CorrType::Indep: return "indep";
        default: return "unknown";
    }
}

void Dep::finish() {
    chi = true;
    uint64_t h = 0x51ed27;
    for (size_t i = 0; i < e.size(); ++i) {
        if (i && e[i].cls == e[i - 1].cls) chi = false;
        h = mix(h, (uint64_t(uint32_t(e[i].member)) << 2) | e[i].sign);
    }
    digest = h;
}

Dep dep_union(const Dep& a, const Dep& b) {
    Dep r;
    r.e.reserve(a.e.size() + b.e.size());
    size_t i = 0, j = 0;
    auto key = [](const Dep::Entry& x) { return std::make_pair(x.cls, x.member); };
    while (i < a.e.size() || j < b.e.size()) {
        if (j == b.e.size() || (i < a.e.size() && key(a.e[i]) < key(b.e[j]))) {
            r.e.push_back(a.e[i++]);
        } else if (i == a.e.size() || key(b.e[j]) < key(a.e[i])) {
            r.e.push_back(b.e[j++]);
        } else {
            Dep::Entry x = a.e[i++];
            x.sign |= b.e[j++].sign;
            r.e.push_back(x);
        }
    }
    r.finish();
    return r;
}

Dep dep_negate(const Dep& a) {
    Dep r = a;
    for (auto& x : r.e) x.sign = static_cast<uint8_t>(((x.sign & 1) << 1) | ((x.sign >> 1) & 1));
    r.finish();
    return r;
}

CorrAnalysis::CorrAnalysis(const Program& p, const DerivationGraph& g, const ConstraintSystem& phi,
                           const Optimizer& opt, CorrOptions o)
    : p_(p), g_(g), phi_(phi), opt_(opt), opts_(o) {
    n_facts_ = static_cast<int>(p.facts.size());
    n_events_ = g.num_events;
    n_classes_ = static_cast<int>(p.classes.size());
    fact_cls_ = p.class_of;
    member_of_.resize(n_facts_);
    for (int f = 0; f < n_facts_; ++f) member_of_[f] = p.classes[fact_cls_[f]].index.at(p.facts[f]);

    node_dep_.resize(g.nodes.size());
    for (int v : g.topo) {
        const Node& n = g.nodes[v];
        if (n.input) {
            node_dep_[v] = leaf_dep(n.fact);
            continue;
        }
        Dep d;
        for (int e : g.out[v]) {
            Dep ed = edge_body_dep(e);
            int ev = g.event_of_rule[g.edges[e].ground_rule];
            if (ev >= 0) ed = dep_union(ed, event_dep(ev));
            d = dep_union(d, ed);
        }
        d.finish();
        node_dep_[v] = std::move(d);
    }
}

Dep CorrAnalysis::leaf_dep(int x, bool negated) const {
    Dep d;
    d.e.push_back({class_of(x), x, static_cast<uint8_t>(negated ? 2 : 1)});
    d.finish();
    return d;
}

Dep CorrAnalysis::event_dep(int event) const { return leaf_dep(n_facts_ + event); }

Dep CorrAnalysis::edge_body_dep(int e) const {
    const Hyperedge& h = g_.edges[e];
    Dep d;
    for (int b : h.pos) d = dep_union(d, node_dep_[b]);
    for (int b : h.neg) d = dep_union(d, dep_negate(node_dep_[b]));
    d.finish();
    return d;
}

CorrType CorrAnalysis::input_pair(int x, int y) const {
    if (x > y) std::swap(x, y);
    if (class_of(x) != class_of(y)) return CorrType::Indep;
    if (opts_.all_top) return CorrType::Top;
    if (x >= n_facts_) return CorrType::Pos;   // the same rule event
    {
        std::lock_guard<std::mutex> lk(in_mu_);
        auto it = in_memo_.find({x, y});
        if (it != in_memo_.end()) return it->second;
    }
    CorrType t = compute_input_pair(x, y);
    std::lock_guard<std::mutex> lk(in_mu_);
    in_memo_[{x, y}] = t;
    return t;
}

CorrType CorrAnalysis::compute_input_pair(int x, int y) const {
    int c = fact_cls_[x];
    if (!phi_.built[c]) {
        if (x != y) return CorrType::Top;
        for (auto& d : p_.input_probs)
            if (d.given.empty() && d.target == p_.facts[x])
                return d.prob > 0 && d.prob < 1 ? CorrType::Pos : CorrType::Indep;
        return CorrType::Top;
    }
    const Polytope& poly = phi_.classes[c];
    int mx = member_of_[x], my = member_of_[y];
    size_t n = static_cast<size_t>(poly.dim);
    std::vector<double> e1(n), e2(n), ea(n);
    for (size_t b = 0; b < n; ++b) {
        e1[b] = (b >> mx) & 1;
        e2[b] = (b >> my) & 1;
        ea[b] = e1[b] * e2[b];
    }
    auto range = [&](const std::vector<double>& w) {
        auto lo = solve_lp(poly, w, false), hi = solve_lp(poly, w, true);
        bool ok = lo.status == LpStatus::Optimal && hi.status == LpStatus::Optimal;
        return std::make_tuple(ok, lo.value, hi.value);
    };
    auto [ok1, min1, max1] = range(e1);
    auto [ok2, min2, max2] = range(e2);
    if (!ok1 || !ok2) return CorrType::Top;

    // one marginal pinned: D is linear over the class polytope
    if (max1 - min1 <= 1e-12 || max2 - min2 <= 1e-12) {
        bool first = max1 - min1 <= 1e-12;
        double s = first ? 0.5 * (min1 + max1) : 0.5 * (min2 + max2);
        const auto& other = first ? e2 : e1;
        std::vector<double> w(n);
        for (size_t b = 0; b < n; ++b) w[b] = ea[b] - s * other[b];
        auto [ok, lo, hi] = range(w);
        if (!ok) return CorrType::Top;
        return verdict(lo, hi);
    }

    const auto* verts = opt_.vertices(c);
    if (!verts || verts->empty()) return CorrType::Top;
    size_t k = verts->size();
    std::vector<double> A(k), B(k), C(k);
    for (size_t i = 0; i < k; ++i) {
        const auto& v = (*verts)[i];
        for (size_t b = 0; b < n; ++b) {
            A[i] += ea[b] * v[b];
            B[i] += e1[b] * v[b];
            C[i] += e2[b] * v[b];
        }
    }
    double bmin = *std::min_element(B.begin(), B.end()), bmax = *std::max_element(B.begin(), B.end());
    double cmin = *std::min_element(C.begin(), C.end()), cmax = *std::max_element(C.begin(), C.end());
    // bilinear lifts D(x, y) with x = y recovering D; extremes sit at vertex pairs
    double lo1 = 1e9, lo2 = 1e9, hi1 = -1e9, hi2 = -1e9;
    for (size_t i = 0; i < k; ++i) {
        lo1 = std::min(lo1, A[i] - B[i] * cmax);
        lo2 = std::min(lo2, A[i] - C[i] * bmax);
        hi1 = std::max(hi1, A[i] - B[i] * cmin);
        hi2 = std::max(hi2, A[i] - C[i] * bmin);
    }
    double lo = std::max(lo1, lo2), hi = std::min(hi1, hi2);
    CorrType t = verdict(lo, hi);
    if (t == CorrType::Top || k > 2000) return t;

    // sample check inside the polytope
    std::mt19937_64 rng(opts_.seed ^ mix(uint64_t(x), uint64_t(y)));
    std::gamma_distribution<double> G(1.0, 1.0);
    std::vector<double> w(k);
    for (int s = 0; s < opts_.samples; ++s) {
        double tot = 0, a = 0, bb = 0, cc = 0;
        for (auto& z : w) tot += (z = G(rng));
        for (size_t i = 0; i < k; ++i) {
            double f = w[i] / tot;
            a += f * A[i];
            bb += f * B[i];
            cc += f * C[i];
        }
        double d = a - bb * cc;
        if ((t == CorrType::Pos && d <= kVerdictTol) || (t == CorrType::Neg && d >= -kVerdictTol) ||
            (t == CorrType::Indep && std::fabs(d) > kVerdictTol))
            return CorrType::Top;
    }
    return t;
}

CorrType CorrAnalysis::decide(const Dep& a, const Dep& b) const {
    bool shared = false;
    {
        size_t i = 0, j = 0;
        while (i < a.e.size() && j < b.e.size()) {
            if (a.e[i].cls < b.e[j].cls)
                ++i;
            else if (b.e[j].cls < a.e[i].cls)
                ++j;
            else {
                shared = true;
                break;
            }
        }
    }
    if (!shared) return CorrType::Indep;
    if (!a.chi || !b.chi) return CorrType::Top;

    bool may_pos = false, may_neg = false;
    size_t i = 0, j = 0;
    while (i < a.e.size() && j < b.e.size()) {
        if (a.e[i].cls < b.e[j].cls) {
            ++i;
            continue;
        }
        if (b.e[j].cls < a.e[i].cls) {
            ++j;
            continue;
        }
        const auto& x = a.e[i++];
        const auto& y = b.e[j++];
        CorrType t = input_pair(x.member, y.member);
        if (t == CorrType::Indep) continue;
        if (t == CorrType::Top) {
            may_pos = may_neg = true;
            break;
        }
        bool same = (x.sign & y.sign) != 0;
        bool opposite = ((x.sign & 1) && (y.sign & 2)) || ((x.sign & 2) && (y.sign & 1));
        bool pos = t == CorrType::Pos;
        if (same) (pos ? may_pos : may_neg) = true;
        if (opposite) (pos ? may_neg : may_pos) = true;
    }
    if (may_pos && !may_neg) return CorrType::Pos;
    if (may_neg && !may_pos) return CorrType::Neg;
    return CorrType::Top;
}

CorrType CorrAnalysis::expr_pair(const Dep& a, const Dep& b) {
    uint64_t k = a.digest < b.digest ? mix(a.digest, b.digest) : mix(b.digest, a.digest);
    {
        std::lock_guard<std::mutex> lk(ex_mu_);
        auto it = ex_memo_.find(k);
        if (it != ex_memo_.end()) return it->second;
    }
    if (misses_.fetch_add(1) >= opts_.budget) return CorrType::Top;
    CorrType t = decide(a, b);
    std::lock_guard<std::mutex> lk(ex_mu_);
    ex_memo_[k] = t;
    return t;
}

std::string CorrAnalysis::dump_inputs() const {
    std::ostringstream o;
    for (int c = 0; c < n_classes_; ++c) {
        const auto& cls = p_.classes[c];
        o << "V" << c + 1 << ":";
        for (auto& m : cls.members) o << " " << m;
        o << "\n";
        for (size_t i = 0; i < cls.members.size(); ++i)
            for (size_t j = i; j < cls.members.size(); ++j) {
                int x = p_.fact(cls.members[i]), y = p_.fact(cls.members[j]);
                o << "  " << cls.members[i] << " ~ " << cls.members[j] << ": " << corr_name(input_pair(x, y))
                  << "\n";
            }
    }
    o << "facts in different classes: indep\n";
    return o.str();
}

}  // namespace praline
