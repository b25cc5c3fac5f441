#include "praline/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace praline {

Tensor to_tensor(const Algebra& alg, const ProbExpr& e, const std::vector<double>& probs) {
    Tensor t;
    t.cls = e.cls;
    for (int c : e.cls) t.widths.push_back(alg.width(c));
    t.v = alg.numeric(e, probs);
    return t;
}

Tensor contract(const Tensor& t, size_t k, const std::vector<double>& dist) {
    int off = 0;
    for (size_t i = 0; i < k; ++i) off += t.widths[i];
    int w = t.widths[k];
    Tensor r;
    for (size_t i = 0; i < t.cls.size(); ++i)
        if (i != k) {
            r.cls.push_back(t.cls[i]);
            r.widths.push_back(t.widths[i]);
        }
    size_t out_n = t.v.size() >> w;
    r.v.assign(out_n, 0.0);
    size_t lo_mask = (size_t{1} << off) - 1;
    size_t nb = size_t{1} << w;
    for (size_t idx = 0; idx < out_n; ++idx) {
        size_t lo = idx & lo_mask, hi = idx >> off;
        size_t base = (hi << (off + w)) | lo;
        double s = 0;
        for (size_t b = 0; b < nb; ++b) {
            double d = dist[b];
            if (d != 0.0) s += d * t.v[base | (b << off)];
        }
        r.v[idx] = s;
    }
    return r;
}

double eval_tensor(const Tensor& t, const std::vector<std::vector<double>>& point) {
    Tensor cur = t;
    while (!cur.cls.empty()) cur = contract(cur, 0, point[cur.cls[0]]);
    return cur.v.empty() ? 0.0 : cur.v[0];
}

Optimizer::Optimizer(std::vector<Polytope> polys, OptCaps caps) : polys_(std::move(polys)), caps_(caps) {}

const std::vector<std::vector<double>>* Optimizer::vertices(int cls) const {
    {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = cache_.find(cls);
        if (it != cache_.end()) return it->second.get();
        if (failed_.count(cls)) return nullptr;
    }
    std::shared_ptr<std::vector<std::vector<double>>> v;
    try {
        v = std::make_shared<std::vector<std::vector<double>>>(enumerate_vertices(polys_[cls], caps_.vertex_cols));
    } catch (const CapExceeded&) {
        std::lock_guard<std::mutex> lk(mu_);
        failed_[cls] = true;
        return nullptr;
    }
    std::lock_guard<std::mutex> lk(mu_);
    auto [it, ins] = cache_.emplace(cls, v);
    return it->second.get();
}

bool Optimizer::exact_possible(const Tensor& t) const {
    int missing = 0;
    long double combos = 1;
    size_t biggest = 0;
    for (int c : t.cls) {
        auto* v = vertices(c);
        if (!v) {
            ++missing;
            continue;
        }
        if (v->empty()) return true;   // infeasible, trivially decided
        combos *= static_cast<long double>(v->size());
        biggest = std::max(biggest, v->size());
    }
    if (missing > 1) return false;
    if (missing == 0 && biggest > 0) combos /= static_cast<long double>(biggest);
    return combos <= static_cast<long double>(caps_.combos);
}

namespace {

struct Best {
    double val;
    std::vector<std::vector<double>> arg;
};

}  // namespace

OptResult Optimizer::optimize_exact(const Tensor& t) const {
    OptResult res;
    res.method = Method::VertexExact;
    if (t.cls.empty()) {
        res.min = res.max = t.v.empty() ? 0.0 : t.v[0];
        return res;
    }
    size_t k = t.cls.size();
    std::vector<const std::vector<std::vector<double>>*> verts(k);
    int last = -1;
    int missing = 0;
    for (size_t i = 0; i < k; ++i) {
        verts[i] = vertices(t.cls[i]);
        if (!verts[i]) {
            ++missing;
            last = static_cast<int>(i);
        } else if (verts[i]->empty()) {
            throw InfeasibleError("class V" + std::to_string(t.cls[i] + 1) + " has no feasible point");
        }
    }
    if (missing > 1) throw CapExceeded("more than one class is too large for vertex enumeration");
    if (last < 0) {
        last = 0;
        for (size_t i = 1; i < k; ++i)
            if (verts[i]->size() > verts[last]->size()) last = static_cast<int>(i);
    }
    long double combos = 1;
    for (size_t i = 0; i < k; ++i)
        if (static_cast<int>(i) != last) combos *= static_cast<long double>(verts[i]->size());
    if (combos > static_cast<long double>(caps_.combos)) throw CapExceeded("vertex combinations exceed cap");

    // LP fallback for the last class when it is not enumerated
    if (!verts[last]) {
        LpResult probe = feasible_point(polys_[t.cls[last]]);
        if (probe.status != LpStatus::Optimal)
            throw InfeasibleError("class V" + std::to_string(t.cls[last] + 1) + " has no feasible point");
    }

    Best lo{std::numeric_limits<double>::infinity(), {}}, hi{-std::numeric_limits<double>::infinity(), {}};
    std::vector<std::vector<double>> choice(k);
    std::vector<size_t> order;
    for (size_t i = 0; i < k; ++i)
        if (static_cast<int>(i) != last) order.push_back(i);

    // DFS; cur always holds the classes not yet fixed, in t.cls order
    auto leaf = [&](const Tensor& cur) {
        const std::vector<double>& c = cur.v;   // linear over the last class
        auto consider = [&](double val, const std::vector<double>& x, Best& b, bool less) {
            if (less ? val < b.val - 1e-15 : val > b.val + 1e-15) {
                b.val = val;
                choice[last] = x;
                b.arg = choice;
            }
        };
        if (verts[last]) {
            for (auto& x : *verts[last]) {
                double s = 0;
                for (size_t j = 0; j < c.size(); ++j) s += c[j] * x[j];
                consider(s, x, lo, true);
                consider(s, x, hi, false);
            }
        } else {
            auto rmin = solve_lp(polys_[t.cls[last]], c, false);
            auto rmax = solve_lp(polys_[t.cls[last]], c, true);
            if (rmin.status == LpStatus::Optimal) consider(rmin.value, rmin.x, lo, true);
            if (rmax.status == LpStatus::Optimal) consider(rmax.value, rmax.x, hi, false);
        }
    };
    std::function<void(size_t, const Tensor&)> dfs = [&](size_t depth, const Tensor& cur) {
        if (depth == order.size()) {
            leaf(cur);
            return;
        }
        size_t idx = order[depth];
        // position of class idx inside cur
        size_t pos = 0;
        while (cur.cls[pos] != t.cls[idx]) ++pos;
        for (auto& x : *verts[idx]) {
            choice[idx] = x;
            dfs(depth + 1, contract(cur, pos, x));
        }
    };
    dfs(0, t);
    res.min = lo.val;
    res.max = hi.val;
    res.argmin = lo.arg;
    res.argmax = hi.arg;
    return res;
}

OptResult Optimizer::block_coordinate(const Tensor& t, uint64_t seed) const {
    OptResult res;
    res.method = Method::BlockCoordinate;
    size_t k = t.cls.size();
    if (k == 0) {
        res.min = res.max = t.v.empty() ? 0.0 : t.v[0];
        return res;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);

    auto solve_block = [&](size_t i, const std::vector<double>& c, bool maximize) {
        auto* v = vertices(t.cls[i]);
        if (v && !v->empty()) {
            const std::vector<double>* best = nullptr;
            double bv = 0;
            for (auto& x : *v) {
                double s = 0;
                for (size_t j = 0; j < c.size(); ++j) s += c[j] * x[j];
                if (!best || (maximize ? s > bv : s < bv)) {
                    bv = s;
                    best = &x;
                }
            }
            return *best;
        }
        auto r = solve_lp(polys_[t.cls[i]], c, maximize);
        if (r.status != LpStatus::Optimal)
            throw InfeasibleError("class V" + std::to_string(t.cls[i] + 1) + " has no feasible point");
        return r.x;
    };

    auto run = [&](bool maximize) {
        double best = maximize ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
        std::vector<std::vector<double>> best_pt;
        for (int rs = 0; rs < caps_.restarts; ++rs) {
            std::vector<std::vector<double>> pt(k);
            for (size_t i = 0; i < k; ++i) {
                std::vector<double> c(size_t{1} << t.widths[i]);
                for (auto& x : c) x = U(rng);
                pt[i] = solve_block(i, c, false);
            }
            double val = 0;
            for (int sweep = 0; sweep < 100; ++sweep) {
                double before = val;
                for (size_t i = 0; i < k; ++i) {
                    // contract everything except block i
                    Tensor cur = t;
                    for (size_t j = 0; j < k; ++j) {
                        if (j == i) continue;
                        size_t pos = 0;
                        while (cur.cls[pos] != t.cls[j]) ++pos;
                        cur = contract(cur, pos, pt[j]);
                    }
                    pt[i] = solve_block(i, cur.v, maximize);
                    val = 0;
                    for (size_t j = 0; j < cur.v.size(); ++j) val += cur.v[j] * pt[i][j];
                }
                if (sweep > 0 && std::fabs(val - before) < 1e-13) break;
            }
            if (maximize ? val > best : val < best) {
                best = val;
                best_pt = pt;
            }
        }
        return std::make_pair(best, best_pt);
    };
    auto [mn, amin] = run(false);
    auto [mx, amax] = run(true);
    res.min = mn;
    res.max = mx;
    res.argmin = amin;
    res.argmax = amax;
    return res;
}

OptResult Optimizer::optimize(const Tensor& t, uint64_t seed) const {
    if (exact_possible(t)) {
        try {
            return optimize_exact(t);
        } catch (const CapExceeded&) {
        }
    }
    return block_coordinate(t, seed);
}

bool Optimizer::check_sat(const OptResult& r, double l, double u) const {
    return r.min <= u + 1e-9 && r.max >= l - 1e-9;
}

}  // namespace praline
