#include "praline/symexpr.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>

namespace praline {

namespace {

// literal code: 2*v for v, 2*v+1 for (1-v)
std::vector<int> literals(const Monomial& m) {
    std::vector<int> l;
    for (int v : m.pos) l.push_back(2 * v);
    for (int v : m.neg) l.push_back(2 * v + 1);
    std::sort(l.begin(), l.end());
    return l;
}

Monomial from_literals(long long c, const std::vector<int>& l) {
    Monomial m;
    m.c = c;
    for (int x : l) (x & 1 ? m.neg : m.pos).push_back(x >> 1);
    return m;
}

bool mono_less(const Monomial& a, const Monomial& b) {
    size_t na = a.pos.size() + a.neg.size(), nb = b.pos.size() + b.neg.size();
    if (na != nb) return na < nb;
    auto la = literals(a), lb = literals(b);
    if (la != lb) return la < lb;
    return a.c < b.c;
}

bool same_literals(const Monomial& a, const Monomial& b) { return a.pos == b.pos && a.neg == b.neg; }

bool intersects(const std::vector<int>& a, const std::vector<int>& b) {
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return true;
        if (a[i] < b[j]) ++i; else ++j;
    }
    return false;
}

std::vector<int> set_union(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> r;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
    return r;
}

uint64_t pair_key(uint32_t a, uint32_t b) { return (static_cast<uint64_t>(a) << 32) | b; }

}  // namespace

size_t CoefPool::KeyHash::operator()(const Coef& c) const {
    size_t h = 0xcbf29ce484222325ull;
    auto mix = [&](long long x) { h = (h ^ static_cast<size_t>(x)) * 0x100000001b3ull; };
    for (auto& m : c) {
        mix(m.c);
        for (int v : m.pos) mix(v);
        mix(-1);
        for (int v : m.neg) mix(v);
        mix(-2);
    }
    return h;
}

CoefPool::CoefPool() {
    intern({});
    intern({Monomial{1, {}, {}}});
}

void CoefPool::canonicalize(Coef& c) {
    for (auto& m : c) {
        std::sort(m.pos.begin(), m.pos.end());
        m.pos.erase(std::unique(m.pos.begin(), m.pos.end()), m.pos.end());
        std::sort(m.neg.begin(), m.neg.end());
        m.neg.erase(std::unique(m.neg.begin(), m.neg.end()), m.neg.end());
    }
    // contradictory monomials vanish
    c.erase(std::remove_if(c.begin(), c.end(), [](const Monomial& m) { return m.c == 0 || intersects(m.pos, m.neg); }),
            c.end());

    auto merge = [&] {
        std::sort(c.begin(), c.end(), mono_less);
        Coef out;
        for (auto& m : c) {
            if (!out.empty() && same_literals(out.back(), m))
                out.back().c += m.c;
            else
                out.push_back(m);
        }
        out.erase(std::remove_if(out.begin(), out.end(), [](const Monomial& m) { return m.c == 0; }), out.end());
        c.swap(out);
    };
    merge();

    // m l (c) + m ~l (c) -> m (c);   m (c) + m l (-c) -> m ~l (c)
    for (bool changed = true; changed;) {
        changed = false;
        for (size_t i = 0; i < c.size() && !changed; ++i) {
            auto li = literals(c[i]);
            for (size_t j = i + 1; j < c.size() && !changed; ++j) {
                auto lj = literals(c[j]);
                if (li.size() == lj.size() && c[i].c == c[j].c) {
                    size_t diff = 0, at = 0;
                    for (size_t k = 0; k < li.size(); ++k)
                        if (li[k] != lj[k]) { ++diff; at = k; }
                    if (diff == 1 && (li[at] >> 1) == (lj[at] >> 1)) {
                        li.erase(li.begin() + static_cast<long>(at));
                        c[i] = from_literals(c[i].c, li);
                        c.erase(c.begin() + static_cast<long>(j));
                        changed = true;
                    }
                } else if (lj.size() == li.size() + 1 && c[j].c == -c[i].c) {
                    // is li a subset of lj with exactly one extra literal?
                    std::vector<int> extra;
                    std::set_difference(lj.begin(), lj.end(), li.begin(), li.end(), std::back_inserter(extra));
                    if (extra.size() == 1 && std::includes(lj.begin(), lj.end(), li.begin(), li.end())) {
                        int flipped = extra[0] ^ 1;
                        li.push_back(flipped);
                        std::sort(li.begin(), li.end());
                        // a literal and its complement both present means the monomial is 0
                        bool bad = false;
                        for (size_t k = 1; k < li.size(); ++k)
                            if ((li[k] >> 1) == (li[k - 1] >> 1)) bad = true;
                        Monomial nm = from_literals(c[i].c, li);
                        c.erase(c.begin() + static_cast<long>(j));
                        if (bad)
                            c.erase(c.begin() + static_cast<long>(i));
                        else
                            c[i] = nm;
                        changed = true;
                    }
                }
            }
        }
        if (changed) merge();
    }
}

uint32_t CoefPool::intern(Coef c) {
    canonicalize(c);
    auto it = ids_.find(c);
    if (it != ids_.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(coefs_.size());
    coefs_.push_back(c);
    ids_.emplace(std::move(c), id);
    return id;
}

uint32_t CoefPool::joint(uint32_t a, uint32_t b) {
    if (a == ZERO || b == ZERO) return ZERO;
    if (a == ONE) return b;
    if (b == ONE) return a;
    if (a == b) return a;
    if (a > b) std::swap(a, b);
    auto key = pair_key(a, b);
    auto it = joint_memo_.find(key);
    if (it != joint_memo_.end()) return it->second;
    Coef out;
    const Coef& x = coefs_[a];
    const Coef& y = coefs_[b];
    for (auto& m1 : x)
        for (auto& m2 : y) {
            // disjointness: a literal required true on one side and false on the other
            if (intersects(m1.pos, m2.neg) || intersects(m1.neg, m2.pos)) continue;
            out.push_back(Monomial{m1.c * m2.c, set_union(m1.pos, m2.pos), set_union(m1.neg, m2.neg)});
        }
    uint32_t r = intern(std::move(out));
    joint_memo_[key] = r;
    return r;
}

uint32_t CoefPool::neg(uint32_t a) {
    if (a == ZERO) return ONE;
    if (a == ONE) return ZERO;
    auto it = neg_memo_.find(a);
    if (it != neg_memo_.end()) return it->second;
    Coef out;
    const Coef& x = coefs_[a];
    if (x.size() == 1 && x[0].c == 1) {
        // 1 - l1 l2 ... lk = ~l1 + l1 ~l2 + ... + l1..l(k-1) ~lk
        auto l = literals(x[0]);
        std::vector<int> prefix;
        for (int lit : l) {
            auto cur = prefix;
            cur.push_back(lit ^ 1);
            std::sort(cur.begin(), cur.end());
            out.push_back(from_literals(1, cur));
            prefix.push_back(lit);
        }
    } else {
        out.push_back(Monomial{1, {}, {}});
        for (auto m : x) {
            m.c = -m.c;
            out.push_back(m);
        }
    }
    uint32_t r = intern(std::move(out));
    neg_memo_[a] = r;
    return r;
}

uint32_t CoefPool::add(uint32_t a, uint32_t b) {
    if (a == ZERO) return b;
    if (b == ZERO) return a;
    if (a == ONE || b == ONE) return ONE;
    if (a == b) return a;
    if (a > b) std::swap(a, b);
    auto key = pair_key(a, b);
    auto it = add_memo_.find(key);
    if (it != add_memo_.end()) return it->second;
    uint32_t j = joint(a, b);
    Coef out = coefs_[a];
    const Coef& y = coefs_[b];
    out.insert(out.end(), y.begin(), y.end());
    for (auto m : coefs_[j]) {
        m.c = -m.c;
        out.push_back(m);
    }
    uint32_t r = intern(std::move(out));
    add_memo_[key] = r;
    return r;
}

uint32_t CoefPool::with_var(int v, uint32_t a) {
    if (a == ZERO) return ZERO;
    auto key = pair_key(static_cast<uint32_t>(v), a);
    auto it = var_memo_.find(key);
    if (it != var_memo_.end()) return it->second;
    Coef out;
    for (auto m : coefs_[a]) {
        if (std::binary_search(m.neg.begin(), m.neg.end(), v)) continue;
        if (!std::binary_search(m.pos.begin(), m.pos.end(), v)) {
            m.pos.push_back(v);
            std::sort(m.pos.begin(), m.pos.end());
        }
        out.push_back(std::move(m));
    }
    uint32_t r = intern(std::move(out));
    var_memo_[key] = r;
    return r;
}

double CoefPool::eval(uint32_t a, const std::vector<double>& probs) const {
    double s = 0;
    for (auto& m : coefs_[a]) {
        double t = static_cast<double>(m.c);
        for (int v : m.pos) t *= probs[v];
        for (int v : m.neg) t *= 1.0 - probs[v];
        s += t;
    }
    return s;
}

std::string CoefPool::str(uint32_t a, const std::function<std::string(int)>& name) const {
    const Coef& x = coefs_[a];
    if (x.empty()) return "0";
    auto mono = [&](const Monomial& m) {
        long long c = std::llabs(m.c);
        std::string s;
        bool lits = !m.pos.empty() || !m.neg.empty();
        if (!lits) return std::to_string(c);
        if (c != 1) s = std::to_string(c) + "*";
        for (int v : m.pos) s += name(v);
        for (int v : m.neg) s += "(1-" + name(v) + ")";
        return s;
    };
    if (x.size() == 1) return (x[0].c < 0 ? "-" : "") + mono(x[0]);
    std::string s = "(";
    for (size_t i = 0; i < x.size(); ++i) {
        if (i == 0)
            s += (x[i].c < 0 ? "-" : "") + mono(x[i]);
        else
            s += (x[i].c < 0 ? " - " : " + ") + mono(x[i]);
    }
    return s + ")";
}

Algebra::Algebra(std::vector<int> widths, int max_bits) : widths_(std::move(widths)), max_bits_(max_bits) {}

int Algebra::bits(const std::vector<int>& cls) const {
    int b = 0;
    for (int c : cls) b += widths_[c];
    return b;
}

ProbExpr Algebra::constant(bool one) const { return ProbExpr{{}, {one ? CoefPool::ONE : CoefPool::ZERO}}; }

ProbExpr Algebra::input(int cls, int member) const {
    if (widths_[cls] > max_bits_)
        throw CapExceeded("class of " + std::to_string(widths_[cls]) + " facts exceeds the template cap");
    ProbExpr e;
    e.cls = {cls};
    size_t n = size_t{1} << widths_[cls];
    e.terms.resize(n);
    for (size_t b = 0; b < n; ++b) e.terms[b] = (b >> member) & 1 ? CoefPool::ONE : CoefPool::ZERO;
    return e;
}

ProbExpr Algebra::lift(const ProbExpr& e, const std::vector<int>& cls) const {
    if (e.cls == cls) return e;
    int total = bits(cls);
    if (total > max_bits_) throw CapExceeded("expression support of " + std::to_string(total) + " bits exceeds cap");
    // for each class of e: offset in the target layout and in e's layout
    std::vector<std::pair<int, int>> fields;   // (target offset, width) in e's order
    {
        int off = 0;
        std::map<int, int> toff;
        for (int c : cls) {
            toff[c] = off;
            off += widths_[c];
        }
        for (int c : e.cls) fields.push_back({toff.at(c), widths_[c]});
    }
    ProbExpr r;
    r.cls = cls;
    size_t n = size_t{1} << total;
    r.terms.resize(n);
    for (size_t idx = 0; idx < n; ++idx) {
        size_t src = 0;
        int soff = 0;
        for (auto [off, w] : fields) {
            src |= ((idx >> off) & ((size_t{1} << w) - 1)) << soff;
            soff += w;
        }
        r.terms[idx] = e.terms[src];
    }
    return r;
}

template <class F>
ProbExpr Algebra::zip(const ProbExpr& a, const ProbExpr& b, F f) {
    std::vector<int> cls;
    std::set_union(a.cls.begin(), a.cls.end(), b.cls.begin(), b.cls.end(), std::back_inserter(cls));
    ProbExpr x = lift(a, cls), y = lift(b, cls);
    ProbExpr r;
    r.cls = cls;
    r.terms.resize(x.terms.size());
    for (size_t i = 0; i < x.terms.size(); ++i) r.terms[i] = f(x.terms[i], y.terms[i]);
    return r;
}

ProbExpr Algebra::neg(const ProbExpr& e) {
    ProbExpr r = e;
    for (auto& t : r.terms) t = pool_.neg(t);
    return r;
}

ProbExpr Algebra::mul(const ProbExpr& a, const ProbExpr& b) {
    return zip(a, b, [&](uint32_t x, uint32_t y) { return pool_.joint(x, y); });
}

ProbExpr Algebra::add(const ProbExpr& a, const ProbExpr& b) {
    return zip(a, b, [&](uint32_t x, uint32_t y) { return pool_.add(x, y); });
}

ProbExpr Algebra::with_var(int v, const ProbExpr& e) {
    ProbExpr r = e;
    for (auto& t : r.terms) t = pool_.with_var(v, t);
    return r;
}

std::vector<double> Algebra::numeric(const ProbExpr& e, const std::vector<double>& probs) const {
    std::unordered_map<uint32_t, double> memo;
    std::vector<double> out(e.terms.size());
    for (size_t i = 0; i < e.terms.size(); ++i) {
        uint32_t t = e.terms[i];
        if (t == CoefPool::ZERO) { out[i] = 0; continue; }
        if (t == CoefPool::ONE) { out[i] = 1; continue; }
        auto it = memo.find(t);
        if (it == memo.end()) it = memo.emplace(t, pool_.eval(t, probs)).first;
        out[i] = it->second;
    }
    return out;
}

std::string Algebra::print(const ProbExpr& e, const std::function<std::string(int)>& var_name,
                           const std::function<std::string(int)>& class_name) const {
    if (e.cls.empty()) return pool_.str(e.terms[0], var_name);
    std::function<std::string(int)> cname = class_name;
    if (!cname) cname = [](int c) { return "V" + std::to_string(c + 1); };
    std::vector<std::pair<std::string, uint32_t>> rows;
    for (size_t idx = 0; idx < e.terms.size(); ++idx) {
        std::string psi, key;
        int off = 0;
        for (int c : e.cls) {
            std::string b;
            for (int j = 0; j < widths_[c]; ++j) b += ((idx >> (off + j)) & 1) ? '1' : '0';
            psi += cname(c) + "[" + b + "]";
            key += b;
            off += widths_[c];
        }
        rows.push_back({key + "\x01" + psi, e.terms[idx]});
    }
    std::sort(rows.begin(), rows.end());
    std::string s;
    for (size_t i = 0; i < rows.size(); ++i) {
        std::string psi = rows[i].first.substr(rows[i].first.find('\x01') + 1);
        std::string c = pool_.str(rows[i].second, var_name);
        const Coef& co = pool_.get(rows[i].second);
        bool negative = co.size() == 1 && co[0].c < 0;
        if (i == 0)
            s += c;
        else if (negative)
            s += " - " + c.substr(1);
        else
            s += " + " + c;
        s += "*" + psi;
    }
    return s;
}

std::vector<LeafRef> program_leaves(const Program& p, const DerivationGraph& g) {
    std::vector<LeafRef> l(g.nodes.size());
    for (size_t v = 0; v < g.nodes.size(); ++v) {
        const Node& n = g.nodes[v];
        if (!n.input) continue;
        int c = p.class_of[n.fact];
        l[v] = {c, p.classes[c].index.at(n.name)};
    }
    return l;
}

std::vector<int> class_widths(const Program& p) {
    std::vector<int> w;
    for (auto& c : p.classes) w.push_back(static_cast<int>(c.members.size()));
    return w;
}

ObjectiveBuilder::ObjectiveBuilder(const DerivationGraph& g, Algebra& alg, std::vector<LeafRef> leaves)
    : g_(g), alg_(alg), leaves_(std::move(leaves)) {}

ProbExpr ObjectiveBuilder::edge(int e) {
    const Hyperedge& h = g_.edges[e];
    ProbExpr acc = alg_.constant(true);
    for (int b : h.pos) acc = alg_.mul(acc, of(b));
    for (int b : h.neg) acc = alg_.mul(acc, alg_.neg(of(b)));
    double p = g_.ground_rules[h.ground_rule].prob;
    if (p <= 0.0) return alg_.constant(false);
    int ev = g_.event_of_rule[h.ground_rule];
    if (ev >= 0) acc = alg_.with_var(ev, acc);
    return acc;
}

const ProbExpr& ObjectiveBuilder::of(int node) {
    auto it = memo_.find(node);
    if (it != memo_.end()) return it->second;
    ProbExpr r;
    if (leaves_[node].cls >= 0) {
        r = alg_.input(leaves_[node].cls, leaves_[node].member);
    } else {
        r = alg_.constant(false);
        for (int e : g_.out[node]) r = alg_.add(r, edge(e));
    }
    return memo_.emplace(node, std::move(r)).first->second;
}

ProbExpr gen_objective(int node, const DerivationGraph& g, const Program& p, Algebra& alg) {
    ObjectiveBuilder b(g, alg, program_leaves(p, g));
    return b.of(node);
}

std::function<std::string(int)> event_namer(const DerivationGraph& g) {
    std::vector<std::string> names(g.num_events);
    for (size_t r = 0; r < g.ground_rules.size(); ++r)
        if (g.event_of_rule[r] >= 0) names[g.event_of_rule[r]] = g.ground_rules[r].name;
    return [names](int v) { return names[v]; };
}

}  // namespace praline
