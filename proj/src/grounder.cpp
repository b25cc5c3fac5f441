#include "praline/grounder.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace praline {

int DerivationGraph::add_node(Node n) {
    int id = static_cast<int>(nodes.size());
    by_name[n.name] = id;
    nodes.push_back(std::move(n));
    return id;
}

void DerivationGraph::index() {
    size_t n = nodes.size();
    out.assign(n, {});
    for (size_t e = 0; e < edges.size(); ++e) out[edges[e].head].push_back(static_cast<int>(e));

    // children-first order; iterative DFS, cycle => throw
    topo.clear();
    std::vector<int> state(n, 0);
    for (size_t s = 0; s < n; ++s) {
        if (state[s]) continue;
        std::vector<std::pair<int, size_t>> st{{static_cast<int>(s), 0}};
        state[s] = 1;
        // flatten children lazily: iterate over hyperedges then body members
        std::vector<std::vector<int>> kids_cache;
        auto kids = [&](int v) {
            std::vector<int> k;
            for (int e : out[v]) {
                for (int b : edges[e].pos) k.push_back(b);
                for (int b : edges[e].neg) k.push_back(b);
            }
            return k;
        };
        std::vector<std::vector<int>> kid_stack{kids(static_cast<int>(s))};
        while (!st.empty()) {
            auto& [v, i] = st.back();
            auto& ks = kid_stack.back();
            if (i < ks.size()) {
                int w = ks[i++];
                if (state[w] == 1) throw Error("derivation graph is cyclic at '" + nodes[w].name + "'", {});
                if (state[w] == 0) {
                    state[w] = 1;
                    st.push_back({w, 0});
                    kid_stack.push_back(kids(w));
                }
            } else {
                state[v] = 2;
                topo.push_back(v);
                st.pop_back();
                kid_stack.pop_back();
            }
        }
    }

    event_of_rule.assign(ground_rules.size(), -1);
    num_events = 0;
    for (size_t r = 0; r < ground_rules.size(); ++r) {
        double p = ground_rules[r].prob;
        if (p > 0.0 && p < 1.0) event_of_rule[r] = num_events++;
    }
}

bool DerivationGraph::cyclic() const {
    try {
        DerivationGraph copy = *this;
        copy.index();
    } catch (const Error&) {
        return true;
    }
    return false;
}

namespace {

using Tuple = std::vector<int>;

struct TupleHash {
    size_t operator()(const Tuple& t) const {
        size_t h = 1469598103934665603ull;
        for (int x : t) h = (h ^ static_cast<size_t>(x)) * 1099511628211ull;
        return h;
    }
};

struct Relation {
    std::vector<Tuple> rows;
    std::unordered_map<Tuple, int, TupleHash> id;
    std::unordered_map<uint64_t, std::vector<int>> by_arg;   // (pos, const) -> rows

    bool has(const Tuple& t) const { return id.count(t) > 0; }
    bool add(const Tuple& t) {
        if (id.count(t)) return false;
        int r = static_cast<int>(rows.size());
        id.emplace(t, r);
        rows.push_back(t);
        for (size_t i = 0; i < t.size(); ++i) by_arg[key(i, t[i])].push_back(r);
        return true;
    }
    static uint64_t key(size_t pos, int c) { return (static_cast<uint64_t>(pos) << 32) | static_cast<uint32_t>(c); }
};

// A compiled rule: atoms reference variable slots or constants.
struct CArg {
    bool var;
    int v;   // slot or constant id
};
struct CAtom {
    std::string pred;
    std::vector<CArg> args;
};
struct CRule {
    const Rule* src;
    CAtom head;
    std::vector<CAtom> pos, neg;
    int nvars = 0;
};

class Grounder {
public:
    explicit Grounder(const Program& p) : p_(p) {}

    GroundResult run(const GroundOptions& opt) {
        compile();
        auto strata = stratify();

        for (size_t f = 0; f < p_.facts.size(); ++f) {
            const Atom& a = p_.fact_atoms[f];
            Tuple t = ground_tuple(a);
            possible_[a.pred].add(t);
        }
        for (auto& d : p_.input_probs)
            if (d.given.empty() && d.prob == 1.0) {
                const Atom& a = p_.fact_atoms[p_.fact(d.target)];
                certain_[a.pred].add(ground_tuple(a));
            }

        for (auto& s : strata) eval_stratum(s);

        GroundResult res;
        DerivationGraph& g = res.graph;
        for (size_t f = 0; f < p_.facts.size(); ++f) {
            Node n;
            n.name = p_.facts[f];
            n.input = true;
            n.fact = static_cast<int>(f);
            g.add_node(n);
        }
        auto node_of = [&](const std::string& pred, const Tuple& t) {
            std::string nm = name(pred, t);
            int id = g.find(nm);
            if (id < 0) {
                Node n;
                n.name = nm;
                id = g.add_node(n);
                res.outputs.push_back(id);
            }
            return id;
        };
        // derived nodes in discovery order
        for (auto& [pred, t] : derived_order_) node_of(pred, t);

        // ground rules sorted by rule index, then discovery
        std::vector<int> order(found_.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return found_[a].rule->src->index < found_[b].rule->src->index; });
        for (int i : order) {
            auto& f = found_[i];
            GroundRule gr;
            gr.rule = f.rule->src->index;
            gr.prob = f.rule->src->prob;
            for (int c : f.binding) gr.subst.push_back(consts_[c]);
            gr.name = "r" + std::to_string(gr.rule);
            if (!gr.subst.empty()) {
                gr.name += "(";
                for (size_t k = 0; k < gr.subst.size(); ++k) gr.name += (k ? "," : "") + gr.subst[k];
                gr.name += ")";
            }
            Hyperedge h;
            h.head = node_of(f.head_pred, f.head);
            for (auto& [pred, t] : f.pos) h.pos.push_back(node_of(pred, t));
            for (auto& [pred, t] : f.neg) {
                if (!possible_[pred].has(t)) continue;   // never derivable: literal always true
                h.neg.push_back(node_of(pred, t));
            }
            h.ground_rule = static_cast<int>(g.ground_rules.size());
            g.ground_rules.push_back(std::move(gr));
            g.edges.push_back(std::move(h));
        }
        res.unfold_capped = break_cycles(g, opt.unfold_cap);
        g.index();
        return res;
    }

private:
    int cid(const std::string& s) {
        auto it = cmap_.find(s);
        if (it != cmap_.end()) return it->second;
        int id = static_cast<int>(consts_.size());
        consts_.push_back(s);
        cmap_.emplace(s, id);
        return id;
    }

    Tuple ground_tuple(const Atom& a) {
        Tuple t;
        for (auto& x : a.args) t.push_back(cid(x.text));
        return t;
    }

    std::string name(const std::string& pred, const Tuple& t) const {
        if (t.empty()) return pred;
        std::string s = pred + "(";
        for (size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + consts_[t[i]];
        return s + ")";
    }

    void compile() {
        for (auto& r : p_.rules) {
            CRule c;
            c.src = &r;
            std::map<std::string, int> slot;
            int anon = 0;
            auto conv = [&](const Atom& a) {
                CAtom ca;
                ca.pred = a.pred;
                for (auto& t : a.args) {
                    if (!t.var) {
                        ca.args.push_back({false, cid(t.text)});
                        continue;
                    }
                    std::string nm = t.text == "_" ? "_#" + std::to_string(anon++) : t.text;
                    auto it = slot.find(nm);
                    if (it == slot.end()) it = slot.emplace(nm, c.nvars++).first;
                    ca.args.push_back({true, it->second});
                }
                return ca;
            };
            for (auto& a : r.pos) c.pos.push_back(conv(a));
            for (auto& a : r.neg) c.neg.push_back(conv(a));
            c.head = conv(r.head);
            rules_.push_back(std::move(c));
        }
    }

    // predicate SCCs; returns rules grouped per stratum, dependencies first
    std::vector<std::vector<int>> stratify() {
        std::set<std::string> derived;
        for (auto& r : rules_) derived.insert(r.head.pred);
        std::vector<std::string> preds(derived.begin(), derived.end());
        std::map<std::string, int> pid;
        for (size_t i = 0; i < preds.size(); ++i) pid[preds[i]] = static_cast<int>(i);
        size_t n = preds.size();
        std::vector<std::vector<std::pair<int, bool>>> adj(n);
        for (auto& r : rules_) {
            int h = pid[r.head.pred];
            for (auto& a : r.pos)
                if (pid.count(a.pred)) adj[h].push_back({pid[a.pred], false});
            for (auto& a : r.neg)
                if (pid.count(a.pred)) adj[h].push_back({pid[a.pred], true});
        }
        // Tarjan
        std::vector<int> idx(n, -1), low(n, 0), comp(n, -1);
        std::vector<bool> on(n, false);
        std::vector<int> st;
        int counter = 0, ncomp = 0;
        std::function<void(int)> dfs = [&](int v) {
            idx[v] = low[v] = counter++;
            st.push_back(v);
            on[v] = true;
            for (auto [w, neg] : adj[v]) {
                if (idx[w] < 0) {
                    dfs(w);
                    low[v] = std::min(low[v], low[w]);
                } else if (on[w]) {
                    low[v] = std::min(low[v], idx[w]);
                }
            }
            if (low[v] == idx[v]) {
                for (;;) {
                    int w = st.back();
                    st.pop_back();
                    on[w] = false;
                    comp[w] = ncomp;
                    if (w == v) break;
                }
                ++ncomp;
            }
        };
        for (size_t v = 0; v < n; ++v)
            if (idx[v] < 0) dfs(static_cast<int>(v));
        for (auto& r : rules_) {
            int h = pid[r.head.pred];
            for (auto& a : r.neg)
                if (pid.count(a.pred) && comp[pid[a.pred]] == comp[h])
                    throw NonStratifiedError("negation of '" + a.pred + "' inside the recursive component of '" +
                                                 r.head.pred + "'",
                                             r.src->loc);
        }
        std::vector<std::vector<int>> strata(ncomp);
        for (size_t i = 0; i < rules_.size(); ++i) strata[comp[pid[rules_[i].head.pred]]].push_back(static_cast<int>(i));
        return strata;
    }

    struct Found {
        const CRule* rule;
        std::vector<int> binding;
        std::string head_pred;
        Tuple head;
        std::vector<std::pair<std::string, Tuple>> pos, neg;
    };

    using Rels = std::map<std::string, Relation>;

    // Enumerate bindings of rule body. `src[i]` selects the row range for positive atom i.
    void join(const CRule& r, const Rels& full, const std::vector<const std::vector<int>*>& restrict_rows,
              const std::function<void(std::vector<int>&)>& emit) {
        std::vector<int> b(r.nvars, -1);
        std::function<void(size_t)> go = [&](size_t i) {
            if (i == r.pos.size()) {
                emit(b);
                return;
            }
            const CAtom& a = r.pos[i];
            auto it = full.find(a.pred);
            if (it == full.end()) return;
            const Relation& rel = it->second;
            const std::vector<int>* cand = restrict_rows[i];
            std::vector<int> all;
            if (!cand) {
                // pick the first bound argument for an index lookup
                for (size_t k = 0; k < a.args.size(); ++k) {
                    int v = a.args[k].var ? b[a.args[k].v] : a.args[k].v;
                    if (v >= 0) {
                        auto f = rel.by_arg.find(Relation::key(k, v));
                        if (f == rel.by_arg.end()) return;
                        cand = &f->second;
                        break;
                    }
                }
            }
            if (!cand) {
                all.resize(rel.rows.size());
                for (size_t k = 0; k < all.size(); ++k) all[k] = static_cast<int>(k);
                cand = &all;
            }
            // rows may grow while iterating (we add into other relations only), copy size first
            size_t sz = cand->size();
            for (size_t c = 0; c < sz; ++c) {
                Tuple t = rel.rows[(*cand)[c]];   // copy: emit may grow rel
                if (t.size() != a.args.size()) continue;
                std::vector<int> set_here;
                bool ok = true;
                for (size_t k = 0; k < t.size() && ok; ++k) {
                    const CArg& x = a.args[k];
                    if (!x.var) {
                        ok = x.v == t[k];
                    } else if (b[x.v] < 0) {
                        b[x.v] = t[k];
                        set_here.push_back(x.v);
                    } else {
                        ok = b[x.v] == t[k];
                    }
                }
                if (ok) go(i + 1);
                for (int v : set_here) b[v] = -1;
            }
        };
        go(0);
    }

    Tuple inst(const CAtom& a, const std::vector<int>& b) const {
        Tuple t;
        for (auto& x : a.args) t.push_back(x.var ? b[x.v] : x.v);
        return t;
    }

    static std::string key_of(int rule, const std::vector<int>& b) {
        std::string k = std::to_string(rule) + ":";
        for (int x : b) k += std::to_string(x) + ",";
        return k;
    }

    // one semi-naive fixpoint; `positive_model` selects possible vs certain evaluation
    void fixpoint(const std::vector<int>& rule_ids, Rels& model, const Rels& blocker, bool record) {
        std::set<std::string> local;
        for (int ri : rule_ids) local.insert(rules_[ri].head.pred);
        std::map<std::string, std::vector<int>> delta;   // pred -> new row ids
        bool first = true;
        for (;;) {
            std::map<std::string, std::vector<int>> next;
            for (int ri : rule_ids) {
                const CRule& r = rules_[ri];
                if (r.src->prob <= 0.0) continue;
                if (!record && r.src->prob < 1.0) continue;
                auto emit = [&](std::vector<int>& b) {
                    for (auto& a : r.neg) {
                        auto it = blocker.find(a.pred);
                        if (it != blocker.end() && it->second.has(inst(a, b))) return;
                    }
                    Tuple h = inst(r.head, b);
                    if (record) {
                        std::string k = key_of(r.src->index, b);
                        if (seen_.insert(k).second) {
                            Found f;
                            f.rule = &r;
                            f.binding = b;
                            f.head_pred = r.head.pred;
                            f.head = h;
                            for (auto& a : r.pos) f.pos.push_back({a.pred, inst(a, b)});
                            for (auto& a : r.neg) f.neg.push_back({a.pred, inst(a, b)});
                            found_.push_back(std::move(f));
                        }
                    }
                    Relation& rel = model[r.head.pred];
                    if (rel.add(h)) {
                        next[r.head.pred].push_back(static_cast<int>(rel.rows.size()) - 1);
                        if (record) derived_order_.push_back({r.head.pred, h});
                    }
                };
                std::vector<const std::vector<int>*> restrict_rows(r.pos.size(), nullptr);
                if (first) {
                    join(r, model, restrict_rows, emit);
                    continue;
                }
                for (size_t i = 0; i < r.pos.size(); ++i) {
                    if (!local.count(r.pos[i].pred)) continue;
                    auto d = delta.find(r.pos[i].pred);
                    if (d == delta.end() || d->second.empty()) continue;
                    std::fill(restrict_rows.begin(), restrict_rows.end(), nullptr);
                    restrict_rows[i] = &d->second;
                    join(r, model, restrict_rows, emit);
                }
            }
            first = false;
            if (next.empty()) break;
            delta = std::move(next);
        }
    }

    void eval_stratum(const std::vector<int>& rule_ids) {
        // negative literals: blocked by certain facts when computing the possible model,
        // blocked by possible facts when computing the certain model
        fixpoint(rule_ids, possible_, certain_, true);
        fixpoint(rule_ids, certain_, possible_, false);
    }

    const Program& p_;
    std::vector<std::string> consts_;
    std::unordered_map<std::string, int> cmap_;
    std::vector<CRule> rules_;
    Rels possible_, certain_;
    std::vector<Found> found_;
    std::unordered_set<std::string> seen_;
    std::vector<std::pair<std::string, Tuple>> derived_order_;
};

}  // namespace

GroundResult solve_standard(const Program& p, const GroundOptions& opt) {
    Grounder g(p);
    return g.run(opt);
}

bool break_cycles(DerivationGraph& g, int depth_cap) {
    size_t n = g.nodes.size();
    std::vector<std::vector<int>> out(n);
    for (size_t e = 0; e < g.edges.size(); ++e) out[g.edges[e].head].push_back(static_cast<int>(e));
    auto children = [&](int v) {
        std::vector<int> k;
        for (int e : out[v])
            for (int b : g.edges[e].pos) k.push_back(b);
        return k;
    };
    // Tarjan, iterative
    std::vector<int> idx(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on(n, false);
    std::vector<int> st;
    int counter = 0, ncomp = 0;
    for (size_t s = 0; s < n; ++s) {
        if (idx[s] >= 0) continue;
        std::vector<std::pair<int, size_t>> call{{static_cast<int>(s), 0}};
        std::vector<std::vector<int>> kids{children(static_cast<int>(s))};
        idx[s] = low[s] = counter++;
        st.push_back(static_cast<int>(s));
        on[s] = true;
        while (!call.empty()) {
            auto& [v, i] = call.back();
            auto& ks = kids.back();
            if (i < ks.size()) {
                int w = ks[i++];
                if (idx[w] < 0) {
                    idx[w] = low[w] = counter++;
                    st.push_back(w);
                    on[w] = true;
                    call.push_back({w, 0});
                    kids.push_back(children(w));
                } else if (on[w]) {
                    low[v] = std::min(low[v], idx[w]);
                }
                continue;
            }
            if (low[v] == idx[v]) {
                for (;;) {
                    int w = st.back();
                    st.pop_back();
                    on[w] = false;
                    comp[w] = ncomp;
                    if (w == v) break;
                }
                ++ncomp;
            }
            int done = v;
            call.pop_back();
            kids.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }
    std::vector<std::vector<int>> members(ncomp);
    for (size_t v = 0; v < n; ++v) members[comp[v]].push_back(static_cast<int>(v));
    std::vector<bool> cyc(ncomp, false);
    for (int c = 0; c < ncomp; ++c) {
        if (members[c].size() > 1) {
            cyc[c] = true;
            continue;
        }
        int v = members[c][0];
        for (int e : out[v])
            for (int b : g.edges[e].pos)
                if (b == v) cyc[c] = true;
    }
    bool capped = false;
    bool any = false;
    for (int c = 0; c < ncomp; ++c) any = any || cyc[c];
    if (!any) return false;

    std::vector<Hyperedge> kept;
    for (auto& h : g.edges)
        if (!cyc[comp[h.head]]) kept.push_back(h);
    std::vector<Hyperedge> old = g.edges;
    for (int c = 0; c < ncomp; ++c) {
        if (!cyc[c]) continue;
        auto& S = members[c];
        int d = static_cast<int>(S.size());
        if (depth_cap > 0 && depth_cap < d) {
            d = depth_cap;
            capped = true;
        }
        // copy[k][v]: node for level k (1-based); level d is the original node
        std::map<int, std::vector<int>> copy;
        for (int v : S) {
            auto& cv = copy[v];
            cv.assign(d + 1, -1);
            for (int k = 1; k < d; ++k) {
                Node nd;
                nd.name = g.nodes[v].name + "@" + std::to_string(k);
                nd.origin = v;
                nd.level = k;
                cv[k] = g.add_node(nd);
            }
            cv[d] = v;
            g.nodes[v].level = 0;
        }
        for (int k = 1; k <= d; ++k)
            for (int v : S)
                for (int e : out[v]) {
                    const Hyperedge& h = old[e];
                    Hyperedge nh;
                    nh.head = copy[v][k];
                    nh.neg = h.neg;
                    nh.ground_rule = h.ground_rule;
                    bool ok = true;
                    for (int b : h.pos) {
                        if (comp[b] == c) {
                            if (k == 1) { ok = false; break; }
                            nh.pos.push_back(copy[b][k - 1]);
                        } else {
                            nh.pos.push_back(b);
                        }
                    }
                    if (ok) kept.push_back(std::move(nh));
                }
    }
    g.edges = std::move(kept);
    return capped;
}

FlatGraph flatten(const DerivationGraph& g) {
    FlatGraph f;
    f.num_nodes = static_cast<int>(g.nodes.size());
    f.adj.assign(f.num_nodes, {});
    for (auto& h : g.edges) {
        for (int b : h.pos) {
            f.adj[h.head].push_back(static_cast<int>(f.edges.size()));
            f.edges.push_back({h.head, b, +1});
        }
        for (int b : h.neg) {
            f.adj[h.head].push_back(static_cast<int>(f.edges.size()));
            f.edges.push_back({h.head, b, -1});
        }
    }
    return f;
}

Polarity depends(const FlatGraph& fg, int out, int inp) {
    // states: node x parity
    std::vector<char> seen(2 * static_cast<size_t>(fg.num_nodes), 0);
    std::vector<std::pair<int, int>> st{{out, 0}};
    seen[2 * out] = 1;
    bool pos = false, neg = false;
    while (!st.empty()) {
        auto [v, par] = st.back();
        st.pop_back();
        if (v == inp && v != out) (par ? neg : pos) = true;
        for (int e : fg.adj[v]) {
            int w = fg.edges[e].to;
            int np = par ^ (fg.edges[e].sign < 0 ? 1 : 0);
            if (!seen[2 * w + np]) {
                seen[2 * w + np] = 1;
                st.push_back({w, np});
            }
        }
    }
    if (out == inp) pos = true;
    if (pos && neg) return Polarity::Both;
    if (pos) return Polarity::Pos;
    if (neg) return Polarity::Neg;
    return Polarity::None;
}

std::string to_json(const DerivationGraph& g) {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (size_t v = 0; v < g.nodes.size(); ++v)
        j["nodes"].push_back({{"id", v}, {"name", g.nodes[v].name}, {"input", g.nodes[v].input}});
    j["hyperedges"] = nlohmann::json::array();
    for (auto& h : g.edges) {
        auto& gr = g.ground_rules[h.ground_rule];
        j["hyperedges"].push_back({{"head", h.head},
                                   {"pos", h.pos},
                                   {"neg", h.neg},
                                   {"rule", gr.name},
                                   {"prob", gr.prob}});
    }
    return j.dump(2);
}

}  // namespace praline
