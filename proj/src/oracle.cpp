#include "praline/oracle.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace praline {

namespace {

struct Inst {
    int head;
    std::vector<int> pos, neg;
    int rule;         // 0-based
    int event;        // -1 always fires, -2 never grounded
};

std::string ground_str(const Atom& a, const std::map<std::string, std::string>& s) {
    Atom g = a;
    for (auto& t : g.args)
        if (t.var) {
            t.text = s.at(t.text);
            t.var = false;
        }
    return g.str();
}

}  // namespace

WorldOracle::WorldOracle(const Program& p, const DerivationGraph& g, int max_bits) : p_(p) {
    for (auto& c : p.classes) {
        offset_.push_back(bits_);
        bits_ += static_cast<int>(c.members.size());
    }
    int fact_bits = bits_;
    bits_ += g.num_events;
    if (bits_ > max_bits) throw ScaleError("world count 2^" + std::to_string(bits_) + " over the cap");
    event_p_.assign(g.num_events, 0.0);
    std::map<std::pair<int, std::vector<std::string>>, int> event_key;
    for (size_t r = 0; r < g.ground_rules.size(); ++r) {
        int ev = g.event_of_rule[r];
        if (ev < 0) continue;
        event_p_[ev] = g.ground_rules[r].prob;
        event_key[{g.ground_rules[r].rule, g.ground_rules[r].subst}] = ev;
    }

    // atoms: facts first
    std::unordered_map<std::string, int> id;
    std::vector<std::string> names;
    auto atom_id = [&](const std::string& s) {
        auto [it, ins] = id.emplace(s, static_cast<int>(names.size()));
        if (ins) names.push_back(s);
        return it->second;
    };
    for (auto& f : p.facts) atom_id(f);
    std::set<std::string> input_preds, heads;
    for (auto& a : p.fact_atoms) input_preds.insert(a.pred);
    for (auto& r : p.rules) heads.insert(r.head.pred);

    std::set<std::string> consts;
    auto add_consts = [&](const Atom& a) {
        for (auto& t : a.args)
            if (!t.var) consts.insert(t.text);
    };
    for (auto& a : p.fact_atoms) add_consts(a);
    for (auto& r : p.rules) {
        add_consts(r.head);
        for (auto& a : r.pos) add_consts(a);
        for (auto& a : r.neg) add_consts(a);
    }
    std::vector<std::string> universe(consts.begin(), consts.end());

    // predicate strata by relaxation
    std::map<std::string, int> stratum;
    for (auto& h : heads) stratum[h] = 0;
    for (size_t round = 0;; ++round) {
        bool changed = false;
        for (auto& r : p.rules) {
            int& s = stratum[r.head.pred];
            for (auto& a : r.pos)
                if (heads.count(a.pred) && stratum[a.pred] > s) s = stratum[a.pred], changed = true;
            for (auto& a : r.neg)
                if (heads.count(a.pred) && stratum[a.pred] + 1 > s) s = stratum[a.pred] + 1, changed = true;
        }
        if (!changed) break;
        if (round > heads.size() + 1) throw NonStratifiedError("negation cycle", {});
    }
    int n_strata = 0;
    for (auto& [k, s] : stratum) n_strata = std::max(n_strata, s + 1);

    std::vector<std::vector<Inst>> by_stratum(n_strata);
    for (size_t ri = 0; ri < p.rules.size(); ++ri) {
        const Rule& r = p.rules[ri];
        // variables in the grounder's first-occurrence order: body, negated body, head
        std::vector<std::string> vars;
        int anon = 0;
        Rule named = r;
        auto collect = [&](Atom& a) {
            for (auto& t : a.args) {
                if (!t.var) continue;
                if (t.text == "_") t.text = "_#" + std::to_string(anon++);
                if (std::find(vars.begin(), vars.end(), t.text) == vars.end()) vars.push_back(t.text);
            }
        };
        for (auto& a : named.pos) collect(a);
        for (auto& a : named.neg) collect(a);
        collect(named.head);
        size_t total = 1;
        for (size_t k = 0; k < vars.size(); ++k) total *= universe.size();
        for (size_t n = 0; n < total; ++n) {
            size_t x = n;
            std::map<std::string, std::string> s;
            std::vector<std::string> subst;
            for (size_t k = 0; k < vars.size(); ++k) {
                s[vars[k]] = universe[x % universe.size()];
                subst.push_back(s[vars[k]]);
                x /= universe.size();
            }
            Inst in;
            bool dead = false;
            for (auto& a : named.pos) {
                std::string gs = ground_str(a, s);
                if (!heads.count(a.pred) && p.fact(gs) < 0) {
                    dead = true;
                    break;
                }
                in.pos.push_back(atom_id(gs));
            }
            if (dead) continue;
            for (auto& a : named.neg) {
                std::string gs = ground_str(a, s);
                if (!heads.count(a.pred) && p.fact(gs) < 0) continue;   // absent fact: literal holds
                in.neg.push_back(atom_id(gs));
            }
            in.head = atom_id(ground_str(named.head, s));
            in.rule = static_cast<int>(ri);
            in.event = -1;
            if (r.prob > 0 && r.prob < 1) {
                auto it = event_key.find({r.index, subst});
                in.event = it == event_key.end() ? -2 : it->second;
            }
            if (r.prob <= 0) continue;
            by_stratum[stratum[r.head.pred]].push_back(std::move(in));
        }
    }

    size_t nw = num_worlds(), na = names.size();
    std::vector<std::vector<char>> tv(na, std::vector<char>(nw, 0));
    std::vector<char> val(na);
    for (size_t w = 0; w < nw; ++w) {
        std::fill(val.begin(), val.end(), 0);
        for (int c = 0; c < static_cast<int>(p.classes.size()); ++c)
            for (size_t m = 0; m < p.classes[c].members.size(); ++m)
                if ((w >> (offset_[c] + m)) & 1) val[p.fact(p.classes[c].members[m])] = 1;
        for (auto& insts : by_stratum) {
            for (bool changed = true; changed;) {
                changed = false;
                for (auto& in : insts) {
                    if (val[in.head]) continue;
                    bool ok = true;
                    for (int a : in.pos) ok = ok && val[a];
                    for (int a : in.neg) ok = ok && !val[a];
                    if (!ok) continue;
                    if (in.event == -2)
                        throw std::logic_error("rule instance fires but was never grounded: rule " +
                                               std::to_string(in.rule + 1));
                    if (in.event >= 0 && !((w >> (fact_bits + in.event)) & 1)) continue;
                    val[in.head] = 1;
                    changed = true;
                }
            }
        }
        for (size_t a = 0; a < na; ++a) tv[a][w] = val[a];
    }
    for (size_t a = 0; a < na; ++a) truth_.emplace(names[a], std::move(tv[a]));
}

const std::vector<char>& WorldOracle::truth(const std::string& atom) const {
    auto it = truth_.find(atom);
    return it == truth_.end() ? none_ : it->second;
}

std::vector<double> WorldOracle::weights(const Mu& mu) const {
    size_t nw = num_worlds();
    std::vector<double> w(nw, 1.0);
    int fact_bits = bits_ - static_cast<int>(event_p_.size());
    for (size_t x = 0; x < nw; ++x) {
        double v = 1.0;
        for (size_t c = 0; c < offset_.size(); ++c) {
            size_t width = p_.classes[c].members.size();
            v *= mu[c][(x >> offset_[c]) & ((size_t{1} << width) - 1)];
        }
        for (size_t e = 0; e < event_p_.size(); ++e)
            v *= ((x >> (fact_bits + e)) & 1) ? event_p_[e] : 1.0 - event_p_[e];
        w[x] = v;
    }
    return w;
}

double WorldOracle::prob(const std::string& atom, const Mu& mu) const {
    const auto& t = truth(atom);
    if (t.empty()) return 0.0;
    auto w = weights(mu);
    double s = 0;
    for (size_t x = 0; x < w.size(); ++x)
        if (t[x]) s += w[x];
    return s;
}

double WorldOracle::prob_both(const std::string& a, const std::string& b, const Mu& mu) const {
    const auto &ta = truth(a), &tb = truth(b);
    if (ta.empty() || tb.empty()) return 0.0;
    auto w = weights(mu);
    double s = 0;
    for (size_t x = 0; x < w.size(); ++x)
        if (ta[x] && tb[x]) s += w[x];
    return s;
}

Mu sample_mu(const Optimizer& opt, size_t n_classes, std::mt19937_64& rng) {
    std::gamma_distribution<double> G(1.0, 1.0);
    Mu mu(n_classes);
    for (size_t c = 0; c < n_classes; ++c) {
        auto* verts = opt.vertices(static_cast<int>(c));
        if (!verts || verts->empty()) throw ScaleError("class " + std::to_string(c) + " has no vertex list");
        std::vector<double> w(verts->size());
        double s = 0;
        for (auto& x : w) s += (x = G(rng));
        mu[c].assign((*verts)[0].size(), 0.0);
        for (size_t k = 0; k < w.size(); ++k)
            for (size_t j = 0; j < mu[c].size(); ++j) mu[c][j] += w[k] / s * (*verts)[k][j];
    }
    return mu;
}

Interval exact_interval_oracle(const Program& p, const DerivationGraph& g, const ConstraintSystem& phi,
                               const Optimizer& opt, int node) {
    Algebra alg(class_widths(p));
    Tensor t = to_tensor(alg, gen_objective(node, g, p, alg), phi.event_probs);
    OptResult r = opt.optimize_exact(t);
    return {r.min, r.max};
}

std::string random_program(uint64_t seed, const RandomProgramOptions& o) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.05, 0.95);
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<uint64_t>(n)); };
    auto num = [](double x) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    auto in_name = [](int i) { return "i" + std::to_string(i); };
    auto d_name = [](int i) { return "d" + std::to_string(i); };

    for (int attempt = 0;; ++attempt) {
        std::ostringstream src;
        int next = 0;
        if (!o.independent_only) {
            int nc = 1 + pick(o.max_classes);
            for (int c = 0; c < nc && next + 2 <= o.inputs; ++c) {
                int w = 2 + pick(std::max(1, o.max_class_size - 1));
                w = std::min(w, o.inputs - next);
                std::vector<int> mem;
                for (int k = 0; k < w; ++k) mem.push_back(next++);
                // a strictly positive joint over the class
                std::gamma_distribution<double> G(1.0, 1.0);
                std::vector<double> joint(size_t{1} << w);
                double s = 0;
                for (auto& x : joint) s += (x = G(rng) + 0.05);
                for (auto& x : joint) x /= s;
                auto P = [&](int mask_on, int mask_off) {
                    double t = 0;
                    for (size_t b = 0; b < joint.size(); ++b)
                        if ((b & mask_on) == static_cast<size_t>(mask_on) && (b & mask_off) == 0) t += joint[b];
                    return t;
                };
                for (int k = 0; k < w; ++k) {
                    int other = (k + 1 + pick(w - 1)) % w;
                    bool neg = rng() % 2;
                    if (rng() % 10 < 6 || k == 0) src << num(P(1 << k, 0)) << "::" << in_name(mem[k]) << ".\n";
                    if (k > 0 || rng() % 2) {
                        double cond = neg ? P(1 << k, 1 << other) / P(0, 1 << other)
                                          : P((1 << k) | (1 << other), 0) / P(1 << other, 0);
                        src << num(cond) << "::" << in_name(mem[k]) << " | " << (neg ? "\\+" : "")
                            << in_name(mem[other]) << ".\n";
                    }
                }
                src << "corr(";
                for (int k = 0; k < w; ++k) src << (k ? ", " : "") << in_name(mem[k]);
                src << ").\n";
            }
        }
        for (int i = next; i < o.inputs; ++i) src << num(U(rng)) << "::" << in_name(i) << ".\n";

        int nrules = 3 + pick(std::max(1, o.max_rules - 2));
        std::vector<int> prob_rule(nrules, 0);
        for (int k = 0, left = o.max_prob_rules; k < nrules && left > 0; ++k)
            if (rng() % 2) prob_rule[k] = 1, --left;
        std::set<int> has_rule, used_in_body, used_inputs;
        for (int k = 0; k < nrules; ++k) {
            int head = pick(o.derived);
            if (o.tree && used_in_body.count(head)) {
                // find a head still free
                head = -1;
                for (int d = 0; d < o.derived; ++d)
                    if (!used_in_body.count(d)) head = d;
                if (head < 0) break;
            }
            int nb = 1 + pick(3);
            std::vector<std::string> lits;
            bool has_pos = false;
            for (int b = 0; b < nb; ++b) {
                bool derived = !has_rule.empty() && rng() % 3 == 0;
                std::string atom;
                bool can_neg = true;
                if (derived) {
                    std::vector<int> cand;
                    for (int d : has_rule) {
                        if (o.tree && (d == head || used_in_body.count(d))) continue;
                        cand.push_back(d);
                    }
                    if (cand.empty()) continue;
                    int d = cand[pick(static_cast<int>(cand.size()))];
                    if (d == head) can_neg = false;
                    atom = d_name(d);
                    if (o.tree) used_in_body.insert(d);
                } else {
                    int i = pick(o.inputs);
                    if (o.tree) {
                        if (static_cast<int>(used_inputs.size()) == o.inputs) continue;
                        while (used_inputs.count(i)) i = pick(o.inputs);
                        used_inputs.insert(i);
                    }
                    atom = in_name(i);
                }
                bool neg = can_neg && has_pos && rng() % 3 == 0;
                if (!neg) has_pos = true;
                lits.push_back((neg ? "\\+" : "") + atom);
            }
            if (!has_pos) continue;
            src << (prob_rule[k] ? num(U(rng)) : std::string("1")) << "::" << d_name(head) << " :- ";
            for (size_t b = 0; b < lits.size(); ++b) src << (b ? ", " : "") << lits[b];
            src << ".\n";
            has_rule.insert(head);
        }
        if (has_rule.empty()) continue;
        std::string text = src.str();
        try {
            Program p = parse(text);
            solve_standard(p);
        } catch (const NonStratifiedError&) {
            continue;
        }
        return text;
    }
}

}  // namespace praline
