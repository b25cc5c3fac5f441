#include "praline/constraints.hpp"

#include <sstream>

#include "praline/symexpr.hpp"

namespace praline {

LinRow decl_row(const Program& p, const InputProbDecl& d) {
    int f = p.fact(d.target);
    int c = p.class_of[f];
    const auto& cls = p.classes[c];
    int w = static_cast<int>(cls.members.size());

    // 0/1 input expressions combined with the algebra's product and negation
    Algebra alg({w}, w);
    auto in = [&](const std::string& name) {
        int fi = p.fact(name);
        if (p.class_of[fi] != c) throw Error("conditional on '" + name + "' crosses classes", d.loc);
        return alg.input(0, cls.index.at(name));
    };
    ProbExpr given = alg.constant(true);
    for (auto& [name, negated] : d.given) {
        ProbExpr e = in(name);
        given = alg.mul(given, negated ? alg.neg(e) : e);
    }
    ProbExpr both = alg.mul(in(d.target), given);
    given = alg.lift(given, {0});
    both = alg.lift(both, {0});

    LinRow r;
    r.sense = '=';
    r.a.assign(size_t{1} << w, 0.0);
    std::vector<double> none;
    auto vb = alg.numeric(both, none);
    auto vg = alg.numeric(given, none);
    for (size_t b = 0; b < r.a.size(); ++b) r.a[b] = d.given.empty() ? vb[b] : vb[b] - d.prob * vg[b];
    r.rhs = d.given.empty() ? d.prob : 0.0;
    return r;
}

ConstraintSystem gen_constraints(const Program& p, const DerivationGraph& g, int max_class_size) {
    ConstraintSystem phi;
    size_t nc = p.classes.size();
    phi.classes.resize(nc);
    phi.built.assign(nc, 0);
    for (size_t c = 0; c < nc; ++c) {
        int w = static_cast<int>(p.classes[c].members.size());
        if (w > max_class_size) continue;
        Polytope& poly = phi.classes[c];
        poly.dim = 1 << w;
        LinRow sum;
        sum.a.assign(poly.dim, 1.0);
        sum.rhs = 1.0;
        poly.rows.push_back(sum);
        phi.built[c] = 1;
    }
    for (auto& d : p.input_probs) {
        int c = p.class_of[p.fact(d.target)];
        if (!phi.built[c]) continue;
        phi.classes[c].rows.push_back(decl_row(p, d));
    }
    phi.event_probs.assign(g.num_events, 0.0);
    phi.event_names.assign(g.num_events, "");
    for (size_t r = 0; r < g.ground_rules.size(); ++r) {
        int e = g.event_of_rule[r];
        if (e < 0) continue;
        phi.event_probs[e] = g.ground_rules[r].prob;
        phi.event_names[e] = g.ground_rules[r].name;
    }
    return phi;
}

Feasibility check_feasible(const ConstraintSystem& phi) {
    Feasibility f;
    f.witness.resize(phi.classes.size());
    for (size_t c = 0; c < phi.classes.size(); ++c) {
        if (!phi.built[c]) {
            f.unchecked.push_back(static_cast<int>(c));
            continue;
        }
        LpResult r = feasible_point(phi.classes[c]);
        if (r.status != LpStatus::Optimal || !satisfies(phi.classes[c], r.x, 1e-7)) {
            f.feasible = false;
            f.failed_class = static_cast<int>(c);
            return f;
        }
        f.witness[c] = r.x;
    }
    return f;
}

std::string dump_constraints(const ConstraintSystem& phi, const Program& p) {
    std::ostringstream o;
    for (size_t c = 0; c < phi.classes.size(); ++c) {
        const auto& cls = p.classes[c];
        o << "\\ class V" << c + 1 << " (id " << cls.id << "):";
        for (auto& m : cls.members) o << " " << m;
        o << "\n";
        if (!phi.built[c]) {
            o << "\\   not materialized (" << cls.members.size() << " facts)\n";
            continue;
        }
        int w = static_cast<int>(cls.members.size());
        auto var = [&](size_t b) {
            std::string s = "V" + std::to_string(c + 1) + "[";
            for (int j = 0; j < w; ++j) s += ((b >> j) & 1) ? '1' : '0';
            return s + "]";
        };
        for (auto& r : phi.classes[c].rows) {
            bool first = true;
            for (size_t b = 0; b < r.a.size(); ++b) {
                double a = r.a[b];
                if (a == 0.0) continue;
                if (!first) o << (a < 0 ? " - " : " + ");
                else if (a < 0) o << "-";
                double m = a < 0 ? -a : a;
                if (m != 1.0) o << fmt_prob(m) << " ";
                o << var(b);
                first = false;
            }
            if (first) o << "0";
            o << (r.sense == '=' ? " = " : r.sense == '<' ? " <= " : " >= ") << fmt_prob(r.rhs) << "\n";
        }
        o << "  0 <= V" << c + 1 << "[*] <= 1\n";
    }
    for (size_t e = 0; e < phi.event_probs.size(); ++e)
        o << phi.event_names[e] << " = " << fmt_prob(phi.event_probs[e]) << "\n";
    return o.str();
}

}  // namespace praline
