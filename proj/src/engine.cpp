#include "praline/engine.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <set>
#include <thread>

#include "praline/approx.hpp"
#include "praline/refine.hpp"

namespace praline {

namespace {

// split "p(a,f(b),c)" into pred and top-level args
std::pair<std::string, std::vector<std::string>> split_atom(const std::string& s) {
    auto open = s.find('(');
    if (open == std::string::npos) return {s, {}};
    std::vector<std::string> args;
    std::string cur;
    int depth = 0;
    for (size_t i = open + 1; i < s.size(); ++i) {
        char c = s[i];
        if (c == ' ') continue;
        if (depth == 0 && (c == ',' || c == ')')) {
            args.push_back(cur);
            cur.clear();
            if (c == ')') break;
            continue;
        }
        if (c == '(') ++depth;
        if (c == ')') --depth;
        cur += c;
    }
    return {s.substr(0, open), args};
}

bool is_var(const std::string& t) { return !t.empty() && (std::isupper(static_cast<unsigned char>(t[0])) || t[0] == '_'); }

}  // namespace

bool atom_matches(const std::string& pattern, const std::string& atom) {
    auto [pp, pa] = split_atom(pattern);
    auto [ap, aa] = split_atom(atom);
    if (pp != ap || pa.size() != aa.size()) return false;
    std::map<std::string, std::string> bind;
    for (size_t i = 0; i < pa.size(); ++i) {
        if (!is_var(pa[i])) {
            if (pa[i] != aa[i]) return false;
            continue;
        }
        if (pa[i] == "_") continue;
        auto [it, ins] = bind.emplace(pa[i], aa[i]);
        if (!ins && it->second != aa[i]) return false;
    }
    return true;
}

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::Exact: return "exact";
        case Mode::Approx: return "approx";
        default: return "delta";
    }
}

std::string fmt6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

Report solve(const Program& p, const EngineOptions& o) {
    auto t0 = std::chrono::steady_clock::now();
    Report rep;
    rep.delta = o.delta;
    rep.seed = o.seed;

    GroundResult gr = solve_standard(p);
    const DerivationGraph& g = gr.graph;
    spdlog::debug("ground: {} nodes, {} hyperedges, {} events", g.nodes.size(), g.edges.size(), g.num_events);

    ConstraintSystem phi = gen_constraints(p, g, o.max_class_size);
    Feasibility feas = check_feasible(phi);
    if (!feas.feasible) throw InfeasibleProgram("No solution");
    Optimizer opt(phi.classes);

    CorrOptions co;
    co.max_class_size = o.max_class_size;
    co.seed = o.seed;
    co.all_top = o.sigma_top;
    CorrAnalysis ca(p, g, phi, opt, co);
    Approx ap(p, g, phi, ca);
    spdlog::debug("approx pass done, {} correlation lookups", ca.misses());

    // which facts to report
    std::vector<std::string> names;
    std::vector<int> nodes;
    auto add = [&](int v) {
        if (std::find(nodes.begin(), nodes.end(), v) != nodes.end()) return;
        nodes.push_back(v);
        names.push_back(g.nodes[v].name);
    };
    std::vector<std::string> missing;
    auto select = [&](const std::string& pat) {
        bool any = false;
        for (size_t v = 0; v < g.nodes.size(); ++v)
            if (g.nodes[v].level == 0 && atom_matches(pat, g.nodes[v].name)) {
                add(static_cast<int>(v));
                any = true;
            }
        if (!any && pat.find_first_of("ABCDEFGHIJKLMNOPQRSTUVWXYZ_") == std::string::npos) missing.push_back(pat);
    };
    if (!o.query.empty()) {
        select(o.query);
    } else if (!p.queries.empty()) {
        for (auto& q : p.queries) select(q.str());
    } else {
        for (int v : gr.outputs) add(v);
    }

    RefineOptions ro;
    ro.delta = o.delta;
    ro.max_class_size = o.max_class_size;
    ro.cut_cap = o.cut_cap;
    ro.seed = o.seed;
    Refiner refiner(p, g, phi, opt, ap, ca, ro);
    int n_classes = static_cast<int>(p.classes.size());

    auto large = [&](int v) {
        for (auto& x : ca.node_dep(v).e)
            if (x.cls < n_classes && static_cast<int>(p.classes[x.cls].members.size()) > o.max_class_size) return true;
        return false;
    };

    std::vector<FactReport> out(nodes.size());
    auto work = [&](size_t i) {
        int v = nodes[i];
        FactReport& fr = out[i];
        fr.atom = names[i];
        Interval a = ap.of(v);
        if (o.mode == Mode::Approx) {
            fr.lower = a.l;
            fr.upper = a.u;
            fr.mode = "approx";
        } else if (o.mode == Mode::Exact) {
            OptResult r;
            if (large(v) || !refiner.exact_range(v, r)) {
                bool heuristic = false;
                if (!large(v)) {
                    try {
                        Algebra alg(class_widths(p));
                        Tensor t = to_tensor(alg, gen_objective(v, g, p, alg), phi.event_probs);
                        r = opt.block_coordinate(t, o.seed);
                        heuristic = true;
                    } catch (const CapExceeded&) {
                    }
                }
                if (heuristic) {
                    fr.lower = r.min;
                    fr.upper = r.max;
                    fr.mode = "exact";
                    fr.flags.push_back("heuristic_optimizer");
                } else {
                    fr.lower = a.l;
                    fr.upper = a.u;
                    fr.mode = "soundness_only";
                    fr.flags.push_back("large_class_fallback");
                }
            } else {
                fr.lower = r.min;
                fr.upper = r.max;
                fr.mode = "exact";
            }
        } else {
            RefineResult rr = refiner.run(v);
            fr.lower = rr.iv.l;
            fr.upper = rr.iv.u;
            if (!rr.refined || rr.exact_reachable) {
                fr.mode = rr.refined || a.width() < o.delta ? "delta" : "soundness_only";
                if (fr.mode == "soundness_only") fr.flags.push_back("no_refinement");
            } else {
                fr.mode = "soundness_only";
            }
            if (fr.mode == "soundness_only" && large(v)) fr.flags.push_back("large_class_fallback");
        }
        if (gr.unfold_capped) fr.flags.push_back("unfold_capped");
    };

    int jobs = o.jobs > 0 ? o.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    jobs = std::min<int>(jobs, static_cast<int>(std::max<size_t>(1, nodes.size())));
    std::atomic<size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        for (size_t i; (i = next.fetch_add(1)) < nodes.size();) {
            try {
                work(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (err) std::rethrow_exception(err);

    bool degraded = ca.degraded();
    for (auto& fr : out) {
        if (degraded) fr.flags.push_back("sigma_budget_exhausted");
        rep.facts.push_back(std::move(fr));
    }
    // queried but never derivable: probability zero
    for (auto& m : missing) rep.facts.push_back({m, 0.0, 0.0, mode_name(o.mode), {"not_derivable"}});

    rep.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

std::string report_text(const Report& r) {
    std::string s;
    for (auto& f : r.facts) {
        s += f.atom + ": [" + fmt6(f.lower) + ", " + fmt6(f.upper) + "]";
        if (f.mode == "soundness_only" || !f.flags.empty()) {
            s += "  (" + f.mode;
            for (auto& fl : f.flags) s += ", " + fl;
            s += ")";
        }
        s += "\n";
    }
    return s;
}

std::string report_json(const Report& r) {
    nlohmann::ordered_json j;
    j["facts"] = nlohmann::ordered_json::array();
    for (auto& f : r.facts) {
        nlohmann::ordered_json x;
        x["atom"] = f.atom;
        x["lower"] = f.lower;
        x["upper"] = f.upper;
        x["mode"] = f.mode;
        x["flags"] = f.flags;
        j["facts"].push_back(x);
    }
    j["meta"] = {{"delta", r.delta}, {"seed", r.seed}, {"elapsed_ms", r.elapsed_ms}};
    return j.dump(2) + "\n";
}

Report report_from_json(const std::string& s) {
    auto j = nlohmann::json::parse(s);
    Report r;
    for (auto& x : j.at("facts"))
        r.facts.push_back({x.at("atom").get<std::string>(), x.at("lower").get<double>(), x.at("upper").get<double>(),
                           x.at("mode").get<std::string>(), x.at("flags").get<std::vector<std::string>>()});
    r.delta = j.at("meta").at("delta").get<double>();
    r.seed = j.at("meta").at("seed").get<uint64_t>();
    r.elapsed_ms = j.at("meta").at("elapsed_ms").get<double>();
    return r;
}

}  // namespace praline
