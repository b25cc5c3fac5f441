#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>

#include "praline/corrtypes.hpp"
#include "praline/engine.hpp"
#include "praline/oracle.hpp"

using namespace praline;

namespace {

void setup_logging() {
    auto log = spdlog::stderr_color_mt("praline");
    spdlog::set_default_logger(log);
    const char* lvl = std::getenv("PRALINE_LOG");
    spdlog::set_level(lvl ? spdlog::level::from_str(lvl) : spdlog::level::warn);
}

std::vector<int> pick_nodes(const Program& p, const GroundResult& gr, const std::string& query) {
    std::vector<int> out;
    const auto& g = gr.graph;
    for (size_t v = 0; v < g.nodes.size(); ++v) {
        if (g.nodes[v].level != 0 || g.nodes[v].input) continue;
        bool hit = query.empty() && p.queries.empty();
        if (!query.empty()) hit = atom_matches(query, g.nodes[v].name);
        else
            for (auto& q : p.queries) hit = hit || atom_matches(q.str(), g.nodes[v].name);
        if (hit) out.push_back(static_cast<int>(v));
    }
    return out;
}

int run_dumps(const Program& p, bool exprs, bool constraints, bool corr, bool graph, const std::string& query,
              int max_class_size) {
    GroundResult gr = solve_standard(p);
    ConstraintSystem phi = gen_constraints(p, gr.graph, max_class_size);
    if (graph) std::cout << to_json(gr.graph) << "\n";
    if (constraints) std::cout << dump_constraints(phi, p);
    if (corr) {
        Optimizer opt(phi.classes);
        CorrAnalysis ca(p, gr.graph, phi, opt);
        std::cout << ca.dump_inputs();
    }
    if (exprs) {
        Algebra alg(class_widths(p));
        auto names = event_namer(gr.graph);
        for (int v : pick_nodes(p, gr, query)) {
            try {
                std::cout << gr.graph.nodes[v].name << " = " << alg.print(gen_objective(v, gr.graph, p, alg), names)
                          << "\n";
            } catch (const CapExceeded&) {
                std::cout << gr.graph.nodes[v].name << " = <too large to print>\n";
            }
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"praline: probability bounds for logic programs with correlated inputs"};
    app.require_subcommand(1);

    std::string file, mode = "delta", query, json_out;
    double delta = 0.01;
    uint64_t seed = 42;
    int jobs = 0, max_class = 12, samples = 500;
    long cut_cap = 4096;
    bool dump_exprs = false, dump_cons = false, dump_corr = false, dump_graph = false, sigma_top = false;

    auto* solve_cmd = app.add_subcommand("solve", "compute bounds for the queried facts");
    solve_cmd->add_option("file", file, "program file")->required()->check(CLI::ExistingFile);
    solve_cmd->add_option("--mode", mode, "exact, approx or delta")
        ->check(CLI::IsMember({"exact", "approx", "delta"}));
    solve_cmd->add_option("--delta", delta, "precision for delta mode")->check(CLI::Range(1e-9, 1.0));
    solve_cmd->add_option("--query", query, "atom pattern to report, variables allowed");
    solve_cmd->add_option("--json", json_out, "write the report as JSON ('-' for stdout)");
    solve_cmd->add_option("--seed", seed, "seed for randomized steps");
    solve_cmd->add_option("--jobs", jobs, "worker threads (0: all cores)");
    solve_cmd->add_option("--max-class-size", max_class, "largest class handled exactly");
    solve_cmd->add_option("--cut-cap", cut_cap, "joint variables allowed in the cut system");
    solve_cmd->add_flag("--sigma-top", sigma_top, "treat same-class correlations as unknown");
    solve_cmd->add_flag("--dump-exprs", dump_exprs, "print probability expressions");
    solve_cmd->add_flag("--dump-constraints", dump_cons, "print the constraint system");
    solve_cmd->add_flag("--dump-correlations", dump_corr, "print input-pair correlation types");
    solve_cmd->add_flag("--dump-graph", dump_graph, "print the derivation graph as JSON");

    auto* oracle_cmd = app.add_subcommand("oracle", "brute-force check on small programs");
    oracle_cmd->add_option("file", file, "program file")->required()->check(CLI::ExistingFile);
    oracle_cmd->add_option("--query", query, "atom pattern");
    oracle_cmd->add_option("--samples", samples, "feasible distributions to sample");
    oracle_cmd->add_option("--seed", seed, "sampling seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        Program p = parse_file(file);
        if (*solve_cmd) {
            if (dump_exprs || dump_cons || dump_corr || dump_graph)
                run_dumps(p, dump_exprs, dump_cons, dump_corr, dump_graph, query, max_class);
            EngineOptions o;
            o.mode = mode == "exact" ? Mode::Exact : mode == "approx" ? Mode::Approx : Mode::Delta;
            o.delta = delta;
            o.seed = seed;
            o.jobs = jobs;
            o.max_class_size = max_class;
            o.cut_cap = cut_cap;
            o.sigma_top = sigma_top;
            o.query = query;
            Report r = solve(p, o);
            if (json_out == "-") {
                std::cout << report_json(r);
            } else {
                std::cout << report_text(r);
                if (!json_out.empty()) {
                    std::ofstream f(json_out);
                    if (!f) throw std::runtime_error("cannot write " + json_out);
                    f << report_json(r);
                }
            }
            spdlog::info("done in {:.1f} ms", r.elapsed_ms);
            return 0;
        }
        // oracle
        GroundResult gr = solve_standard(p);
        ConstraintSystem phi = gen_constraints(p, gr.graph);
        if (!check_feasible(phi).feasible) throw InfeasibleProgram("No solution");
        Optimizer opt(phi.classes);
        WorldOracle w(p, gr.graph);
        std::mt19937_64 rng(seed);
        std::vector<Mu> mus;
        for (int s = 0; s < samples; ++s) mus.push_back(sample_mu(opt, p.classes.size(), rng));
        for (int v : pick_nodes(p, gr, query)) {
            const std::string& n = gr.graph.nodes[v].name;
            Interval iv = exact_interval_oracle(p, gr.graph, phi, opt, v);
            double lo = 1, hi = 0;
            for (auto& mu : mus) {
                double x = w.prob(n, mu);
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            std::cout << n << ": exact [" << fmt6(iv.l) << ", " << fmt6(iv.u) << "]  sampled [" << fmt6(lo) << ", "
                      << fmt6(hi) << "] over " << w.num_worlds() << " worlds\n";
        }
        return 0;
    } catch (const InfeasibleProgram&) {
        std::cout << "No solution\n";
        return 1;
    } catch (const InfeasibleError&) {
        std::cout << "No solution\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
