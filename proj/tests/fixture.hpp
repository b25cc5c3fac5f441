#pragma once

#include <string>

#include "praline/constraints.hpp"
#include "praline/optimizer.hpp"

// parse, ground and build phi in one go
struct Exact {
    praline::Program p;
    praline::GroundResult gr;
    praline::ConstraintSystem phi;
    praline::Algebra alg;
    praline::Optimizer opt;

    explicit Exact(const std::string& src)
        : p(praline::parse(src)),
          gr(praline::solve_standard(p)),
          phi(praline::gen_constraints(p, gr.graph)),
          alg(praline::class_widths(p)),
          opt(phi.classes) {}

    int node(const std::string& name) const { return gr.graph.find(name); }

    praline::Tensor tensor(const std::string& name) {
        return praline::to_tensor(alg, praline::gen_objective(node(name), gr.graph, p, alg), phi.event_probs);
    }
};
