#pragma once

#include <string>
#include <vector>

#include "praline/grounder.hpp"
#include "praline/lp.hpp"
#include "praline/program.hpp"

namespace praline {

struct ConstraintSystem {
    std::vector<Polytope> classes;     // one per correlation class, indexed by class position
    std::vector<char> built;           // classes wider than the cap are left empty
    std::vector<double> event_probs;   // ProbVar(r) = P_R(r), indexed by event id
    std::vector<std::string> event_names;
};

struct Feasibility {
    bool feasible = true;
    std::vector<std::vector<double>> witness;   // per class (empty when not built)
    std::vector<int> unchecked;                 // classes skipped for size
    int failed_class = -1;
};

constexpr double kEqTol = 1e-9;

// Row for p :: target | given  ==>  P(target & given) - p P(given) = 0 over one class.
LinRow decl_row(const Program& p, const InputProbDecl& d);

ConstraintSystem gen_constraints(const Program& p, const DerivationGraph& g, int max_class_size = 12);

Feasibility check_feasible(const ConstraintSystem& phi);

std::string dump_constraints(const ConstraintSystem& phi, const Program& p);

}  // namespace praline
