#pragma once

#include <vector>

#include "praline/constraints.hpp"
#include "praline/corrtypes.hpp"
#include "praline/grounder.hpp"

namespace praline {

struct Interval {
    double l = 0, u = 1;
    double width() const { return u - l; }
};

enum class Comb { CL, CU, DL, DU };

// correlation-aware conjunction / disjunction bounds
double combine(Comb op, double e1, double e2, CorrType t);

// Bottom-up interval propagation over the derivation graph.
class Approx {
public:
    Approx(const Program& p, const DerivationGraph& g, const ConstraintSystem& phi, CorrAnalysis& ca);

    const Interval& of(int node) const { return iv_[node]; }
    const std::vector<Interval>& all() const { return iv_; }

    // conjunction of one hyperedge body, without its rule event
    Interval body(int e) const;

private:
    Interval leaf(int fact) const;

    const Program& p_;
    const DerivationGraph& g_;
    const ConstraintSystem& phi_;
    CorrAnalysis& ca_;
    std::vector<Interval> iv_;
};

}  // namespace praline
