#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "praline/approx.hpp"
#include "praline/optimizer.hpp"

namespace praline {

class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RefineOptions {
    double delta = 0.01;
    int max_class_size = 12;
    long cut_cap = 4096;
    int max_group = 5;      // members per joint group of the cut
    int max_cut_bits = 16;
    uint64_t seed = 42;
};

// window [lo, hi] -> is there a feasible point with lo <= P(E) <= hi
using SatFn = std::function<bool(double, double)>;

constexpr double kSatTol = 1e-9;

// Steps a window of width eps from `start` (upward for the lower bound, downward for the upper)
// until it turns satisfiable; returns that window.
std::pair<double, double> make_sat(double start, double eps, bool lower, const SatFn& sat);

// Shrinks a bracket below delta keeping the bound of interest inside.
std::pair<double, double> binary_search(double lo, double hi, double delta, bool lower, const SatFn& sat);

// Over-approximate system whose inputs are intermediate nodes below `root`.
struct CutSystem {
    bool ok = false;
    std::string why;
    std::vector<int> cut;                   // cut nodes
    std::vector<std::vector<int>> groups;   // cut nodes per joint group
    std::vector<Polytope> polys;
    double min = 0, max = 1;                // objective range over the system
};

CutSystem build_cut_system(const Program& p, const DerivationGraph& g, const Approx& ap, CorrAnalysis& ca,
                           int root, const RefineOptions& o);

struct RefineResult {
    Interval iv;
    bool exact_reachable = false;
    bool used_cut = false;
    bool refined = false;                   // false: approx returned as is
    std::vector<std::pair<double, double>> cut_unsat;   // windows rejected by the cut system
    int checks = 0;
};

class Refiner {
public:
    Refiner(const Program& p, const DerivationGraph& g, const ConstraintSystem& phi, const Optimizer& opt,
            const Approx& ap, CorrAnalysis& ca, RefineOptions o);

    RefineResult run(int node) const;

    // exact objective range; false when the exact encoding is out of reach
    bool exact_range(int node, OptResult& out) const;

private:
    const Program& p_;
    const DerivationGraph& g_;
    const ConstraintSystem& phi_;
    const Optimizer& opt_;
    const Approx& ap_;
    CorrAnalysis& ca_;
    RefineOptions o_;
};

}  // namespace praline
