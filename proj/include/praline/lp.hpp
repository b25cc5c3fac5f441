#pragma once

#include <cstddef>
#include <vector>

namespace praline {

struct LinRow {
    std::vector<double> a;
    char sense = '=';   // '=', '<' (<=), '>' (>=)
    double rhs = 0;
};

// { x in R^dim : x >= 0, rows }
struct Polytope {
    int dim = 0;
    std::vector<LinRow> rows;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    double value = 0;
    std::vector<double> x;
};

// Dense two-phase simplex with Bland's rule.
LpResult solve_lp(const Polytope& p, const std::vector<double>& c, bool maximize);

// Feasible point or Infeasible.
LpResult feasible_point(const Polytope& p);

// All vertices, deduplicated on a 1e-9 grid. Throws CapExceeded when the standard form
// has more than `max_cols` columns or more than `max_bases` bases are visited.
std::vector<std::vector<double>> enumerate_vertices(const Polytope& p, int max_cols = 64,
                                                    size_t max_bases = 200000);

bool satisfies(const Polytope& p, const std::vector<double>& x, double tol = 1e-7);

}  // namespace praline
