#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "praline/lp.hpp"
#include "praline/symexpr.hpp"

namespace praline {

class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dense multilinear objective; layout matches ProbExpr (class fields, member bits).
struct Tensor {
    std::vector<int> cls;
    std::vector<int> widths;
    std::vector<double> v;
};

Tensor to_tensor(const Algebra& alg, const ProbExpr& e, const std::vector<double>& probs);
double eval_tensor(const Tensor& t, const std::vector<std::vector<double>>& point);   // point indexed by class

enum class Method { VertexExact, BlockCoordinate };

struct OptResult {
    double min = 0, max = 0;
    std::vector<std::vector<double>> argmin, argmax;   // per class in Tensor::cls order
    Method method = Method::VertexExact;
};

struct OptCaps {
    long long combos = 1000000;
    int vertex_cols = 64;
    int restarts = 32;
};

// Owns the per-class polytopes and a vertex cache; safe to share across threads.
class Optimizer {
public:
    Optimizer(std::vector<Polytope> polys, OptCaps caps = {});

    const Polytope& polytope(int cls) const { return polys_[cls]; }
    size_t size() const { return polys_.size(); }

    // nullptr when the class cannot be enumerated within caps
    const std::vector<std::vector<double>>* vertices(int cls) const;

    bool exact_possible(const Tensor& t) const;
    OptResult optimize(const Tensor& t, uint64_t seed = 42) const;
    OptResult optimize_exact(const Tensor& t) const;   // throws CapExceeded
    OptResult block_coordinate(const Tensor& t, uint64_t seed) const;

    // [min, max] intersects [l, u]
    bool check_sat(const OptResult& r, double l, double u) const;

private:
    std::vector<Polytope> polys_;
    OptCaps caps_;
    mutable std::mutex mu_;
    mutable std::map<int, std::shared_ptr<std::vector<std::vector<double>>>> cache_;
    mutable std::map<int, bool> failed_;
};

// contract the field of class position k with a distribution over that class
Tensor contract(const Tensor& t, size_t k, const std::vector<double>& dist);

}  // namespace praline
