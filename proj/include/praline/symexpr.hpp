#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "praline/grounder.hpp"
#include "praline/program.hpp"

namespace praline {

class CapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// c * prod(pos) * prod(1 - neg); literal lists sorted, disjoint
struct Monomial {
    long long c = 1;
    std::vector<int> pos, neg;
    bool operator==(const Monomial&) const = default;
};
using Coef = std::vector<Monomial>;

// Hash-consed coefficient terms with memoized JointProb / negation / union.
class CoefPool {
public:
    static constexpr uint32_t ZERO = 0, ONE = 1;

    CoefPool();
    uint32_t intern(Coef c);
    const Coef& get(uint32_t id) const { return coefs_[id]; }
    size_t size() const { return coefs_.size(); }

    uint32_t joint(uint32_t a, uint32_t b);
    uint32_t neg(uint32_t a);
    uint32_t add(uint32_t a, uint32_t b);   // a + b - joint(a, b)
    uint32_t with_var(int v, uint32_t a);   // ProbVar(v) x a

    double eval(uint32_t a, const std::vector<double>& probs) const;
    std::string str(uint32_t a, const std::function<std::string(int)>& name) const;

private:
    static void canonicalize(Coef& c);
    struct KeyHash {
        size_t operator()(const Coef& c) const;
    };
    std::vector<Coef> coefs_;
    std::unordered_map<Coef, uint32_t, KeyHash> ids_;
    std::unordered_map<uint64_t, uint32_t> joint_memo_, add_memo_, var_memo_;
    std::unordered_map<uint32_t, uint32_t> neg_memo_;
};

// Full template instantiation over the classes in `cls` (sorted). Index bit layout:
// class cls[k] occupies a contiguous field; bit j of the field is member j.
struct ProbExpr {
    std::vector<int> cls;
    std::vector<uint32_t> terms;
};

class Algebra {
public:
    explicit Algebra(std::vector<int> widths, int max_bits = 20);

    ProbExpr constant(bool one) const;
    ProbExpr input(int cls, int member) const;
    ProbExpr neg(const ProbExpr& e);
    ProbExpr mul(const ProbExpr& a, const ProbExpr& b);
    ProbExpr add(const ProbExpr& a, const ProbExpr& b);
    ProbExpr with_var(int v, const ProbExpr& e);
    ProbExpr lift(const ProbExpr& e, const std::vector<int>& cls) const;

    // dense values over e.cls after substituting rule-event probabilities
    std::vector<double> numeric(const ProbExpr& e, const std::vector<double>& probs) const;

    std::string print(const ProbExpr& e, const std::function<std::string(int)>& var_name,
                      const std::function<std::string(int)>& class_name = {}) const;

    int width(int cls) const { return widths_[cls]; }
    int bits(const std::vector<int>& cls) const;
    CoefPool& pool() { return pool_; }
    const CoefPool& pool() const { return pool_; }

private:
    template <class F>
    ProbExpr zip(const ProbExpr& a, const ProbExpr& b, F f);

    std::vector<int> widths_;
    int max_bits_;
    CoefPool pool_;
};

// Node -> (class, member) for leaves; class < 0 marks a non-leaf.
struct LeafRef {
    int cls = -1;
    int member = 0;
};

std::vector<LeafRef> program_leaves(const Program& p, const DerivationGraph& g);
std::vector<int> class_widths(const Program& p);

// Bottom-up objective generation with per-builder memoization.
class ObjectiveBuilder {
public:
    ObjectiveBuilder(const DerivationGraph& g, Algebra& alg, std::vector<LeafRef> leaves);
    const ProbExpr& of(int node);
    // ProbVar(r) x (pos children) x neg(neg children) for one hyperedge
    ProbExpr edge(int e);

private:
    const DerivationGraph& g_;
    Algebra& alg_;
    std::vector<LeafRef> leaves_;
    std::unordered_map<int, ProbExpr> memo_;
};

ProbExpr gen_objective(int node, const DerivationGraph& g, const Program& p, Algebra& alg);

std::function<std::string(int)> event_namer(const DerivationGraph& g);

}  // namespace praline
