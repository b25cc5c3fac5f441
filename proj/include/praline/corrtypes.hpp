#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "praline/constraints.hpp"
#include "praline/grounder.hpp"
#include "praline/optimizer.hpp"
#include "praline/program.hpp"

namespace praline {

enum class CorrType { Pos, Neg, Indep, Top };

const char* corr_name(CorrType t);

// Signed dependency set over pseudo-inputs: facts 0..n-1, then rule events n..n+k-1.
// Each event sits in its own singleton class.
struct Dep {
    struct Entry {
        int cls;
        int member;
        uint8_t sign;   // bit 0: positive, bit 1: negative
        bool operator==(const Entry&) const = default;
    };
    std::vector<Entry> e;   // sorted by (cls, member)
    bool chi = true;        // at most one member per class
    uint64_t digest = 0;

    void finish();
    bool empty() const { return e.empty(); }
};

Dep dep_union(const Dep& a, const Dep& b);
Dep dep_negate(const Dep& a);

struct CorrOptions {
    int max_class_size = 12;
    int samples = 10000;
    long budget = 100000;
    uint64_t seed = 42;
    bool all_top = false;   // same-class pairs answer Top; class-disjoint ones stay Indep
};

class CorrAnalysis {
public:
    CorrAnalysis(const Program& p, const DerivationGraph& g, const ConstraintSystem& phi, const Optimizer& opt,
                 CorrOptions o = {});

    int num_inputs() const { return n_facts_ + n_events_; }
    int class_of(int x) const { return x < n_facts_ ? fact_cls_[x] : n_classes_ + (x - n_facts_); }

    // pairwise relation between two pseudo-inputs
    CorrType input_pair(int x, int y) const;

    Dep leaf_dep(int x, bool negated = false) const;
    Dep event_dep(int event) const;
    const Dep& node_dep(int v) const { return node_dep_[v]; }
    Dep edge_body_dep(int e) const;   // conjunction of the hyperedge body, without its event

    CorrType expr_pair(const Dep& a, const Dep& b);
    CorrType node_pair(int a, int b) { return expr_pair(node_dep_[a], node_dep_[b]); }

    long misses() const { return misses_.load(); }
    bool degraded() const { return misses_.load() > opts_.budget; }

    std::string dump_inputs() const;

private:
    CorrType compute_input_pair(int x, int y) const;
    CorrType decide(const Dep& a, const Dep& b) const;

    const Program& p_;
    const DerivationGraph& g_;
    const ConstraintSystem& phi_;
    const Optimizer& opt_;
    CorrOptions opts_;
    int n_facts_, n_events_, n_classes_;
    std::vector<int> fact_cls_;
    std::vector<int> member_of_;   // fact -> index within its class
    std::vector<Dep> node_dep_;

    mutable std::mutex in_mu_;
    mutable std::map<std::pair<int, int>, CorrType> in_memo_;
    std::mutex ex_mu_;
    std::unordered_map<uint64_t, CorrType> ex_memo_;
    std::atomic<long> misses_{0};
};

}  // namespace praline
