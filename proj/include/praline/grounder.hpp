#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "praline/program.hpp"

namespace praline {

class NonStratifiedError : public Error { using Error::Error; };

struct GroundRule {
    int rule = 0;                     // 1-based rule index
    std::vector<std::string> subst;   // values of the rule's variables, in first-occurrence order
    double prob = 1.0;
    std::string name;                 // r<i> or r<i>(v1,...)
};

struct Hyperedge {
    int head = 0;
    std::vector<int> pos;
    std::vector<int> neg;
    int ground_rule = 0;              // index into DerivationGraph::ground_rules
};

struct Node {
    std::string name;
    bool input = false;
    int fact = -1;                    // Program fact id for inputs
    int origin = -1;                  // for unfolded copies: the node they replicate
    int level = 0;                    // unfolding level (0 = not a copy)
};

struct DerivationGraph {
    std::vector<Node> nodes;
    std::vector<Hyperedge> edges;
    std::vector<std::vector<int>> out;     // node -> hyperedges with that head
    std::vector<GroundRule> ground_rules;
    std::vector<int> topo;                 // children before parents
    std::unordered_map<std::string, int> by_name;

    int find(const std::string& s) const {
        auto it = by_name.find(s);
        return it == by_name.end() ? -1 : it->second;
    }
    bool leaf(int v) const { return out[v].empty(); }
    // probabilistic ground rules (0 < p < 1) get event ids 0..k-1; others -1
    std::vector<int> event_of_rule;
    int num_events = 0;

    int add_node(Node n);
    void index();            // rebuild out/topo/events; throws if cyclic
    bool cyclic() const;
};

struct GroundOptions {
    int unfold_cap = 0;      // 0 = SCC size
};

struct GroundResult {
    DerivationGraph graph;
    std::vector<int> outputs;   // derived (non-input, non-copy) nodes
    bool unfold_capped = false;
};

GroundResult solve_standard(const Program& p, const GroundOptions& opt = {});

// Iteration-indexed unfolding of every cyclic SCC; returns true if the cap was hit.
bool break_cycles(DerivationGraph& g, int depth_cap = 0);

struct FlatEdge {
    int from, to;
    int sign;
};

struct FlatGraph {
    int num_nodes = 0;
    std::vector<FlatEdge> edges;
    std::vector<std::vector<int>> adj;   // edge ids per source
};

FlatGraph flatten(const DerivationGraph& g);

enum class Polarity { None, Pos, Neg, Both };

Polarity depends(const FlatGraph& fg, int out, int inp);

std::string to_json(const DerivationGraph& g);

}  // namespace praline
