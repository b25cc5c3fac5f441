#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "praline/approx.hpp"
#include "praline/constraints.hpp"
#include "praline/grounder.hpp"
#include "praline/optimizer.hpp"

namespace praline {

class ScaleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Per-class joint distributions, indexed by class position.
using Mu = std::vector<std::vector<double>>;

// Brute-force possible worlds: fact bits per class, then one coin per probabilistic ground rule.
// Evaluates the program per world with its own naive stratified fixpoint, not the grounder.
class WorldOracle {
public:
    WorldOracle(const Program& p, const DerivationGraph& g, int max_bits = 24);

    size_t num_worlds() const { return size_t{1} << bits_; }
    int bits() const { return bits_; }

    // truth of a ground atom in every world (empty when never derivable)
    const std::vector<char>& truth(const std::string& atom) const;

    std::vector<double> weights(const Mu& mu) const;

    double prob(const std::string& atom, const Mu& mu) const;
    double prob_both(const std::string& a, const std::string& b, const Mu& mu) const;

private:
    const Program& p_;
    int bits_ = 0;
    std::vector<int> offset_;                 // class -> first bit
    std::vector<double> event_p_;
    std::unordered_map<std::string, std::vector<char>> truth_;
    std::vector<char> none_;
};

// random feasible point: a Dirichlet mix of each class's vertices
Mu sample_mu(const Optimizer& opt, size_t n_classes, std::mt19937_64& rng);

// exact [min, max] of P(node) over the constraint system
Interval exact_interval_oracle(const Program& p, const DerivationGraph& g, const ConstraintSystem& phi,
                               const Optimizer& opt, int node);

struct RandomProgramOptions {
    int max_classes = 3;       // correlated classes (size 2..3)
    int max_class_size = 3;
    int inputs = 9;
    int derived = 5;
    int max_rules = 10;
    int max_prob_rules = 4;
    bool independent_only = false;   // singleton classes with marginals only
    bool tree = false;               // every atom used at most once in bodies, no recursion
};

// Small propositional program built from a true joint distribution, so it is always feasible.
std::string random_program(uint64_t seed, const RandomProgramOptions& o = {});

}  // namespace praline
