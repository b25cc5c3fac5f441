#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace praline {

struct Loc {
    int line = 0;
    int col = 0;
};

class Error : public std::runtime_error {
public:
    Error(const std::string& msg, Loc loc) : std::runtime_error(msg), loc_(loc) {}
    Loc loc() const { return loc_; }
private:
    Loc loc_;
};

class SyntaxError : public Error { using Error::Error; };
class ProbabilityRangeError : public Error { using Error::Error; };
class UndeclaredFactError : public Error { using Error::Error; };
class ConflictError : public Error { using Error::Error; };

struct Term {
    std::string text;
    bool var = false;
    bool operator==(const Term&) const = default;
};

struct Atom {
    std::string pred;
    std::vector<Term> args;
    Loc loc;

    bool ground() const;
    std::string str() const;
    bool operator==(const Atom& o) const { return pred == o.pred && args == o.args; }
};

struct Rule {
    Atom head;
    std::vector<Atom> pos;
    std::vector<Atom> neg;
    double prob = 1.0;
    int index = 0;      // 1-based position among rules
    Loc loc;
};

// p :: target | given...   (negated givens carry neg=true)
struct InputProbDecl {
    std::string target;
    std::vector<std::pair<std::string, bool>> given;
    double prob = 1.0;
    Loc loc;
};

struct CorrelationClass {
    int id = -1;
    std::vector<std::string> members;
    std::unordered_map<std::string, int> index;
};

struct Program {
    std::vector<std::string> facts;                    // input facts, declaration order
    std::vector<Atom> fact_atoms;
    std::unordered_map<std::string, int> fact_id;
    std::vector<CorrelationClass> classes;
    std::vector<int> class_of;                         // fact id -> class position
    std::vector<Rule> rules;
    std::vector<InputProbDecl> input_probs;
    std::vector<Atom> queries;

    // raw declarations kept for class inference
    std::vector<std::vector<std::string>> corr_groups;
    std::map<int, std::vector<std::string>> explicit_classes;

    int fact(const std::string& s) const {
        auto it = fact_id.find(s);
        return it == fact_id.end() ? -1 : it->second;
    }
    bool resolved() const { return class_of.size() == facts.size() && !facts.empty(); }
};

// Parses and resolves correlation classes.
Program parse(const std::string& source);
Program parse_file(const std::string& path);

// Rebuilds classes from corr / Class / conditional declarations.
Program infer_correlation_classes(Program p);

// Canonical source printer (round-trips through parse).
std::string print(const Program& p);

std::string fmt_prob(double p);

}  // namespace praline
