#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "praline/program.hpp"

namespace praline {

enum class Mode { Exact, Approx, Delta };

struct EngineOptions {
    Mode mode = Mode::Delta;
    double delta = 0.01;
    uint64_t seed = 42;
    int max_class_size = 12;
    long cut_cap = 4096;
    int jobs = 0;              // 0: hardware threads
    bool sigma_top = false;    // drop inferred correlation types
    std::string query;         // atom pattern, variables allowed
};

struct FactReport {
    std::string atom;
    double lower = 0, upper = 0;
    std::string mode;          // exact | approx | delta | soundness_only
    std::vector<std::string> flags;
};

struct Report {
    std::vector<FactReport> facts;
    double delta = 0;
    uint64_t seed = 0;
    double elapsed_ms = 0;
};

class InfeasibleProgram : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// parse -> ground -> infer for the selected facts
Report solve(const Program& p, const EngineOptions& o);

// "pred(a,b)" against a pattern such as "pred(a,X)"
bool atom_matches(const std::string& pattern, const std::string& atom);

std::string fmt6(double x);
std::string report_text(const Report& r);
std::string report_json(const Report& r);
Report report_from_json(const std::string& s);

const char* mode_name(Mode m);

}  // namespace praline
