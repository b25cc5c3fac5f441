#pragma once

#include <fstream>
#include <sstream>
#include <string>

inline std::string data_path(const std::string& name) { return std::string(PRALINE_TEST_DATA) + "/" + name; }

inline std::string slurp(const std::string& name) {
    std::ifstream in(data_path(name));
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}
