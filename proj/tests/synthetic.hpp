#pragma once

#include <random>
#include <sstream>
#include <string>

// Layered propositional program: `inputs` facts (the first `big` of them in one class),
// `layers` x `width` derived atoms with two rules each. The last layer gets `queries` queries.
inline std::string layered_program(int inputs, int big, int layers, int width, int queries, unsigned seed = 1) {
    std::mt19937 rng(seed);
    std::ostringstream s;
    for (int i = 0; i < inputs; ++i) s << "0." << 1 + (i * 7) % 9 << "::x" << i << ".\n";
    if (big > 1) {
        s << "corr(x0";
        for (int i = 1; i < big; ++i) s << ", x" << i;
        s << ").\n";
    }
    auto prev = [&](int layer) {
        int k = static_cast<int>(rng() % static_cast<unsigned>(layer == 0 ? inputs : width));
        return layer == 0 ? "x" + std::to_string(k) : "n" + std::to_string(layer) + "_" + std::to_string(k);
    };
    for (int l = 1; l <= layers; ++l)
        for (int k = 0; k < width; ++k) {
            std::string head = "n" + std::to_string(l) + "_" + std::to_string(k);
            for (int r = 0; r < 2; ++r) {
                s << (l == 1 ? "0.9" : "1") << "::" << head << " :- " << prev(l - 1);
                if (rng() % 4 == 0)
                    s << ", \\+" << prev(l - 1);
                else
                    s << ", " << prev(l - 1);
                s << ".\n";
            }
        }
    for (int q = 0; q < queries; ++q) s << "query(n" << layers << "_" << q << ").\n";
    return s.str();
}
