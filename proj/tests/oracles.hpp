// SPDX-License-Identifier: Apache-2.0
//
// Test-side oracles that do not go through any engine code.
#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

inline std::string slurp_corpus(const std::string& name) {
    std::ifstream in(std::string(LIFTEX_CORPUS_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Sum of world weights over all outcome vectors of n i.i.d. draws.
inline double world_prob(int n, const std::vector<double>& probs,
                         const std::function<bool(const std::vector<int>&)>& holds) {
    std::vector<int> w(static_cast<std::size_t>(n), 0);
    double total = 0;
    const int k = static_cast<int>(probs.size());
    for (;;) {
        if (holds(w)) {
            double p = 1;
            for (int v : w) p *= probs[static_cast<std::size_t>(v)];
            total += p;
        }
        int i = 0;
        while (i < n && ++w[static_cast<std::size_t>(i)] == k) w[static_cast<std::size_t>(i++)] = 0;
        if (i == n) break;
    }
    return total;
}

inline bool at_least_two(const std::vector<int>& w, int outcome) {
    int c = 0;
    for (int v : w) c += v == outcome;
    return c >= 2;
}

inline double twoheads_enum(int n, double pi) {
    return world_prob(n, {pi, 1 - pi}, [](const std::vector<int>& w) { return at_least_two(w, 0); });
}

inline double twoheads_closed(int n, double pi) {
    return 1 - std::pow(1 - pi, n) - n * pi * std::pow(1 - pi, n - 1);
}

/// Two of outcome a or two of outcome b.
inline double two_of_either_enum(int n, const std::vector<double>& probs, int a, int b) {
    return world_prob(n, probs, [&](const std::vector<int>& w) { return at_least_two(w, a) || at_least_two(w, b); });
}

}  // namespace oracle
