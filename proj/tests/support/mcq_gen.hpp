#pragma once

// Arithmetic multiple-choice items whose gold answers come from the
// brute-force oracle, never from the calculator under test.

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "athena/eval.hpp"
#include "calc_oracle.hpp"
#include "expr_gen.hpp"

namespace support {

inline std::string fmt10(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::vector<athena::eval::EvalItem> arithmetic_items(std::uint64_t seed, std::size_t count) {
    static const char* subjects[] = {"elementary", "high_school", "college"};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> depth(1, 3);
    std::uniform_int_distribution<int> slot(0, 3);
    std::vector<athena::eval::EvalItem> items;
    while (items.size() < count) {
        auto expr = gen::expression(rng, depth(rng));
        auto gold = oracle::evaluate(expr);
        if (!gold || !std::isfinite(*gold) || std::fabs(*gold) > 1e9) continue;

        athena::eval::EvalItem item;
        item.id = "gen-" + std::to_string(items.size() + 1);
        item.question = "What is " + expr + "?";
        item.subject = subjects[items.size() * 3 / count];
        int gold_slot = slot(rng);
        int k = 1;
        for (int i = 0; i < 4; ++i) {
            char letter = athena::eval::kLetters[i];
            if (i == gold_slot) {
                item.options[letter] = fmt10(*gold);
                item.answer = letter;
            } else {
                item.options[letter] = fmt10(*gold * (1 + 0.1 * k) + k);
                ++k;
            }
        }
        items.push_back(std::move(item));
    }
    return items;
}

}  // namespace support
