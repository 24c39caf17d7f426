#pragma once

// Random arithmetic expression text for property tests. Mixes parenthesized
// and bare operator chains so precedence and associativity get exercised.

#include <random>
#include <string>

namespace gen {

inline std::string number(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> whole(0, 99);
    std::uniform_int_distribution<int> kind(0, 9);
    int k = kind(rng);
    if (k == 0) return "pi";
    if (k == 1) return "e";
    if (k < 4) return std::to_string(whole(rng)) + "." + std::to_string(whole(rng) % 10);
    return std::to_string(whole(rng));
}

inline std::string expression(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, 9);
    if (depth <= 0) return number(rng);
    static const char* ops[] = {"+", "-", "*", "/"};
    static const char* funcs[] = {"sqrt", "abs", "ln", "log10", "sin", "cos", "tan", "exp", "floor", "ceil"};
    switch (pick(rng)) {
    case 0:
    case 1:
    case 2:
        return expression(rng, depth - 1) + " " + ops[pick(rng) % 4] + " " + expression(rng, depth - 1);
    case 3:
    case 4:
        return "(" + expression(rng, depth - 1) + " " + ops[pick(rng) % 4] + " " + expression(rng, depth - 1) + ")";
    case 5:
        return "-" + expression(rng, depth - 1);
    case 6: {
        // small exponents keep most samples finite
        std::string exponent = std::to_string(pick(rng) % 4);
        if (pick(rng) < 3) exponent = "-" + exponent;
        if (pick(rng) < 2) exponent += "^" + std::to_string(pick(rng) % 3);
        return number(rng) + "^" + exponent;
    }
    case 7:
    case 8:
        return std::string(funcs[pick(rng)]) + "(" + expression(rng, depth - 1) + ")";
    default:
        return number(rng);
    }
}

}  // namespace gen
