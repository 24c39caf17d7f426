#pragma once

// Brute-force reference evaluator for calculator tests. Deliberately shares no
// code with the library parser: it tokenizes, converts to RPN with a
// shunting-yard pass and evaluates the RPN on a value stack.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

struct Token {
    enum Type { Num, Op, Neg, Func, LParen, RParen } type;
    double value = 0;
    std::string text;
};

inline int precedence(const Token& t) {
    if (t.type == Token::Neg) return 3;
    if (t.text == "^") return 4;
    if (t.text == "*" || t.text == "/") return 2;
    return 1;
}

inline std::optional<std::vector<Token>> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto prev_is_operand = [&] {
        return !out.empty() && (out.back().type == Token::Num || out.back().type == Token::RParen);
    };
    while (i < s.size()) {
        char c = s[i];
        if (c == ' ') {
            ++i;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::string num(s.substr(i));
            char* end = nullptr;
            double v = std::strtod(num.c_str(), &end);
            if (end == num.c_str()) return std::nullopt;
            i += static_cast<std::size_t>(end - num.c_str());
            out.push_back({Token::Num, v, {}});
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::string name;
            while (i < s.size() && std::isalnum(static_cast<unsigned char>(s[i]))) name += s[i++];
            if (name == "pi") {
                out.push_back({Token::Num, 3.14159265358979323846, {}});
            } else if (name == "e") {
                out.push_back({Token::Num, 2.71828182845904523536, {}});
            } else {
                out.push_back({Token::Func, 0, name});
            }
            continue;
        }
        if (c == '(') {
            out.push_back({Token::LParen, 0, {}});
        } else if (c == ')') {
            out.push_back({Token::RParen, 0, {}});
        } else if (c == '-' && !prev_is_operand()) {
            out.push_back({Token::Neg, 0, "neg"});
        } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
            out.push_back({Token::Op, 0, std::string(1, c)});
        } else {
            return std::nullopt;
        }
        ++i;
    }
    return out;
}

inline std::optional<double> apply_function(const std::string& f, double x) {
    if (f == "sqrt") return x < 0 ? std::nullopt : std::optional(std::sqrt(x));
    if (f == "abs") return std::fabs(x);
    if (f == "ln") return x <= 0 ? std::nullopt : std::optional(std::log(x));
    if (f == "log10") return x <= 0 ? std::nullopt : std::optional(std::log10(x));
    if (f == "sin") return std::sin(x);
    if (f == "cos") return std::cos(x);
    if (f == "tan") return std::tan(x);
    if (f == "exp") return std::exp(x);
    if (f == "floor") return std::floor(x);
    if (f == "ceil") return std::ceil(x);
    return std::nullopt;
}

/// Returns nullopt for malformed input, division by zero, domain errors and
/// non-finite results.
inline std::optional<double> evaluate(std::string_view source) {
    auto tokens = tokenize(source);
    if (!tokens) return std::nullopt;

    std::vector<Token> rpn;
    std::vector<Token> ops;
    for (const auto& t : *tokens) {
        switch (t.type) {
        case Token::Num:
            rpn.push_back(t);
            break;
        case Token::Func:
        case Token::LParen:
        case Token::Neg:
            ops.push_back(t);
            break;
        case Token::Op: {
            bool right = t.text == "^";
            while (!ops.empty() && (ops.back().type == Token::Op || ops.back().type == Token::Neg)) {
                int top = precedence(ops.back());
                int cur = precedence(t);
                if (top > cur || (top == cur && !right)) {
                    rpn.push_back(ops.back());
                    ops.pop_back();
                } else {
                    break;
                }
            }
            ops.push_back(t);
            break;
        }
        case Token::RParen:
            while (!ops.empty() && ops.back().type != Token::LParen) {
                rpn.push_back(ops.back());
                ops.pop_back();
            }
            if (ops.empty()) return std::nullopt;
            ops.pop_back();
            if (!ops.empty() && ops.back().type == Token::Func) {
                rpn.push_back(ops.back());
                ops.pop_back();
            }
            break;
        }
    }
    while (!ops.empty()) {
        if (ops.back().type == Token::LParen) return std::nullopt;
        rpn.push_back(ops.back());
        ops.pop_back();
    }

    std::vector<double> stack;
    for (const auto& t : rpn) {
        if (t.type == Token::Num) {
            stack.push_back(t.value);
            continue;
        }
        if (t.type == Token::Neg || t.type == Token::Func) {
            if (stack.empty()) return std::nullopt;
            double x = stack.back();
            stack.pop_back();
            if (t.type == Token::Neg) {
                stack.push_back(-x);
            } else {
                auto r = apply_function(t.text, x);
                if (!r || !std::isfinite(*r)) return std::nullopt;
                stack.push_back(*r);
            }
            continue;
        }
        if (stack.size() < 2) return std::nullopt;
        double b = stack.back();
        stack.pop_back();
        double a = stack.back();
        stack.pop_back();
        double r = 0;
        switch (t.text[0]) {
        case '+': r = a + b; break;
        case '-': r = a - b; break;
        case '*': r = a * b; break;
        case '/':
            if (b == 0) return std::nullopt;
            r = a / b;
            break;
        case '^': r = std::pow(a, b); break;
        }
        if (!std::isfinite(r)) return std::nullopt;
        stack.push_back(r);
    }
    if (stack.size() != 1) return std::nullopt;
    return stack.front();
}

}  // namespace oracle
