#include "athena/calc.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

namespace athena::calc {

Expr Expr::number(double v) {
    Expr e;
    e.kind = Kind::Number;
    e.value = v;
    return e;
}

Expr Expr::constant(std::string name) {
    Expr e;
    e.kind = Kind::Constant;
    e.name = std::move(name);
    return e;
}

Expr Expr::negate(Expr operand) {
    Expr e;
    e.kind = Kind::Negate;
    e.operands.push_back(std::move(operand));
    return e;
}

Expr Expr::binary(Kind kind, Expr lhs, Expr rhs) {
    Expr e;
    e.kind = kind;
    e.operands.push_back(std::move(lhs));
    e.operands.push_back(std::move(rhs));
    return e;
}

Expr Expr::call(std::string function, Expr argument) {
    Expr e;
    e.kind = Kind::Call;
    e.name = std::move(function);
    e.operands.push_back(std::move(argument));
    return e;
}

ParseError::ParseError(std::size_t position, std::string expected)
    : std::runtime_error("ParseError at position " + std::to_string(position) + ": expected " + expected),
      position_(position),
      expected_(std::move(expected)) {}

const std::vector<std::string_view>& function_names() {
    static const std::vector<std::string_view> names = {"sqrt", "abs", "ln", "log10", "sin",
                                                        "cos", "tan", "exp", "floor", "ceil"};
    return names;
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Expr parse_all() {
        skip_space();
        if (at_end()) throw ParseError(pos_, "expression");
        Expr e = additive();
        skip_space();
        if (!at_end()) throw ParseError(pos_, "operator or end of input");
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    bool at_end() const { return pos_ >= src_.size(); }

    void skip_space() {
        while (!at_end() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
            ++pos_;
    }

    // Returns the operator at the cursor normalized to ASCII, with its byte
    // length, or 0 when there is none.
    std::pair<char, std::size_t> peek_operator() const {
        if (at_end()) return {0, 0};
        char c = src_[pos_];
        if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') return {c, 1};
        auto rest = src_.substr(pos_);
        if (rest.starts_with("×")) return {'*', 2};
        if (rest.starts_with("÷")) return {'/', 2};
        if (rest.starts_with("−")) return {'-', 3};
        return {0, 0};
    }

    Expr additive() {
        Expr lhs = multiplicative();
        for (;;) {
            skip_space();
            auto [op, len] = peek_operator();
            if (op != '+' && op != '-') return lhs;
            pos_ += len;
            Expr rhs = multiplicative();
            lhs = Expr::binary(op == '+' ? Expr::Kind::Add : Expr::Kind::Subtract, std::move(lhs), std::move(rhs));
        }
    }

    Expr multiplicative() {
        Expr lhs = unary();
        for (;;) {
            skip_space();
            auto [op, len] = peek_operator();
            if (op != '*' && op != '/') return lhs;
            pos_ += len;
            Expr rhs = unary();
            lhs = Expr::binary(op == '*' ? Expr::Kind::Multiply : Expr::Kind::Divide, std::move(lhs), std::move(rhs));
        }
    }

    Expr unary() {
        skip_space();
        auto [op, len] = peek_operator();
        if (op == '-') {
            pos_ += len;
            return Expr::negate(unary());
        }
        return power();
    }

    Expr power() {
        Expr base = primary();
        skip_space();
        auto [op, len] = peek_operator();
        if (op != '^') return base;
        pos_ += len;
        return Expr::binary(Expr::Kind::Power, std::move(base), unary());
    }

    Expr primary() {
        skip_space();
        if (at_end()) throw ParseError(pos_, "number, constant, function or '('");
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Expr inner = additive();
            expect(')');
            return inner;
        }
        if ((c >= '0' && c <= '9') || c == '.') return number();
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return identifier();
        throw ParseError(pos_, "number, constant, function or '('");
    }

    void expect(char c) {
        skip_space();
        if (at_end() || src_[pos_] != c) throw ParseError(pos_, std::string("'") + c + "'");
        ++pos_;
    }

    Expr number() {
        const std::size_t start = pos_;
        std::size_t end = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (end < src_.size() && src_[end] >= '0' && src_[end] <= '9') ++end, ++n;
            return n;
        };
        std::size_t mantissa = digits();
        if (end < src_.size() && src_[end] == '.') {
            ++end;
            mantissa += digits();
        }
        if (mantissa == 0) throw ParseError(start, "digits");
        if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
            // Only an exponent if digits follow; otherwise 'e' is left for
            // the caller and rejected as trailing input.
            std::size_t probe = end + 1;
            if (probe < src_.size() && (src_[probe] == '+' || src_[probe] == '-')) ++probe;
            if (probe < src_.size() && src_[probe] >= '0' && src_[probe] <= '9') {
                end = probe;
                digits();
            }
        }
        double v = 0;
        auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + end, v);
        if (ec != std::errc{} || ptr != src_.data() + end || !std::isfinite(v))
            throw ParseError(start, "finite number");
        pos_ = end;
        return Expr::number(v);
    }

    Expr identifier() {
        const std::size_t start = pos_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
        std::string name(src_.substr(start, pos_ - start));
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
        if (name == "pi" || name == "e") return Expr::constant(name);
        const auto& fns = function_names();
        if (std::find(fns.begin(), fns.end(), name) == fns.end()) throw ParseError(start, "known function or constant");
        skip_space();
        if (at_end() || src_[pos_] != '(') throw ParseError(pos_, "'(' after " + name);
        ++pos_;
        Expr arg = additive();
        expect(')');
        return Expr::call(std::move(name), std::move(arg));
    }
};

double checked(double v, const char* what) {
    if (!std::isfinite(v)) throw EvalError(EvalError::Code::DomainError, std::string("DomainError: ") + what);
    return v;
}

double apply(const std::string& fn, double x) {
    if (fn == "sqrt") {
        if (x < 0) throw EvalError(EvalError::Code::DomainError, "DomainError: sqrt of negative number");
        return std::sqrt(x);
    }
    if (fn == "ln" || fn == "log10") {
        if (x <= 0) throw EvalError(EvalError::Code::DomainError, "DomainError: " + fn + " of non-positive number");
        return fn == "ln" ? std::log(x) : std::log10(x);
    }
    if (fn == "abs") return std::fabs(x);
    if (fn == "sin") return std::sin(x);
    if (fn == "cos") return std::cos(x);
    if (fn == "tan") return checked(std::tan(x), "tan overflow");
    if (fn == "exp") return checked(std::exp(x), "exp overflow");
    if (fn == "floor") return std::floor(x);
    if (fn == "ceil") return std::ceil(x);
    throw EvalError(EvalError::Code::DomainError, "DomainError: unknown function " + fn);
}

}  // namespace

Expression parse(std::string_view source) {
    Parser parser(source);
    return Expression{std::string(source), parser.parse_all()};
}

double evaluate(const Expr& expr) {
    using K = Expr::Kind;
    switch (expr.kind) {
    case K::Number: return expr.value;
    case K::Constant: return expr.name == "pi" ? std::numbers::pi : std::numbers::e;
    case K::Negate: return -evaluate(expr.operands[0]);
    case K::Call: return apply(expr.name, evaluate(expr.operands[0]));
    default: break;
    }
    const double a = evaluate(expr.operands[0]);
    const double b = evaluate(expr.operands[1]);
    switch (expr.kind) {
    case K::Add: return checked(a + b, "overflow in addition");
    case K::Subtract: return checked(a - b, "overflow in subtraction");
    case K::Multiply: return checked(a * b, "overflow in multiplication");
    case K::Divide:
        if (b == 0) throw EvalError(EvalError::Code::DivisionByZero, "DivisionByZero");
        return checked(a / b, "overflow in division");
    case K::Power: return checked(std::pow(a, b), "power undefined or overflowing");
    default: break;
    }
    throw EvalError(EvalError::Code::DomainError, "DomainError: malformed expression");
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::string render(const Expr& expr) {
    using K = Expr::Kind;
    switch (expr.kind) {
    case K::Number: return format_number(expr.value);
    case K::Constant: return expr.name;
    case K::Call: return expr.name + "(" + render(expr.operands[0]) + ")";
    case K::Negate: return "(-" + render(expr.operands[0]) + ")";
    default: break;
    }
    const char* op = "+";
    switch (expr.kind) {
    case K::Subtract: op = "-"; break;
    case K::Multiply: op = "*"; break;
    case K::Divide: op = "/"; break;
    case K::Power: op = "^"; break;
    default: break;
    }
    return "(" + render(expr.operands[0]) + " " + op + " " + render(expr.operands[1]) + ")";
}

}  // namespace athena::calc
