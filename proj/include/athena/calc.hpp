#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace athena::calc {

/// Parse tree node. Children live in `operands`: one for Negate and Call, two
/// for the binary operators, none for Number and Constant.
struct Expr {
    enum class Kind { Number, Constant, Negate, Add, Subtract, Multiply, Divide, Power, Call };

    Kind kind = Kind::Number;
    double value = 0.0;
    std::string name;  // constant or function name
    std::vector<Expr> operands;

    static Expr number(double v);
    static Expr constant(std::string name);
    static Expr negate(Expr operand);
    static Expr binary(Kind kind, Expr lhs, Expr rhs);
    static Expr call(std::string function, Expr argument);

    friend bool operator==(const Expr&, const Expr&) = default;
};

struct Expression {
    std::string source;
    Expr ast;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t position, std::string expected);

    std::size_t position() const noexcept { return position_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t position_;
    std::string expected_;
};

class EvalError : public std::runtime_error {
public:
    enum class Code { DivisionByZero, DomainError };

    EvalError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

const std::vector<std::string_view>& function_names();

/// Grammar, loosest to tightest: + -, then * /, then unary minus, then ^
/// (right-associative). Accepts the × and ÷ symbols as * and /.
Expression parse(std::string_view source);

/// Double-precision evaluation. Any non-finite intermediate is reported as
/// an EvalError rather than propagated as NaN or infinity.
double evaluate(const Expr& expr);
inline double evaluate(const Expression& expression) { return evaluate(expression.ast); }

/// Fully parenthesized rendering that re-parses to an equal tree.
std::string render(const Expr& expr);

/// Shortest text that round-trips the double.
std::string format_number(double v);

}  // namespace athena::calc
