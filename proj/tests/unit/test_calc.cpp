#include <doctest.h>

#include <cmath>
#include <random>

#include "athena/calc.hpp"
#include "athena/tools.hpp"
#include "calc_oracle.hpp"
#include "expr_gen.hpp"

using namespace athena::calc;
using Kind = Expr::Kind;

namespace {

double eval_text(std::string_view s) { return evaluate(parse(s)); }

EvalError::Code eval_error(std::string_view s) {
    try {
        eval_text(s);
    } catch (const EvalError& e) {
        return e.code();
    }
    FAIL("expected EvalError for " << s);
    return EvalError::Code::DomainError;
}

bool close(double a, double b, double rel) { return std::fabs(a - b) <= rel * std::max({1.0, std::fabs(a), std::fabs(b)}); }

}  // namespace

TEST_CASE("oracle agrees with hand-computed values") {
    CHECK(*oracle::evaluate("3^2^3") == 6561);
    CHECK(*oracle::evaluate("2+3*4") == 14);
    CHECK(*oracle::evaluate("-2^2") == -4);
    CHECK(*oracle::evaluate("2^-1") == 0.5);
    CHECK_FALSE(oracle::evaluate("2+*3"));
    CHECK_FALSE(oracle::evaluate("1/0"));
}

TEST_CASE("precedence and associativity") {
    CHECK(parse("2+3*4").ast ==
          Expr::binary(Kind::Add, Expr::number(2), Expr::binary(Kind::Multiply, Expr::number(3), Expr::number(4))));
    CHECK(parse("3^2^3").ast ==
          Expr::binary(Kind::Power, Expr::number(3), Expr::binary(Kind::Power, Expr::number(2), Expr::number(3))));
    CHECK(eval_text("3^2^3") == 6561);
    CHECK(parse("8-3-2").ast ==
          Expr::binary(Kind::Subtract, Expr::binary(Kind::Subtract, Expr::number(8), Expr::number(3)), Expr::number(2)));
    CHECK(parse("-2^2").ast == Expr::negate(Expr::binary(Kind::Power, Expr::number(2), Expr::number(2))));
    CHECK(eval_text("-2^2") == -4);
    CHECK(eval_text("2^-1") == 0.5);
    CHECK(eval_text("2*-3") == -6);
    CHECK(eval_text("12/4/3") == 1);
}

TEST_CASE("evaluation examples") {
    CHECK(eval_text("2+2") == 4);
    CHECK(close(eval_text("(1/3)*3"), 1.0, 1e-12));
    CHECK(eval_text("17*23") == 391);
    CHECK(eval_text("sqrt(16)+ln(e)") == 5);
    CHECK(close(eval_text("cos(pi)"), -1.0, 1e-15));
    CHECK(eval_text("floor(2.7) + ceil(2.1) + abs(-4)") == 9);
    CHECK(eval_text("log10(1000)") == 3);
    CHECK(eval_text("6 \xC3\x97 7") == 42);       // ×
    CHECK(eval_text("84 \xC3\xB7 2") == 42);      // ÷
    CHECK(eval_text("50 \xE2\x88\x92 8") == 42);  // −
    CHECK(eval_text("1.5e2") == 150);
}

TEST_CASE("evaluation errors") {
    CHECK(eval_error("1/0") == EvalError::Code::DivisionByZero);
    CHECK(eval_error("1/(2-2)") == EvalError::Code::DivisionByZero);
    CHECK(eval_error("sqrt(-1)") == EvalError::Code::DomainError);
    CHECK(eval_error("ln(0)") == EvalError::Code::DomainError);
    CHECK(eval_error("log10(-5)") == EvalError::Code::DomainError);
    CHECK(eval_error("(-8)^(1/3)") == EvalError::Code::DomainError);
    CHECK(eval_error("10^400") == EvalError::Code::DomainError);
}

TEST_CASE("parse errors carry a position") {
    auto position = [](std::string_view s) -> std::ptrdiff_t {
        try {
            parse(s);
        } catch (const ParseError& e) {
            return static_cast<std::ptrdiff_t>(e.position());
        }
        return -1;
    };
    CHECK(position("2+*3") == 2);
    CHECK(position("") == 0);
    CHECK(position("   ") >= 0);
    CHECK(position("(1+2") == 4);
    CHECK(position("1+2)") == 3);
    CHECK(position("foo(2)") == 0);
    CHECK(position("sqrt 4") >= 0);
    CHECK(position("2 3") == 2);
    CHECK(position("2 $ 3") == 2);
}

TEST_CASE("random expressions match the oracle and survive render/parse") {
    std::mt19937_64 rng(20240611);
    int agreed_values = 0;
    for (int i = 0; i < 1000; ++i) {
        auto text = gen::expression(rng, 4);
        auto expected = oracle::evaluate(text);
        std::optional<double> got;
        Expression parsed;
        REQUIRE_NOTHROW(parsed = parse(text));
        try {
            got = evaluate(parsed);
        } catch (const EvalError&) {
        }
        INFO(text);
        REQUIRE(expected.has_value() == got.has_value());
        if (got) {
            CHECK(close(*got, *expected, 1e-9));
            ++agreed_values;
        }
        auto rendered = render(parsed.ast);
        CHECK(parse(rendered).ast == parsed.ast);
    }
    CHECK(agreed_values > 600);
}

TEST_CASE("format_number gives the shortest round-tripping text") {
    CHECK(format_number(391) == "391");
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(-4) == "-4");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("calculator tool content") {
    auto ok = athena::tools::calculate("17*23");
    CHECK_FALSE(ok.is_error);
    CHECK(nlohmann::json::parse(ok.content) == nlohmann::json{{"expression", "17*23"}, {"result", 391}});
    auto frac = nlohmann::json::parse(athena::tools::calculate("1/4").content);
    CHECK(frac["result"].is_number_float());
    CHECK(frac["result"].get<double>() == 0.25);

    auto bad = athena::tools::calculate("2+*3");
    CHECK(bad.is_error);
    CHECK(bad.content.find("ParseError") != std::string::npos);
    auto div = athena::tools::calculate("1/0");
    CHECK(div.is_error);
    CHECK(div.content.find("DivisionByZero") != std::string::npos);
}
