#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "harmap/expression.hpp"

using namespace harmap;

namespace {

double eval(const std::string& text, double x1 = 0.0, double x2 = 0.0,
            double x3 = 0.0) {
  return Expression::parse(text).eval({x1, x2, x3});
}

int parse_error_offset(const std::string& text) {
  try {
    Expression::parse(text);
  } catch (const ParseError& e) {
    return e.offset();
  }
  return -1;
}

}  // namespace

TEST_CASE("grammar corpus") {
  // value cases
  CHECK(eval("1 + 0.1*sin(x1)*cos(2*x2)") == Catch::Approx(1.0));
  CHECK(eval("1 + 2*3") == Catch::Approx(7.0));
  CHECK(eval("(1 + 2)*3") == Catch::Approx(9.0));
  CHECK(eval("2 - 3 - 4") == Catch::Approx(-5.0));
  CHECK(eval("8/4/2") == Catch::Approx(1.0));
  CHECK(eval("2^3^2") == Catch::Approx(512.0));  // right-associative
  CHECK(eval("-2^2") == Catch::Approx(-4.0));    // ^ binds tighter than unary -
  CHECK(eval("(-2)^2") == Catch::Approx(4.0));
  CHECK(eval("2^-3") == Catch::Approx(0.125));
  CHECK(eval("--1") == Catch::Approx(1.0));
  CHECK(eval("2*pi") == Catch::Approx(2.0 * std::numbers::pi));
  CHECK(eval("sin(pi/2)") == Catch::Approx(1.0));
  CHECK(eval("cos(0)") == Catch::Approx(1.0));
  CHECK(eval("exp(0) + log(1)") == Catch::Approx(1.0));
  CHECK(eval("sqrt(4)") == Catch::Approx(2.0));
  CHECK(eval("x1 + 2*x2 + 3*x3", 1.0, 2.0, 3.0) == Catch::Approx(14.0));
  CHECK(eval("1.5e2") == Catch::Approx(150.0));
  CHECK(eval("1e-2") == Catch::Approx(0.01));

  // error positions
  CHECK(parse_error_offset("sin(x1") == 6);
  CHECK(parse_error_offset("1+") == 2);
  CHECK(parse_error_offset("(1+2") == 4);
  CHECK(parse_error_offset(")") == 0);
  CHECK(parse_error_offset("1 + * 2") == 4);
  CHECK(parse_error_offset("foo(1)") == 0);
  CHECK(parse_error_offset("x4") == 0);
  CHECK(parse_error_offset("1 2") == 2);
  CHECK(parse_error_offset("sin x1") == 4);  // missing argument list
}

TEST_CASE("expected-token reporting") {
  try {
    Expression::parse("sin(x1");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 6);
    CHECK(e.expected() == ")");
  }
}

TEST_CASE("evaluation domain errors") {
  CHECK_THROWS_AS(eval("1/0"), EvalError);
  CHECK_THROWS_AS(eval("log(0)"), EvalError);
  CHECK_THROWS_AS(eval("log(0 - 1)"), EvalError);
  CHECK_THROWS_AS(eval("sqrt(0 - 4)"), EvalError);
  CHECK_NOTHROW(eval("log(2)"));
  CHECK_NOTHROW(eval("sqrt(0)"));
}

TEST_CASE("periodicity probe") {
  CHECK(Expression::parse("sin(x1)").is_periodic(2));
  CHECK(Expression::parse("1 + 0.1*sin(x1)*cos(2*x2)").is_periodic(2));
  CHECK_FALSE(Expression::parse("x1").is_periodic(2));
  CHECK_FALSE(Expression::parse("x1 + sin(x2)").is_periodic(2));
  CHECK(Expression::parse("exp(0.2*sin(x1))").is_periodic(3));
  CHECK_FALSE(Expression::parse("sin(x1/2)").is_periodic(2));
}

TEST_CASE("symbolic derivative") {
  Expression e = Expression::parse("sin(2*x1)*exp(x2)");
  Expression d1 = e.derivative(0);
  Expression d2 = e.derivative(1);
  const std::array<double, 3> x{0.3, -0.7, 0.0};
  CHECK(d1.eval(x) ==
        Catch::Approx(2.0 * std::cos(2 * x[0]) * std::exp(x[1])).epsilon(1e-12));
  CHECK(d2.eval(x) ==
        Catch::Approx(std::sin(2 * x[0]) * std::exp(x[1])).epsilon(1e-12));

  Expression q = Expression::parse("sqrt(1 + 0.5*cos(x1))");
  Expression dq = q.derivative(0);
  const double h = 1e-6;
  const double fd = (q.eval({0.4 + h, 0, 0}) - q.eval({0.4 - h, 0, 0})) / (2 * h);
  CHECK(dq.eval({0.4, 0, 0}) == Catch::Approx(fd).margin(1e-9));

  Expression p = Expression::parse("(1 + 0.2*sin(x1))^3");
  Expression dp = p.derivative(0);
  const double fd2 = (p.eval({1.1 + h, 0, 0}) - p.eval({1.1 - h, 0, 0})) / (2 * h);
  CHECK(dp.eval({1.1, 0, 0}) == Catch::Approx(fd2).margin(1e-8));
}
