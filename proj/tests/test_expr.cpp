#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "affgeo/expr.hpp"

using namespace affgeo;

namespace {
double ev(const Field& f, std::initializer_list<double> pt) {
  return f.eval(std::span<const double>(pt.begin(), pt.size()));
}
}  // namespace

TEST_CASE("parse and evaluate basic arithmetic") {
  CHECK(ev(Field::parse("x1^2 + x2^2", 2), {1, 2}) == doctest::Approx(5).epsilon(1e-15));
  CHECK(ev(Field::parse("exp(x1)", 1), {0}) == doctest::Approx(1).epsilon(1e-15));
  CHECK(ev(Field::parse("log(x1)", 1), {1}) == doctest::Approx(0).epsilon(1e-15));
  CHECK(ev(Field::parse("x1^2*x2", 2), {3, 2}) == doctest::Approx(18).epsilon(1e-15));
  CHECK(ev(Field::parse("1 + 2*3^2", 1), {0}) == doctest::Approx(19).epsilon(1e-15));
  CHECK(ev(Field::parse("-x1^2", 1), {2}) == doctest::Approx(-4).epsilon(1e-15));
  CHECK(ev(Field::parse("2e-3 * x1", 1), {1}) == doctest::Approx(2e-3).epsilon(1e-15));
  CHECK(ev(Field::parse("pi", 1), {0}) == doctest::Approx(M_PI).epsilon(1e-16));
  CHECK(ev(Field::parse("x1^(-2)", 1), {2}) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(ev(Field::parse("sinh(x1)*cosh(x1)", 1), {0.3}) ==
        doctest::Approx(std::sinh(0.3) * std::cosh(0.3)).epsilon(1e-15));
  CHECK(ev(Field::parse("tanh(x1) + sqrt(x2)", 2), {0.5, 4}) ==
        doctest::Approx(std::tanh(0.5) + 2.0).epsilon(1e-15));
}

TEST_CASE("domain errors surface as exceptions, not NaN") {
  CHECK_THROWS_AS(ev(Field::parse("x1/x2", 2), {1, 0}), EvalError);
  CHECK_THROWS_AS(ev(Field::parse("log(x1)", 1), {-1}), EvalError);
  CHECK_THROWS_AS(ev(Field::parse("log(x1)", 1), {0}), EvalError);
  CHECK_THROWS_AS(ev(Field::parse("sqrt(x1)", 1), {-0.5}), EvalError);
  CHECK_THROWS_AS(ev(Field::parse("x1^(-1)", 1), {0}), EvalError);
}

TEST_CASE("syntax errors carry byte offsets") {
  auto offset_of = [](std::string_view src, int dim) -> std::size_t {
    try {
      parse_expr(src, dim);
    } catch (const ParseError& p) {
      return p.offset;
    }
    return static_cast<std::size_t>(-1);
  };
  CHECK(offset_of("x1 + ", 1) == 5);
  CHECK(offset_of("x1 @ x1", 1) == 3);
  CHECK(offset_of("foo(x1)", 1) == 0);
  CHECK(offset_of("x3", 2) == 0);      // coordinate index out of range
  CHECK(offset_of("x1^x1", 1) == 3);   // non-integer exponent
  CHECK(offset_of("x1^2^3", 1) == 4);  // chained ^ needs parentheses
  CHECK(offset_of("(x1", 1) == 3);     // unclosed parenthesis
  CHECK(offset_of("x1 x2", 2) == 3);   // trailing input
}

TEST_CASE("exact derivatives of elementary expressions") {
  Field cube = Field::parse("x1^3", 1);
  CHECK(cube.eval_partial({1}, std::vector<double>{2.0}) ==
        doctest::Approx(12).epsilon(1e-15));

  Field e2 = Field::parse("exp(2*x1)", 1);
  CHECK(e2.eval_partial({1, 1}, std::vector<double>{0.0}) ==
        doctest::Approx(4).epsilon(1e-15));

  Field s = Field::parse("sin(x1)", 1);
  CHECK(s.eval_partial({1, 1, 1}, std::vector<double>{0.0}) ==
        doctest::Approx(-1).epsilon(1e-15));

  Field q = Field::parse("sqrt(x1)", 1);
  CHECK(q.eval_partial({1}, std::vector<double>{4.0}) ==
        doctest::Approx(0.25).epsilon(1e-15));

  Field t = Field::parse("tanh(x1)", 1);
  double th = std::tanh(0.7);
  CHECK(t.eval_partial({1}, std::vector<double>{0.7}) ==
        doctest::Approx(1 - th * th).epsilon(1e-14));

  Field quot = Field::parse("x1/x2", 2);
  CHECK(quot.eval_partial({2}, std::vector<double>{3.0, 2.0}) ==
        doctest::Approx(-0.75).epsilon(1e-14));
}

TEST_CASE("mixed partial against finite-difference oracle") {
  // d2/dx1dx2 of sin(x1)*x2 at (0,5) is cos(0)*1 = 1; check both the exact
  // value and the independent stencil evaluation.
  Field f = Field::parse("sin(x1)*x2", 2);
  std::vector<double> pt{0.0, 5.0};
  CHECK(f.eval_partial({1, 2}, pt) == doctest::Approx(1).epsilon(1e-14));
  CHECK(fd_check(f, pt, {1, 2}, 1e-4) <= 1e-8);
}

TEST_CASE("derivative order above 3 is rejected") {
  Field f = Field::parse("x1^5", 1);
  std::vector<int> quad{1, 1, 1, 1};
  CHECK_THROWS_AS(f.derivative(std::span<const int>(quad)), Error);
}

TEST_CASE("finite-difference stencils hit documented accuracy") {
  // First-order stencil is exact on cubics.
  Field poly = Field::parse("2*x1^3 - x1^2 + 4*x1 - 7", 1);
  CHECK(fd_check(poly, std::vector<double>{0.37}, {1}, 1e-3) <= 1e-10);

  Field e = Field::parse("exp(x1)", 1);
  CHECK(fd_check(e, std::vector<double>{0.0}, {1, 1}, 1e-3) <= 1e-8);

  Field s = Field::parse("sin(x1)", 1);
  CHECK(fd_check(s, std::vector<double>{0.5}, {1, 1, 1}, 1e-2) <= 1e-6);
}

TEST_CASE("random-point derivative sweep stays within oracle tolerance") {
  std::vector<Field> fields = {
      Field::parse("sin(x1)^2 * exp(x2)", 2),
      Field::parse("x1^2 + x2^2 - x1*x2", 2),
      Field::parse("sinh(x1)*cos(x2)", 2),
      Field::parse("exp(-(x1^2 + x2^2)/2)", 2),
      Field::parse("log(1 + x1^2) + sqrt(1 + x2^2)", 2),
  };
  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> unif(0.2, 1.8);
  for (const Field& f : fields) {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> pt{unif(rng), unif(rng)};
      for (int i = 1; i <= 2; ++i) {
        CHECK(fd_check(f, pt, {i}, 1e-3) <= 1e-6);
        for (int j = i; j <= 2; ++j) {
          CHECK(fd_check(f, pt, {i, j}, 1e-3) <= 1e-6);
          for (int k = j; k <= 2; ++k) {
            CHECK(fd_check(f, pt, {i, j, k}, 1e-2) <= 1e-6);
          }
        }
      }
    }
  }
}

TEST_CASE("iterated and multi-index derivatives agree") {
  Field f = Field::parse("exp(x1*x2) * sin(x1 + 2*x2)", 2);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> pt{unif(rng), unif(rng)};
    for (int i = 1; i <= 2; ++i) {
      for (int j = 1; j <= 2; ++j) {
        double nested = f.derivative({i}).derivative({j}).eval(pt);
        double direct = f.eval_partial({i, j}, pt);
        CHECK(std::abs(nested - direct) <= 1e-12 * (1 + std::abs(direct)));
        // Commuting the index order must not change the value either.
        double swapped = f.eval_partial({j, i}, pt);
        CHECK(std::abs(swapped - direct) <= 1e-12 * (1 + std::abs(direct)));
      }
    }
  }
}

TEST_CASE("print round-trips to an evaluation-identical expression") {
  std::vector<std::string> sources = {
      "x1^2 + x2^2",
      "sin(x1)*x2 - cos(x2)/x1",
      "exp(-(x1^2 + x2^2)/2)",
      "(x1 - x2)^3 / (1 + x1^2)",
      "-x1 + - x2",
      "sqrt(1 + sinh(x1)^2) * tanh(x2)",
      "x1^(-2) - 3.5e-2*x2",
  };
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(0.3, 1.7);
  for (const auto& src : sources) {
    Field f = Field::parse(src, 2);
    Field g = Field::parse(f.to_string(), 2);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> pt{unif(rng), unif(rng)};
      CHECK(f.eval(pt) == doctest::Approx(g.eval(pt)).epsilon(1e-15));
    }
    // Derivatives print and round-trip too.
    Field df = f.derivative({1});
    Field dg = Field::parse(df.to_string(), 2);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> pt{unif(rng), unif(rng)};
      CHECK(df.eval(pt) == doctest::Approx(dg.eval(pt)).epsilon(1e-15));
    }
  }
}

TEST_CASE("substitution composes expressions") {
  // Restrict f(x1,x2) = x1^2 + x2 to the curve x1 = cos(t), x2 = sin(t).
  Field f = Field::parse("x1^2 + x2", 2);
  std::vector<ExprPtr> subs = {parse_expr("cos(x1)", 1), parse_expr("sin(x1)", 1)};
  Field g(compose_expr(f.expr(), subs), 1);
  for (double t : {0.0, 0.4, 1.1, 2.9}) {
    CHECK(g.eval(std::vector<double>{t}) ==
          doctest::Approx(std::cos(t) * std::cos(t) + std::sin(t)).epsilon(1e-15));
  }
  // Chain rule flows through the composition.
  double t = 0.7;
  double expect = -2 * std::cos(t) * std::sin(t) + std::cos(t);
  CHECK(g.eval_partial({1}, std::vector<double>{t}) ==
        doctest::Approx(expect).epsilon(1e-13));
}
