#include <catch2/catch_amalgamated.hpp>

#include "dist235/expr.hpp"
#include "helpers.hpp"

using namespace dist235;

TEST_CASE("grammar: precedence and associativity") {
    // ^ binds tighter than unary minus, which binds tighter than * and /.
    const Expr e1 = parse_expression("-x1^2");
    REQUIRE(e1->kind == ExprKind::neg);
    REQUIRE(e1->a->kind == ExprKind::pow);

    const Expr e2 = parse_expression("x1 - x2 - x3"); // left associative
    REQUIRE(e2->kind == ExprKind::sub);
    REQUIRE(e2->a->kind == ExprKind::sub);

    const Expr e3 = parse_expression("x1^2^3"); // right associative exponent tower
    REQUIRE(e3->kind == ExprKind::pow);
    REQUIRE(e3->exponent == 8);

    const Expr e4 = parse_expression("x1 + x2*x3");
    REQUIRE(e4->kind == ExprKind::add);
    REQUIRE(e4->b->kind == ExprKind::mul);

    const Expr e5 = parse_expression("x1^-2");
    REQUIRE(e5->kind == ExprKind::pow);
    REQUIRE(e5->exponent == -2);
}

TEST_CASE("grammar: ratio literals fold exactly") {
    const Expr e = parse_expression("1/3 - 2/6");
    REQUIRE(is_zero(e));

    const Expr h = parse_expression("1/2");
    REQUIRE(is_const(h));
    REQUIRE(h->value == Rational(1, 2));
}

TEST_CASE("grammar: errors carry byte offsets") {
    try {
        parse_expression("x1 +");
        FAIL("expected parse_error");
    } catch (const parse_error& pe) {
        REQUIRE(pe.offset() == 4);
    }

    try {
        parse_expression("q7 + 1");
        FAIL("expected parse_error");
    } catch (const parse_error& pe) {
        REQUIRE(pe.offset() == 0);
        REQUIRE(std::string(pe.what()).find("q7") != std::string::npos);
    }

    REQUIRE_THROWS_AS(parse_expression("x1^x2"), parse_error);       // symbolic exponent
    REQUIRE_THROWS_AS(parse_expression("x1^(1/2)"), parse_error);    // fractional exponent
    REQUIRE_THROWS_AS(parse_expression("sin x1"), parse_error);      // missing parens
    REQUIRE_THROWS_AS(parse_expression("log(x1)"), parse_error);     // unknown function
    REQUIRE_THROWS_AS(parse_expression("(x1"), parse_error);
}

TEST_CASE("printing round-trips to a structurally equal tree") {
    const char* cases[] = {
        "x1 + x2*x3",
        "x1 - (x2 - x3)",
        "-(x1 + x2)*x3",
        "x1^-2 + sin(x3)*exp(x5/4)",
        "(x1 + x2)^3",
        "1/2*x1 - 3/4",
        "x1/x2/x3",
        "cos(x1 - x2)^2",
        "-x4^3 + u4*u5",
    };
    for (const char* s : cases) {
        const Expr e = parse_expression(s);
        const Expr r = parse_expression(to_string(e));
        INFO(s << "  ->  " << to_string(e));
        REQUIRE(equals(e, r));
    }

    auto g = testutil::rng(17);
    for (int t = 0; t < 200; ++t) {
        const Expr e = testutil::random_expr(g, 7, 4);
        const Expr r = parse_expression(to_string(e));
        INFO(to_string(e));
        REQUIRE(equals(e, r));
    }
}

TEST_CASE("light simplification only") {
    REQUIRE(is_zero(mul(variable(0), constant(0))));
    REQUIRE(is_one(pow(add(variable(0), constant(1)), 0)));
    REQUIRE(equals(add(variable(2), constant(0)), variable(2)));
    REQUIRE(equals(div(variable(1), constant(1)), variable(1)));
    // No deeper rewriting: x - x stays a tree.
    const Expr e = parse_expression("x1 - x1");
    REQUIRE(e->kind == ExprKind::sub);
}

TEST_CASE("evaluation: exactness and singularities") {
    const Expr e = parse_expression("x1^2/2 + 1/3");
    Point p{3.0, 0, 0, 0, 0, 0, 0};
    REQUIRE(evaluate(e, p) == Catch::Approx(4.5 + 1.0 / 3.0).epsilon(1e-15));

    const Expr q = parse_expression("x1/x2");
    Point z{1.0, 0.0, 0, 0, 0, 0, 0};
    try {
        evaluate(q, z);
        FAIL("expected eval_error");
    } catch (const eval_error& ee) {
        REQUIRE(std::string(ee.what()).find("x1/x2") != std::string::npos);
    }

    // x1^-1 at x1=2 is fine; at x1=0 it must throw.
    Point ok{2.0, 0, 0, 0, 0, 0, 0};
    REQUIRE(evaluate(parse_expression("x1^-1"), ok) == Catch::Approx(0.5));
    Point bad{0.0, 0, 0, 0, 0, 0, 0};
    REQUIRE_THROWS_AS(evaluate(parse_expression("x1^-1"), bad), eval_error);
}

// Oracle: central finite differences with step 1e-5, applied to the evaluated
// function; completely independent of the derivative rules.
TEST_CASE("differentiate matches finite differences on random expressions") {
    auto g = testutil::rng(2024);
    int checked = 0;
    for (int t = 0; t < 60; ++t) {
        const Expr e = testutil::random_expr(g, 7, 4);
        for (int var = 0; var < 7; ++var) {
            const Expr d = differentiate(e, var);
            for (int pt = 0; pt < 10; ++pt) {
                const Point p = testutil::random_point(g, 7, -1.0, 1.0);
                const double fd = testutil::fd_partial(e, p, var);
                const double sym = evaluate(d, p);
                const double scale = std::max({1.0, std::abs(fd), std::abs(sym)});
                INFO(to_string(e) << " d/d" << var);
                REQUIRE(std::abs(sym - fd) <= 1e-6 * scale);
                ++checked;
            }
        }
    }
    REQUIRE(checked > 0);
}

TEST_CASE("differentiate: closed forms") {
    // d/dx1 sin(x1^2 + x3) = 2 x1 cos(x1^2 + x3)
    const Expr e = parse_expression("sin(x1^2 + x3)");
    const Expr d = differentiate(e, 0);
    const Expr want = parse_expression("2*x1*cos(x1^2 + x3)");
    auto g = testutil::rng(5);
    for (int pt = 0; pt < 20; ++pt) {
        const Point p = testutil::random_point(g, 7);
        REQUIRE(evaluate(d, p) == Catch::Approx(evaluate(want, p)).margin(1e-14));
    }
    // Derivative of a constant and of an unrelated variable vanish structurally.
    REQUIRE(is_zero(differentiate(parse_expression("3/7"), 2)));
    REQUIRE(is_zero(differentiate(variable(1), 2)));
}

TEST_CASE("iterated derivatives to total order 7 stay evaluable") {
    const Expr e = parse_expression("sin(x1*x2)/(2 + x3^2) + exp(x4/4)*x5^2");
    Expr d = e;
    const int orders[7] = {0, 1, 2, 3, 4, 0, 1};
    for (int v : orders) d = differentiate(d, v);
    const Point p{0.3, -0.2, 0.5, 0.1, -0.4, 0, 0};
    const double val = evaluate(d, p);
    REQUIRE(std::isfinite(val));
}

TEST_CASE("substitute replaces a variable by an expression") {
    const Expr e = parse_expression("u4^2 + u5*x1");
    const Expr s = substitute(substitute(e, 5, constant(1)), 6, constant(0));
    // u4 -> 1, u5 -> 0 leaves the pure x-part plus the folded constant.
    const Point p{2.0, 0, 0, 0, 0, 99.0, 99.0};
    REQUIRE(evaluate(s, p) == Catch::Approx(1.0));
}
