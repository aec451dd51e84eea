#include <gtest/gtest.h>

#include <random>

#include "support/oracle.hpp"
#include "uplift_zero/errors.hpp"
#include "uplift_zero/expr.hpp"

using namespace uplift_zero;

namespace {

const Expr u = Expr::u(), g = Expr::g();

}  // namespace

TEST(Expr, EvaluatesArithmetic) {
  const UnitSchedule x{{1}, {3.0}};
  EXPECT_DOUBLE_EQ((g - 2.0 * u).eval(x), 1.0);
  EXPECT_DOUBLE_EQ(Expr::min({g - 2.0 * u, 2.0 * u - (1.0 / 3.0) * g}).eval(x), 1.0);
  EXPECT_DOUBLE_EQ(Expr::max({g, Expr::constant(5.0)}).eval(x), 5.0);
  EXPECT_DOUBLE_EQ(Expr::abs(g - 3.0 * u).eval({{1}, {5.0}}), 2.0);
  EXPECT_DOUBLE_EQ(Expr::theta(g).eval({{0}, {0.0}}), 0.0);
  EXPECT_DOUBLE_EQ(Expr::theta(g).eval(x), 1.0);
  EXPECT_DOUBLE_EQ((u * (u - Expr::constant(1.0))).eval(x), 0.0);
}

TEST(Expr, DeltaComparesWithTolerance) {
  const auto d = Expr::delta({{1}, {3.0}});
  EXPECT_DOUBLE_EQ(d.eval({{1}, {3.0}}), 1.0);
  EXPECT_DOUBLE_EQ(d.eval({{1}, {3.0 + 1e-9}}), 1.0);
  EXPECT_DOUBLE_EQ(d.eval({{1}, {3.1}}), 0.0);
  EXPECT_DOUBLE_EQ(d.eval({{0}, {0.0}}), 0.0);
  const auto ds = Expr::delta_status({1});
  EXPECT_DOUBLE_EQ(ds.eval({{1}, {3.1}}), 1.0);
  EXPECT_DOUBLE_EQ(ds.eval({{0}, {0.0}}), 0.0);
}

TEST(Expr, MultiPeriodVariables) {
  const UnitSchedule x{{1, 0}, {4.0, 0.0}};
  EXPECT_DOUBLE_EQ((Expr::g(0) + Expr::u(1)).eval(x), 4.0);
  const std::vector<double> cu{1.0, 2.0}, cg{0.5, 0.0};
  EXPECT_DOUBLE_EQ(Expr::affine(1.0, cu, cg).eval(x), 1.0 + 1.0 + 2.0);
}

TEST(Expr, PrintsCompactForm) {
  EXPECT_EQ(to_string(2.142857 * Expr::min({g - 2.0 * u, 2.0 * u - (1.0 / 3.0) * g})),
            "2.143*min[g - 2*u, 2*u - 0.3333*g]");
  EXPECT_EQ(to_string(0.1875 * (Expr::constant(1.0) - u)), "0.1875*(1 - u)");
  EXPECT_EQ(to_string(Expr::g(1) + Expr::u(0), 4, false), "g2 + u1");
  EXPECT_EQ(format_number(0.714285714, 3), "0.714");
  EXPECT_EQ(format_fixed(-0.00001, 4), "0.0000");
  EXPECT_EQ(format_fixed(2.142857, 4), "2.1429");
}

TEST(Expr, JsonRejectsUnknownOp) {
  EXPECT_THROW(expr_from_json(nlohmann::json{{"op", "sqrt"}, {"args", nlohmann::json::array()}}), ParseError);
  EXPECT_THROW(expr_from_json(nlohmann::json("oops")), ParseError);
}

TEST(ExprProperty, JsonRoundTripEvaluatesIdentically) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    const auto ctx = uz_test::random_context(rng);
    auto e = uz_test::random_redundant(rng, ctx);
    e = Expr::max({e, Expr::theta(g) - Expr::delta_status(ctx.star().u)}) + 0.5 * e;
    const auto back = expr_from_json(expr_to_json(e));
    for (const auto& x : ctx.lattice) EXPECT_EQ(back.eval(x), e.eval(x));
    EXPECT_EQ(expr_to_json(back), expr_to_json(e));
  }
}

TEST(ExprProperty, SerialAndParallelEvaluationAgree) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ctx = uz_test::random_context(rng);
    const auto e = uz_test::random_redundant(rng, ctx);
    EXPECT_EQ(eval_all(e, ctx.lattice, 1e-7, ExecPolicy::Serial), eval_all(e, ctx.lattice, 1e-7, ExecPolicy::Parallel));
  }
}
