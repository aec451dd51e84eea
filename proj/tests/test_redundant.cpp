#include <gtest/gtest.h>

#include <random>

#include "support/oracle.hpp"
#include "uplift_zero/amendments.hpp"
#include "uplift_zero/errors.hpp"
#include "uplift_zero/redundant.hpp"
#include "uplift_zero/uplift.hpp"

using namespace uplift_zero;

namespace {

const double kP10 = 2.0 + 30.0 / 7.0;
const double kP40 = 3.0 + 53.0 / 16.0;
const double kU10 = 15.0 / 7.0;
const UnitParams kSmokestack{"ss", 0, 16, 3, 53, 0, 0, 0};
const UnitParams kHighTech{"ht", 0, 7, 2, 30, 0, 0, 0};
const UnitParams kMedTech{"mt", 2, 6, 7, 0, 0, 0, 0};
const UnitSchedule kOff{{0}, {0.0}};
const Expr u = Expr::u(), g = Expr::g();

ProducerContext med_tech_ctx() { return make_context(kMedTech, {kP10}, UnitSchedule{{1}, {3.0}}); }
Expr med_tech_rho() { return -Expr::min({g - 2.0 * u, 2.0 * u - (1.0 / 3.0) * g}); }

std::vector<double> random_mu(std::mt19937& rng, std::size_t n, double hi) {
  std::uniform_real_distribution<double> d(0.0, hi);
  std::vector<double> mu(n);
  for (auto& m : mu) m = d(rng);
  return mu;
}

}  // namespace

TEST(Redundant, ClassifyExamples) {
  const auto ctx = med_tech_ctx();
  auto c = classify_constraint(ctx, u * (u - 1.0));
  EXPECT_EQ(c.kind, ConstraintKind::IdenticallyZero);
  EXPECT_TRUE(std::isinf(c.mu_hi));

  c = classify_constraint(ctx, -(g * g) - 1.0);
  EXPECT_EQ(c.kind, ConstraintKind::StrictlyNegative);
  EXPECT_DOUBLE_EQ(c.mu_hi, 0.0);

  c = classify_constraint(ctx, -Expr::delta_status(ctx.star().u));
  EXPECT_EQ(c.kind, ConstraintKind::Mixed);
  EXPECT_THROW(classify_constraint(ctx, g - 4.0), NotRedundantError);
}

TEST(Redundant, MuMaxClosedForms) {
  auto ctx = make_context(kSmokestack, {7.0}, kOff);
  EXPECT_NEAR(mu_max(ctx, u - 1.0), ctx.pi_plus, 1e-12);
  EXPECT_NEAR(ctx.pi_plus, 11.0, 1e-12);

  // Full output below the average-cost threshold.
  ctx = make_context(kHighTech, {5.0}, UnitSchedule{{1}, {7.0}});
  EXPECT_NEAR(mu_max(ctx, kHighTech.g_min * u - g), -ctx.pi_star / (kHighTech.g_max - kHighTech.g_min), 1e-6);
  ctx = make_context(kMedTech, {6.5}, UnitSchedule{{1}, {6.0}});
  EXPECT_NEAR(mu_max(ctx, kMedTech.g_min * u - g), -ctx.pi_star / (kMedTech.g_max - kMedTech.g_min), 1e-6);

  // Interior output above the threshold.
  ctx = make_context(kHighTech, {8.0}, UnitSchedule{{1}, {3.0}});
  EXPECT_NEAR(mu_max(ctx, g - kHighTech.g_max * u), 8.0 - 2.0, 1e-6);
  ctx = make_context(kMedTech, {8.0}, UnitSchedule{{1}, {3.0}});
  EXPECT_NEAR(mu_max(ctx, g - kMedTech.g_max * u), 1.0, 1e-6);

  EXPECT_THROW(mu_max(ctx, Expr::constant(0.0)), PreconditionError);
}

TEST(Redundant, MuMaxIsSharp) {
  struct Case {
    UnitParams unit;
    double p;
    UnitSchedule xs;
    Expr rho;
  };
  const std::vector<Case> cases{{kSmokestack, 7.0, kOff, u - 1.0},
                                {kHighTech, 5.0, {{1}, {7.0}}, kHighTech.g_min * u - g},
                                {kMedTech, 6.5, {{1}, {6.0}}, kMedTech.g_min * u - g},
                                {kMedTech, kP10, {{1}, {3.0}}, med_tech_rho()}};
  for (const auto& c : cases) {
    const auto ctx = make_context(c.unit, {c.p}, c.xs);
    const double m = mu_max(ctx, c.rho);
    EXPECT_NEAR(amended_max(ctx, lattice_values(ctx, {c.rho}), {m * 0.99}).value, ctx.pi_plus, 1e-9);
    EXPECT_GT(amended_max(ctx, lattice_values(ctx, {c.rho}), {m * 1.01}).value, ctx.pi_plus + 1e-9);
  }
}

TEST(Redundant, StrongDualityScanExamples) {
  const auto ctx = med_tech_ctx();
  for (const auto& rho : {med_tech_rho(), Expr::constant(0.0), -Expr::delta(ctx.star())}) {
    const auto r = strong_duality_scan(ctx, {rho});
    EXPECT_TRUE(r.passed("scan_min_equals_max_profit"));
    EXPECT_TRUE(r.passed("scan_zero_attains_min"));
    EXPECT_NEAR(*r.metric("scan_min"), ctx.pi_plus, 1e-9);
  }
}

TEST(Redundant, BoxStructureExamples) {
  auto ctx = make_context(kSmokestack, {7.0}, kOff);
  const std::vector<Expr> by_status{-Expr::delta_status({0}), -Expr::delta_status({1})};
  auto r = box_structure(ctx, by_status, {{0.0, 0.0}, {11.0, 0.0}, {5.0, 0.0}});
  EXPECT_TRUE(r.passed("box_containment"));
  EXPECT_TRUE(r.passed("corner_membership"));
  EXPECT_TRUE(r.find("supports_disjoint")->passed);

  ctx = med_tech_ctx();
  const Expr d = -Expr::delta(ctx.star());
  r = box_structure(ctx, {d, d}, {{kU10, 0.0}, {0.0, kU10}, {0.5 * kU10, 0.5 * kU10}});
  EXPECT_TRUE(r.passed("box_containment"));
  EXPECT_DOUBLE_EQ(*r.metric("members_sampled"), 3.0);
  const auto* corner = r.find("corner_membership");
  ASSERT_NE(corner, nullptr);
  EXPECT_TRUE(corner->informational);
  EXPECT_FALSE(corner->passed);
  EXPECT_FALSE(in_M_plus(ctx, {d, d}, {kU10, kU10}));

  r = box_structure(ctx, {med_tech_rho()}, {{1.0}, {kU10}});
  EXPECT_TRUE(r.passed());
}

TEST(Redundant, NecessaryConditionExamples) {
  const auto ctx = med_tech_ctx();
  auto r = necessary_condition(ctx, {med_tech_rho()});
  EXPECT_TRUE(r.passed());
  EXPECT_NEAR(r.conditions[0].lhs, -kU10, 1e-9);
  EXPECT_NEAR(r.conditions[0].rhs, -kU10, 1e-12);

  const Expr d = -Expr::delta(ctx.star());
  r = necessary_condition(ctx, {d, d, d});
  EXPECT_TRUE(r.passed());
  EXPECT_NEAR(r.conditions[0].lhs, -3 * kU10, 1e-9);

  EXPECT_FALSE(necessary_condition(ctx, {u - 1.0}).passed());
}

TEST(Redundant, CharacterizationExamples) {
  auto ctx = med_tech_ctx();
  auto r = prop5_check(ctx, {med_tech_rho()}, {kU10});
  EXPECT_TRUE(r.passed());
  EXPECT_DOUBLE_EQ(*r.metric("characterization_verdict"), 1.0);
  EXPECT_DOUBLE_EQ(*r.metric("equality_witness"), 0.0);

  r = prop5_check(ctx, {med_tech_rho()}, {1.0});
  EXPECT_FALSE(r.passed("active_equality"));
  EXPECT_TRUE(r.passed("verdicts_agree"));
  EXPECT_DOUBLE_EQ(*r.metric("direct_verdict"), 0.0);

  ctx = make_context(kMedTech, {kP40}, UnitSchedule{{1}, {3.0}});
  const auto lin = build_linear_unit(ctx);
  r = prop5_check(ctx, lin.rho, lin.mu);
  EXPECT_TRUE(r.passed("verdicts_agree"));
  EXPECT_DOUBLE_EQ(*r.metric("direct_verdict"), 1.0);

  const auto zero = make_context(kHighTech, {7.0}, UnitSchedule{{1}, {7.0}});
  EXPECT_THROW(prop5_check(zero, {g - 7.0 * u}, {1.0}), PreconditionError);
}

TEST(Redundant, RepairExamples) {
  const auto ctx = med_tech_ctx();
  auto rep = repair(ctx, {Expr::constant(0.0)}, {2.0});
  EXPECT_NEAR(rep.correction, -kU10, 1e-12);
  EXPECT_FALSE(rep.unit_norm);
  for (const auto& x : ctx.lattice)
    EXPECT_NEAR(-2.0 * rep.rho[0].eval(x), x == ctx.star() ? kU10 : 0.0, 1e-12);

  const Expr full = -Expr::delta(ctx.star());
  rep = repair(ctx, {full}, {kU10});
  EXPECT_NEAR(rep.correction, 0.0, 1e-12);
  for (const auto& x : ctx.lattice) EXPECT_NEAR(rep.rho[0].eval(x), full.eval(x), 1e-12);

  EXPECT_NEAR(amended_uplift(ctx, {full}, {1.0}), kU10 - 1.0, 1e-12);
  rep = repair(ctx, {full}, {1.0});
  EXPECT_TRUE(rep.unit_norm);
  EXPECT_NEAR(-rep.rho[0].eval(ctx.star()), kU10, 1e-12);
  EXPECT_NEAR(amended_uplift(ctx, rep.rho, {1.0}), 0.0, 1e-12);

  const std::vector<double> mu{0.3, 1.7};
  EXPECT_TRUE(in_M_plus(ctx, {full, med_tech_rho()}, mu));
  rep = repair(ctx, {full, med_tech_rho()}, mu);
  EXPECT_NEAR(mu[0] * rep.rho[0].eval(ctx.star()) + mu[1] * rep.rho[1].eval(ctx.star()), -kU10, 1e-12);

  EXPECT_THROW(repair(ctx, {g}, {1.0}), PreconditionError);
  EXPECT_THROW(repair(ctx, {med_tech_rho()}, {10.0}), PreconditionError);
  EXPECT_THROW(repair(ctx, {med_tech_rho()}, {0.0}), PreconditionError);
}

TEST(RedundantProperty, ComplementarySlacknessAtArgmax) {
  std::mt19937 rng(67);
  for (int trial = 0; trial < 60; ++trial) {
    const auto ctx = uz_test::random_context(rng);
    const std::vector<Expr> rho{uz_test::random_redundant(rng, ctx), uz_test::random_redundant(rng, ctx)};
    for (int k = 0; k < 20; ++k) {
      const auto mu = random_mu(rng, 2, 3.0);
      if (!in_M_plus(ctx, rho, mu)) continue;
      for (const auto& xp : ctx.best.argmax_points) {
        for (std::size_t l = 0; l < rho.size(); ++l) EXPECT_NEAR(mu[l] * rho[l].eval(xp), 0.0, 1e-6);
      }
    }
  }
}

TEST(RedundantProperty, BoxContainmentAndCorners) {
  std::mt19937 rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ctx = uz_test::random_context(rng);
    const std::size_t L = 1 + trial % 3;
    std::vector<Expr> rho;
    for (std::size_t l = 0; l < L; ++l) rho.push_back(uz_test::random_redundant(rng, ctx));
    std::vector<std::vector<double>> samples;
    for (int k = 0; k < 30; ++k) samples.push_back(random_mu(rng, L, 2.0 * ctx.uplift() + 1.0));
    const auto r = box_structure(ctx, rho, samples);
    EXPECT_TRUE(r.passed("box_containment")) << "trial " << trial;
    if (r.find("supports_disjoint")->passed) EXPECT_TRUE(r.find("corner_membership")->passed) << "trial " << trial;
  }
}

TEST(RedundantProperty, ZeroMinimumImpliesNecessaryCondition) {
  std::mt19937 rng(73);
  int zero = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const auto ctx = uz_test::random_context(rng);
    std::vector<Expr> rho{uz_test::random_redundant(rng, ctx)};
    if (trial % 2) rho.push_back(uz_test::random_redundant(rng, ctx));
    if (min_uplift(ctx, rho).u_min > ctx.tol.opt_tol) continue;
    ++zero;
    EXPECT_TRUE(necessary_condition(ctx, rho).passed()) << "trial " << trial;
  }
  EXPECT_GT(zero, 10);
}

TEST(RedundantProperty, SerialAndParallelLatticeValuesAgree) {
  std::mt19937 rng(79);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ctx = uz_test::random_context(rng);
    const std::vector<Expr> rho{uz_test::random_redundant(rng, ctx), uz_test::random_redundant(rng, ctx)};
    EXPECT_EQ(lattice_values(ctx, rho, ExecPolicy::Serial), lattice_values(ctx, rho, ExecPolicy::Parallel));
  }
}
