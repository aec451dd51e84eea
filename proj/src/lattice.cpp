#include "uplift_zero/lattice.hpp"

#include <cmath>
#include <limits>

#include "uplift_zero/errors.hpp"

namespace uplift_zero {

const UnitSchedule& ProducerContext::star() const {
  if (!x_star) throw PreconditionError("unit '" + unit.id + "': operation needs the dispatched schedule x*");
  return *x_star;
}

double ProducerContext::standard_profit_at(const UnitSchedule& x) const { return standard_profit(unit, p, x); }

std::vector<double> ProducerContext::eval(const Expr& e, ExecPolicy policy) const {
  return eval_all(e, lattice, tol.eq_tol, policy);
}

std::size_t ProducerContext::star_index() const {
  const auto& xs = star();
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    if (lattice[k].u != xs.u) continue;
    bool same = true;
    for (std::size_t t = 0; t < xs.g.size() && same; ++t) same = std::abs(lattice[k].g[t] - xs.g[t]) <= tol.eq_tol;
    if (same) return k;
  }
  throw PreconditionError("unit '" + unit.id + "': x* missing from the verification lattice");
}

ProducerContext make_context(const UnitParams& unit, const PriceVector& p, const std::optional<UnitSchedule>& x_star,
                             Formulation formulation, const ToleranceConfig& tol,
                             const std::vector<UnitSchedule>& extra_anchors) {
  ProducerContext ctx;
  ctx.unit = unit;
  ctx.p = p;
  ctx.formulation = formulation;
  ctx.tol = tol;
  ctx.x_star = x_star;
  ctx.best = unit_profit_max(unit, p, tol.opt_tol);
  ctx.pi_plus = ctx.best.value;

  std::vector<UnitSchedule> anchors;
  if (x_star) {
    if (x_star->u.size() != p.size() || !in_feasible_set(unit, *x_star, tol.eq_tol))
      throw ValidationError("unit '" + unit.id + "': x* is outside the feasible set");
    ctx.pi_star = standard_profit(unit, p, *x_star);
    anchors.push_back(*x_star);
  }
  anchors.insert(anchors.end(), ctx.best.argmax_points.begin(), ctx.best.argmax_points.end());
  anchors.insert(anchors.end(), extra_anchors.begin(), extra_anchors.end());

  ctx.lattice = feasible_set_samples(unit, formulation, ctx.periods(), anchors, 21, tol.eq_tol);
  ctx.profit.resize(ctx.lattice.size());
  for (std::size_t k = 0; k < ctx.lattice.size(); ++k) ctx.profit[k] = standard_profit(unit, p, ctx.lattice[k]);
  return ctx;
}

LatticeMax amended_max(const ProducerContext& ctx, const std::vector<std::vector<double>>& rho_values,
                       const std::vector<double>& mu) {
  LatticeMax best{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t k = 0; k < ctx.lattice.size(); ++k) {
    double v = ctx.profit[k];
    for (std::size_t l = 0; l < mu.size(); ++l) v -= mu[l] * rho_values[l][k];
    if (v > best.value) best = {v, k};
  }
  return best;
}

}  // namespace uplift_zero
