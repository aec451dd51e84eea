#include "uplift_zero/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "uplift_zero/errors.hpp"

namespace uplift_zero {

namespace {

// Closed form with u fixed: per period g_max when p_t >= a, else g_min.
StatusProfit best_for_status(const UnitParams& unit, const PriceVector& p, const StatusVector& u) {
  StatusProfit sp{u, 0.0, std::vector<double>(u.size(), 0.0)};
  for (std::size_t t = 0; t < u.size(); ++t) {
    if (u[t] == 1) {
      sp.g[t] = p[t] >= unit.marginal_cost ? unit.g_max : unit.g_min;
      sp.value += (p[t] - unit.marginal_cost) * sp.g[t];
    }
    sp.value -= unit.startup_cost * startup_at(unit, u, t);
  }
  return sp;
}

void require_length(const PriceVector& p, std::size_t T) {
  if (p.size() != T) throw ValidationError("price vector has " + std::to_string(p.size()) + " entries, expected " +
                                           std::to_string(T));
}

}  // namespace

ProfitMax unit_profit_max(const UnitParams& unit, const PriceVector& p, double opt_tol) {
  const int T = static_cast<int>(p.size());
  ProfitMax out;
  out.value = -std::numeric_limits<double>::infinity();
  for (const auto& u : feasible_status_vectors(unit, T)) {
    out.per_status.push_back(best_for_status(unit, p, u));
    out.value = std::max(out.value, out.per_status.back().value);
  }
  for (const auto& sp : out.per_status) {
    if (sp.value >= out.value - opt_tol) out.argmax_points.push_back(UnitSchedule{sp.u, sp.g});
  }
  return out;
}

double profit_given_status(const UnitParams& unit, const PriceVector& p, const StatusVector& u) {
  require_length(p, u.size());
  if (!status_feasible(unit, u)) throw ValidationError("unit '" + unit.id + "': status vector breaks min-up/min-down");
  return best_for_status(unit, p, u).value;
}

double dual_function(const MarketInstance& instance, const PriceVector& q) {
  require_length(q, static_cast<std::size_t>(instance.periods));
  double value = std::inner_product(q.begin(), q.end(), instance.demand.begin(), 0.0);
  for (const auto& unit : instance.units) value -= unit_profit_max(unit, q, instance.tolerances.opt_tol).value;
  return value;
}

std::vector<double> best_response_supply(const MarketInstance& instance, const PriceVector& q) {
  std::vector<double> s(q.size(), 0.0);
  for (const auto& unit : instance.units) {
    const auto pm = unit_profit_max(unit, q, instance.tolerances.opt_tol);
    const auto& x = pm.argmax_points.front();
    for (std::size_t t = 0; t < s.size(); ++t) s[t] += x.g[t];
  }
  return s;
}

std::vector<double> chp_breakpoints(const MarketInstance& instance) {
  std::vector<double> q{0.0};
  for (const auto& unit : instance.units) {
    q.push_back(unit.marginal_cost);
    q.push_back(unit.marginal_cost + unit.startup_cost / unit.g_max);
  }
  std::sort(q.begin(), q.end());
  q.erase(std::unique(q.begin(), q.end()), q.end());
  return q;
}

namespace {

ConvexHullPrice single_period_chp(const MarketInstance& instance) {
  ConvexHullPrice best{{0.0}, -std::numeric_limits<double>::infinity(), true, 0};
  for (double q : chp_breakpoints(instance)) {
    const double v = dual_function(instance, {q});
    ++best.iterations;
    // Strictly better beyond eq_tol; ascending scan keeps the smallest maximizer.
    if (v > best.dual_value + instance.tolerances.eq_tol) best = {{q}, v, true, best.iterations};
  }
  return best;
}

}  // namespace

ConvexHullPrice convex_hull_price(const MarketInstance& instance) {
  validate_instance(instance);
  if (instance.periods == 1) return single_period_chp(instance);

  const auto T = static_cast<std::size_t>(instance.periods);
  PriceVector q(T);
  for (std::size_t t = 0; t < T; ++t) {
    MarketInstance slice = instance;
    slice.periods = 1;
    slice.demand = {instance.demand[t]};
    q[t] = single_period_chp(slice).price[0];
  }

  constexpr int kMaxIterations = 10000;
  constexpr int kWindow = 100;
  ConvexHullPrice best{q, dual_function(instance, q), false, 0};
  double window_start = best.dual_value;
  for (int k = 1; k <= kMaxIterations; ++k) {
    const auto supply = best_response_supply(instance, q);
    for (std::size_t t = 0; t < T; ++t) q[t] = std::max(0.0, q[t] + (instance.demand[t] - supply[t]) / k);
    const double v = dual_function(instance, q);
    best.iterations = k;
    if (v > best.dual_value) {
      best.dual_value = v;
      best.price = q;
    }
    if (k % kWindow == 0) {
      if (best.dual_value - window_start < instance.tolerances.opt_tol) {
        best.converged = true;
        break;
      }
      window_start = best.dual_value;
    }
  }
  return best;
}

PriceVector marginal_price(const MarketInstance& instance, const Schedule& x_star) {
  validate_schedule(instance, x_star);
  const double tol = instance.tolerances.eq_tol;
  const auto T = static_cast<std::size_t>(instance.periods);
  std::vector<std::size_t> order(instance.units.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return instance.units[a].marginal_cost < instance.units[b].marginal_cost;
  });

  PriceVector p(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    bool found = false;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto& unit = instance.units[*it];
      const auto& x = x_star[*it];
      if (x.u[t] == 1 && x.g[t] > unit.g_min + tol) {
        p[t] = unit.marginal_cost;
        found = true;
        break;
      }
    }
    if (found) continue;
    for (std::size_t i : order) {
      if (x_star[i].u[t] == 1) {
        p[t] = instance.units[i].marginal_cost;
        break;
      }
    }
  }
  return p;
}

}  // namespace uplift_zero
