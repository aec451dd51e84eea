#pragma once

#include <vector>

#include "uplift_zero/model.hpp"

namespace uplift_zero {

struct StatusProfit {
  StatusVector u;
  double value = 0.0;     // pi^{st,max}(p, u)
  std::vector<double> g;  // output attaining it
};

struct ProfitMax {
  double value = 0.0;                       // pi^{st,+}(p)
  std::vector<UnitSchedule> argmax_points;  // one per maximizing status vector
  std::vector<StatusProfit> per_status;     // every feasible status vector, lexicographic
};

/// Best response to p under revenue p^T g. Per online period the output is
/// g_max when p_t >= a, else g_min. Status vectors within opt_tol of the
/// maximum are all reported as argmax points.
ProfitMax unit_profit_max(const UnitParams& unit, const PriceVector& p, double opt_tol = 1e-6);

/// pi^{st,max}(p, u). Throws ValidationError when u breaks min-up/min-down.
double profit_given_status(const UnitParams& unit, const PriceVector& p, const StatusVector& u);

/// q^T d - sum_i pi_i^{st,+}(q).
double dual_function(const MarketInstance& instance, const PriceVector& q);

/// Total output of the first argmax point of every unit at q.
std::vector<double> best_response_supply(const MarketInstance& instance, const PriceVector& q);

struct ConvexHullPrice {
  PriceVector price;
  double dual_value = 0.0;
  bool converged = true;  // always true for T = 1
  int iterations = 0;
};

/// Maximizer of dual_function over q >= 0. T = 1: exact scan of the
/// breakpoints {0, a_i, a_i + w_i/g_max_i}, smallest maximizer on ties.
/// T > 1: subgradient ascent with step 1/k from per-period scans, at most
/// 10000 iterations, best iterate returned; converged is set when the best
/// value gained less than opt_tol over a 100-iteration window.
ConvexHullPrice convex_hull_price(const MarketInstance& instance);

/// Candidate prices scanned in the single-period case, ascending.
std::vector<double> chp_breakpoints(const MarketInstance& instance);

/// Per period: marginal cost of the last merit-order unit strictly above its
/// minimum; if none, the cheapest online unit; if nothing is online, 0.
/// Throws ValidationError when x_star fails validation.
PriceVector marginal_price(const MarketInstance& instance, const Schedule& x_star);

}  // namespace uplift_zero
