#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "uplift_zero/expr.hpp"
#include "uplift_zero/lattice.hpp"
#include "uplift_zero/model.hpp"
#include "uplift_zero/verification.hpp"

namespace uplift_zero {

enum class Family {
  UpliftDelta,
  ConstantProfit,
  GeneralForm,
  StatusDelta,
  StatusProfile,
  LinearUnit,
  ConvexHull,
  Custom,
};

const char* to_string(Family f);
Family family_from_string(const std::string& s);

/// Revenue amendment N with the constraints and multipliers it came from:
/// N = -mu^T rho on the producer's feasible set.
struct AmendmentBundle {
  std::string unit_id;
  Family family = Family::Custom;
  Formulation formulation = Formulation::StatusOutput;
  Expr n;
  std::vector<Expr> rho;
  std::vector<double> mu;
};

/// pi^st(p, x) as an expression; status reads theta(g_t) under OutputOnly.
Expr standard_profit_expr(const UnitParams& unit, const PriceVector& p, Formulation formulation);

/// prod_t s_t^{w_t} (1 - s_t)^{1 - w_t} with s_t the status variable.
Expr status_indicator(const StatusVector& w, Formulation formulation);

// Builders. Each reads unit, p, x* and tolerances from the context.
AmendmentBundle build_uplift_delta(const ProducerContext& ctx);
AmendmentBundle build_constant_profit(const ProducerContext& ctx);
/// Throws PreconditionError naming a lattice witness when gamma < -eq_tol.
AmendmentBundle build_general_form(const ProducerContext& ctx, const Expr& gamma);
/// Needs pi* = pi^{st,max}(p, u*) within opt_tol, else PreconditionError.
AmendmentBundle build_status_delta(const ProducerContext& ctx);
AmendmentBundle build_status_profile(const ProducerContext& ctx);
/// Single period, initially offline. Constraints u g_min - g, g - u g_max, u - 1.
AmendmentBundle build_linear_unit(const ProducerContext& ctx);
AmendmentBundle build_convex_hull_amendment(const ProducerContext& ctx);

/// Dispatches on family; GeneralForm uses gamma = 0.
AmendmentBundle build_family(const ProducerContext& ctx, Family family);

/// N3 = alpha N1 + (1 - alpha) N2 with rho = -N3, mu = 1.
AmendmentBundle combine(const AmendmentBundle& a, const AmendmentBundle& b, double alpha);

/// Amendment-level and constraint-level conditions on the lattice.
VerificationReport verify_conditions(const ProducerContext& ctx, const AmendmentBundle& bundle);

/// True when the three core amendment conditions pass in `report`.
bool core_conditions_pass(const VerificationReport& report);

/// -sum_i N_i(x_i) <= 0 over the whole market, with multiplier nu = 1.
struct AggregateConstraint {
  std::vector<std::string> unit_ids;
  std::vector<Expr> n;  // per unit, aligned with unit_ids
  double nu = 1.0;

  double eval(const Schedule& x, double eq_tol = 1e-7) const;
};

/// Throws PreconditionError when a bundle fails the core conditions.
AggregateConstraint aggregate_constraint(const MarketInstance& instance, const PriceVector& p, const Schedule& x_star,
                                         const std::vector<AmendmentBundle>& bundles);

/// Total amended uplift and dual invariance at p and five shifted prices.
VerificationReport check_zero_total_uplift(const MarketInstance& instance, const PriceVector& p,
                                           const std::vector<AmendmentBundle>& bundles, const Schedule& x_star);

/// Dual function with each unit's profit replaced by pi^st(q, x) + nu N_i(x).
/// Lattices are anchored at x_star so indicator terms are seen.
double amended_dual(const MarketInstance& instance, const PriceVector& q, const std::vector<AmendmentBundle>& bundles,
                    double nu, const Schedule& x_star);

nlohmann::json bundle_to_json(const AmendmentBundle& b);
AmendmentBundle bundle_from_json(const std::string& unit_id, const nlohmann::json& j);

/// Map unit_id -> bundle.
nlohmann::json bundles_to_json(const std::vector<AmendmentBundle>& bundles);
std::vector<AmendmentBundle> bundles_from_json(const nlohmann::json& j);

}  // namespace uplift_zero
