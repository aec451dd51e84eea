#pragma once

#include <optional>
#include <vector>

#include "uplift_zero/expr.hpp"
#include "uplift_zero/model.hpp"
#include "uplift_zero/parallel.hpp"
#include "uplift_zero/pricing.hpp"

namespace uplift_zero {

/// Everything the "for all x in X_i" checks need for one producer at one
/// price: best response, its own schedule, and the verification lattice
/// with standard profit precomputed at every point.
struct ProducerContext {
  UnitParams unit;
  PriceVector p;
  Formulation formulation = Formulation::StatusOutput;
  ToleranceConfig tol;
  std::optional<UnitSchedule> x_star;
  ProfitMax best;
  double pi_plus = 0.0;
  double pi_star = 0.0;  // 0 when x_star is absent
  std::vector<UnitSchedule> lattice;
  std::vector<double> profit;  // pi^st on the lattice

  double uplift() const { return pi_plus - pi_star; }
  int periods() const { return static_cast<int>(p.size()); }
  const UnitSchedule& star() const;  // throws PreconditionError when absent
  double standard_profit_at(const UnitSchedule& x) const;

  std::vector<double> eval(const Expr& e, ExecPolicy policy = ExecPolicy::Parallel) const;

  /// Lattice index of x* (or of the first point equal within eq_tol).
  std::size_t star_index() const;
};

/// Lattice anchored at x_star (when given), every argmax point and any
/// extra anchors. x_star must lie in X_i.
ProducerContext make_context(const UnitParams& unit, const PriceVector& p,
                             const std::optional<UnitSchedule>& x_star,
                             Formulation formulation = Formulation::StatusOutput,
                             const ToleranceConfig& tol = {},
                             const std::vector<UnitSchedule>& extra_anchors = {});

/// Maximum over the lattice of pi^st - sum_l mu_l rho_l, with the maximizing index.
struct LatticeMax {
  double value = 0.0;
  std::size_t index = 0;
};
LatticeMax amended_max(const ProducerContext& ctx, const std::vector<std::vector<double>>& rho_values,
                       const std::vector<double>& mu);

}  // namespace uplift_zero
