#pragma once

#include <string>
#include <vector>

#include "uplift_zero/expr.hpp"
#include "uplift_zero/lattice.hpp"
#include "uplift_zero/model.hpp"

namespace uplift_zero {

struct UnitUplift {
  std::string unit_id;
  double pi_star = 0.0;
  double pi_plus = 0.0;
  double uplift = 0.0;
};

struct UpliftReport {
  std::vector<UnitUplift> units;
  double total = 0.0;
};

/// Uplifts within opt_tol of zero are reported as exactly zero.
UpliftReport uplift_report(const MarketInstance& instance, const PriceVector& p, const Schedule& x_star);

/// unit_id,pi_star,pi_plus,uplift with shortest round-trip numbers.
std::string uplift_csv(const UpliftReport& report);

/// max over the lattice of [pi^st - mu^T rho] minus the same at x*.
/// Throws NotRedundantError when some rho_l is positive on the lattice and
/// ValidationError when mu has a negative entry.
double amended_uplift(const ProducerContext& ctx, const std::vector<Expr>& rho, const std::vector<double>& mu);

/// mu^T rho(x) >= pi^st(x) - pi^{st,+} - opt_tol at every lattice point.
bool in_M_plus(const ProducerContext& ctx, const std::vector<Expr>& rho, const std::vector<double>& mu);

struct MinUplift {
  double u_min = 0.0;
  std::vector<double> mu_opt;
  bool stalled = false;  // search ended with u_min > opt_tol
};

/// One constraint: mu_max when rho(x*) != 0, else 0. Several: best of the
/// box corner, the line through it and coordinate ascent, all kept in M^+.
MinUplift min_uplift(const ProducerContext& ctx, const std::vector<Expr>& rho);

}  // namespace uplift_zero
