#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace uplift_zero {

/// Numerical comparison settings shared by every module.
struct ToleranceConfig {
  double eq_tol = 1e-7;   // coordinate equality, power balance
  double opt_tol = 1e-6;  // optimality and duality comparisons
  int report_digits = 4;  // significant digits in human-readable output

  bool operator==(const ToleranceConfig&) const = default;
};

struct UnitParams {
  std::string id;
  double g_min = 0.0;
  double g_max = 0.0;
  double marginal_cost = 0.0;  // currency/MWh
  double startup_cost = 0.0;   // charged on every 0 -> 1 transition
  int initial_status = 0;
  int min_up = 0;
  int min_down = 0;

  bool operator==(const UnitParams&) const = default;

  // Same physical parameters; ids may differ.
  bool same_type(const UnitParams& other) const;
};

/// Status and output trajectory of one unit over the horizon.
struct UnitSchedule {
  std::vector<int> u;
  std::vector<double> g;

  std::size_t periods() const { return u.size(); }
  bool operator==(const UnitSchedule&) const = default;
};

/// Per-unit schedules, aligned with MarketInstance::units.
using Schedule = std::vector<UnitSchedule>;

using PriceVector = std::vector<double>;
using StatusVector = std::vector<int>;

enum class Formulation {
  StatusOutput,  // variables (u, g)
  OutputOnly,    // variable g, status derived as u = theta(g)
};

const char* to_string(Formulation f);
Formulation formulation_from_string(const std::string& s);

struct MarketInstance {
  int periods = 1;
  std::vector<double> demand;
  std::vector<UnitParams> units;
  ToleranceConfig tolerances;

  std::size_t unit_count() const { return units.size(); }
  bool operator==(const MarketInstance&) const = default;
};

/// Throws ValidationError naming the unit and field on any violated invariant.
void validate_unit(const UnitParams& unit);
void validate_instance(const MarketInstance& instance);

/// True when the status trajectory respects min-up/min-down given the
/// unit's initial status. The initial state is assumed to have already
/// satisfied its own minimum time, so a switch at t = 1 is allowed.
bool status_feasible(const UnitParams& unit, std::span<const int> u);

/// All min-up/min-down feasible status vectors over `periods`, in
/// lexicographic order with 0 < 1.
std::vector<StatusVector> feasible_status_vectors(const UnitParams& unit, int periods);

/// Number of 0 -> 1 transitions at period t (u^0 = initial_status).
int startup_at(const UnitParams& unit, std::span<const int> u, std::size_t t);

/// Membership in X_i: u g_min <= g <= u g_max per period, status feasibility.
bool in_feasible_set(const UnitParams& unit, const UnitSchedule& x, double eq_tol);

/// Offer cost: sum_t a g_t + w startup_t. Throws ValidationError when x is
/// outside the unit's feasible set.
double cost(const UnitParams& unit, const UnitSchedule& x, double eq_tol = 1e-7);

/// Same formula, no membership check.
double cost_unchecked(const UnitParams& unit, const UnitSchedule& x);

/// Standard profit p^T g - C(x).
double standard_profit(const UnitParams& unit, std::span<const double> p, const UnitSchedule& x);

/// Evaluation lattice for "for all x in X_i" checks. For every feasible
/// status vector: the offline point, a K-point grid over [g_min, g_max] per
/// online period, the bounds, and every anchor output. Deduplicated.
/// In the OutputOnly formulation points with u = 1 and g = 0 are dropped
/// because status is read off the output.
std::vector<UnitSchedule> feasible_set_samples(const UnitParams& unit, Formulation formulation,
                                               int periods, std::span<const UnitSchedule> anchors,
                                               int grid_points = 21, double eq_tol = 1e-7);

/// An all-offline schedule for every unit.
Schedule offline_schedule(const MarketInstance& instance);

/// Checks power balance and per-unit membership. Throws ValidationError.
void validate_schedule(const MarketInstance& instance, const Schedule& schedule);

}  // namespace uplift_zero
