#pragma once

#include <optional>
#include <random>
#include <vector>

#include "uplift_zero/expr.hpp"
#include "uplift_zero/lattice.hpp"
#include "uplift_zero/model.hpp"

namespace uz_test {

using namespace uplift_zero;

/// Random fleet of 1..max_units units, parameters in [0, 20], demand inside
/// the fleet's reachable range. Feasibility is not guaranteed when g_min gaps
/// leave holes; callers retry on InfeasibleError.
MarketInstance random_instance(std::mt19937& rng, int max_units, int periods, bool min_times = false);

/// Status trajectories that respect min-up/min-down, written independently
/// of the library: run lengths scanned left to right.
std::vector<StatusVector> oracle_status_vectors(const UnitParams& unit, int periods);

/// Exact optimum of the centralized problem by enumerating every unit's
/// status vectors and solving each period's LP by vertex enumeration.
std::optional<double> oracle_exact(const MarketInstance& instance);

/// Exhaustive search over commitment profiles with a `grid`-point output
/// grid for all but one online unit per period, that one closing the
/// balance. Intended for at most three units.
std::optional<double> oracle_grid(const MarketInstance& instance, int grid = 201);

/// Single-period best-response profit at price q from the closed form.
double oracle_profit_max(const UnitParams& unit, double q);

/// Single-period dual value q d - sum_i pi_i^+(q).
double oracle_dual(const MarketInstance& instance, double q);

/// Best value of oracle_dual on a uniform grid over [0, hi].
struct ScanResult {
  double q = 0.0;
  double value = 0.0;
};
ScanResult oracle_price_scan(const MarketInstance& instance, double step = 1e-4);

/// A single-period unit, random price and a random feasible x* with strictly
/// positive uplift. The lattice is anchored at x*.
ProducerContext random_context(std::mt19937& rng);

/// A random constraint that is non-positive on the unit's feasible set.
Expr random_redundant(std::mt19937& rng, const ProducerContext& ctx);

/// Maximum of pi^st - mu^T rho over the context lattice, computed pointwise.
double oracle_amended_max(const ProducerContext& ctx, const std::vector<Expr>& rho, const std::vector<double>& mu);

bool near(double a, double b, double tol);

}  // namespace uz_test
