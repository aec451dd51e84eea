#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uplift_zero/expr.hpp"
#include "uplift_zero/model.hpp"
#include "uplift_zero/parallel.hpp"
#include "uplift_zero/verification.hpp"

namespace uplift_zero {

struct DispatchResult {
  Schedule schedule_star;
  double f_star = 0.0;
  std::uint64_t enumerated = 0;  // commitment profiles examined
};

struct EconomicDispatch {
  Schedule schedule;
  double cost = 0.0;
};

inline constexpr std::uint64_t kProfileLimit = 1'000'000;

/// Minimum-cost commitment and dispatch. Identical units are enumerated as
/// multisets of status vectors. Among profiles whose cost ties within a
/// relative 1e-9 the winner has the fewest online unit-periods, then the
/// lowest-index units online first, then the smallest output vector.
/// Throws InfeasibleError or EnumerationLimitError.
DispatchResult solve_centralized(const MarketInstance& instance, ExecPolicy policy = ExecPolicy::Parallel);

/// Merit-order fill with the commitment fixed: every online unit at g_min,
/// the rest of demand in ascending marginal cost (ties by unit index).
/// nullopt when some d_t lies outside [sum u g_min, sum u g_max].
std::optional<EconomicDispatch> economic_dispatch(const MarketInstance& instance,
                                                  const std::vector<StatusVector>& commitment);

/// Number of commitment profiles solve_centralized would enumerate.
std::uint64_t profile_count(const MarketInstance& instance);

using AmendmentMap = std::map<std::string, Expr>;

/// (a) x_i* maximizes pi^st + N_i over each unit's lattice, (b) the amended
/// dual at p equals the amended primal at x*. Units missing from the map
/// get N = 0.
VerificationReport check_prop1(const MarketInstance& instance, const AmendmentMap& amendments,
                               const PriceVector& p, const Schedule& x_star,
                               Formulation formulation = Formulation::StatusOutput);

}  // namespace uplift_zero
