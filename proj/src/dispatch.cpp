#include "uplift_zero/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "uplift_zero/errors.hpp"
#include "uplift_zero/lattice.hpp"

namespace uplift_zero {

namespace {

constexpr double kTieRelative = 1e-9;

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

// Multisets of size n over m items: C(m + n - 1, n), saturating.
std::uint64_t multiset_count(std::uint64_t m, std::uint64_t n) {
  if (m == 0) return n == 0 ? 1 : 0;
  std::uint64_t r = 1;
  for (std::uint64_t k = 1; k <= n; ++k) {
    // r * (m - 1 + k) / k stays integral at every step.
    const std::uint64_t num = saturating_mul(r, m - 1 + k);
    if (num == std::numeric_limits<std::uint64_t>::max()) return num;
    r = num / k;
  }
  return r;
}

struct TypeGroup {
  std::vector<std::size_t> members;
  std::vector<StatusVector> statuses;
  std::vector<std::vector<int>> multisets;  // counts per status
  std::vector<double> startup;              // total startup cost per multiset
  std::vector<std::vector<int>> online;     // online count per period per multiset
  std::vector<int> online_total;
};

std::vector<TypeGroup> group_units(const MarketInstance& inst) {
  std::vector<TypeGroup> groups;
  for (std::size_t i = 0; i < inst.units.size(); ++i) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const TypeGroup& g) {
      return inst.units[g.members.front()].same_type(inst.units[i]);
    });
    if (it == groups.end()) {
      groups.push_back({});
      it = groups.end() - 1;
    }
    it->members.push_back(i);
  }
  return groups;
}

void enumerate_multisets(std::size_t m, int n, std::vector<int>& cur, std::size_t pos,
                         std::vector<std::vector<int>>& out) {
  if (pos + 1 == m) {
    cur[pos] = n;
    out.push_back(cur);
    return;
  }
  for (int c = n; c >= 0; --c) {
    cur[pos] = c;
    enumerate_multisets(m, n - c, cur, pos + 1, out);
  }
  cur[pos] = 0;
}

void build_group(const MarketInstance& inst, TypeGroup& g) {
  const auto& unit = inst.units[g.members.front()];
  const auto T = static_cast<std::size_t>(inst.periods);
  g.statuses = feasible_status_vectors(unit, inst.periods);
  std::vector<int> cur(g.statuses.size(), 0);
  enumerate_multisets(g.statuses.size(), static_cast<int>(g.members.size()), cur, 0, g.multisets);
  for (const auto& counts : g.multisets) {
    double startup = 0.0;
    std::vector<int> online(T, 0);
    int total = 0;
    for (std::size_t s = 0; s < counts.size(); ++s) {
      if (counts[s] == 0) continue;
      for (std::size_t t = 0; t < T; ++t) {
        startup += counts[s] * unit.startup_cost * startup_at(unit, g.statuses[s], t);
        online[t] += counts[s] * g.statuses[s][t];
      }
    }
    for (int c : online) total += c;
    g.startup.push_back(startup);
    g.online.push_back(std::move(online));
    g.online_total.push_back(total);
  }
}

struct Enumerator {
  const MarketInstance& inst;
  std::vector<TypeGroup> groups;
  std::vector<std::size_t> merit;  // group indices by marginal cost, then first member
  std::uint64_t total = 1;

  explicit Enumerator(const MarketInstance& instance) : inst(instance), groups(group_units(instance)) {
    for (auto& g : groups) {
      const auto m = static_cast<std::uint64_t>(feasible_status_vectors(inst.units[g.members.front()], inst.periods).size());
      total = saturating_mul(total, multiset_count(m, g.members.size()));
    }
    if (total > kProfileLimit)
      throw EnumerationLimitError("commitment profile count exceeds the limit of " + std::to_string(kProfileLimit));
    for (auto& g : groups) build_group(inst, g);
    merit.resize(groups.size());
    std::iota(merit.begin(), merit.end(), 0);
    std::stable_sort(merit.begin(), merit.end(), [&](std::size_t a, std::size_t b) {
      return inst.units[groups[a].members.front()].marginal_cost < inst.units[groups[b].members.front()].marginal_cost;
    });
  }

  void decode(std::uint64_t index, std::vector<std::size_t>& pick) const {
    for (std::size_t k = groups.size(); k-- > 0;) {
      const auto radix = groups[k].multisets.size();
      pick[k] = static_cast<std::size_t>(index % radix);
      index /= radix;
    }
  }

  // Aggregated merit-order cost of a profile, +inf when infeasible.
  double evaluate(const std::vector<std::size_t>& pick, int& online_total) const {
    double c = 0.0;
    online_total = 0;
    for (std::size_t k = 0; k < groups.size(); ++k) {
      c += groups[k].startup[pick[k]];
      online_total += groups[k].online_total[pick[k]];
    }
    for (int t = 0; t < inst.periods; ++t) {
      const double d = inst.demand[t];
      const double tol = inst.tolerances.eq_tol * std::max(1.0, d);
      double lo = 0.0, hi = 0.0;
      for (std::size_t k = 0; k < groups.size(); ++k) {
        const auto& unit = inst.units[groups[k].members.front()];
        const int m = groups[k].online[pick[k]][t];
        lo += m * unit.g_min;
        hi += m * unit.g_max;
      }
      if (d < lo - tol || d > hi + tol) return std::numeric_limits<double>::infinity();
      double rem = d - lo;
      for (std::size_t k : merit) {
        const auto& unit = inst.units[groups[k].members.front()];
        const int m = groups[k].online[pick[k]][t];
        double take = 0.0;
        if (rem > 0.0) take = std::min(rem, m * (unit.g_max - unit.g_min));
        rem -= take;
        c += unit.marginal_cost * (m * unit.g_min + take);
      }
    }
    return c;
  }

  // Lowest-index members get the lexicographically greatest status vectors.
  std::vector<StatusVector> expand(const std::vector<std::size_t>& pick) const {
    std::vector<StatusVector> commitment(inst.units.size());
    for (std::size_t k = 0; k < groups.size(); ++k) {
      const auto& g = groups[k];
      const auto& counts = g.multisets[pick[k]];
      std::size_t next = 0;
      for (std::size_t s = g.statuses.size(); s-- > 0;) {
        for (int c = 0; c < counts[s]; ++c) commitment[g.members[next++]] = g.statuses[s];
      }
    }
    return commitment;
  }
};

std::vector<int> flat_status(const Schedule& s) {
  std::vector<int> out;
  for (const auto& x : s) out.insert(out.end(), x.u.begin(), x.u.end());
  return out;
}

std::vector<double> flat_output(const Schedule& s) {
  std::vector<double> out;
  for (const auto& x : s) out.insert(out.end(), x.g.begin(), x.g.end());
  return out;
}

}  // namespace

std::uint64_t profile_count(const MarketInstance& instance) {
  std::uint64_t total = 1;
  for (const auto& g : group_units(instance)) {
    const auto m = feasible_status_vectors(instance.units[g.members.front()], instance.periods).size();
    total = saturating_mul(total, multiset_count(m, g.members.size()));
  }
  return total;
}

std::optional<EconomicDispatch> economic_dispatch(const MarketInstance& inst,
                                                  const std::vector<StatusVector>& commitment) {
  const auto T = static_cast<std::size_t>(inst.periods);
  const std::size_t n = inst.units.size();
  if (commitment.size() != n) throw ValidationError("commitment covers the wrong number of units");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return inst.units[a].marginal_cost < inst.units[b].marginal_cost;
  });

  EconomicDispatch out;
  out.schedule.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (commitment[i].size() != T) throw ValidationError("commitment has the wrong horizon");
    out.schedule[i].u = commitment[i];
    out.schedule[i].g.assign(T, 0.0);
  }
  for (std::size_t t = 0; t < T; ++t) {
    const double d = inst.demand[t];
    const double tol = inst.tolerances.eq_tol * std::max(1.0, d);
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      lo += commitment[i][t] * inst.units[i].g_min;
      hi += commitment[i][t] * inst.units[i].g_max;
    }
    if (d < lo - tol || d > hi + tol) return std::nullopt;
    double rem = d - lo;
    for (std::size_t i : order) {
      if (commitment[i][t] == 0) continue;
      const auto& unit = inst.units[i];
      double take = 0.0;
      if (rem > 0.0) take = std::min(rem, unit.g_max - unit.g_min);
      rem -= take;
      out.schedule[i].g[t] = unit.g_min + take;
    }
  }
  for (std::size_t i = 0; i < n; ++i) out.cost += cost_unchecked(inst.units[i], out.schedule[i]);
  return out;
}

DispatchResult solve_centralized(const MarketInstance& instance, ExecPolicy policy) {
  validate_instance(instance);
  const Enumerator en(instance);
  const auto total = static_cast<long long>(en.total);
  const std::size_t G = en.groups.size();

  std::vector<double> costs(en.total);
  std::vector<int> online(en.total);
  if (policy == ExecPolicy::Parallel) {
#pragma omp parallel
    {
      std::vector<std::size_t> pick(G);
#pragma omp for schedule(static)
      for (long long k = 0; k < total; ++k) {
        en.decode(static_cast<std::uint64_t>(k), pick);
        costs[k] = en.evaluate(pick, online[k]);
      }
    }
  } else {
    std::vector<std::size_t> pick(G);
    for (long long k = 0; k < total; ++k) {
      en.decode(static_cast<std::uint64_t>(k), pick);
      costs[k] = en.evaluate(pick, online[k]);
    }
  }

  const double best = *std::min_element(costs.begin(), costs.end());
  if (!std::isfinite(best)) throw InfeasibleError("no commitment profile covers demand");
  const double cutoff = best + kTieRelative * std::max(1.0, std::abs(best));
  int fewest = std::numeric_limits<int>::max();
  for (long long k = 0; k < total; ++k) {
    if (costs[k] <= cutoff) fewest = std::min(fewest, online[k]);
  }

  std::optional<EconomicDispatch> winner;
  std::vector<std::size_t> pick(G);
  for (long long k = 0; k < total; ++k) {
    if (costs[k] > cutoff || online[k] != fewest) continue;
    en.decode(static_cast<std::uint64_t>(k), pick);
    auto ed = economic_dispatch(instance, en.expand(pick));
    if (!ed) continue;
    if (!winner) {
      winner = std::move(ed);
      continue;
    }
    const auto su = flat_status(ed->schedule), wu = flat_status(winner->schedule);
    if (su > wu || (su == wu && flat_output(ed->schedule) < flat_output(winner->schedule))) winner = std::move(ed);
  }
  if (!winner) throw InfeasibleError("no commitment profile covers demand");
  return {winner->schedule, winner->cost, en.total};
}

VerificationReport check_prop1(const MarketInstance& instance, const AmendmentMap& amendments, const PriceVector& p,
                               const Schedule& x_star, Formulation formulation) {
  validate_schedule(instance, x_star);
  const auto& tol = instance.tolerances;
  VerificationReport report;
  double dual = std::inner_product(p.begin(), p.end(), instance.demand.begin(), 0.0);
  double primal = 0.0;
  for (std::size_t i = 0; i < instance.units.size(); ++i) {
    const auto& unit = instance.units[i];
    const auto it = amendments.find(unit.id);
    const Expr n = it == amendments.end() ? Expr::constant(0.0) : it->second;
    const auto ctx = make_context(unit, p, x_star[i], formulation, tol);
    const auto nv = ctx.eval(n);
    std::size_t arg = 0;
    for (std::size_t k = 1; k < nv.size(); ++k) {
      if (ctx.profit[k] + nv[k] > ctx.profit[arg] + nv[arg]) arg = k;
    }
    const double amended_max = ctx.profit[arg] + nv[arg];
    const double n_star = n.eval(x_star[i], tol.eq_tol);
    const double at_star = ctx.pi_star + n_star;
    ConditionResult c{"amended_argmax", unit.id, at_star >= amended_max - tol.opt_tol, false, at_star, amended_max,
                      std::nullopt, ""};
    if (!c.passed) c.witness = ctx.lattice[arg];
    report.add(std::move(c));
    dual -= amended_max;
    primal += cost_unchecked(unit, x_star[i]) - n_star;
  }
  report.add({"amended_strong_duality", "", std::abs(dual - primal) <= tol.opt_tol, false, dual, primal, std::nullopt,
              "amended dual at p vs amended cost at x*"});
  report.add_metric("amended_dual", dual);
  report.add_metric("amended_primal", primal);
  return report;
}

}  // namespace uplift_zero
