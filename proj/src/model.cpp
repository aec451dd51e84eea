#include "uplift_zero/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "uplift_zero/errors.hpp"

namespace uplift_zero {

namespace {

[[noreturn]] void fail(const std::string& unit, const std::string& field, const std::string& what) {
  std::ostringstream os;
  os << "unit '" << unit << "': " << field << " " << what;
  throw ValidationError(os.str());
}

void push_unique(std::vector<double>& values, double v, double tol) {
  for (double existing : values) {
    if (std::abs(existing - v) <= tol) return;
  }
  values.push_back(v);
}

// Upper bound on points enumerated as a full per-period Cartesian product.
constexpr std::size_t kProductCap = 20000;

}  // namespace

bool UnitParams::same_type(const UnitParams& o) const {
  return g_min == o.g_min && g_max == o.g_max && marginal_cost == o.marginal_cost &&
         startup_cost == o.startup_cost && initial_status == o.initial_status &&
         min_up == o.min_up && min_down == o.min_down;
}

const char* to_string(Formulation f) {
  return f == Formulation::StatusOutput ? "xu" : "g";
}

Formulation formulation_from_string(const std::string& s) {
  if (s == "xu" || s == "status-output" || s == "ug") return Formulation::StatusOutput;
  if (s == "g" || s == "output-only") return Formulation::OutputOnly;
  throw ParseError("unknown formulation '" + s + "' (expected xu or g)");
}

void validate_unit(const UnitParams& unit) {
  const auto& id = unit.id;
  if (!std::isfinite(unit.g_min) || unit.g_min < 0.0) fail(id, "g_min", "must be finite and >= 0");
  if (!std::isfinite(unit.g_max) || unit.g_max <= 0.0) fail(id, "g_max", "must be finite and > 0");
  if (unit.g_min > unit.g_max) fail(id, "g_min", "exceeds g_max");
  if (!std::isfinite(unit.marginal_cost) || unit.marginal_cost < 0.0)
    fail(id, "marginal_cost", "must be finite and >= 0");
  if (!std::isfinite(unit.startup_cost) || unit.startup_cost < 0.0)
    fail(id, "startup_cost", "must be finite and >= 0");
  if (unit.initial_status != 0 && unit.initial_status != 1)
    fail(id, "initial_status", "must be 0 or 1");
  if (unit.min_up < 0) fail(id, "min_up", "must be >= 0");
  if (unit.min_down < 0) fail(id, "min_down", "must be >= 0");
}

void validate_instance(const MarketInstance& inst) {
  if (inst.periods < 1) throw ValidationError("periods must be >= 1");
  if (static_cast<int>(inst.demand.size()) != inst.periods)
    throw ValidationError("demand has " + std::to_string(inst.demand.size()) +
                          " entries, expected " + std::to_string(inst.periods));
  for (double d : inst.demand) {
    if (!std::isfinite(d) || d < 0.0) throw ValidationError("demand entries must be finite and >= 0");
  }
  const auto& tol = inst.tolerances;
  if (!(tol.eq_tol > 0.0) || !(tol.opt_tol > 0.0) || tol.report_digits <= 0)
    throw ValidationError("tolerances must be strictly positive");
  double capacity = 0.0;
  for (const auto& unit : inst.units) {
    validate_unit(unit);
    capacity += unit.g_max;
  }
  for (int t = 0; t < inst.periods; ++t) {
    if (capacity + tol.eq_tol < inst.demand[t]) {
      std::ostringstream os;
      os << "demand " << inst.demand[t] << " in period " << t + 1 << " exceeds total capacity "
         << capacity;
      throw ValidationError(os.str());
    }
  }
}

bool status_feasible(const UnitParams& unit, std::span<const int> u) {
  const std::size_t T = u.size();
  int prev = unit.initial_status;
  std::size_t t = 0;
  while (t < T) {
    if (u[t] != 0 && u[t] != 1) return false;
    std::size_t end = t;
    while (end < T && u[end] == u[t]) ++end;
    const int run = static_cast<int>(end - t);
    const bool switched = u[t] != prev;
    // A run cut off by the horizon end is never too short.
    if (switched && end < T) {
      const int required = u[t] == 1 ? unit.min_up : unit.min_down;
      if (run < required) return false;
    }
    prev = u[t];
    t = end;
  }
  return true;
}

std::vector<StatusVector> feasible_status_vectors(const UnitParams& unit, int periods) {
  if (periods < 1 || periods > 24) throw UnsupportedError("status enumeration supports 1..24 periods");
  std::vector<StatusVector> out;
  const std::uint64_t count = std::uint64_t{1} << periods;
  StatusVector u(periods);
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    // Period 0 is the most significant bit so the order is lexicographic.
    for (int t = 0; t < periods; ++t) u[t] = static_cast<int>((mask >> (periods - 1 - t)) & 1U);
    if (status_feasible(unit, u)) out.push_back(u);
  }
  return out;
}

int startup_at(const UnitParams& unit, std::span<const int> u, std::size_t t) {
  const int prev = t == 0 ? unit.initial_status : u[t - 1];
  return u[t] * (1 - prev);
}

bool in_feasible_set(const UnitParams& unit, const UnitSchedule& x, double eq_tol) {
  if (x.u.size() != x.g.size()) return false;
  if (!status_feasible(unit, x.u)) return false;
  for (std::size_t t = 0; t < x.u.size(); ++t) {
    const double lo = x.u[t] * unit.g_min;
    const double hi = x.u[t] * unit.g_max;
    if (x.g[t] < lo - eq_tol || x.g[t] > hi + eq_tol) return false;
  }
  return true;
}

double cost_unchecked(const UnitParams& unit, const UnitSchedule& x) {
  double total = 0.0;
  for (std::size_t t = 0; t < x.u.size(); ++t) {
    total += unit.marginal_cost * x.g[t] + unit.startup_cost * startup_at(unit, x.u, t);
  }
  return total;
}

double cost(const UnitParams& unit, const UnitSchedule& x, double eq_tol) {
  if (!in_feasible_set(unit, x, eq_tol)) fail(unit.id, "schedule", "is outside the feasible set");
  return cost_unchecked(unit, x);
}

double standard_profit(const UnitParams& unit, std::span<const double> p, const UnitSchedule& x) {
  double revenue = 0.0;
  for (std::size_t t = 0; t < x.g.size(); ++t) revenue += p[t] * x.g[t];
  return revenue - cost_unchecked(unit, x);
}

std::vector<UnitSchedule> feasible_set_samples(const UnitParams& unit, Formulation formulation,
                                               int periods, std::span<const UnitSchedule> anchors,
                                               int grid_points, double eq_tol) {
  const auto statuses = feasible_status_vectors(unit, periods);
  const std::size_t T = static_cast<std::size_t>(periods);

  // Candidate outputs per online period: anchors first so their exact
  // values survive the tolerance merge, then bounds and the grid.
  std::vector<std::vector<double>> levels(T);
  for (std::size_t t = 0; t < T; ++t) {
    for (const auto& a : anchors) {
      if (a.g.size() == T && a.u[t] == 1) push_unique(levels[t], a.g[t], eq_tol);
    }
    push_unique(levels[t], unit.g_min, eq_tol);
    push_unique(levels[t], unit.g_max, eq_tol);
    for (int k = 0; k < grid_points; ++k) {
      const double frac = grid_points == 1 ? 0.0 : static_cast<double>(k) / (grid_points - 1);
      push_unique(levels[t], unit.g_min + frac * (unit.g_max - unit.g_min), eq_tol);
    }
    std::sort(levels[t].begin(), levels[t].end());
  }

  std::vector<UnitSchedule> out;
  auto keep = [&](const UnitSchedule& x) {
    if (formulation == Formulation::OutputOnly) {
      for (std::size_t t = 0; t < T; ++t) {
        if (x.u[t] == 1 && std::abs(x.g[t]) <= eq_tol) return;
      }
    }
    out.push_back(x);
  };

  for (const auto& status : statuses) {
    std::vector<std::size_t> online;
    for (std::size_t t = 0; t < T; ++t) {
      if (status[t] == 1) online.push_back(t);
    }
    std::size_t product = 1;
    for (std::size_t t : online) {
      product *= levels[t].size();
      if (product > kProductCap) break;
    }

    UnitSchedule x{status, std::vector<double>(T, 0.0)};
    if (product <= kProductCap) {
      std::vector<std::size_t> idx(online.size(), 0);
      while (true) {
        for (std::size_t k = 0; k < online.size(); ++k) x.g[online[k]] = levels[online[k]][idx[k]];
        keep(x);
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == levels[online[k]].size()) idx[k++] = 0;
        if (k == idx.size()) break;
      }
    } else {
      // Too many periods for a full product: sweep one period at a time
      // around the all-min and all-max bases.
      for (double base : {unit.g_min, unit.g_max}) {
        for (std::size_t t : online) x.g[t] = base;
        keep(x);
        for (std::size_t t : online) {
          for (double v : levels[t]) {
            x.g[t] = v;
            keep(x);
          }
          x.g[t] = base;
        }
      }
    }
  }
  for (const auto& a : anchors) {
    if (a.u.size() == T && in_feasible_set(unit, a, eq_tol)) keep(a);
  }

  auto less = [](const UnitSchedule& a, const UnitSchedule& b) {
    if (a.u != b.u) return a.u < b.u;
    return a.g < b.g;
  };
  auto near = [eq_tol](const UnitSchedule& a, const UnitSchedule& b) {
    if (a.u != b.u) return false;
    for (std::size_t t = 0; t < a.g.size(); ++t) {
      if (std::abs(a.g[t] - b.g[t]) > eq_tol) return false;
    }
    return true;
  };
  std::stable_sort(out.begin(), out.end(), less);
  out.erase(std::unique(out.begin(), out.end(), near), out.end());
  return out;
}

Schedule offline_schedule(const MarketInstance& instance) {
  const auto T = static_cast<std::size_t>(instance.periods);
  return Schedule(instance.units.size(), UnitSchedule{std::vector<int>(T, 0), std::vector<double>(T, 0.0)});
}

void validate_schedule(const MarketInstance& instance, const Schedule& schedule) {
  const auto T = static_cast<std::size_t>(instance.periods);
  if (schedule.size() != instance.units.size())
    throw ValidationError("schedule covers " + std::to_string(schedule.size()) + " units, expected " +
                          std::to_string(instance.units.size()));
  const double tol = instance.tolerances.eq_tol;
  std::vector<double> supplied(T, 0.0);
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& x = schedule[i];
    if (x.u.size() != T || x.g.size() != T) fail(instance.units[i].id, "schedule", "has wrong length");
    if (!in_feasible_set(instance.units[i], x, tol)) fail(instance.units[i].id, "schedule", "is outside the feasible set");
    for (std::size_t t = 0; t < T; ++t) supplied[t] += x.g[t];
  }
  for (std::size_t t = 0; t < T; ++t) {
    if (std::abs(supplied[t] - instance.demand[t]) > tol * std::max(1.0, instance.demand[t])) {
      std::ostringstream os;
      os << "power balance violated in period " << t + 1 << ": supply " << supplied[t] << " vs demand "
         << instance.demand[t];
      throw ValidationError(os.str());
    }
  }
}

}  // namespace uplift_zero
