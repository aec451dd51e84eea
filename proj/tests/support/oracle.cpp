#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uz_test {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double uniform(std::mt19937& rng, double lo, double hi) {
  return std::round(std::uniform_real_distribution<double>(lo, hi)(rng) * 100.0) / 100.0;
}

int pick(std::mt19937& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// min sum a_i g_i over the online set with sum g_i = d, by vertex enumeration.
double period_lp(const std::vector<const UnitParams*>& on, double d) {
  const std::size_t n = on.size();
  if (n == 0) return std::abs(d) <= 1e-9 ? 0.0 : kInf;
  double best = kInf;
  for (std::size_t free = 0; free < n; ++free) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << (n - 1)); ++mask) {
      double rest = 0.0, c = 0.0;
      std::size_t bit = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == free) continue;
        const double g = (mask >> bit++ & 1U) ? on[i]->g_max : on[i]->g_min;
        rest += g;
        c += on[i]->marginal_cost * g;
      }
      const double gf = d - rest;
      if (gf < on[free]->g_min - 1e-9 || gf > on[free]->g_max + 1e-9) continue;
      best = std::min(best, c + on[free]->marginal_cost * gf);
    }
  }
  return best;
}

double startup_total(const UnitParams& unit, const StatusVector& u) {
  double c = 0.0;
  int prev = unit.initial_status;
  for (int v : u) {
    if (prev == 0 && v == 1) c += unit.startup_cost;
    prev = v;
  }
  return c;
}

// Calls f(profile) for every combination of per-unit status vectors.
template <class F>
void for_each_profile(const MarketInstance& inst, F&& f) {
  std::vector<std::vector<StatusVector>> options;
  for (const auto& unit : inst.units) options.push_back(oracle_status_vectors(unit, inst.periods));
  std::vector<std::size_t> idx(options.size(), 0);
  while (true) {
    std::vector<const StatusVector*> profile;
    for (std::size_t i = 0; i < idx.size(); ++i) profile.push_back(&options[i][idx[i]]);
    f(profile);
    std::size_t i = 0;
    while (i < idx.size() && ++idx[i] == options[i].size()) idx[i++] = 0;
    if (i == idx.size()) return;
  }
}

// Grid search for one period: every online unit but one on the grid, the
// remaining one closing the balance; each unit takes a turn closing.
double period_grid(const std::vector<const UnitParams*>& on, double d, int grid) {
  const std::size_t n = on.size();
  if (n == 0) return std::abs(d) <= 1e-9 ? 0.0 : kInf;
  double best = kInf;
  for (std::size_t close = 0; close < n; ++close) {
    std::vector<int> k(n - 1, 0);
    while (true) {
      double rest = 0.0, c = 0.0;
      std::size_t slot = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == close) continue;
        const double g = on[i]->g_min + (on[i]->g_max - on[i]->g_min) * k[slot++] / (grid - 1);
        rest += g;
        c += on[i]->marginal_cost * g;
      }
      const double gl = d - rest;
      const auto& last = *on[close];
      if (gl >= last.g_min - 1e-9 && gl <= last.g_max + 1e-9) best = std::min(best, c + last.marginal_cost * gl);
      std::size_t i = 0;
      while (i < k.size() && ++k[i] == grid) k[i++] = 0;
      if (i == k.size()) break;
    }
  }
  return best;
}

}  // namespace

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

MarketInstance random_instance(std::mt19937& rng, int max_units, int periods, bool min_times) {
  MarketInstance inst;
  inst.periods = periods;
  const int n = pick(rng, 1, max_units);
  double cap = 0.0;
  for (int i = 0; i < n; ++i) {
    UnitParams u;
    u.id = "u" + std::to_string(i + 1);
    u.g_max = uniform(rng, 1.0, 20.0);
    u.g_min = pick(rng, 0, 2) == 0 ? 0.0 : uniform(rng, 0.0, u.g_max);
    u.marginal_cost = uniform(rng, 0.0, 20.0);
    u.startup_cost = uniform(rng, 0.0, 20.0);
    if (min_times) {
      u.initial_status = pick(rng, 0, 1);
      u.min_up = pick(rng, 0, 2);
      u.min_down = pick(rng, 0, 2);
    }
    cap += u.g_max;
    inst.units.push_back(u);
  }
  for (int t = 0; t < periods; ++t) inst.demand.push_back(uniform(rng, 0.0, cap));
  return inst;
}

std::vector<StatusVector> oracle_status_vectors(const UnitParams& unit, int periods) {
  std::vector<StatusVector> out;
  for (int mask = 0; mask < (1 << periods); ++mask) {
    StatusVector u(periods);
    for (int t = 0; t < periods; ++t) u[t] = mask >> (periods - 1 - t) & 1;
    bool ok = true;
    int prev = unit.initial_status;
    for (int t = 0; t < periods && ok; ++t) {
      if (u[t] != prev) {
        const int need = u[t] == 1 ? unit.min_up : unit.min_down;
        for (int s = t; s < std::min(periods, t + need) && ok; ++s) ok = u[s] == u[t];
      }
      prev = u[t];
    }
    if (ok) out.push_back(u);
  }
  return out;
}

std::optional<double> oracle_exact(const MarketInstance& inst) {
  double best = kInf;
  for_each_profile(inst, [&](const std::vector<const StatusVector*>& profile) {
    double c = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i) c += startup_total(inst.units[i], *profile[i]);
    for (int t = 0; t < inst.periods && c < kInf; ++t) {
      std::vector<const UnitParams*> on;
      for (std::size_t i = 0; i < profile.size(); ++i) {
        if ((*profile[i])[t] == 1) on.push_back(&inst.units[i]);
      }
      c += period_lp(on, inst.demand[t]);
    }
    best = std::min(best, c);
  });
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

std::optional<double> oracle_grid(const MarketInstance& inst, int grid) {
  double best = kInf;
  for_each_profile(inst, [&](const std::vector<const StatusVector*>& profile) {
    double c = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i) c += startup_total(inst.units[i], *profile[i]);
    for (int t = 0; t < inst.periods && c < kInf; ++t) {
      std::vector<const UnitParams*> on;
      for (std::size_t i = 0; i < profile.size(); ++i) {
        if ((*profile[i])[t] == 1) on.push_back(&inst.units[i]);
      }
      c += period_grid(on, inst.demand[t], grid);
    }
    best = std::min(best, c);
  });
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

double oracle_profit_max(const UnitParams& unit, double q) {
  const double margin = q - unit.marginal_cost;
  const double g = margin >= 0.0 ? unit.g_max : unit.g_min;
  const double startup = unit.initial_status == 1 ? 0.0 : unit.startup_cost;
  return std::max(0.0, margin * g - startup);
}

double oracle_dual(const MarketInstance& inst, double q) {
  double v = q * inst.demand[0];
  for (const auto& unit : inst.units) v -= oracle_profit_max(unit, q);
  return v;
}

ScanResult oracle_price_scan(const MarketInstance& inst, double step) {
  double hi = 0.0;
  for (const auto& u : inst.units) hi = std::max(hi, u.marginal_cost + u.startup_cost / u.g_max);
  ScanResult best{0.0, oracle_dual(inst, 0.0)};
  const auto n = static_cast<long>(std::ceil(hi / step));
  for (long k = 1; k <= n; ++k) {
    const double q = std::min(hi, k * step);
    const double v = oracle_dual(inst, q);
    if (v > best.value) best = {q, v};
  }
  return best;
}

ProducerContext random_context(std::mt19937& rng) {
  while (true) {
    UnitParams unit;
    unit.id = "r";
    unit.g_max = uniform(rng, 1.0, 20.0);
    unit.g_min = pick(rng, 0, 2) == 0 ? 0.0 : uniform(rng, 0.0, unit.g_max);
    unit.marginal_cost = uniform(rng, 0.0, 20.0);
    unit.startup_cost = uniform(rng, 0.0, 20.0);
    const double p = uniform(rng, 0.0, 25.0);
    UnitSchedule xs{{pick(rng, 0, 3) == 0 ? 0 : 1}, {0.0}};
    if (xs.u[0] == 1) xs.g[0] = uniform(rng, unit.g_min, unit.g_max);
    xs.g[0] = std::clamp(xs.g[0], unit.g_min * xs.u[0], unit.g_max * xs.u[0]);
    auto ctx = make_context(unit, {p}, xs);
    if (ctx.uplift() > 1e-3) return ctx;
  }
}

Expr random_redundant(std::mt19937& rng, const ProducerContext& ctx) {
  const double c = uniform(rng, 0.1, 5.0);
  const auto& unit = ctx.unit;
  const auto& xs = ctx.star();
  const Expr u = Expr::u(), g = Expr::g();
  switch (pick(rng, 0, 10)) {
    case 0: return -c * Expr::delta(xs);
    case 1: return c * (unit.g_min * u - g);
    case 2: return c * (g - unit.g_max * u);
    case 3: return c * (u - Expr::constant(1.0));
    case 4: return Expr::constant(-c);
    case 5: return -c * u;
    case 6: return -c * Expr::min({g - unit.g_min * u, unit.g_max * u - g});
    case 7: return -c * Expr::delta_status(xs.u);
    case 8: return c * (u * (u - Expr::constant(1.0)));
    case 9: return -c * ((g - Expr::constant(xs.g[0])) * (g - Expr::constant(xs.g[0])));
    default: return -c * Expr::abs(g - Expr::constant(xs.g[0]));
  }
}

double oracle_amended_max(const ProducerContext& ctx, const std::vector<Expr>& rho, const std::vector<double>& mu) {
  double best = -kInf;
  for (const auto& x : ctx.lattice) {
    double v = 0.0;
    for (std::size_t t = 0; t < x.u.size(); ++t) {
      v += (ctx.p[t] - ctx.unit.marginal_cost) * x.g[t];
      const int prev = t == 0 ? ctx.unit.initial_status : x.u[t - 1];
      if (prev == 0 && x.u[t] == 1) v -= ctx.unit.startup_cost;
    }
    for (std::size_t l = 0; l < rho.size(); ++l) v -= mu[l] * rho[l].eval(x);
    best = std::max(best, v);
  }
  return best;
}

}  // namespace uz_test
