#include "uplift_zero/uplift.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "uplift_zero/errors.hpp"
#include "uplift_zero/pricing.hpp"
#include "uplift_zero/redundant.hpp"

namespace uplift_zero {

namespace {

std::string shortest(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double dot_at(const std::vector<std::vector<double>>& values, const std::vector<double>& mu, std::size_t k) {
  double s = 0.0;
  for (std::size_t l = 0; l < mu.size(); ++l) s += mu[l] * values[l][k];
  return s;
}

bool member(const ProducerContext& ctx, const std::vector<std::vector<double>>& values, const std::vector<double>& mu) {
  for (std::size_t k = 0; k < ctx.lattice.size(); ++k) {
    if (dot_at(values, mu, k) < ctx.profit[k] - ctx.pi_plus - ctx.tol.opt_tol) return false;
  }
  return true;
}

// Largest s with s * dir (plus base) still satisfying the membership bound.
double max_step(const ProducerContext& ctx, const std::vector<std::vector<double>>& values,
                const std::vector<double>& base, const std::vector<double>& dir) {
  double s = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ctx.lattice.size(); ++k) {
    const double slope = dot_at(values, dir, k);
    if (slope >= -ctx.tol.eq_tol) continue;
    const double slack = dot_at(values, base, k) - (ctx.profit[k] - ctx.pi_plus);
    s = std::min(s, std::max(0.0, slack) / -slope);
  }
  return s;
}

}  // namespace

UpliftReport uplift_report(const MarketInstance& instance, const PriceVector& p, const Schedule& x_star) {
  validate_schedule(instance, x_star);
  UpliftReport report;
  for (std::size_t i = 0; i < instance.units.size(); ++i) {
    const auto& unit = instance.units[i];
    UnitUplift row{unit.id, standard_profit(unit, p, x_star[i]),
                   unit_profit_max(unit, p, instance.tolerances.opt_tol).value, 0.0};
    row.uplift = row.pi_plus - row.pi_star;
    if (std::abs(row.uplift) <= instance.tolerances.opt_tol) row.uplift = 0.0;
    report.total += row.uplift;
    report.units.push_back(std::move(row));
  }
  return report;
}

std::string uplift_csv(const UpliftReport& report) {
  std::string out = "unit_id,pi_star,pi_plus,uplift\n";
  for (const auto& r : report.units) {
    out += r.unit_id + "," + shortest(r.pi_star) + "," + shortest(r.pi_plus) + "," + shortest(r.uplift) + "\n";
  }
  return out;
}

double amended_uplift(const ProducerContext& ctx, const std::vector<Expr>& rho, const std::vector<double>& mu) {
  if (mu.size() != rho.size()) throw ValidationError("mu and rho lengths differ");
  for (double m : mu) {
    if (m < 0.0) throw ValidationError("multipliers must be non-negative");
  }
  for (const auto& r : rho) require_redundant(ctx, r);
  const auto values = lattice_values(ctx, rho);
  const auto best = amended_max(ctx, values, mu);
  const auto& xs = ctx.star();
  double at_star = ctx.pi_star;
  for (std::size_t l = 0; l < mu.size(); ++l) at_star -= mu[l] * rho[l].eval(xs, ctx.tol.eq_tol);
  return std::max(0.0, best.value - at_star);
}

bool in_M_plus(const ProducerContext& ctx, const std::vector<Expr>& rho, const std::vector<double>& mu) {
  if (mu.size() != rho.size()) throw ValidationError("mu and rho lengths differ");
  for (double m : mu) {
    if (m < 0.0) return false;
  }
  return member(ctx, lattice_values(ctx, rho), mu);
}

MinUplift min_uplift(const ProducerContext& ctx, const std::vector<Expr>& rho) {
  const auto& xs = ctx.star();
  const double eq = ctx.tol.eq_tol;
  const std::size_t L = rho.size();
  MinUplift out;
  out.mu_opt.assign(L, 0.0);
  const double plain = std::max(0.0, ctx.uplift());
  out.u_min = plain;
  if (L == 0) {
    out.stalled = out.u_min > ctx.tol.opt_tol;
    return out;
  }
  for (const auto& r : rho) require_redundant(ctx, r);

  std::vector<double> at_star(L);
  for (std::size_t l = 0; l < L; ++l) at_star[l] = rho[l].eval(xs, eq);
  auto objective = [&](const std::vector<double>& mu) {
    double s = plain;
    for (std::size_t l = 0; l < L; ++l) s += mu[l] * at_star[l];
    return std::max(0.0, s);
  };

  if (L == 1) {
    if (std::abs(at_star[0]) > eq) out.mu_opt[0] = mu_max(ctx, rho[0]);
    out.u_min = objective(out.mu_opt);
    out.stalled = out.u_min > ctx.tol.opt_tol;
    return out;
  }

  const auto values = lattice_values(ctx, rho);
  std::vector<double> corner(L, 0.0);
  for (std::size_t l = 0; l < L; ++l) {
    if (at_star[l] >= -eq) continue;
    corner[l] = classify_constraint(ctx, rho[l]).mu_hi;
  }

  std::vector<std::vector<double>> candidates;
  if (member(ctx, values, corner)) candidates.push_back(corner);
  const std::vector<double> zero(L, 0.0);
  const double s = std::min(1.0, max_step(ctx, values, zero, corner));
  std::vector<double> along(L);
  for (std::size_t l = 0; l < L; ++l) along[l] = s * corner[l];
  candidates.push_back(along);

  // Coordinate ascent on the coordinates that lower the objective.
  for (auto start : {zero, along}) {
    std::vector<double> mu = start;
    for (int sweep = 0; sweep < 100; ++sweep) {
      bool moved = false;
      for (std::size_t l = 0; l < L; ++l) {
        if (at_star[l] >= -eq) continue;
        std::vector<double> dir(L, 0.0);
        dir[l] = 1.0;
        const double step = max_step(ctx, values, mu, dir);
        if (std::isfinite(step) && step > 1e-12 * (1.0 + mu[l])) {
          mu[l] += step;
          moved = true;
        }
      }
      if (!moved) break;
    }
    candidates.push_back(std::move(mu));
  }

  for (const auto& c : candidates) {
    if (!member(ctx, values, c)) continue;
    const double v = objective(c);
    if (v < out.u_min - 1e-15) {
      out.u_min = v;
      out.mu_opt = c;
    }
  }
  out.stalled = out.u_min > ctx.tol.opt_tol;
  return out;
}

}  // namespace uplift_zero
