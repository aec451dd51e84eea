#include "uplift_zero/redundant.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "uplift_zero/errors.hpp"
#include "uplift_zero/uplift.hpp"

namespace uplift_zero {

namespace {

constexpr int kScanPoints = 11;
constexpr std::size_t kScanFullGridCap = 20000;

std::string describe(const UnitSchedule& x) {
  std::ostringstream os;
  for (std::size_t t = 0; t < x.u.size(); ++t) os << (t ? "; " : "") << "(" << x.u[t] << ", " << x.g[t] << ")";
  return os.str();
}

double mu_dot(const std::vector<std::vector<double>>& values, const std::vector<double>& mu, std::size_t k) {
  double s = 0.0;
  for (std::size_t l = 0; l < mu.size(); ++l) s += mu[l] * values[l][k];
  return s;
}

// Range of the axis used when M^{+l} gives no finite scale.
double profit_span(const ProducerContext& ctx) {
  const double lo = *std::min_element(ctx.profit.begin(), ctx.profit.end());
  const double span = 2.0 * (ctx.pi_plus - lo);
  return span > 0.0 ? span : 1.0;
}

}  // namespace

const char* to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::IdenticallyZero: return "identically_zero";
    case ConstraintKind::StrictlyNegative: return "strictly_negative";
    case ConstraintKind::Mixed: return "mixed";
  }
  return "?";
}

std::vector<std::vector<double>> lattice_values(const ProducerContext& ctx, const std::vector<Expr>& rho,
                                                ExecPolicy policy) {
  std::vector<std::vector<double>> out;
  out.reserve(rho.size());
  for (const auto& r : rho) out.push_back(ctx.eval(r, policy));
  return out;
}

void require_redundant(const ProducerContext& ctx, const Expr& rho) {
  const auto v = ctx.eval(rho);
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k] > ctx.tol.eq_tol) {
      std::ostringstream os;
      os << "unit '" << ctx.unit.id << "': constraint " << to_string(rho, 4, ctx.periods() == 1) << " is " << v[k]
         << " > 0 at " << describe(ctx.lattice[k]);
      throw NotRedundantError(os.str());
    }
  }
}

ConstraintClass classify_constraint(const ProducerContext& ctx, const Expr& rho) {
  require_redundant(ctx, rho);
  const auto v = ctx.eval(rho);
  ConstraintClass c;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (std::abs(v[k]) > ctx.tol.eq_tol) c.support.push_back(ctx.lattice[k]);
  }
  if (c.support.empty()) {
    c.kind = ConstraintKind::IdenticallyZero;
    return c;
  }
  if (c.support.size() == v.size()) {
    c.kind = ConstraintKind::StrictlyNegative;
    c.mu_hi = 0.0;
    return c;
  }
  c.kind = ConstraintKind::Mixed;
  c.mu_hi = mu_max(ctx, rho);
  return c;
}

double mu_max(const ProducerContext& ctx, const Expr& rho) {
  const auto v = ctx.eval(rho);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (std::abs(v[k]) <= ctx.tol.eq_tol) continue;
    best = std::min(best, (ctx.profit[k] - ctx.pi_plus) / v[k]);
  }
  if (!std::isfinite(best))
    throw PreconditionError("unit '" + ctx.unit.id + "': constraint vanishes on the whole feasible set");
  return std::max(0.0, best);
}

VerificationReport strong_duality_scan(const ProducerContext& ctx, const std::vector<Expr>& rho) {
  const std::size_t L = rho.size();
  for (const auto& r : rho) require_redundant(ctx, r);
  const auto values = lattice_values(ctx, rho);
  std::vector<double> hi(L);
  for (std::size_t l = 0; l < L; ++l) {
    const auto c = classify_constraint(ctx, rho[l]);
    hi[l] = std::isfinite(c.mu_hi) && c.mu_hi > 0.0 ? 2.0 * c.mu_hi : profit_span(ctx);
  }

  auto phi = [&](const std::vector<double>& mu) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ctx.lattice.size(); ++k) best = std::max(best, ctx.profit[k] - mu_dot(values, mu, k));
    return best;
  };

  std::vector<std::vector<double>> grid;
  std::size_t full = 1;
  for (std::size_t l = 0; l < L && full <= kScanFullGridCap; ++l) full *= kScanPoints;
  if (full <= kScanFullGridCap) {
    std::vector<int> idx(L, 0);
    while (true) {
      std::vector<double> mu(L);
      for (std::size_t l = 0; l < L; ++l) mu[l] = hi[l] * idx[l] / (kScanPoints - 1);
      grid.push_back(std::move(mu));
      std::size_t l = 0;
      while (l < L && ++idx[l] == kScanPoints) idx[l++] = 0;
      if (l == L) break;
    }
  } else {
    grid.emplace_back(L, 0.0);
    for (int k = 1; k < kScanPoints; ++k) {
      const double f = static_cast<double>(k) / (kScanPoints - 1);
      for (std::size_t l = 0; l < L; ++l) {
        std::vector<double> mu(L, 0.0);
        mu[l] = hi[l] * f;
        grid.push_back(std::move(mu));
      }
      std::vector<double> diag(L);
      for (std::size_t l = 0; l < L; ++l) diag[l] = hi[l] * f;
      grid.push_back(std::move(diag));
    }
  }

  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& mu : grid) lowest = std::min(lowest, phi(mu));
  const double at_zero = phi(std::vector<double>(L, 0.0));

  VerificationReport r;
  r.add({"scan_min_equals_max_profit", ctx.unit.id, std::abs(lowest - ctx.pi_plus) <= ctx.tol.opt_tol, false, lowest,
         ctx.pi_plus, std::nullopt, ""});
  r.add({"scan_zero_attains_min", ctx.unit.id, std::abs(at_zero - lowest) <= ctx.tol.opt_tol, false, at_zero, lowest,
         std::nullopt, ""});
  r.add_metric("scan_points", static_cast<double>(grid.size()));
  r.add_metric("scan_min", lowest);
  r.add_metric("scan_at_zero", at_zero);
  return r;
}

VerificationReport box_structure(const ProducerContext& ctx, const std::vector<Expr>& rho,
                                 const std::vector<std::vector<double>>& mu_samples) {
  const std::size_t L = rho.size();
  std::vector<ConstraintClass> cls;
  for (const auto& r : rho) cls.push_back(classify_constraint(ctx, r));
  const auto values = lattice_values(ctx, rho);
  const double opt = ctx.tol.opt_tol;
  VerificationReport r;

  ConditionResult contain{"box_containment", ctx.unit.id, true, false, 0.0, 0.0, std::nullopt, ""};
  int members = 0;
  for (const auto& mu : mu_samples) {
    if (!in_M_plus(ctx, rho, mu)) continue;
    ++members;
    for (std::size_t l = 0; l < L && contain.passed; ++l) {
      // Relative slack: mu_max is itself a lattice minimum.
      if (mu[l] > cls[l].mu_hi * (1.0 + 1e-9) + opt) {
        contain.passed = false;
        contain.lhs = mu[l];
        contain.rhs = cls[l].mu_hi;
        contain.note = "constraint " + std::to_string(l);
      }
    }
  }
  r.add(contain);
  r.add_metric("members_sampled", members);

  bool disjoint = true;
  for (std::size_t k = 0; k < ctx.lattice.size() && disjoint; ++k) {
    int active = 0;
    for (std::size_t l = 0; l < L; ++l) active += std::abs(values[l][k]) > ctx.tol.eq_tol;
    disjoint = active <= 1;
  }

  std::vector<std::vector<double>> corners;
  std::vector<double> top(L);
  for (std::size_t l = 0; l < L; ++l) top[l] = std::isfinite(cls[l].mu_hi) ? cls[l].mu_hi : profit_span(ctx);
  if (L <= 16) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << L); ++mask) {
      std::vector<double> mu(L, 0.0);
      for (std::size_t l = 0; l < L; ++l) {
        if (mask >> l & 1U) mu[l] = top[l];
      }
      corners.push_back(std::move(mu));
    }
  } else {
    corners.emplace_back(L, 0.0);
    corners.push_back(top);
    for (std::size_t l = 0; l < L; ++l) {
      std::vector<double> mu(L, 0.0);
      mu[l] = top[l];
      corners.push_back(std::move(mu));
    }
  }
  int corner_members = 0;
  std::optional<std::vector<double>> outside;
  for (const auto& mu : corners) {
    if (in_M_plus(ctx, rho, mu)) {
      ++corner_members;
    } else if (!outside) {
      outside = mu;
    }
  }
  ConditionResult corner{"corner_membership", ctx.unit.id, corner_members == static_cast<int>(corners.size()),
                         !disjoint, static_cast<double>(corner_members), static_cast<double>(corners.size()),
                         std::nullopt, disjoint ? "supports disjoint" : "supports overlap; informational"};
  r.add(corner);
  r.add({"supports_disjoint", ctx.unit.id, disjoint, true, 0.0, 0.0, std::nullopt, ""});
  r.add_metric("corners_in_M_plus", corner_members);
  r.add_metric("corners_total", static_cast<double>(corners.size()));
  return r;
}

VerificationReport necessary_condition(const ProducerContext& ctx, const std::vector<Expr>& rho) {
  const auto& xs = ctx.star();
  double sum = 0.0;
  for (const auto& r : rho) {
    const auto c = classify_constraint(ctx, r);
    if (!c.bounded()) continue;
    sum += c.mu_hi * r.eval(xs, ctx.tol.eq_tol);
  }
  const double rhs = ctx.pi_star - ctx.pi_plus;
  VerificationReport r;
  r.add({"bounded_mu_max_filter", ctx.unit.id, sum <= rhs + ctx.tol.opt_tol, false, sum, rhs, std::nullopt, ""});
  return r;
}

VerificationReport prop5_check(const ProducerContext& ctx, const std::vector<Expr>& rho, const std::vector<double>& mu) {
  const double eq = ctx.tol.eq_tol, opt = ctx.tol.opt_tol;
  if (ctx.uplift() <= opt)
    throw PreconditionError("unit '" + ctx.unit.id + "': characterization needs a strictly positive uplift");
  if (mu.size() != rho.size()) throw ValidationError("mu and rho lengths differ");
  for (const auto& r : rho) require_redundant(ctx, r);
  const std::size_t L = rho.size();
  const auto values = lattice_values(ctx, rho);
  const std::size_t star = ctx.star_index();

  VerificationReport r;
  std::vector<bool> active(L);
  bool any_active = false;
  for (std::size_t l = 0; l < L; ++l) {
    active[l] = std::abs(values[l][star]) > eq;
    any_active = any_active || active[l];
  }
  r.add({"active_set_nonempty", ctx.unit.id, any_active, false, 0.0, 0.0, std::nullopt, ""});

  bool inactive_ok = true, equality_ok = true, attain_ok = true;
  int witness = -1;
  for (std::size_t l = 0; l < L; ++l) {
    // m_l = min over the support of rho_l of the conditional ratio.
    double m = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t k = 0; k < ctx.lattice.size(); ++k) {
      if (std::abs(values[l][k]) <= eq) continue;
      const double rest = mu_dot(values, mu, k) - mu[l] * values[l][k];
      const double ratio = (ctx.profit[k] - ctx.pi_plus - rest) / values[l][k];
      if (ratio < m) {
        m = ratio;
        arg = k;
      }
    }
    if (!std::isfinite(m)) continue;  // empty support: no bound
    const double scale = std::abs(values[l][arg]);
    if (!active[l]) {
      if ((mu[l] - m) * scale > opt) {
        inactive_ok = false;
        r.add({"inactive_bound", ctx.unit.id, false, false, mu[l], m, ctx.lattice[arg], "constraint " + std::to_string(l)});
      }
      continue;
    }
    const double rest_star = mu_dot(values, mu, star) - mu[l] * values[l][star];
    const double ratio_star = (ctx.pi_star - ctx.pi_plus - rest_star) / values[l][star];
    const bool eq_l = std::abs(mu[l] - m) * scale <= opt;
    const bool at_l = (ratio_star - m) * std::abs(values[l][star]) <= opt;
    if (!eq_l) {
      equality_ok = false;
      r.add({"active_equality", ctx.unit.id, false, false, mu[l], m, ctx.lattice[arg], "constraint " + std::to_string(l)});
    }
    if (!at_l) {
      attain_ok = false;
      r.add({"star_attains_min", ctx.unit.id, false, false, ratio_star, m, ctx.lattice[arg],
             "constraint " + std::to_string(l)});
    }
    if (eq_l && at_l && witness < 0) witness = static_cast<int>(l);
  }
  if (inactive_ok) r.add({"inactive_bound", ctx.unit.id, true, false, 0.0, 0.0, std::nullopt, ""});
  if (equality_ok) r.add({"active_equality", ctx.unit.id, true, false, 0.0, 0.0, std::nullopt, ""});
  if (attain_ok) r.add({"star_attains_min", ctx.unit.id, true, false, 0.0, 0.0, std::nullopt, ""});
  r.add_metric("equality_witness", witness);
  const bool characterized = any_active && inactive_ok && equality_ok && attain_ok;

  // Direct test: mu^T rho(x*) = pi* - pi+ and mu^T rho >= pi - pi+ everywhere.
  const double lhs17 = mu_dot(values, mu, star);
  const bool absorbed = std::abs(lhs17 - (ctx.pi_star - ctx.pi_plus)) <= opt;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ctx.lattice.size(); ++k)
    worst = std::min(worst, mu_dot(values, mu, k) - (ctx.profit[k] - ctx.pi_plus));
  const bool bounded = worst >= -opt;
  r.add({"uplift_absorbed", ctx.unit.id, absorbed, true, lhs17, ctx.pi_star - ctx.pi_plus, std::nullopt, ""});
  r.add({"profit_bound", ctx.unit.id, bounded, true, worst, 0.0, std::nullopt, ""});
  r.add({"verdicts_agree", ctx.unit.id, characterized == (absorbed && bounded), false,
         characterized ? 1.0 : 0.0, absorbed && bounded ? 1.0 : 0.0, std::nullopt, ""});
  r.add_metric("characterization_verdict", characterized);
  r.add_metric("direct_verdict", absorbed && bounded);
  return r;
}

RepairResult repair(const ProducerContext& ctx, const std::vector<Expr>& rho_prime, const std::vector<double>& mu) {
  const auto& xs = ctx.star();
  if (mu.size() != rho_prime.size()) throw ValidationError("mu and rho lengths differ");
  double norm2 = 0.0;
  for (double m : mu) {
    if (m < 0.0) throw ValidationError("multipliers must be non-negative");
    norm2 += m * m;
  }
  if (norm2 == 0.0) throw PreconditionError("repair needs a nonzero multiplier vector");
  for (const auto& r : rho_prime) {
    try {
      require_redundant(ctx, r);
    } catch (const NotRedundantError& e) {
      throw PreconditionError(e.what());
    }
  }
  if (!in_M_plus(ctx, rho_prime, mu))
    throw PreconditionError("unit '" + ctx.unit.id + "': multipliers raise the maximum profit; nothing to repair");

  double at_star = 0.0;
  for (std::size_t l = 0; l < mu.size(); ++l) at_star += mu[l] * rho_prime[l].eval(xs, ctx.tol.eq_tol);
  RepairResult out;
  out.correction = std::min(0.0, ctx.pi_star - ctx.pi_plus - at_star);
  out.unit_norm = std::abs(std::sqrt(norm2) - 1.0) <= ctx.tol.eq_tol;
  const Expr d = Expr::delta(xs);
  for (std::size_t l = 0; l < mu.size(); ++l) {
    const double c = out.correction * mu[l] / norm2;
    out.rho.push_back(c == 0.0 ? rho_prime[l] : rho_prime[l] + c * d);
  }
  return out;
}

}  // namespace uplift_zero
