#include "uplift_zero/amendments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "uplift_zero/errors.hpp"
#include "uplift_zero/io.hpp"
#include "uplift_zero/pricing.hpp"

namespace uplift_zero {

namespace {

constexpr double kDrop = 1e-12;

// c * body, or the constant c when body is empty.
struct Term {
  double c;
  std::optional<Expr> body;
};

Expr sum_terms(const std::vector<Term>& terms) {
  std::vector<Term> kept;
  for (const auto& t : terms) {
    if (std::abs(t.c) > kDrop) kept.push_back(t);
  }
  if (kept.empty()) return Expr::constant(0.0);
  std::stable_partition(kept.begin(), kept.end(), [](const Term& t) { return t.c > 0; });
  std::vector<Expr> args;
  for (const auto& t : kept) {
    if (!t.body) {
      args.push_back(Expr::constant(t.c));
    } else if (t.c == 1.0) {
      args.push_back(*t.body);
    } else {
      args.push_back(Expr::mul({Expr::constant(t.c), *t.body}));
    }
  }
  return Expr::add(std::move(args));
}

Expr status_var(Formulation f, int t) {
  return f == Formulation::StatusOutput ? Expr::u(t) : Expr::theta(Expr::g(t));
}

Expr one_minus(Formulation f, int t) { return sum_terms({{1.0, std::nullopt}, {-1.0, status_var(f, t)}}); }

std::vector<Term> profit_terms(const UnitParams& unit, const PriceVector& p, Formulation f) {
  std::vector<Term> terms;
  for (int t = 0; t < static_cast<int>(p.size()); ++t) {
    if (unit.startup_cost != 0.0) {
      if (t == 0) {
        if (unit.initial_status == 0) terms.push_back({-unit.startup_cost, status_var(f, 0)});
      } else {
        terms.push_back({-unit.startup_cost, Expr::mul({status_var(f, t), one_minus(f, t - 1)})});
      }
    }
    terms.push_back({p[t] - unit.marginal_cost, Expr::g(t)});
  }
  return terms;
}

std::vector<Term> negate(std::vector<Term> terms) {
  for (auto& t : terms) t.c = -t.c;
  return terms;
}

Expr scaled(double c, const Expr& e) {
  if (std::abs(c) <= kDrop || e.is_zero_constant()) return Expr::constant(0.0);
  return c == 1.0 ? e : Expr::mul({Expr::constant(c), e});
}

// c0 + cs * s + cg * g for a single period.
Expr lin(Formulation f, double c0, double cs, double cg) {
  return sum_terms({{c0, std::nullopt}, {cs, status_var(f, 0)}, {cg, Expr::g(0)}});
}

AmendmentBundle make_bundle(const ProducerContext& ctx, Family family, Expr n, std::vector<Expr> rho,
                            std::vector<double> mu) {
  return {ctx.unit.id, family, ctx.formulation, std::move(n), std::move(rho), std::move(mu)};
}

// rho = -N, mu = 1.
AmendmentBundle single_constraint(const ProducerContext& ctx, Family family, const Expr& n) {
  return make_bundle(ctx, family, n, {scaled(-1.0, n)}, {1.0});
}

void require_single_period(const ProducerContext& ctx, const char* what) {
  if (ctx.periods() != 1 || ctx.unit.initial_status != 0)
    throw PreconditionError(std::string(what) + " needs a single period and an initially offline unit ('" +
                            ctx.unit.id + "')");
}

void require_status_optimal_output(const ProducerContext& ctx, const char* what) {
  const auto& xs = ctx.star();
  const double best = profit_given_status(ctx.unit, ctx.p, xs.u);
  if (std::abs(ctx.pi_star - best) > ctx.tol.opt_tol) {
    std::ostringstream os;
    os << what << " needs the dispatched output to maximize profit for the dispatched status at p (unit '"
       << ctx.unit.id << "': profit " << format_number(ctx.pi_star) << " vs best " << format_number(best)
       << " for the same status); this holds under marginal pricing";
    throw PreconditionError(os.str());
  }
}

double clamp_uplift(const ProducerContext& ctx) { return std::max(0.0, ctx.uplift()); }

}  // namespace

const char* to_string(Family f) {
  switch (f) {
    case Family::UpliftDelta: return "uplift-delta";
    case Family::ConstantProfit: return "constant-profit";
    case Family::GeneralForm: return "general-form";
    case Family::StatusDelta: return "status-delta";
    case Family::StatusProfile: return "status-profile";
    case Family::LinearUnit: return "linear-unit";
    case Family::ConvexHull: return "convex-hull";
    case Family::Custom: return "custom";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  for (auto f : {Family::UpliftDelta, Family::ConstantProfit, Family::GeneralForm, Family::StatusDelta,
                 Family::StatusProfile, Family::LinearUnit, Family::ConvexHull, Family::Custom}) {
    if (s == to_string(f)) return f;
  }
  throw ParseError("unknown amendment family '" + s + "'");
}

Expr standard_profit_expr(const UnitParams& unit, const PriceVector& p, Formulation formulation) {
  return sum_terms(profit_terms(unit, p, formulation));
}

Expr status_indicator(const StatusVector& w, Formulation formulation) {
  std::vector<Expr> factors;
  for (int t = 0; t < static_cast<int>(w.size()); ++t)
    factors.push_back(w[t] == 1 ? status_var(formulation, t) : one_minus(formulation, t));
  return Expr::mul(std::move(factors));
}

AmendmentBundle build_uplift_delta(const ProducerContext& ctx) {
  const double U = clamp_uplift(ctx);
  const Expr d = Expr::delta(ctx.star());
  return make_bundle(ctx, Family::UpliftDelta, scaled(U, d), {scaled(-1.0, d)}, {U});
}

AmendmentBundle build_constant_profit(const ProducerContext& ctx) {
  auto terms = negate(profit_terms(ctx.unit, ctx.p, ctx.formulation));
  terms.insert(terms.begin(), Term{ctx.pi_plus, std::nullopt});
  return single_constraint(ctx, Family::ConstantProfit, sum_terms(terms));
}

AmendmentBundle build_general_form(const ProducerContext& ctx, const Expr& gamma) {
  const auto gv = ctx.eval(gamma);
  for (std::size_t k = 0; k < gv.size(); ++k) {
    if (gv[k] < -ctx.tol.eq_tol) {
      std::ostringstream os;
      os << "unit '" << ctx.unit.id << "': gamma is " << gv[k] << " < 0 at u = [";
      const auto& x = ctx.lattice[k];
      for (std::size_t t = 0; t < x.u.size(); ++t) os << (t ? ", " : "") << x.u[t];
      os << "], g = [";
      for (std::size_t t = 0; t < x.g.size(); ++t) os << (t ? ", " : "") << x.g[t];
      os << "]";
      throw PreconditionError(os.str());
    }
  }
  auto cap_terms = negate(profit_terms(ctx.unit, ctx.p, ctx.formulation));
  cap_terms.insert(cap_terms.begin(), Term{ctx.pi_plus, std::nullopt});
  const Expr cap = sum_terms(cap_terms);
  std::vector<Expr> floor_terms;
  for (const auto& e : {scaled(clamp_uplift(ctx), Expr::delta(ctx.star())), gamma})
    if (!e.is_zero_constant()) floor_terms.push_back(e);
  const Expr floor = floor_terms.empty() ? Expr::constant(0.0) : Expr::add(std::move(floor_terms));
  return single_constraint(ctx, Family::GeneralForm, Expr::min({cap, floor}));
}

AmendmentBundle build_status_delta(const ProducerContext& ctx) {
  require_status_optimal_output(ctx, "status-delta");
  const double U = clamp_uplift(ctx);
  const Expr ind = status_indicator(ctx.star().u, ctx.formulation);
  return make_bundle(ctx, Family::StatusDelta, scaled(U, ind), {scaled(-1.0, ind)}, {U});
}

AmendmentBundle build_status_profile(const ProducerContext& ctx) {
  require_status_optimal_output(ctx, "status-profile");
  std::vector<Expr> rho;
  std::vector<double> mu;
  std::vector<Expr> parts;
  for (const auto& sp : ctx.best.per_status) {
    const Expr ind = status_indicator(sp.u, ctx.formulation);
    const double m = std::max(0.0, ctx.pi_plus - sp.value);
    rho.push_back(scaled(-1.0, ind));
    mu.push_back(m);
    if (m > kDrop) parts.push_back(scaled(m, ind));
  }
  Expr n = parts.empty() ? Expr::constant(0.0) : Expr::add(std::move(parts));
  return make_bundle(ctx, Family::StatusProfile, std::move(n), std::move(rho), std::move(mu));
}

namespace {

struct LinearCase {
  double mu1 = 0.0, mu2 = 0.0, mu3 = 0.0;
  bool interior = false;
};

LinearCase linear_case(const ProducerContext& ctx) {
  const auto& unit = ctx.unit;
  const auto& xs = ctx.star();
  const double eq = ctx.tol.eq_tol;
  const double p = ctx.p[0], a = unit.marginal_cost, w = unit.startup_cost;
  const double gmin = unit.g_min, gmax = unit.g_max, gs = xs.g[0];
  const bool high = p >= a + w / gmax - eq;
  const double span = gmax - gmin;
  auto profit_on = [&](double g) { return (p - a) * g - w; };

  LinearCase c;
  if (xs.u[0] == 0) {
    if (high) c.mu3 = ctx.pi_plus;
  } else if (std::abs(gs - gmax) <= eq && high) {
  } else if (std::abs(gs - gmin) <= eq && span > eq) {
    c.mu2 = clamp_uplift(ctx) / (gmax - gs);
  } else if (std::abs(gs - gmax) <= eq) {
    if (span <= eq)
      throw UnsupportedError("unit '" + unit.id + "' has g_min = g_max; no multiplier absorbs its uplift");
    c.mu1 = -ctx.pi_star / span;
  } else {
    c.interior = true;
    if (!high) {
      c.mu1 = -profit_on(gmax) / span;
      c.mu2 = -profit_on(gmin) / span;
    } else {
      c.mu2 = p - a;
    }
  }
  c.mu1 = std::max(0.0, c.mu1);
  c.mu2 = std::max(0.0, c.mu2);
  c.mu3 = std::max(0.0, c.mu3);
  return c;
}

AmendmentBundle linear_bundle(const ProducerContext& ctx, const LinearCase& c, Family family) {
  const auto f = ctx.formulation;
  const double gmin = ctx.unit.g_min, gmax = ctx.unit.g_max;
  // N = mu1 (g - s gmin) + mu2 (s gmax - g) + mu3 (1 - s).
  const Expr f1 = lin(f, 0.0, -gmin, 1.0);
  const Expr f2 = lin(f, 0.0, gmax, -1.0);
  const Expr f3 = lin(f, 1.0, -1.0, 0.0);
  std::vector<Expr> parts;
  for (auto [m, e] : {std::pair{c.mu1, f1}, std::pair{c.mu2, f2}, std::pair{c.mu3, f3}}) {
    if (m > kDrop) parts.push_back(scaled(m, e));
  }
  Expr n = parts.empty() ? Expr::constant(0.0) : Expr::add(std::move(parts));
  return make_bundle(ctx, family, std::move(n),
                     {lin(f, 0.0, gmin, -1.0), lin(f, 0.0, -gmax, 1.0), lin(f, -1.0, 1.0, 0.0)},
                     {c.mu1, c.mu2, c.mu3});
}

AmendmentBundle output_only_hull(const ProducerContext& ctx) {
  const auto& unit = ctx.unit;
  const auto& xs = ctx.star();
  const auto f = Formulation::OutputOnly;
  const double eq = ctx.tol.eq_tol;
  const double p = ctx.p[0], a = unit.marginal_cost, w = unit.startup_cost;
  const double gmin = unit.g_min, gmax = unit.g_max, gs = xs.g[0];
  const bool high = p >= a + w / gmax - eq;
  const double pp = ctx.pi_plus;
  auto profit_on = [&](double g) { return (p - a) * g - w; };
  // -pi(p, g) = w theta(g) + (a - p) g, shifted and scaled below.
  const Expr zero = Expr::constant(0.0);

  Expr n = zero;
  if (xs.u[0] == 0) {
    if (high) n = lin(f, pp, w, a - p);
  } else if (std::abs(gs - gmin) <= eq) {
    if (gmax - gmin <= eq) {
      if (!high) throw UnsupportedError("unit '" + unit.id + "' has g_min = g_max; no multiplier absorbs its uplift");
    } else if (high) {
      n = lin(f, 0.0, pp + w, a - p);
    } else {
      const double k = -profit_on(gmin) / (gmax - gmin);
      n = lin(f, 0.0, k * gmax, -k);
    }
  } else if (std::abs(gs - gmax) <= eq) {
    if (!high) n = lin(f, 0.0, w, a - p);
  } else if (high) {
    n = Expr::min({lin(f, 0.0, w, pp / gs - (p - a)), lin(f, pp, w, a - p)});
  } else {
    const double slope = profit_on(gmax) / (gmax - gs);
    n = Expr::min({lin(f, 0.0, w, a - p), lin(f, -slope * gs, w, a - p + slope)});
  }
  return single_constraint(ctx, Family::ConvexHull, n);
}

}  // namespace

AmendmentBundle build_linear_unit(const ProducerContext& ctx) {
  require_single_period(ctx, "linear-unit");
  return linear_bundle(ctx, linear_case(ctx), Family::LinearUnit);
}

AmendmentBundle build_convex_hull_amendment(const ProducerContext& ctx) {
  require_single_period(ctx, "convex-hull");
  if (ctx.formulation == Formulation::OutputOnly) {
    if (ctx.unit.g_min == 0.0 && ctx.unit.startup_cost > 0.0)
      throw UnsupportedError("unit '" + ctx.unit.id +
                             "': output-only convex-hull amendment needs g_min > 0 or w = 0 (status is not "
                             "determined by output at g = 0)");
    return output_only_hull(ctx);
  }
  const auto c = linear_case(ctx);
  if (!c.interior) return linear_bundle(ctx, c, Family::ConvexHull);

  const auto f = ctx.formulation;
  const double gmin = ctx.unit.g_min, gmax = ctx.unit.g_max, gs = ctx.star().g[0];
  const double k1 = gs - gmin, k2 = gmax - gs;
  const Expr a1 = lin(f, 0.0, -gmin / k1, 1.0 / k1);
  const Expr a2 = lin(f, 0.0, gmax / k2, -1.0 / k2);
  const double U = clamp_uplift(ctx);
  const Expr rho = Expr::max({lin(f, 0.0, gmin / k1, -1.0 / k1), lin(f, 0.0, -gmax / k2, 1.0 / k2)});
  return make_bundle(ctx, Family::ConvexHull, scaled(U, Expr::min({a1, a2})), {rho}, {U});
}

AmendmentBundle build_family(const ProducerContext& ctx, Family family) {
  switch (family) {
    case Family::UpliftDelta: return build_uplift_delta(ctx);
    case Family::ConstantProfit: return build_constant_profit(ctx);
    case Family::GeneralForm: return build_general_form(ctx, Expr::constant(0.0));
    case Family::StatusDelta: return build_status_delta(ctx);
    case Family::StatusProfile: return build_status_profile(ctx);
    case Family::LinearUnit: return build_linear_unit(ctx);
    case Family::ConvexHull: return build_convex_hull_amendment(ctx);
    case Family::Custom: break;
  }
  throw ValidationError("the custom family has no builder");
}

AmendmentBundle combine(const AmendmentBundle& a, const AmendmentBundle& b, double alpha) {
  if (a.unit_id != b.unit_id) throw ValidationError("cannot combine amendments of different units");
  const Expr n = Expr::add({scaled(alpha, a.n), scaled(1.0 - alpha, b.n)});
  return {a.unit_id, Family::Custom, a.formulation, n, {scaled(-1.0, n)}, {1.0}};
}

bool core_conditions_pass(const VerificationReport& report) {
  return report.passed("max_profit_preserved") && report.passed("zero_uplift") && report.passed("nonnegative");
}

VerificationReport verify_conditions(const ProducerContext& ctx_in, const AmendmentBundle& bundle) {
  const ProducerContext ctx = ctx_in.formulation == bundle.formulation
                                  ? ctx_in
                                  : make_context(ctx_in.unit, ctx_in.p, ctx_in.x_star, bundle.formulation, ctx_in.tol);
  const double eq = ctx.tol.eq_tol, opt = ctx.tol.opt_tol;
  const auto& id = ctx.unit.id;
  const auto nv = ctx.eval(bundle.n);
  const std::size_t K = ctx.lattice.size();
  VerificationReport r;

  std::size_t arg = 0, low = 0, widest = 0;
  for (std::size_t k = 1; k < K; ++k) {
    if (ctx.profit[k] + nv[k] > ctx.profit[arg] + nv[arg]) arg = k;
    if (nv[k] < nv[low]) low = k;
    if (std::abs(nv[k]) > std::abs(nv[widest])) widest = k;
  }
  const double amax = ctx.profit[arg] + nv[arg];
  r.add({"max_profit_preserved", id, std::abs(amax - ctx.pi_plus) <= opt, false, amax, ctx.pi_plus,
         ctx.lattice[arg], ""});

  const double U = ctx.uplift();
  if (ctx.x_star) {
    const double n_star = bundle.n.eval(*ctx.x_star, eq);
    r.add({"zero_uplift", id, std::abs(n_star - U) <= opt, false, n_star, U, *ctx.x_star, ""});
  }
  r.add({"nonnegative", id, nv[low] >= -opt, false, nv[low], 0.0, ctx.lattice[low], ""});
  r.add({"zero_when_no_uplift", id, U > opt || std::abs(nv[widest]) <= opt, true, nv[widest], 0.0,
         ctx.lattice[widest], ""});

  // Strictly below the cap pi+ - pi somewhere; fails when N sits on the cap everywhere.
  bool below_cap = false;
  for (std::size_t k = 0; k < K && !below_cap; ++k) below_cap = nv[k] < ctx.pi_plus - ctx.profit[k] - opt;
  r.add({"strict_below_cap", id, below_cap, true, 0.0, 0.0, std::nullopt, ""});

  ConditionResult at_max{"zero_at_argmax", id, true, false, 0.0, 0.0, std::nullopt, ""};
  for (std::size_t k = 0; k < K; ++k) {
    if (ctx.profit[k] < ctx.pi_plus - opt) continue;
    if (std::abs(nv[k]) > opt) {
      at_max = {"zero_at_argmax", id, false, false, nv[k], 0.0, ctx.lattice[k], ""};
      break;
    }
  }
  r.add(at_max);

  const std::size_t L = bundle.rho.size();
  if (bundle.mu.size() != L) throw ValidationError("bundle for '" + id + "' has mismatched rho and mu");
  std::vector<std::vector<double>> rv;
  for (const auto& e : bundle.rho) rv.push_back(ctx.eval(e));
  auto mu_rho = [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t l = 0; l < L; ++l) s += bundle.mu[l] * rv[l][k];
    return s;
  };

  bool mu_ok = std::all_of(bundle.mu.begin(), bundle.mu.end(), [](double m) { return m >= 0.0; });
  r.add({"mu_nonnegative", id, mu_ok, false, 0.0, 0.0, std::nullopt, ""});

  ConditionResult nonpos{"rho_nonpositive", id, true, false, 0.0, 0.0, std::nullopt, ""};
  for (std::size_t l = 0; l < L && nonpos.passed; ++l) {
    for (std::size_t k = 0; k < K; ++k) {
      if (rv[l][k] > eq) {
        nonpos = {"rho_nonpositive", id, false, false, rv[l][k], 0.0, ctx.lattice[k], "constraint " + std::to_string(l)};
        break;
      }
    }
  }
  r.add(nonpos);

  if (ctx.x_star) {
    double at_star = 0.0;
    for (std::size_t l = 0; l < L; ++l) at_star += bundle.mu[l] * bundle.rho[l].eval(*ctx.x_star, eq);
    r.add({"uplift_absorbed", id, std::abs(at_star - (ctx.pi_star - ctx.pi_plus)) <= opt, false, at_star,
           ctx.pi_star - ctx.pi_plus, *ctx.x_star, ""});
  }

  std::size_t worst = 0;
  double worst_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    const double gap = mu_rho(k) - (ctx.profit[k] - ctx.pi_plus);
    if (gap < worst_gap) {
      worst_gap = gap;
      worst = k;
    }
  }
  r.add({"profit_bound", id, worst_gap >= -opt, false, worst_gap, 0.0, ctx.lattice[worst], ""});

  ConditionResult slack{"complementary_slackness", id, true, false, 0.0, 0.0, std::nullopt, ""};
  for (std::size_t k = 0; k < K && slack.passed; ++k) {
    if (ctx.profit[k] < ctx.pi_plus - opt) continue;
    for (std::size_t l = 0; l < L; ++l) {
      if (std::abs(bundle.mu[l] * rv[l][k]) > opt) {
        slack = {"complementary_slackness", id, false, false, bundle.mu[l] * rv[l][k], 0.0, ctx.lattice[k],
                 "constraint " + std::to_string(l)};
        break;
      }
    }
  }
  r.add(slack);

  double mismatch = 0.0;
  std::size_t at = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const double d = std::abs(nv[k] + mu_rho(k));
    if (d > mismatch) {
      mismatch = d;
      at = k;
    }
  }
  r.add({"n_equals_minus_mu_rho", id, mismatch <= opt, false, mismatch, 0.0, ctx.lattice[at], ""});
  return r;
}

double AggregateConstraint::eval(const Schedule& x, double eq_tol) const {
  double s = 0.0;
  for (std::size_t i = 0; i < n.size() && i < x.size(); ++i) s -= n[i].eval(x[i], eq_tol);
  return s;
}

namespace {

const AmendmentBundle* find_bundle(const std::vector<AmendmentBundle>& bundles, const std::string& id) {
  for (const auto& b : bundles) {
    if (b.unit_id == id) return &b;
  }
  return nullptr;
}

}  // namespace

AggregateConstraint aggregate_constraint(const MarketInstance& instance, const PriceVector& p, const Schedule& x_star,
                                         const std::vector<AmendmentBundle>& bundles) {
  AggregateConstraint agg;
  for (std::size_t i = 0; i < instance.units.size(); ++i) {
    const auto& unit = instance.units[i];
    const auto* b = find_bundle(bundles, unit.id);
    agg.unit_ids.push_back(unit.id);
    if (!b) {
      agg.n.push_back(Expr::constant(0.0));
      continue;
    }
    const auto ctx = make_context(unit, p, x_star[i], b->formulation, instance.tolerances);
    if (!core_conditions_pass(verify_conditions(ctx, *b)))
      throw PreconditionError("amendment for unit '" + unit.id + "' fails verification");
    agg.n.push_back(b->n);
  }
  return agg;
}

double amended_dual(const MarketInstance& instance, const PriceVector& q, const std::vector<AmendmentBundle>& bundles,
                    double nu, const Schedule& x_star) {
  double value = std::inner_product(q.begin(), q.end(), instance.demand.begin(), 0.0);
  for (std::size_t i = 0; i < instance.units.size(); ++i) {
    const auto& unit = instance.units[i];
    const auto* b = find_bundle(bundles, unit.id);
    const auto f = b ? b->formulation : Formulation::StatusOutput;
    const auto ctx = make_context(unit, q, std::nullopt, f, instance.tolerances, {x_star[i]});
    double best = -std::numeric_limits<double>::infinity();
    const auto nv = b ? ctx.eval(b->n) : std::vector<double>(ctx.lattice.size(), 0.0);
    for (std::size_t k = 0; k < ctx.lattice.size(); ++k) best = std::max(best, ctx.profit[k] + nu * nv[k]);
    value -= best;
  }
  return value;
}

VerificationReport check_zero_total_uplift(const MarketInstance& instance, const PriceVector& p,
                                           const std::vector<AmendmentBundle>& bundles, const Schedule& x_star) {
  validate_schedule(instance, x_star);
  const auto& tol = instance.tolerances;
  VerificationReport r;
  double total = 0.0;
  for (std::size_t i = 0; i < instance.units.size(); ++i) {
    const auto& unit = instance.units[i];
    const auto* b = find_bundle(bundles, unit.id);
    const auto ctx = make_context(unit, p, x_star[i], b ? b->formulation : Formulation::StatusOutput, tol);
    const auto nv = b ? ctx.eval(b->n) : std::vector<double>(ctx.lattice.size(), 0.0);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ctx.lattice.size(); ++k) best = std::max(best, ctx.profit[k] + nv[k]);
    const double n_star = b ? b->n.eval(x_star[i], tol.eq_tol) : 0.0;
    total += best - (ctx.pi_star + n_star);
  }
  const double limit = static_cast<double>(instance.units.size()) * tol.opt_tol;
  r.add({"total_amended_uplift", "", std::abs(total) <= limit, false, total, 0.0, std::nullopt, ""});
  r.add_metric("total_amended_uplift", total);

  const double d0 = dual_function(instance, p);
  const double d1 = amended_dual(instance, p, bundles, 1.0, x_star);
  r.add({"dual_unchanged_at_price", "", std::abs(d1 - d0) <= tol.opt_tol, false, d1, d0, std::nullopt, ""});
  r.add_metric("dual_value", d0);
  r.add_metric("amended_dual_value", d1);

  // The amended dual maximizes over nu >= 0; nu in {0, 1} brackets it since N >= 0.
  const double step = 0.05 * (1.0 + *std::max_element(p.begin(), p.end()));
  for (double s : {-2.0, -1.0, 1.0, 2.0, 3.0}) {
    PriceVector q = p;
    for (auto& v : q) v = std::max(0.0, v + s * step);
    const double base = dual_function(instance, q);
    const double best = std::max(amended_dual(instance, q, bundles, 0.0, x_star),
                                 amended_dual(instance, q, bundles, 1.0, x_star));
    r.add({"dual_unchanged_shifted", "", std::abs(best - base) <= tol.opt_tol, false, best, base, std::nullopt,
           "q shifted by " + format_number(s * step)});
  }
  return r;
}

nlohmann::json bundle_to_json(const AmendmentBundle& b) {
  auto rho = nlohmann::json::array();
  for (const auto& e : b.rho) rho.push_back(expr_to_json(e));
  return {{"N", expr_to_json(b.n)},
          {"rho", rho},
          {"mu", b.mu},
          {"family", to_string(b.family)},
          {"formulation", to_string(b.formulation)}};
}

AmendmentBundle bundle_from_json(const std::string& unit_id, const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("N")) throw ParseError("bundle for '" + unit_id + "' needs an 'N' expression");
  AmendmentBundle b;
  b.unit_id = unit_id;
  b.n = expr_from_json(j.at("N"));
  try {
    if (j.contains("rho")) {
      for (const auto& e : j.at("rho")) b.rho.push_back(expr_from_json(e));
    }
    if (j.contains("mu")) b.mu = j.at("mu").get<std::vector<double>>();
    if (j.contains("family")) b.family = family_from_string(j.at("family").get<std::string>());
    if (j.contains("formulation")) b.formulation = formulation_from_string(j.at("formulation").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bundle for '" + unit_id + "': " + e.what());
  }
  if (b.rho.size() != b.mu.size()) throw ParseError("bundle for '" + unit_id + "': rho and mu lengths differ");
  return b;
}

nlohmann::json bundles_to_json(const std::vector<AmendmentBundle>& bundles) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& b : bundles) j[b.unit_id] = bundle_to_json(b);
  return j;
}

std::vector<AmendmentBundle> bundles_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("amendment file must map unit ids to bundles");
  std::vector<AmendmentBundle> out;
  for (const auto& [id, v] : j.items()) out.push_back(bundle_from_json(id, v));
  return out;
}

}  // namespace uplift_zero
