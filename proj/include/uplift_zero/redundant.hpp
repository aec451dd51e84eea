#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "uplift_zero/expr.hpp"
#include "uplift_zero/lattice.hpp"
#include "uplift_zero/verification.hpp"

namespace uplift_zero {

enum class ConstraintKind { IdenticallyZero, StrictlyNegative, Mixed };

const char* to_string(ConstraintKind k);

struct ConstraintClass {
  ConstraintKind kind = ConstraintKind::IdenticallyZero;
  std::vector<UnitSchedule> support;  // lattice points with |rho| > eq_tol
  double mu_hi = std::numeric_limits<double>::infinity();  // M^{+l} = [0, mu_hi]

  bool bounded() const { return kind != ConstraintKind::IdenticallyZero; }
};

/// Throws NotRedundantError when rho exceeds eq_tol at a lattice point.
void require_redundant(const ProducerContext& ctx, const Expr& rho);

ConstraintClass classify_constraint(const ProducerContext& ctx, const Expr& rho);

/// min over the support of (pi^st(x) - pi^{st,+}) / rho(x), clamped at 0.
/// Throws PreconditionError when rho vanishes on the whole lattice.
double mu_max(const ProducerContext& ctx, const Expr& rho);

/// Grid over the box [0, 2 mu_max_l] per axis, 11 points each; unbounded
/// or degenerate axes use 2 (pi^{st,+} - min pi^st). Full grid up to 20000
/// points, otherwise axis lines plus the diagonal.
VerificationReport strong_duality_scan(const ProducerContext& ctx, const std::vector<Expr>& rho);

/// (a) every sampled member of M^+ lies in the per-constraint box,
/// (b) with pairwise disjoint supports every box corner is a member.
VerificationReport box_structure(const ProducerContext& ctx, const std::vector<Expr>& rho,
                                 const std::vector<std::vector<double>>& mu_samples);

/// sum over bounded l of mu_max_l rho_l(x*) <= pi^{st,*} - pi^{st,+}.
VerificationReport necessary_condition(const ProducerContext& ctx, const std::vector<Expr>& rho);

/// Per-constraint characterization of "mu absorbs the uplift and keeps the
/// profit bound": active set nonempty, mu_l below its conditional maximum
/// m_l off the active set, mu_l = m_l with x* attaining m_l on it. The
/// verdict is cross-checked against the direct test. Throws
/// PreconditionError when the uplift is zero.
VerificationReport prop5_check(const ProducerContext& ctx, const std::vector<Expr>& rho, const std::vector<double>& mu);

struct RepairResult {
  std::vector<Expr> rho;
  double correction = 0.0;           // pi* - pi+ - mu^T rho'(x*)
  bool unit_norm = true;             // |mu| = 1, where dividing by |mu| instead of |mu|^2 agrees
};

/// rho_l = rho'_l + delta_{x,x*} * correction * mu_l / |mu|^2.
/// Throws PreconditionError when rho' is positive somewhere, when mu is
/// not a member of M^+ or when mu = 0.
RepairResult repair(const ProducerContext& ctx, const std::vector<Expr>& rho_prime, const std::vector<double>& mu);

/// Values of each constraint on the lattice.
std::vector<std::vector<double>> lattice_values(const ProducerContext& ctx, const std::vector<Expr>& rho,
                                                ExecPolicy policy = ExecPolicy::Parallel);

}  // namespace uplift_zero
