#pragma once

#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "uplift_zero/model.hpp"
#include "uplift_zero/parallel.hpp"

namespace uplift_zero {

enum class Op { Const, U, G, Add, Sub, Mul, Min, Max, Delta, Theta, Abs };

const char* op_name(Op op);

/// Immutable expression over one producer's (u_t, g_t). Cheap to copy;
/// subtrees are shared.
class Expr {
 public:
  struct Node;

  Expr();  // Const(0)

  static Expr constant(double v);
  static Expr u(int t = 0);
  static Expr g(int t = 0);
  /// 1 when x equals ref coordinatewise (outputs within eq_tol), else 0.
  static Expr delta(const UnitSchedule& ref);
  /// 1 when the status vector of x equals u_ref, else 0.
  static Expr delta_status(const StatusVector& u_ref);
  static Expr theta(Expr arg);
  static Expr abs(Expr arg);
  static Expr add(std::vector<Expr> args);
  static Expr sub(Expr a, Expr b);
  static Expr mul(std::vector<Expr> args);
  static Expr min(std::vector<Expr> args);
  static Expr max(std::vector<Expr> args);

  /// c0 + sum_t cu[t] u_t + sum_t cg[t] g_t, zero terms omitted.
  static Expr affine(double c0, std::span<const double> cu, std::span<const double> cg);

  Op op() const;
  double value() const;  // Const only
  int period() const;    // U, G only
  const std::vector<Expr>& args() const;
  const UnitSchedule& ref() const;  // Delta only
  bool status_only() const;         // Delta only

  double eval(const UnitSchedule& x, double eq_tol = 1e-7) const;

  /// True when the tree is a single Const node equal to 0.
  bool is_zero_constant() const;

 private:
  explicit Expr(std::shared_ptr<const Node> n);
  std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator*(double c, const Expr& e);
Expr operator-(const Expr& e);
Expr operator+(double c, const Expr& e);
Expr operator+(const Expr& e, double c);
Expr operator-(double c, const Expr& e);
Expr operator-(const Expr& e, double c);

/// Values of e at every point, in order.
std::vector<double> eval_all(const Expr& e, std::span<const UnitSchedule> points, double eq_tol,
                             ExecPolicy policy = ExecPolicy::Parallel);

nlohmann::json expr_to_json(const Expr& e);
/// Throws ParseError on unknown ops or malformed nodes.
Expr expr_from_json(const nlohmann::json& j);

/// Infix rendering with `digits` significant digits, e.g.
/// "2.143*min[g - 2*u, 2*u - 0.3333*g]". Periods print as u, g when
/// single_period is set, otherwise as u1, g1, u2, ...
std::string to_string(const Expr& e, int digits = 4, bool single_period = true);

/// `digits` significant digits, no exponent for moderate magnitudes, no
/// trailing zeros ("2.143", "0.3333", "30").
std::string format_number(double v, int digits = 4);

/// Fixed notation with `decimals` places ("6.2857", "0.0000").
std::string format_fixed(double v, int decimals = 4);

}  // namespace uplift_zero
