#include "uplift_zero/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "uplift_zero/errors.hpp"
#include "uplift_zero/io.hpp"

namespace uplift_zero {

struct Expr::Node {
  Op op = Op::Const;
  double value = 0.0;
  int t = 0;
  std::vector<Expr> args;
  UnitSchedule ref;
  bool status_only = false;
};

namespace {

constexpr double kDropCoefficient = 1e-12;

std::shared_ptr<Expr::Node> make(Op op) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  return n;
}

void require_args(const std::vector<Expr>& args, const char* what) {
  if (args.empty()) throw ValidationError(std::string(what) + " needs at least one argument");
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::Const: return "const";
    case Op::U: return "u";
    case Op::G: return "g";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Min: return "min";
    case Op::Max: return "max";
    case Op::Delta: return "delta";
    case Op::Theta: return "theta";
    case Op::Abs: return "abs";
  }
  return "?";
}

Expr::Expr() : node_(make(Op::Const)) {}
Expr::Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

Expr Expr::constant(double v) {
  auto n = make(Op::Const);
  n->value = v;
  return Expr(n);
}

Expr Expr::u(int t) {
  auto n = make(Op::U);
  n->t = t;
  return Expr(n);
}

Expr Expr::g(int t) {
  auto n = make(Op::G);
  n->t = t;
  return Expr(n);
}

Expr Expr::delta(const UnitSchedule& ref) {
  auto n = make(Op::Delta);
  n->ref = ref;
  return Expr(n);
}

Expr Expr::delta_status(const StatusVector& u_ref) {
  auto n = make(Op::Delta);
  n->ref.u = u_ref;
  n->status_only = true;
  return Expr(n);
}

Expr Expr::theta(Expr arg) {
  auto n = make(Op::Theta);
  n->args = {std::move(arg)};
  return Expr(n);
}

Expr Expr::abs(Expr arg) {
  auto n = make(Op::Abs);
  n->args = {std::move(arg)};
  return Expr(n);
}

Expr Expr::add(std::vector<Expr> args) {
  require_args(args, "add");
  if (args.size() == 1) return args.front();
  auto n = make(Op::Add);
  n->args = std::move(args);
  return Expr(n);
}

Expr Expr::sub(Expr a, Expr b) {
  auto n = make(Op::Sub);
  n->args = {std::move(a), std::move(b)};
  return Expr(n);
}

Expr Expr::mul(std::vector<Expr> args) {
  require_args(args, "mul");
  if (args.size() == 1) return args.front();
  auto n = make(Op::Mul);
  n->args = std::move(args);
  return Expr(n);
}

Expr Expr::min(std::vector<Expr> args) {
  require_args(args, "min");
  auto n = make(Op::Min);
  n->args = std::move(args);
  return Expr(n);
}

Expr Expr::max(std::vector<Expr> args) {
  require_args(args, "max");
  auto n = make(Op::Max);
  n->args = std::move(args);
  return Expr(n);
}

Expr Expr::affine(double c0, std::span<const double> cu, std::span<const double> cg) {
  std::vector<std::pair<double, Expr>> terms;
  if (std::abs(c0) > kDropCoefficient) terms.emplace_back(c0, constant(c0));
  const std::size_t T = std::max(cu.size(), cg.size());
  for (std::size_t t = 0; t < T; ++t) {
    if (t < cu.size() && std::abs(cu[t]) > kDropCoefficient) {
      const Expr var = u(static_cast<int>(t));
      terms.emplace_back(cu[t], cu[t] == 1.0 ? var : mul({constant(cu[t]), var}));
    }
    if (t < cg.size() && std::abs(cg[t]) > kDropCoefficient) {
      const Expr var = g(static_cast<int>(t));
      terms.emplace_back(cg[t], cg[t] == 1.0 ? var : mul({constant(cg[t]), var}));
    }
  }
  if (terms.empty()) return constant(0.0);
  // Positive terms first so "g - 2*u" and "1 - u" read naturally.
  std::stable_partition(terms.begin(), terms.end(), [](const auto& p) { return p.first > 0; });
  std::vector<Expr> args;
  for (auto& [c, e] : terms) args.push_back(std::move(e));
  return add(std::move(args));
}

Op Expr::op() const { return node_->op; }
double Expr::value() const { return node_->value; }
int Expr::period() const { return node_->t; }
const std::vector<Expr>& Expr::args() const { return node_->args; }
const UnitSchedule& Expr::ref() const { return node_->ref; }
bool Expr::status_only() const { return node_->status_only; }

bool Expr::is_zero_constant() const { return node_->op == Op::Const && node_->value == 0.0; }

double Expr::eval(const UnitSchedule& x, double eq_tol) const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::U: return n.t < static_cast<int>(x.u.size()) ? x.u[n.t] : 0.0;
    case Op::G: return n.t < static_cast<int>(x.g.size()) ? x.g[n.t] : 0.0;
    case Op::Add: {
      double s = 0.0;
      for (const auto& a : n.args) s += a.eval(x, eq_tol);
      return s;
    }
    case Op::Sub: return n.args[0].eval(x, eq_tol) - n.args[1].eval(x, eq_tol);
    case Op::Mul: {
      double s = 1.0;
      for (const auto& a : n.args) s *= a.eval(x, eq_tol);
      return s;
    }
    case Op::Min: {
      double s = std::numeric_limits<double>::infinity();
      for (const auto& a : n.args) s = std::min(s, a.eval(x, eq_tol));
      return s;
    }
    case Op::Max: {
      double s = -std::numeric_limits<double>::infinity();
      for (const auto& a : n.args) s = std::max(s, a.eval(x, eq_tol));
      return s;
    }
    case Op::Delta: {
      if (x.u.size() != n.ref.u.size()) return 0.0;
      if (x.u != n.ref.u) return 0.0;
      if (n.status_only) return 1.0;
      if (x.g.size() != n.ref.g.size()) return 0.0;
      for (std::size_t t = 0; t < x.g.size(); ++t) {
        if (std::abs(x.g[t] - n.ref.g[t]) > eq_tol) return 0.0;
      }
      return 1.0;
    }
    case Op::Theta: return n.args[0].eval(x, eq_tol) > 0.0 ? 1.0 : 0.0;
    case Op::Abs: return std::abs(n.args[0].eval(x, eq_tol));
  }
  return 0.0;
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::sub(a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::mul({a, b}); }
Expr operator*(double c, const Expr& e) { return Expr::mul({Expr::constant(c), e}); }
Expr operator-(const Expr& e) { return Expr::mul({Expr::constant(-1.0), e}); }
Expr operator+(double c, const Expr& e) { return Expr::add({Expr::constant(c), e}); }
Expr operator+(const Expr& e, double c) { return Expr::add({e, Expr::constant(c)}); }
Expr operator-(double c, const Expr& e) { return Expr::sub(Expr::constant(c), e); }
Expr operator-(const Expr& e, double c) { return Expr::sub(e, Expr::constant(c)); }

std::vector<double> eval_all(const Expr& e, std::span<const UnitSchedule> points, double eq_tol,
                             ExecPolicy policy) {
  std::vector<double> out(points.size());
  const auto n = static_cast<long>(points.size());
  if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k) out[k] = e.eval(points[k], eq_tol);
  } else {
    for (long k = 0; k < n; ++k) out[k] = e.eval(points[k], eq_tol);
  }
  return out;
}

nlohmann::json expr_to_json(const Expr& e) {
  nlohmann::json j;
  j["op"] = op_name(e.op());
  switch (e.op()) {
    case Op::Const: j["value"] = e.value(); break;
    case Op::U:
    case Op::G: j["t"] = e.period(); break;
    case Op::Delta:
      j["ref"] = e.status_only() ? nlohmann::json{{"u", e.ref().u}} : unit_schedule_to_json(e.ref());
      break;
    default: {
      auto args = nlohmann::json::array();
      for (const auto& a : e.args()) args.push_back(expr_to_json(a));
      j["args"] = std::move(args);
    }
  }
  return j;
}

Expr expr_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("op") || !j.at("op").is_string())
    throw ParseError("expression node must be an object with a string 'op'");
  const auto op = j.at("op").get<std::string>();
  auto args = [&]() {
    if (!j.contains("args") || !j.at("args").is_array()) throw ParseError("'" + op + "' node needs 'args'");
    std::vector<Expr> out;
    for (const auto& a : j.at("args")) out.push_back(expr_from_json(a));
    if (out.empty()) throw ParseError("'" + op + "' node has no arguments");
    return out;
  };
  auto period = [&]() {
    if (!j.contains("t") || !j.at("t").is_number_integer()) throw ParseError("'" + op + "' node needs integer 't'");
    const int t = j.at("t").get<int>();
    if (t < 0) throw ParseError("negative period index");
    return t;
  };
  try {
    if (op == "const") {
      if (!j.contains("value") || !j.at("value").is_number()) throw ParseError("const node needs numeric 'value'");
      return Expr::constant(j.at("value").get<double>());
    }
    if (op == "u") return Expr::u(period());
    if (op == "g") return Expr::g(period());
    if (op == "add") return Expr::add(args());
    if (op == "mul") return Expr::mul(args());
    if (op == "min") return Expr::min(args());
    if (op == "max") return Expr::max(args());
    if (op == "sub") {
      auto a = args();
      if (a.size() != 2) throw ParseError("sub node takes exactly two arguments");
      return Expr::sub(a[0], a[1]);
    }
    if (op == "theta" || op == "abs") {
      auto a = args();
      if (a.size() != 1) throw ParseError("'" + op + "' node takes exactly one argument");
      return op == "theta" ? Expr::theta(a[0]) : Expr::abs(a[0]);
    }
    if (op == "delta") {
      if (!j.contains("ref") || !j.at("ref").is_object()) throw ParseError("delta node needs object 'ref'");
      const auto& r = j.at("ref");
      if (!r.contains("g")) return Expr::delta_status(r.at("u").get<std::vector<int>>());
      return Expr::delta(unit_schedule_from_json(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed expression node: ") + e.what());
  }
  throw ParseError("unknown expression op '" + op + "'");
}

namespace {

// Halves round away from zero, so 4.3125 prints as 4.313 at four digits.
std::string fixed_half_away(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double r = std::isfinite(v * scale) ? std::round(v * scale) / scale : v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, r);
  return buf;
}

}  // namespace

std::string format_number(double v, int digits) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  if (v == 0.0) return "0";
  const int exponent = static_cast<int>(std::floor(std::log10(std::abs(v))));
  const int decimals = std::max(0, digits - 1 - exponent);
  std::string s = fixed_half_away(v, decimals);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

std::string format_fixed(double v, int decimals) {
  std::string s = fixed_half_away(v, decimals);
  // "-0.0000" prints as "0.0000".
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

namespace {

struct Printer {
  int digits;
  bool single;

  std::string var(const char* name, int t) const {
    return single && t == 0 ? std::string(name) : std::string(name) + std::to_string(t + 1);
  }

  static bool negative_lead(const Expr& e) {
    if (e.op() == Op::Const) return e.value() < 0;
    if (e.op() == Op::Mul) return e.args().front().op() == Op::Const && e.args().front().value() < 0;
    return false;
  }

  // Renders -e for a term that negative_lead() accepted.
  std::string negated(const Expr& e) const {
    if (e.op() == Op::Const) return format_number(-e.value(), digits);
    std::vector<Expr> rest(e.args().begin() + 1, e.args().end());
    const double c = -e.args().front().value();
    if (c != 1.0) rest.insert(rest.begin(), Expr::constant(c));
    return print(Expr::mul(rest), 2);
  }

  std::string list(const std::vector<Expr>& args) const {
    std::string s;
    for (std::size_t k = 0; k < args.size(); ++k) {
      if (k) s += ", ";
      s += print(args[k], 0);
    }
    return s;
  }

  std::string print(const Expr& e, int ctx) const {
    switch (e.op()) {
      case Op::Const: {
        const auto s = format_number(e.value(), digits);
        return e.value() < 0 && ctx > 1 ? "(" + s + ")" : s;
      }
      case Op::U: return var("u", e.period());
      case Op::G: return var("g", e.period());
      case Op::Add: {
        std::string s = print(e.args().front(), 1);
        for (std::size_t k = 1; k < e.args().size(); ++k) {
          const auto& a = e.args()[k];
          s += negative_lead(a) ? " - " + negated(a) : " + " + print(a, 1);
        }
        return ctx > 1 ? "(" + s + ")" : s;
      }
      case Op::Sub: {
        const std::string s = print(e.args()[0], 1) + " - " + print(e.args()[1], 2);
        return ctx > 1 ? "(" + s + ")" : s;
      }
      case Op::Mul: {
        const auto& a = e.args();
        std::string s;
        std::size_t k = 0;
        if (a.size() > 1 && a[0].op() == Op::Const && (a[0].value() == 1.0 || a[0].value() == -1.0)) {
          s = a[0].value() < 0 ? "-" : "";
          k = 1;
        } else if (a[0].op() == Op::Const) {
          s = format_number(a[0].value(), digits) + "*";
          k = 1;
        }
        for (std::size_t first = k; k < a.size(); ++k) {
          if (k != first) s += "*";
          s += print(a[k], 2);
        }
        return s.front() == '-' && ctx > 1 ? "(" + s + ")" : s;
      }
      case Op::Min: return "min[" + list(e.args()) + "]";
      case Op::Max: return "max[" + list(e.args()) + "]";
      case Op::Theta: return "theta(" + print(e.args()[0], 0) + ")";
      case Op::Abs: return "|" + print(e.args()[0], 0) + "|";
      case Op::Delta: {
        const auto& r = e.ref();
        std::string s = e.status_only() ? "delta_u[" : "delta_x[";
        for (std::size_t t = 0; t < r.u.size(); ++t) {
          if (t) s += "; ";
          s += e.status_only() ? std::to_string(r.u[t])
                               : "(" + std::to_string(r.u[t]) + ", " + format_number(r.g[t], digits) + ")";
        }
        return s + "]";
      }
    }
    return "?";
  }
};

}  // namespace

std::string to_string(const Expr& e, int digits, bool single_period) {
  return Printer{digits, single_period}.print(e, 0);
}

}  // namespace uplift_zero
