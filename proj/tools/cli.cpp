#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>

#include "CLI11.hpp"
#include "uplift_zero/amendments.hpp"
#include "uplift_zero/dispatch.hpp"
#include "uplift_zero/errors.hpp"
#include "uplift_zero/io.hpp"
#include "uplift_zero/lattice.hpp"
#include "uplift_zero/parallel.hpp"
#include "uplift_zero/pricing.hpp"
#include "uplift_zero/scarf.hpp"
#include "uplift_zero/uplift.hpp"

namespace uplift_zero::cli {

namespace {

using nlohmann::json;

struct Options {
  std::string instance;
  std::optional<double> scarf;
  bool json_out = false;
  std::string method = "chp";
  std::string price_method = "chp";
  std::string family = "convex-hull";
  std::string formulation = "xu";
  std::string out;
  std::string amendments;
};

struct Pricing {
  PriceVector p;
  std::optional<ConvexHullPrice> chp;
};

struct Amended {
  std::vector<AmendmentBundle> bundles;
  std::vector<std::string> notes;
};

MarketInstance load(const Options& o) {
  if (o.scarf) {
    if (!o.instance.empty()) throw ParseError("give either an instance file or --scarf, not both");
    return scarf_instance(*o.scarf);
  }
  if (o.instance.empty()) throw ParseError("no instance: pass a file path or --scarf 10|40");
  return load_instance(o.instance);
}

Pricing price(const MarketInstance& inst, const DispatchResult& d, const std::string& method) {
  if (method == "chp") {
    auto chp = convex_hull_price(inst);
    return {chp.price, chp};
  }
  if (method == "marginal") return {marginal_price(inst, d.schedule_star), std::nullopt};
  throw ParseError("unknown price method '" + method + "' (expected chp or marginal)");
}

Amended amend(const MarketInstance& inst, const DispatchResult& d, const PriceVector& p, const Options& o) {
  const Family family = family_from_string(o.family);
  const Formulation formulation = formulation_from_string(o.formulation);
  Amended a;
  int skipped = 0;
  for (std::size_t i = 0; i < inst.units.size(); ++i) {
    const auto ctx = make_context(inst.units[i], p, d.schedule_star[i], formulation, inst.tolerances);
    try {
      a.bundles.push_back(build_family(ctx, family));
    } catch (const UnsupportedError& e) {
      // No amendment is needed where there is nothing to absorb.
      if (ctx.uplift() > inst.tolerances.opt_tol) throw;
      a.bundles.push_back({ctx.unit.id, family, formulation, Expr::constant(0.0), {}, {}});
      ++skipped;
    }
  }
  if (skipped)
    a.notes.push_back(to_string(family) + std::string(" builder not applicable to ") + std::to_string(skipped) +
                      " zero-uplift unit(s); N = 0 for those");
  return a;
}

std::string type_name(const std::string& id) { return std::regex_replace(id, std::regex("-[0-9]+$"), ""); }

std::string vec(const std::vector<double>& v, int decimals) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + format_fixed(v[k], decimals);
  return v.size() == 1 ? s : "[" + s + "]";
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot write '" + path + "'");
  f << text;
}

void dispatch_table(std::ostream& out, const MarketInstance& inst, const DispatchResult& d, int dec) {
  out << pad("unit type", 14) << pad("online", 8) << "output per online unit\n";
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < inst.units.size(); ++i) {
    const auto name = type_name(inst.units[i].id);
    if (std::find(seen.begin(), seen.end(), name) != seen.end()) continue;
    seen.push_back(name);
    int online = 0;
    std::string outputs;
    for (std::size_t j = i; j < inst.units.size(); ++j) {
      if (type_name(inst.units[j].id) != name) continue;
      const auto& x = d.schedule_star[j];
      if (std::none_of(x.u.begin(), x.u.end(), [](int v) { return v == 1; })) continue;
      ++online;
      outputs += (outputs.empty() ? "" : "; ") + vec(x.g, dec);
    }
    out << pad(name, 14) << pad(std::to_string(online), 8) << (outputs.empty() ? "-" : outputs) << "\n";
  }
}

int cmd_dispatch(const Options& o, std::ostream& out) {
  const auto inst = load(o);
  const auto d = solve_centralized(inst);
  const int dec = inst.tolerances.report_digits;
  if (!o.out.empty()) write_json_file(o.out, schedule_to_json(inst, d.schedule_star));
  if (o.json_out) {
    out << json{{"f_star", d.f_star}, {"enumerated", d.enumerated}, {"schedule", schedule_to_json(inst, d.schedule_star)}}
               .dump(2)
        << "\n";
    return kOk;
  }
  dispatch_table(out, inst, d, dec);
  out << "f* = " << format_fixed(d.f_star, dec) << "\n";
  out << "commitment profiles examined: " << d.enumerated << "\n";
  return kOk;
}

int cmd_price(const Options& o, std::ostream& out) {
  const auto inst = load(o);
  const auto d = solve_centralized(inst);
  const auto pr = price(inst, d, o.method);
  const int dec = inst.tolerances.report_digits;
  if (o.json_out) {
    json j{{"method", o.method}, {"price", pr.p}};
    if (pr.chp) {
      j["dual_value"] = pr.chp->dual_value;
      j["converged"] = pr.chp->converged;
    }
    out << j.dump(2) << "\n";
    return kOk;
  }
  out << "price (" << o.method << "): " << vec(pr.p, dec) << "\n";
  if (pr.chp) {
    out << "dual value: " << format_fixed(pr.chp->dual_value, dec) << "\n";
    if (!pr.chp->converged) out << "warning: subgradient ascent did not converge; best iterate shown\n";
  }
  return kOk;
}

int cmd_uplift(const Options& o, std::ostream& out) {
  const auto inst = load(o);
  const auto d = solve_centralized(inst);
  const auto pr = price(inst, d, o.price_method);
  const auto rep = uplift_report(inst, pr.p, d.schedule_star);
  const auto csv = uplift_csv(rep);
  if (!o.out.empty()) write_text(o.out, csv);
  if (o.json_out) {
    json rows = json::array();
    for (const auto& r : rep.units)
      rows.push_back({{"unit_id", r.unit_id}, {"pi_star", r.pi_star}, {"pi_plus", r.pi_plus}, {"uplift", r.uplift}});
    out << json{{"price", pr.p}, {"units", rows}, {"total", rep.total}}.dump(2) << "\n";
    return kOk;
  }
  out << csv;
  return kOk;
}

int cmd_amend(const Options& o, std::ostream& out) {
  const auto inst = load(o);
  const auto d = solve_centralized(inst);
  const auto pr = price(inst, d, o.price_method);
  const auto a = amend(inst, d, pr.p, o);
  const auto j = bundles_to_json(a.bundles);
  if (!o.out.empty()) write_json_file(o.out, j);
  if (o.json_out) {
    out << j.dump(2) << "\n";
    return kOk;
  }
  const bool single = inst.periods == 1;
  for (const auto& b : a.bundles) out << b.unit_id << ": N = " << to_string(b.n, inst.tolerances.report_digits, single) << "\n";
  for (const auto& n : a.notes) out << "note: " << n << "\n";
  return kOk;
}

struct Verified {
  std::vector<VerificationReport> per_unit;
  VerificationReport total;
  bool passed = true;
};

Verified verify_all(const MarketInstance& inst, const DispatchResult& d, const PriceVector& p,
                    const std::vector<AmendmentBundle>& bundles) {
  Verified v;
  for (std::size_t i = 0; i < inst.units.size(); ++i) {
    const auto it = std::find_if(bundles.begin(), bundles.end(),
                                 [&](const AmendmentBundle& b) { return b.unit_id == inst.units[i].id; });
    if (it == bundles.end()) continue;
    const auto ctx = make_context(inst.units[i], p, d.schedule_star[i], it->formulation, inst.tolerances);
    v.per_unit.push_back(verify_conditions(ctx, *it));
    v.passed = v.passed && v.per_unit.back().passed();
  }
  v.total = check_zero_total_uplift(inst, p, bundles, d.schedule_star);
  v.passed = v.passed && v.total.passed();
  return v;
}

std::string failed_ids(const VerificationReport& r) {
  std::string s;
  for (const auto& c : r.conditions) {
    if (!c.passed && !c.informational) s += (s.empty() ? "" : ", ") + c.id;
  }
  return s;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const auto inst = load(o);
  const auto d = solve_centralized(inst);
  const auto pr = price(inst, d, o.price_method);
  const auto bundles = o.amendments.empty() ? amend(inst, d, pr.p, o).bundles
                                            : bundles_from_json(read_json_file(o.amendments));
  const auto v = verify_all(inst, d, pr.p, bundles);
  if (o.json_out) {
    json units = json::object();
    for (std::size_t k = 0; k < v.per_unit.size(); ++k)
      units[v.per_unit[k].conditions.front().unit_id] = report_to_json(v.per_unit[k]);
    out << json{{"pass", v.passed}, {"units", units}, {"zero_total_uplift", report_to_json(v.total)}}.dump(2) << "\n";
  } else {
    for (const auto& r : v.per_unit) {
      const auto& id = r.conditions.front().unit_id;
      out << id << ": " << (r.passed() ? "pass" : "FAIL (" + failed_ids(r) + ")") << "\n";
    }
    out << "zero total uplift: " << (v.total.passed() ? "pass" : "FAIL (" + failed_ids(v.total) + ")") << "\n";
  }
  return v.passed ? kOk : kInfeasible;
}

int cmd_report(const Options& o, std::ostream& out) {
  const auto inst = load(o);
  const int dec = inst.tolerances.report_digits;
  const auto d = solve_centralized(inst);
  const auto pr = price(inst, d, o.price_method);
  const auto up = uplift_report(inst, pr.p, d.schedule_star);
  const auto a = amend(inst, d, pr.p, o);
  const auto v = verify_all(inst, d, pr.p, a.bundles);
  const double after = v.total.metric("total_amended_uplift").value_or(0.0);

  if (o.json_out) {
    json units = json::array();
    for (std::size_t i = 0; i < inst.units.size(); ++i) {
      units.push_back({{"unit_id", inst.units[i].id},
                       {"schedule", unit_schedule_to_json(d.schedule_star[i])},
                       {"pi_star", up.units[i].pi_star},
                       {"pi_plus", up.units[i].pi_plus},
                       {"uplift", up.units[i].uplift},
                       {"amendment", bundle_to_json(a.bundles[i])},
                       {"verification", report_to_json(v.per_unit[i])}});
    }
    out << json{{"f_star", d.f_star},
                {"price_method", o.price_method},
                {"price", pr.p},
                {"family", o.family},
                {"formulation", o.formulation},
                {"total_uplift_before", up.total},
                {"total_uplift_after", after},
                {"units", units},
                {"zero_total_uplift", report_to_json(v.total)},
                {"pass", v.passed}}
               .dump(2)
        << "\n";
    return v.passed ? kOk : kInfeasible;
  }

  out << "Dispatch and pricing outcome\n";
  dispatch_table(out, inst, d, dec);
  out << "f* = " << format_fixed(d.f_star, dec) << "\n";
  out << "market price (" << o.price_method << "): " << vec(pr.p, dec) << "\n";
  if (pr.chp) out << "dual value: " << format_fixed(pr.chp->dual_value, dec) << "\n";
  out << "\nUplift\n";
  for (const auto& r : up.units) {
    if (r.uplift != 0.0) out << "  " << pad(r.unit_id, 14) << format_fixed(r.uplift, dec) << "\n";
  }
  out << "total uplift before amendment: " << format_fixed(up.total, dec) << "\n";
  out << "\nAmendments (" << o.family << ", " << o.formulation << ")\n";
  int zero = 0;
  for (const auto& b : a.bundles) {
    if (b.n.is_zero_constant()) {
      ++zero;
      continue;
    }
    out << "  N[" << b.unit_id << "] = " << to_string(b.n, dec, inst.periods == 1) << "\n";
  }
  if (zero) out << "  N = 0 for the other " << zero << " units\n";
  for (const auto& n : a.notes) out << "  note: " << n << "\n";
  out << "\nVerification\n";
  int passed = 0;
  for (const auto& r : v.per_unit) {
    if (r.passed()) {
      ++passed;
    } else {
      out << "  " << r.conditions.front().unit_id << ": FAIL (" << failed_ids(r) << ")\n";
    }
  }
  out << "  units passing: " << passed << " of " << v.per_unit.size() << "\n";
  out << "  zero total uplift: " << (v.total.passed() ? "pass" : "FAIL (" + failed_ids(v.total) + ")") << "\n";
  out << "total uplift after amendment: " << format_fixed(std::abs(after) < inst.tolerances.opt_tol ? 0.0 : after, dec)
      << "\n";
  return v.passed ? kOk : kInfeasible;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("instance", o.instance, "Instance JSON file");
  sub->add_option("--scarf", o.scarf, "Built-in Scarf fleet with this demand (10 or 40)");
  sub->add_flag("--json", o.json_out, "Machine-readable output at full precision");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_threads_from_env();
  CLI::App app{"Dispatch, pricing, uplift and revenue amendments for small non-convex markets", "uplift_zero"};
  app.require_subcommand(1);
  Options o;

  auto* dispatch = app.add_subcommand("dispatch", "Solve the centralized dispatch problem");
  add_common(dispatch, o);
  dispatch->add_option("--out", o.out, "Write the schedule JSON here");

  auto* pricecmd = app.add_subcommand("price", "Market price");
  add_common(pricecmd, o);
  pricecmd->add_option("--method", o.method, "chp or marginal")->check(CLI::IsMember({"chp", "marginal"}));

  auto* upliftcmd = app.add_subcommand("uplift", "Per-unit uplift payments (CSV)");
  add_common(upliftcmd, o);
  upliftcmd->add_option("--price-method", o.price_method, "chp or marginal")->check(CLI::IsMember({"chp", "marginal"}));
  upliftcmd->add_option("--out", o.out, "Write the CSV here");

  const std::vector<std::string> families{"uplift-delta", "constant-profit", "general-form", "status-delta",
                                          "status-profile", "linear-unit", "convex-hull"};
  for (auto [name, help] : {std::pair{"amend", "Build revenue amendments"},
                            std::pair{"verify", "Verify amendments"},
                            std::pair{"report", "End-to-end dispatch, price, uplift and amendment report"}}) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, o);
    sub->add_option("--family", o.family, "Amendment family")->check(CLI::IsMember(families));
    sub->add_option("--formulation", o.formulation, "xu or g")->check(CLI::IsMember({"xu", "g"}));
    sub->add_option("--price-method", o.price_method, "chp or marginal")->check(CLI::IsMember({"chp", "marginal"}));
    if (std::string(name) == "amend") sub->add_option("--out", o.out, "Write the amendment JSON here");
    if (std::string(name) == "verify") sub->add_option("--amendments", o.amendments, "Amendment JSON to verify");
  }

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "dispatch") return cmd_dispatch(o, out);
    if (name == "price") return cmd_price(o, out);
    if (name == "uplift") return cmd_uplift(o, out);
    if (name == "amend") return cmd_amend(o, out);
    if (name == "verify") return cmd_verify(o, out);
    return cmd_report(o, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << "\n";
    return kInfeasible;
  } catch (const UnsupportedError& e) {
    err << "unsupported: " << e.what() << "\n";
    return kInfeasible;
  } catch (const EnumerationLimitError& e) {
    err << "enumeration limit: " << e.what() << "\n";
    return kInfeasible;
  } catch (const NotRedundantError& e) {
    err << "not redundant: " << e.what() << "\n";
    return kInfeasible;
  }
}

}  // namespace uplift_zero::cli
