#include "uplift_zero/io.hpp"

#include <fstream>
#include <sstream>

#include "uplift_zero/errors.hpp"

namespace uplift_zero {

namespace {

template <typename T>
T required(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
T optional(const Json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

MarketInstance parse_instance(const Json& j) {
  if (!j.is_object()) throw ParseError("instance must be a JSON object");
  MarketInstance inst;
  inst.periods = required<int>(j, "periods", "instance");
  inst.demand = required<std::vector<double>>(j, "demand", "instance");
  if (j.contains("tolerances")) {
    const auto& tj = j.at("tolerances");
    if (!tj.is_object()) throw ParseError("instance: 'tolerances' must be an object");
    inst.tolerances.eq_tol = optional<double>(tj, "eq_tol", inst.tolerances.eq_tol, "tolerances");
    inst.tolerances.opt_tol = optional<double>(tj, "opt_tol", inst.tolerances.opt_tol, "tolerances");
    inst.tolerances.report_digits =
        optional<int>(tj, "report_digits", inst.tolerances.report_digits, "tolerances");
  }
  if (!j.contains("unit_types") || !j.at("unit_types").is_array())
    throw ParseError("instance: 'unit_types' must be an array");
  for (const auto& uj : j.at("unit_types")) {
    if (!uj.is_object()) throw ParseError("instance: unit type entries must be objects");
    const auto name = required<std::string>(uj, "name", "unit type");
    const std::string where = "unit type '" + name + "'";
    const int count = optional<int>(uj, "count", 1, where);
    if (count < 1) throw ValidationError(where + ": count must be >= 1");
    UnitParams proto;
    proto.g_min = required<double>(uj, "g_min", where);
    proto.g_max = required<double>(uj, "g_max", where);
    proto.marginal_cost = required<double>(uj, "marginal_cost", where);
    proto.startup_cost = required<double>(uj, "startup_cost", where);
    proto.initial_status = optional<int>(uj, "initial_status", 0, where);
    proto.min_up = optional<int>(uj, "min_up", 0, where);
    proto.min_down = optional<int>(uj, "min_down", 0, where);
    for (int k = 1; k <= count; ++k) {
      UnitParams unit = proto;
      unit.id = count == 1 ? name : name + "-" + std::to_string(k);
      inst.units.push_back(std::move(unit));
    }
  }
  validate_instance(inst);
  return inst;
}

MarketInstance load_instance(const std::filesystem::path& path) {
  return parse_instance(read_json_file(path));
}

Json instance_to_json(const MarketInstance& inst) {
  Json types = Json::array();
  for (const auto& u : inst.units) {
    types.push_back({{"name", u.id},
                     {"count", 1},
                     {"g_min", u.g_min},
                     {"g_max", u.g_max},
                     {"marginal_cost", u.marginal_cost},
                     {"startup_cost", u.startup_cost},
                     {"initial_status", u.initial_status},
                     {"min_up", u.min_up},
                     {"min_down", u.min_down}});
  }
  return {{"periods", inst.periods},
          {"demand", inst.demand},
          {"unit_types", types},
          {"tolerances",
           {{"eq_tol", inst.tolerances.eq_tol},
            {"opt_tol", inst.tolerances.opt_tol},
            {"report_digits", inst.tolerances.report_digits}}}};
}

Json unit_schedule_to_json(const UnitSchedule& x) { return {{"u", x.u}, {"g", x.g}}; }

UnitSchedule unit_schedule_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("schedule entry must be an object");
  UnitSchedule x;
  x.u = required<std::vector<int>>(j, "u", "schedule entry");
  x.g = required<std::vector<double>>(j, "g", "schedule entry");
  if (x.u.size() != x.g.size()) throw ParseError("schedule entry: u and g lengths differ");
  return x;
}

Json schedule_to_json(const MarketInstance& inst, const Schedule& schedule) {
  Json out = Json::object();
  for (std::size_t i = 0; i < schedule.size(); ++i) out[inst.units[i].id] = unit_schedule_to_json(schedule[i]);
  return out;
}

Schedule schedule_from_json(const MarketInstance& inst, const Json& j) {
  if (!j.is_object()) throw ParseError("schedule must be a JSON object");
  Schedule out;
  out.reserve(inst.units.size());
  for (const auto& unit : inst.units) {
    if (!j.contains(unit.id)) throw ParseError("schedule: missing unit '" + unit.id + "'");
    out.push_back(unit_schedule_from_json(j.at(unit.id)));
  }
  return out;
}

}  // namespace uplift_zero
