#include "uplift_zero/scarf.hpp"

#include "uplift_zero/io.hpp"

namespace uplift_zero {

nlohmann::json scarf_instance_json(double demand) {
  auto type = [](const char* name, int count, double gmin, double gmax, double a, double w) {
    return nlohmann::json{{"name", name},         {"count", count},        {"g_min", gmin},
                          {"g_max", gmax},        {"marginal_cost", a},    {"startup_cost", w},
                          {"initial_status", 0}};
  };
  return {{"periods", 1},
          {"demand", {demand}},
          {"unit_types",
           {type("Smokestack", 6, 0, 16, 3, 53), type("High Tech", 5, 0, 7, 2, 30), type("Med Tech", 5, 2, 6, 7, 0)}}};
}

MarketInstance scarf_instance(double demand) { return parse_instance(scarf_instance_json(demand)); }

}  // namespace uplift_zero
