#pragma once

#include "json.hpp"
#include "uplift_zero/model.hpp"

namespace uplift_zero {

/// Six Smokestack, five High Tech and five Med Tech units, all initially
/// offline, one period with the given demand.
MarketInstance scarf_instance(double demand);

/// The same fleet as an instance file (unit types with counts).
nlohmann::json scarf_instance_json(double demand);

}  // namespace uplift_zero
