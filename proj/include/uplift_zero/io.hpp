#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "uplift_zero/model.hpp"

namespace uplift_zero {

using Json = nlohmann::json;

/// Reads an instance file. Unit types with `count: n` expand to n units
/// with ids "<name>-1" .. "<name>-n"; a count of 1 keeps the bare name.
/// Throws ParseError for unreadable/malformed files and ValidationError
/// for invariant violations.
MarketInstance load_instance(const std::filesystem::path& path);
MarketInstance parse_instance(const Json& j);

/// One unit type per unit with count 1, so reloading reproduces the ids.
Json instance_to_json(const MarketInstance& instance);

/// { "unit_id": { "u": [..], "g": [..] } }
Json schedule_to_json(const MarketInstance& instance, const Schedule& schedule);
Schedule schedule_from_json(const MarketInstance& instance, const Json& j);

Json unit_schedule_to_json(const UnitSchedule& x);
UnitSchedule unit_schedule_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace uplift_zero
