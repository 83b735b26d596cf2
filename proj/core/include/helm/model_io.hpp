#pragma once

#include <filesystem>
#include <string>

#include "helm/ship.hpp"

namespace helm {

/// Ship model JSON with sections "principal", "mmg" and "actuator". Missing
/// fields keep the values of base; unknown keys raise ConfigError.
ShipModel parse_ship_model(const std::string& text, const ShipModel& base = {});
ShipModel load_ship_model(const std::filesystem::path& path, const ShipModel& base = {});
std::string dump_ship_model(const ShipModel& model);

}  // namespace helm
