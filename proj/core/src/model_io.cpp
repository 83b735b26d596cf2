#include "helm/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json_fields.hpp"
#include "model_fields.hpp"

namespace helm {

using detail::json;

ShipModel parse_ship_model(const std::string& text, const ShipModel& base) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("ship model is not valid JSON: ") + e.what());
  }
  ShipModel model = base;
  detail::read_ship_sections(doc, "", model);
  try {
    model.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("ship model: ") + e.what());
  }
  return model;
}

ShipModel load_ship_model(const std::filesystem::path& path, const ShipModel& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open ship model: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ship_model(ss.str(), base);
}

std::string dump_ship_model(const ShipModel& model) {
  json doc;
  detail::write_ship_sections(doc, model);
  return doc.dump(2) + "\n";
}

}  // namespace helm
