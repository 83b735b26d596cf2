#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "helm/errors.hpp"

namespace helm::detail {

using json = nlohmann::ordered_json;

// Reads optional members of one JSON object and rejects anything it was not
// asked about.
class FieldReader {
 public:
  FieldReader(const json& obj, std::string section) : obj_(obj), section_(std::move(section)) {
    if (!obj_.is_object()) throw ConfigError("'" + section_ + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& dst) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      dst = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("'" + path(key) + "' has the wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return section_.empty() ? key : section_ + "." + key; }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + path(it.key()) + "'");
    }
  }

 private:
  const json& obj_;
  std::string section_;
  std::set<std::string> seen_;
};

}  // namespace helm::detail
