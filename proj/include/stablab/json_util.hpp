#pragma once

#include "stablab/core.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <initializer_list>
#include <string>

namespace stablab {

/// Rejects any key of `j` outside `allowed`.
inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const std::string& context) {
  require(j.is_object(), context + ": expected a JSON object");
  for (const auto& item : j.items()) {
    bool known = std::any_of(allowed.begin(), allowed.end(),
                             [&](const char* key) { return item.key() == key; });
    require(known, context + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidInput(std::string("bad value for '") + key + "'");
  }
}

template <typename T>
T get_required(const nlohmann::json& j, const char* key, const std::string& context) {
  auto it = j.find(key);
  require(it != j.end() && !it->is_null(), context + ": missing required key '" + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidInput(context + ": bad value for '" + key + "'");
  }
}

}  // namespace stablab
