#pragma once

#include <json.hpp>

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include "ptdrl/common.hpp"

namespace ptdrl::json_util {

using Json = nlohmann::json;

/// Rejects keys outside `allowed` and missing keys from `required`.
void check_keys(const Json& j, std::string_view where, std::initializer_list<std::string_view> allowed,
                std::initializer_list<std::string_view> required = {});

template <typename T>
T get(const Json& j, std::string_view key, std::string_view where) {
  const auto it = j.find(std::string(key));
  if (it == j.end()) throw ConfigError(std::string(where) + ": missing key '" + std::string(key) + "'");
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(where) + ": key '" + std::string(key) + "' has the wrong type");
  }
}

template <typename T>
T get_or(const Json& j, std::string_view key, T fallback, std::string_view where) {
  if (!j.contains(std::string(key))) return fallback;
  return get<T>(j, key, where);
}

Json parse(const std::string& text, std::string_view where);
Json load(const std::filesystem::path& path);
Vec2 vec2(const Json& j, std::string_view where);

}  // namespace ptdrl::json_util
