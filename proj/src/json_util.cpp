#include "ptdrl/json_util.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace ptdrl::json_util {

void check_keys(const Json& j, std::string_view where, std::initializer_list<std::string_view> allowed,
                std::initializer_list<std::string_view> required) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
  for (auto key : required) {
    if (!j.contains(std::string(key))) throw ConfigError(std::string(where) + ": missing key '" + std::string(key) + "'");
  }
}

Json parse(const std::string& text, std::string_view where) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string(where) + ": invalid JSON: " + e.what());
  }
}

Json load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

Vec2 vec2(const Json& j, std::string_view where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(std::string(where) + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace ptdrl::json_util
