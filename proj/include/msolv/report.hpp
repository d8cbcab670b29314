#pragma once

// Canonical JSON reports: sorted keys, integers only, and integers beyond
// 2^53 - 1 rendered as decimal strings.

#include <string>
#include <vector>

#include <json.hpp>

#include "msolv/zmodlin.hpp"

namespace msolv::report {

using Json = nlohmann::json;

inline constexpr long long kMaxSafeInteger = (1LL << 53) - 1;

inline Json big(const BigInt& v) {
  if (v <= kMaxSafeInteger && v >= -kMaxSafeInteger) return Json(v.convert_to<long long>());
  return Json(v.str());
}

template <class T>
Json int_array(const std::vector<T>& v) {
  Json a = Json::array();
  for (const auto& x : v) {
    if constexpr (std::is_same_v<T, BigInt>) a.push_back(big(x));
    else a.push_back(static_cast<long long>(x));
  }
  return a;
}

struct ExperimentResult {
  std::string name;
  bool pass = false;
  Json config = Json::object();
  Json result = Json::object();
  std::optional<long long> wall_time_ms;
};

inline Json to_json(const ExperimentResult& r) {
  Json j{{"name", r.name}, {"pass", r.pass}, {"config", r.config}, {"result", r.result}};
  if (r.wall_time_ms) j["wall_time_ms"] = *r.wall_time_ms;
  return j;
}

/// `{"experiments":[...]}` in the order given.  nlohmann::json keeps object
/// keys in a std::map, so keys come out sorted.
inline std::string emit_report(const std::vector<ExperimentResult>& results) {
  Json doc = Json::object();
  doc["experiments"] = Json::array();
  for (const auto& r : results) doc["experiments"].push_back(to_json(r));
  return doc.dump();
}

/// True when no floating-point number occurs anywhere in the document.
inline bool integers_only(const Json& j) {
  if (j.is_number_float()) return false;
  if (j.is_structured())
    for (const auto& v : j)
      if (!integers_only(v)) return false;
  return true;
}

}  // namespace msolv::report
