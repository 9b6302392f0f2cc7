// JSON encoding helpers shared by the rule book and artifact writers.

#ifndef MUSROVER_SRC_JSON_UTIL_H
#define MUSROVER_SRC_JSON_UTIL_H

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "musrover/dist.h"
#include "musrover/error.h"
#include "musrover/features.h"

namespace musrover::json_util {

using Json = nlohmann::ordered_json;

/// Non-finite reals become null; null reads back as +inf.
inline Json real(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline double readReal(const Json& j) {
  if (j.is_null()) return kInfinity;
  if (!j.is_number()) throw DataError("expected a number");
  return j.get<double>();
}

inline Json reals(const std::vector<double>& xs) {
  Json out = Json::array();
  for (double x : xs) out.push_back(real(x));
  return out;
}

inline std::vector<double> readReals(const Json& j) {
  if (!j.is_array()) throw DataError("expected an array of numbers");
  std::vector<double> out;
  for (const Json& x : j) out.push_back(readReal(x));
  return out;
}

inline Json value(const FeatureValue& v) {
  Json out = Json::array();
  for (int x : v.values()) out.push_back(x);
  return out;
}

inline FeatureValue readValue(const Json& j, Descriptor kind) {
  if (!j.is_array() || j.empty() || j.size() > 4) throw DataError("bad feature value");
  FeatureValue v;
  v.kind = kind;
  v.size = static_cast<std::uint8_t>(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v.data[i] = j[i].get<int>();
  return v;
}

inline Json values(const std::vector<FeatureValue>& vs) {
  Json out = Json::array();
  for (const auto& v : vs) out.push_back(value(v));
  return out;
}

inline Json labels(const std::vector<FeatureValue>& vs) {
  Json out = Json::array();
  for (const auto& v : vs) out.push_back(valueLabel(v));
  return out;
}

inline std::vector<FeatureValue> readValues(const Json& j, Descriptor kind) {
  if (!j.is_array()) throw DataError("expected an array of feature values");
  std::vector<FeatureValue> out;
  for (const Json& v : j) out.push_back(readValue(v, kind));
  return out;
}

inline Json dist(const Dist& d) {
  Json out;
  out["values"] = values(d.alphabet);
  out["labels"] = labels(d.alphabet);
  out["mass"] = reals(d.mass);
  return out;
}

inline Dist readDist(const Json& j, Descriptor kind) {
  Dist d{readValues(j.at("values"), kind), readReals(j.at("mass"))};
  if (d.alphabet.size() != d.mass.size()) throw DataError("distribution size mismatch");
  return d;
}

inline Json condDist(const CondDist& d) {
  Json out;
  out["values"] = values(d.alphabet);
  out["labels"] = labels(d.alphabet);
  out["contexts"] = values(d.contexts);
  out["context_labels"] = labels(d.contexts);
  out["weights"] = reals(d.weights);
  Json rows = Json::array();
  for (const auto& r : d.rows) rows.push_back(reals(r));
  out["rows"] = std::move(rows);
  return out;
}

inline CondDist readCondDist(const Json& j, Descriptor kind) {
  CondDist d;
  d.alphabet = readValues(j.at("values"), kind);
  d.contexts = readValues(j.at("contexts"), kind);
  d.weights = readReals(j.at("weights"));
  for (const Json& r : j.at("rows")) d.rows.push_back(readReals(r));
  if (d.contexts.size() != d.weights.size() || d.contexts.size() != d.rows.size()) {
    throw DataError("conditional distribution size mismatch");
  }
  for (const auto& r : d.rows) {
    if (r.size() != d.alphabet.size()) throw DataError("conditional row size mismatch");
  }
  return d;
}

inline Json parse(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DataError(std::string("malformed ") + std::string(what) + " JSON: " + e.what());
  }
}

}  // namespace musrover::json_util

#endif  // MUSROVER_SRC_JSON_UTIL_H
