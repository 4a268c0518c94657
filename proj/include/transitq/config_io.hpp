#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "transitq/error.hpp"
#include "transitq/model.hpp"

namespace transitq {

using json = nlohmann::json;

namespace detail {

inline double number_field(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw validation_error(where + "." + key + " must be a number");
  return v.get<double>();
}

}  // namespace detail

// Schema:
// { "route": { "stations": [{"lambda": .., "alpha": ..}, ...],
//              "interstation_time": 5, "segment_times": [...] (optional),
//              "cycle_time": 100, "nominal_headway": 6, "capacity": 34,
//              "demand_factor": 0.8 },
//   "incidents": { "gamma": 0.2, "theta": 1 }, "label": "reference" }
// Missing scalar fields take the RouteConfig/IncidentParams defaults.
inline Scenario scenario_from_json(const json& doc) {
  if (!doc.is_object()) throw validation_error("config must be a JSON object");
  if (!doc.contains("route") || !doc.at("route").is_object())
    throw validation_error("config needs a \"route\" object");
  const json& r = doc.at("route");
  Scenario sc;
  RouteConfig& route = sc.route;

  if (!r.contains("stations") || !r.at("stations").is_array())
    throw validation_error("route.stations must be an array");
  for (std::size_t i = 0; i < r.at("stations").size(); ++i) {
    const json& st = r.at("stations").at(i);
    const std::string where = "route.stations[" + std::to_string(i) + "]";
    if (!st.is_object()) throw validation_error(where + " must be an object");
    route.stations.push_back({detail::number_field(st, "lambda", 0.0, where),
                              detail::number_field(st, "alpha", 0.0, where)});
  }
  route.interstation_time = detail::number_field(r, "interstation_time", route.interstation_time, "route");
  route.cycle_time = detail::number_field(r, "cycle_time", route.cycle_time, "route");
  route.nominal_headway = detail::number_field(r, "nominal_headway", route.nominal_headway, "route");
  route.demand_factor = detail::number_field(r, "demand_factor", route.demand_factor, "route");
  if (r.contains("capacity")) {
    const json& c = r.at("capacity");
    if (!c.is_number_integer() && !(c.is_number() && c.get<double>() == std::floor(c.get<double>())))
      throw validation_error("route.capacity must be an integer");
    route.capacity = static_cast<int>(c.get<double>());
  }
  if (r.contains("segment_times") && !r.at("segment_times").is_null()) {
    const json& seg = r.at("segment_times");
    if (!seg.is_array()) throw validation_error("route.segment_times must be an array");
    std::vector<double> t;
    for (const auto& v : seg) {
      if (!v.is_number()) throw validation_error("route.segment_times entries must be numbers");
      t.push_back(v.get<double>());
    }
    route.segment_times = std::move(t);
  }

  if (doc.contains("incidents")) {
    const json& inc = doc.at("incidents");
    if (!inc.is_object()) throw validation_error("incidents must be an object");
    sc.incidents.gamma = detail::number_field(inc, "gamma", sc.incidents.gamma, "incidents");
    sc.incidents.theta = detail::number_field(inc, "theta", sc.incidents.theta, "incidents");
  }
  if (doc.contains("label")) {
    if (!doc.at("label").is_string()) throw validation_error("label must be a string");
    sc.label = doc.at("label").get<std::string>();
  }
  return sc;
}

inline json to_json(const Scenario& sc) {
  json stations = json::array();
  for (const auto& st : sc.route.stations) stations.push_back({{"lambda", st.lambda}, {"alpha", st.alpha}});
  json route = {{"stations", stations},
                {"interstation_time", sc.route.interstation_time},
                {"cycle_time", sc.route.cycle_time},
                {"nominal_headway", sc.route.nominal_headway},
                {"capacity", sc.route.capacity},
                {"demand_factor", sc.route.demand_factor}};
  if (sc.route.segment_times) route["segment_times"] = *sc.route.segment_times;
  return {{"route", route},
          {"incidents", {{"gamma", sc.incidents.gamma}, {"theta", sc.incidents.theta}}},
          {"label", sc.label}};
}

inline Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw validation_error(std::string("config is not valid JSON: ") + e.what());
  }
  return scenario_from_json(doc);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot write " + path);
  out << content;
  if (!out) throw validation_error("write failed for " + path);
}

inline Scenario load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

}  // namespace transitq
