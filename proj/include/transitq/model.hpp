#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "transitq/error.hpp"
#include "transitq/format.hpp"

namespace transitq {

// Per-station demand: Poisson arrival rate (passengers/min) and the
// probability that an on-board passenger alights here.
struct StationParams {
  double lambda = 0.0;
  double alpha = 0.0;

  bool operator==(const StationParams&) const = default;
};

// Static description of a single route. All times in minutes.
struct RouteConfig {
  std::vector<StationParams> stations;
  double interstation_time = 5.0;
  // Optional per-segment travel times (hub -> 1, 1 -> 2, ...). When set it
  // overrides interstation_time and must have one entry per station.
  std::optional<std::vector<double>> segment_times;
  double cycle_time = 100.0;
  double nominal_headway = 6.0;
  int capacity = 34;
  double demand_factor = 1.0;

  std::size_t size() const noexcept { return stations.size(); }

  // Fleet size E/H. Not rounded; it only ever appears as a divisor.
  double fleet_size() const noexcept { return cycle_time / nominal_headway; }

  // Arrival rate seen by the analysis, i.e. lambda scaled by demand_factor.
  double arrival_rate(std::size_t n) const {
    check_station(n);
    return stations[n - 1].lambda * demand_factor;
  }

  double alighting_prob(std::size_t n) const {
    check_station(n);
    return stations[n - 1].alpha;
  }

  void check_station(std::size_t n) const {
    if (n < 1 || n > stations.size()) {
      throw std::out_of_range("station index " + std::to_string(n) +
                              " outside 1.." +
                              std::to_string(stations.size()));
    }
  }

  bool operator==(const RouteConfig&) const = default;
};

struct IncidentParams {
  double gamma = 0.0;  // incidents per minute of travel
  double theta = 1.0;  // rate of the exponential incident duration

  bool operator==(const IncidentParams&) const = default;
};

struct Scenario {
  RouteConfig route;
  IncidentParams incidents;
  std::string label;

  bool operator==(const Scenario&) const = default;
};

struct Violation {
  std::string field;
  std::string message;
};

// No-incident travel time from the hub to station n (1-based).
inline double travel_time_to(const RouteConfig& route, std::size_t n) {
  route.check_station(n);
  if (route.segment_times) {
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) t += (*route.segment_times)[i];
    return t;
  }
  return static_cast<double>(n) * route.interstation_time;
}

inline std::vector<Violation> validate(const Scenario& sc) {
  std::vector<Violation> out;
  auto add = [&](std::string field, std::string msg) {
    out.push_back({std::move(field), std::move(msg)});
  };
  const RouteConfig& r = sc.route;

  if (r.stations.empty()) add("route.stations", "route needs at least one station");
  for (std::size_t i = 0; i < r.stations.size(); ++i) {
    const auto& st = r.stations[i];
    const std::string where = "station " + std::to_string(i + 1);
    if (!(st.lambda >= 0.0) || !std::isfinite(st.lambda))
      add("route.stations[" + std::to_string(i) + "].lambda",
          where + ": lambda must be finite and >= 0");
    if (!(st.alpha >= 0.0 && st.alpha <= 1.0))
      add("route.stations[" + std::to_string(i) + "].alpha",
          where + ": alpha must lie in [0, 1]");
  }
  if (!(r.interstation_time > 0.0) || !std::isfinite(r.interstation_time))
    add("route.interstation_time", "interstation_time must be positive");
  if (r.segment_times) {
    if (r.segment_times->size() != r.stations.size())
      add("route.segment_times", "segment_times needs one entry per station");
    for (double t : *r.segment_times)
      if (!(t > 0.0) || !std::isfinite(t)) {
        add("route.segment_times", "segment times must be positive");
        break;
      }
  }
  if (!(r.cycle_time > 0.0) || !std::isfinite(r.cycle_time))
    add("route.cycle_time", "cycle_time must be positive");
  if (!(r.nominal_headway > 0.0) || !std::isfinite(r.nominal_headway))
    add("route.nominal_headway", "nominal_headway must be positive");
  if (r.capacity < 1) add("route.capacity", "capacity must be at least 1");
  if (!(r.demand_factor > 0.0) || !std::isfinite(r.demand_factor))
    add("route.demand_factor", "demand_factor must be positive");

  const IncidentParams& inc = sc.incidents;
  if (!(inc.gamma >= 0.0) || !std::isfinite(inc.gamma))
    add("incidents.gamma", "gamma must be finite and >= 0");
  if (!(inc.theta > 0.0) || !std::isfinite(inc.theta))
    add("incidents.theta", "theta must be positive");

  // Travel to the last station must fit in the outbound half of the cycle.
  const bool times_ok =
      !r.stations.empty() && r.interstation_time > 0.0 && r.cycle_time > 0.0 &&
      (!r.segment_times || r.segment_times->size() == r.stations.size());
  if (times_ok) {
    const double tn = travel_time_to(r, r.stations.size());
    if (tn > r.cycle_time / 2.0)
      add("route.cycle_time", "travel time to the last station (" +
                                  format_number(tn) +
                                  ") exceeds half the cycle time");
  }
  return out;
}

inline void require_valid(const Scenario& sc) {
  auto v = validate(sc);
  if (!v.empty()) throw validation_error(std::move(v.front().message));
}

// Planned headway inflated by the expected round-trip incident delay spread
// over a fixed fleet: H + 2 E[I_N] / F with E[I_N] = gamma T_N / theta.
inline double adjusted_headway(const Scenario& sc) {
  const auto& r = sc.route;
  const double tn = travel_time_to(r, r.size());
  const double expected_delay = sc.incidents.gamma * tn / sc.incidents.theta;
  return r.nominal_headway + 2.0 * expected_delay / r.fleet_size();
}

inline constexpr std::string_view kSweepParameters[] = {
    "capacity", "gamma", "theta", "nominal_headway", "demand_factor"};

inline bool is_sweep_parameter(std::string_view name) {
  for (auto p : kSweepParameters)
    if (p == name) return true;
  return false;
}

// One scenario per value; everything except the swept field is copied.
inline std::vector<Scenario> expand_grid(const Scenario& base,
                                         std::string_view parameter,
                                         const std::vector<double>& values) {
  if (!is_sweep_parameter(parameter))
    throw std::invalid_argument("unknown sweep parameter '" +
                                std::string(parameter) + "'");
  std::vector<Scenario> out;
  out.reserve(values.size());
  for (double v : values) {
    Scenario sc = base;
    if (parameter == "capacity") {
      if (v != std::round(v))
        throw std::invalid_argument("capacity values must be integers");
      sc.route.capacity = static_cast<int>(v);
    } else if (parameter == "gamma") {
      sc.incidents.gamma = v;
    } else if (parameter == "theta") {
      sc.incidents.theta = v;
    } else if (parameter == "nominal_headway") {
      sc.route.nominal_headway = v;
    } else {
      sc.route.demand_factor = v;
    }
    sc.label = base.label + ":" + std::string(parameter) + "=" + format_number(v);
    out.push_back(std::move(sc));
  }
  return out;
}

// The ten-station example route: lambda (passengers/min) and alighting
// probability per station.
inline RouteConfig example_route() {
  RouteConfig r;
  r.stations = {{0.75, 0.0}, {1.5, 0.0},  {0.75, 0.1}, {3.0, 0.25},
                {1.5, 0.25}, {1.0, 0.8},  {0.75, 0.5}, {0.5, 0.1},
                {0.2, 0.75}, {0.0, 1.0}};
  r.interstation_time = 5.0;
  r.cycle_time = 100.0;
  r.nominal_headway = 6.0;
  r.capacity = 34;
  r.demand_factor = 0.8;
  return r;
}

// Reference scenario: C=34, gamma=1/5, theta=1, H=6, demand factor 0.8.
inline Scenario reference_scenario() {
  return Scenario{example_route(), IncidentParams{0.2, 1.0}, "reference"};
}

// Same as the reference but with a 4-minute nominal headway. The published
// results are consistent with this value in places (mean wait of 2 minutes
// without incidents), so both are kept as presets.
inline Scenario reference_scenario_h4() {
  Scenario sc = reference_scenario();
  sc.route.nominal_headway = 4.0;
  sc.label = "reference-h4";
  return sc;
}

// Value space of the sensitivity grid, per parameter.
struct ScenarioGrid {
  std::vector<double> capacity{30, 34, 38};
  std::vector<double> gamma{0.0, 0.1, 0.2, 1.0 / 3.0};
  std::vector<double> theta{2.0, 1.0, 0.5};
  std::vector<double> nominal_headway{2.0, 4.0, 7.0};
  std::vector<double> demand_factor{0.2, 0.4, 0.6, 0.8, 1.0};
};

}  // namespace transitq
