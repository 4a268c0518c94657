#include <gtest/gtest.h>

#include <algorithm>
#include <stdexcept>

#include "transitq/model.hpp"

using namespace transitq;

TEST(Validate, ReferenceScenarioIsValid) {
  EXPECT_TRUE(validate(reference_scenario()).empty());
  EXPECT_TRUE(validate(reference_scenario_h4()).empty());
}

TEST(Validate, AlphaOutOfRangeNamesTheStation) {
  Scenario sc = reference_scenario();
  sc.route.stations[2].alpha = 1.2;
  const auto v = validate(sc);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].message.find("station 3"), std::string::npos);
  EXPECT_NE(v[0].message.find("[0, 1]"), std::string::npos);
}

TEST(Validate, ThetaMustBePositive) {
  Scenario sc = reference_scenario();
  sc.incidents.theta = 0.0;
  const auto v = validate(sc);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].message, "theta must be positive");
}

TEST(Validate, ReportsEveryViolation) {
  Scenario sc = reference_scenario();
  sc.incidents.gamma = -1.0;
  sc.route.capacity = 0;
  sc.route.interstation_time = 0.0;
  EXPECT_GE(validate(sc).size(), 3u);
}

TEST(Validate, LastStationMustFitInHalfCycle) {
  Scenario sc = reference_scenario();
  sc.route.cycle_time = 90.0;  // T_N = 50 > 45
  const auto v = validate(sc);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "route.cycle_time");
}

TEST(Validate, IdempotentAndPure) {
  Scenario sc = reference_scenario();
  sc.route.stations[0].lambda = -1.0;
  const Scenario copy = sc;
  const auto a = validate(sc);
  const auto b = validate(sc);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].message, b[i].message);
  EXPECT_EQ(sc, copy);
}

TEST(TravelTime, UniformSegments) {
  const RouteConfig r = example_route();
  EXPECT_DOUBLE_EQ(travel_time_to(r, 10), 50.0);
  EXPECT_DOUBLE_EQ(travel_time_to(r, 1), 5.0);
  EXPECT_THROW(travel_time_to(r, 0), std::out_of_range);
  EXPECT_THROW(travel_time_to(r, 11), std::out_of_range);
}

TEST(TravelTime, PerSegmentOverride) {
  RouteConfig r = example_route();
  r.segment_times = std::vector<double>{2, 3, 4, 5, 6, 5, 5, 5, 5, 5};
  EXPECT_DOUBLE_EQ(travel_time_to(r, 3), 9.0);
  EXPECT_DOUBLE_EQ(travel_time_to(r, 10), 45.0);
}

TEST(AdjustedHeadway, ClosedForm) {
  Scenario sc = reference_scenario();
  EXPECT_NEAR(adjusted_headway(sc), 7.2, 1e-12);
  sc.incidents.gamma = 0.0;
  EXPECT_DOUBLE_EQ(adjusted_headway(sc), 6.0);
}

TEST(AdjustedHeadway, LinearInGamma) {
  Scenario a = reference_scenario();
  Scenario b = a;
  b.incidents.gamma *= 2.0;
  const double h = a.route.nominal_headway;
  EXPECT_NEAR(adjusted_headway(b) - h, 2.0 * (adjusted_headway(a) - h), 1e-12);
}

TEST(AdjustedHeadway, IncreasingInGammaAndMeanDuration) {
  Scenario sc = reference_scenario();
  double prev = 0.0;
  for (double g : {0.05, 0.1, 0.2, 1.0 / 3.0}) {
    sc.incidents = {g, 1.0};
    const double h = adjusted_headway(sc);
    EXPECT_GT(h, prev);
    prev = h;
  }
  prev = 0.0;
  for (double th : {2.0, 1.0, 0.5, 0.25}) {
    sc.incidents = {0.2, th};
    const double h = adjusted_headway(sc);
    EXPECT_GT(h, prev);
    prev = h;
  }
}

TEST(ExpandGrid, GammaSweep) {
  const Scenario base = reference_scenario();
  const auto grid = expand_grid(base, "gamma", {0.0, 0.1, 0.2, 1.0 / 3.0});
  ASSERT_EQ(grid.size(), 4u);
  EXPECT_EQ(grid[1].label, "reference:gamma=0.1");
  for (const auto& sc : grid) {
    EXPECT_EQ(sc.route, base.route);
    EXPECT_EQ(sc.incidents.theta, base.incidents.theta);
  }
  EXPECT_EQ(grid[3].incidents.gamma, 1.0 / 3.0);
}

TEST(ExpandGrid, EmptyValues) { EXPECT_TRUE(expand_grid(reference_scenario(), "theta", {}).empty()); }

TEST(ExpandGrid, UnknownParameter) {
  EXPECT_THROW(expand_grid(reference_scenario(), "speed", {1.0}), std::invalid_argument);
}

TEST(ExpandGrid, CapacityMustBeInteger) {
  EXPECT_THROW(expand_grid(reference_scenario(), "capacity", {30.5}), std::invalid_argument);
  const auto g = expand_grid(reference_scenario(), "capacity", {30, 38});
  EXPECT_EQ(g[1].route.capacity, 38);
}

TEST(ExpandGrid, OtherFieldsBitExact) {
  const Scenario base = reference_scenario();
  for (const char* p : {"capacity", "gamma", "theta", "nominal_headway", "demand_factor"}) {
    for (const auto& sc : expand_grid(base, p, {2.0})) {
      Scenario restored = sc;
      restored.label = base.label;
      if (std::string(p) == "capacity") restored.route.capacity = base.route.capacity;
      if (std::string(p) == "gamma") restored.incidents.gamma = base.incidents.gamma;
      if (std::string(p) == "theta") restored.incidents.theta = base.incidents.theta;
      if (std::string(p) == "nominal_headway") restored.route.nominal_headway = base.route.nominal_headway;
      if (std::string(p) == "demand_factor") restored.route.demand_factor = base.route.demand_factor;
      EXPECT_EQ(restored, base) << p;
    }
  }
}

TEST(RouteConfig, DemandFactorScalesArrivalRates) {
  const RouteConfig r = example_route();
  EXPECT_DOUBLE_EQ(r.arrival_rate(1), 0.6);
  EXPECT_DOUBLE_EQ(r.arrival_rate(4), 2.4);
  EXPECT_DOUBLE_EQ(r.alighting_prob(6), 0.8);
  EXPECT_NEAR(r.fleet_size(), 100.0 / 6.0, 1e-12);
}
