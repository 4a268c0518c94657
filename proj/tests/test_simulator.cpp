#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "transitq/simulator.hpp"

using namespace transitq;

namespace {

SimConfig small_config(std::int64_t runs = 3000, std::uint64_t seed = 42) {
  return SimConfig{reference_scenario(), runs, 0.10, seed};
}

bool same(const Estimate& a, const Estimate& b) {
  return a.mean == b.mean && a.variance == b.variance && a.se_mean == b.se_mean &&
         a.se_variance == b.se_variance && a.count == b.count;
}

}  // namespace

TEST(SimConfig, Validation) {
  auto cfg = small_config();
  EXPECT_TRUE(validate(cfg).empty());
  cfg.runs = 50;
  EXPECT_FALSE(validate(cfg).empty());
  EXPECT_THROW(run_simulation(cfg), validation_error);
  cfg.runs = 1000;
  cfg.warmup_fraction = 1.0;
  EXPECT_FALSE(validate(cfg).empty());
}

TEST(Simulation, Reproducible) {
  const auto a = run_simulation(small_config());
  const auto b = run_simulation(small_config());
  ASSERT_EQ(a.per_station.size(), b.per_station.size());
  for (std::size_t n = 0; n < a.per_station.size(); ++n) {
    EXPECT_TRUE(same(a.per_station[n].queue, b.per_station[n].queue));
    EXPECT_TRUE(same(a.per_station[n].wait, b.per_station[n].wait));
    EXPECT_TRUE(same(a.per_station[n].headway, b.per_station[n].headway));
  }
  const auto c = run_simulation(small_config(3000, 43));
  EXPECT_NE(a.station(4).queue.mean, c.station(4).queue.mean);
}

TEST(Simulation, MoreRunsLeaveEarlierVehiclesUntouched) {
  std::vector<VehicleEvent> shorter, longer;
  run_simulation(small_config(500), [&](const VehicleEvent& e) { shorter.push_back(e); });
  run_simulation(small_config(900), [&](const VehicleEvent& e) { longer.push_back(e); });
  ASSERT_LT(shorter.size(), longer.size());
  for (std::size_t i = 0; i < shorter.size(); ++i) {
    EXPECT_EQ(shorter[i].departure, longer[i].departure);
    EXPECT_EQ(shorter[i].boarded, longer[i].boarded);
  }
}

TEST(Simulation, NoOvertakingAndFlowConservation) {
  const auto cfg = small_config(4000);
  std::map<std::size_t, double> last;
  std::map<std::size_t, double> last_raw;
  const int cap = cfg.scenario.route.capacity;
  run_simulation(cfg, [&](const VehicleEvent& e) {
    EXPECT_EQ(e.load_out, e.load_in - e.alighted + e.boarded);
    EXPECT_GE(e.load_out, 0);
    EXPECT_LE(e.load_out, cap);
    EXPECT_GE(e.alighted, 0);
    EXPECT_LE(e.alighted, e.load_in);
    EXPECT_LE(e.boarded, e.queue);
    EXPECT_GE(e.headway, 0.0);
    EXPECT_GE(e.departure, e.raw_time);
    if (last.count(e.station)) {
      EXPECT_GE(e.departure, last[e.station]);
      // Bunching only ever shortens the gap relative to the raw schedule.
      EXPECT_LE(e.headway, std::max(0.0, e.raw_time - last_raw[e.station]) + 1e-9);
    }
    last[e.station] = e.departure;
    last_raw[e.station] = e.raw_time;
  });
}

TEST(Simulation, RealizedHeadwayMeanIsAdjustedHeadway) {
  const auto cfg = small_config(20000);
  const auto s = run_simulation(cfg);
  const double h_adj = adjusted_headway(cfg.scenario);
  for (const auto& st : s.per_station) {
    EXPECT_NEAR(st.headway.mean, h_adj, 4.0 * st.headway.se_mean + 1e-9) << st.station;
  }
}

// The running maximum introduces dependence between neighbouring
// headways, so the realized variance sits at or below that of
// max(0, H + I - I') for independent incident totals.
TEST(Simulation, RealizedHeadwayVarianceBoundedByIndependentTruncation) {
  const auto cfg = small_config(20000);
  const auto s = run_simulation(cfg);
  const Scenario& sc = cfg.scenario;
  rng::Engine g(99);
  for (std::size_t n : {2u, 4u, 8u}) {
    const double T = travel_time_to(sc.route, n);
    oracle::Moments mc;
    for (int i = 0; i < 200000; ++i) {
      const double h = adjusted_headway(sc) +
                       sample_incident_duration(g, sc.incidents.gamma, sc.incidents.theta, T) -
                       sample_incident_duration(g, sc.incidents.gamma, sc.incidents.theta, T);
      mc.add(std::max(0.0, h));
    }
    EXPECT_LE(s.station(n).headway.variance, mc.variance() * 1.05) << n;
    EXPECT_GE(s.station(n).headway.variance, mc.variance() * 0.8) << n;
  }
}

TEST(Simulation, NoIncidentsWaitIsHalfHeadway) {
  for (double h : {4.0, 6.0}) {
    auto cfg = small_config(10000);
    cfg.scenario.incidents.gamma = 0.0;
    cfg.scenario.route.nominal_headway = h;
    const auto s = run_simulation(cfg);
    for (std::size_t n : {1u, 2u, 3u, 8u, 9u}) {
      const auto& w = s.station(n).wait;
      EXPECT_NEAR(w.mean, h / 2.0, 3.0 * w.se_mean + 1e-3) << "H=" << h << " station " << n;
    }
  }
}

TEST(Simulation, StationWithoutDemand) {
  const auto s = run_simulation(small_config(1000));
  EXPECT_EQ(s.station(10).queue.mean, 0.0);
  EXPECT_EQ(s.station(10).wait.count, 0);
  EXPECT_EQ(s.warmup_runs, 100);
  EXPECT_EQ(s.station(1).queue.count, 900);
}

TEST(Compare, TheoryAgainstItself) {
  const auto r = analyze_route(reference_scenario());
  std::vector<SimRow> sim;
  for (const auto& t : theory_rows(r)) {
    const double lambda = r.station(t.station).lambda;
    sim.push_back({t.station, lambda, Estimate{t.eq, t.varq, 0.0, 0.0, 1},
                   lambda > 0 ? Estimate{t.ew, t.varw, 0.0, 0.0, 1} : Estimate{}});
  }
  const auto c = compare(r.label, theory_rows(r), sim);
  EXPECT_TRUE(c.all_pass());
  for (const auto& row : c.rows) {
    if (row.station == 10 && (row.metric == "e_wait" || row.metric == "sd_wait"))
      EXPECT_EQ(row.status, CompareStatus::not_applicable);
    else
      EXPECT_EQ(row.abs_gap, 0.0);
  }
}

TEST(Compare, UnstableStationsExcluded) {
  std::vector<TheoryRow> th{{1, true, 2.0, 4.0, 1.0, 1.0}, {2, false, kUnbounded, kUnbounded, kUnbounded, kUnbounded}};
  std::vector<SimRow> sim{{1, 0.5, {2.1, 4.2, 0.01, 0.1, 100}, {1.02, 1.0, 0.01, 0.1, 100}},
                          {2, 0.5, {90.0, 9.0, 1.0, 1.0, 100}, {50.0, 9.0, 1.0, 1.0, 100}}};
  const auto c = compare("x", th, sim);
  EXPECT_TRUE(c.all_pass());
  EXPECT_EQ(c.rows[4].status, CompareStatus::excluded_unstable);
  EXPECT_STREQ(to_string(c.rows[4].status), "excluded (unstable)");
}

TEST(Compare, GapsBeyondToleranceFail) {
  std::vector<TheoryRow> th{{1, true, 10.0, 4.0, 1.0, 1.0}};
  std::vector<SimRow> sim{{1, 0.5, {8.0, 4.0, 0.01, 0.1, 100}, {1.0, 1.0, 0.01, 0.1, 100}}};
  const auto c = compare("x", th, sim);
  EXPECT_FALSE(c.all_pass());
  EXPECT_EQ(c.rows[0].status, CompareStatus::fail);
  EXPECT_NEAR(c.rows[0].rel_gap, 0.25, 1e-15);
  EXPECT_NEAR(c.rows[0].allowed, 0.64, 1e-15);
}

TEST(Compare, StationCountMismatch) {
  EXPECT_THROW(compare("x", std::vector<TheoryRow>(2), std::vector<SimRow>(3)), validation_error);
}
