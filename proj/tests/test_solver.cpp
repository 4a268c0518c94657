#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "transitq/solver.hpp"

using namespace transitq;

namespace {

const RouteReport& reference_report() {
  static const RouteReport r = analyze_route(reference_scenario());
  return r;
}

const RouteReport& h4_report() {
  static const RouteReport r = analyze_route(reference_scenario_h4());
  return r;
}

// Stationary queue of the brute-force chain for one analysed station.
oracle::QueueOracle markov_for(const StationMetrics& m) {
  const auto sd = std::sqrt(std::max(m.varq, 1.0));
  const int states = static_cast<int>(m.eq + 30.0 * sd) + 60;
  const auto y = oracle::arrival_pmf(m.lambda, m.headway, states);
  return oracle::stationary_queue(m.space, y, states);
}

// Coefficients of prod (1 - z / z_i), expanded in extended precision.
std::vector<double> eta_coefficients(const RootSet& roots) {
  using lcplx = std::complex<long double>;
  std::vector<lcplx> c{1.0L};
  for (cplx zi : roots.roots) {
    c.push_back(0.0L);
    const lcplx inv = 1.0L / lcplx(zi.real(), zi.imag());
    for (std::size_t k = c.size() - 1; k > 0; --k) c[k] -= c[k - 1] * inv;
  }
  std::vector<double> out;
  for (const auto& v : c) out.push_back(static_cast<double>(v.real()));
  return out;
}

Scenario small_capacity_scenario(int capacity, double demand) {
  Scenario sc = reference_scenario();
  sc.route.capacity = capacity;
  sc.route.demand_factor = demand;
  sc.label = "small";
  return sc;
}

}  // namespace

// ---------------------------------------------------------------------------
// Matrices and distributions

TEST(AlightingMatrix, Extremes) {
  const Matrix id = alighting_matrix(0.0, 5);
  const Matrix all = alighting_matrix(1.0, 5);
  for (std::size_t i = 0; i <= 5; ++i)
    for (std::size_t j = 0; j <= 5; ++j) {
      EXPECT_EQ(id(i, j), i == j ? 1.0 : 0.0);
      EXPECT_EQ(all(i, j), j == 0 ? 1.0 : 0.0);
    }
}

TEST(AlightingMatrix, BinomialRowsSumToOne) {
  const Matrix a = alighting_matrix(0.5, 2);
  EXPECT_DOUBLE_EQ(a(2, 0), 0.25);
  EXPECT_DOUBLE_EQ(a(2, 1), 0.5);
  EXPECT_DOUBLE_EQ(a(2, 2), 0.25);
  const Matrix b = alighting_matrix(0.37, 34);
  for (std::size_t i = 0; i <= 34; ++i) {
    EXPECT_NEAR(b.row_sum(i), 1.0, 1e-13);
    for (std::size_t j = i + 1; j <= 34; ++j) EXPECT_EQ(b(i, j), 0.0);
  }
  EXPECT_THROW(alighting_matrix(1.5, 3), validation_error);
}

TEST(StepAlighting, EmptyVehicleAndFullAlighting) {
  const auto first = step_alighting(DiscreteDist::point_mass(34, 0), 0.3);
  EXPECT_EQ(first.remaining[0], 1.0);
  EXPECT_EQ(first.space[34], 1.0);
  const auto flush = step_alighting(DiscreteDist(std::vector<double>{0.1, 0.2, 0.3, 0.4}), 1.0);
  EXPECT_EQ(flush.space[3], 1.0);
}

TEST(StepAlighting, HandExample) {
  const auto st = step_alighting(DiscreteDist(std::vector<double>{0.0, 0.0, 1.0}), 0.5);
  EXPECT_DOUBLE_EQ(st.remaining[0], 0.25);
  EXPECT_DOUBLE_EQ(st.remaining[1], 0.5);
  EXPECT_DOUBLE_EQ(st.remaining[2], 0.25);
  EXPECT_DOUBLE_EQ(st.space[0], 0.25);
  EXPECT_DOUBLE_EQ(st.space[1], 0.5);
}

TEST(BoardingMatrix, HandExample) {
  const Matrix b = boarding_matrix(QueueFront{{0.3, 0.5}}, 2);
  EXPECT_DOUBLE_EQ(b(0, 0), 0.3);
  EXPECT_DOUBLE_EQ(b(0, 1), 0.5);
  EXPECT_NEAR(b(0, 2), 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(b(1, 1), 0.3);
  EXPECT_NEAR(b(1, 2), 0.7, 1e-15);
  EXPECT_DOUBLE_EQ(b(2, 2), 1.0);
  EXPECT_EQ(b(1, 0), 0.0);
}

TEST(BoardingMatrix, EmptyQueueAndUnstable) {
  const Matrix keep = boarding_matrix(QueueFront{{1.0, 0.0, 0.0}}, 3);
  for (std::size_t i = 0; i <= 3; ++i) EXPECT_EQ(keep(i, i), 1.0);
  const Matrix full = boarding_matrix(QueueFront{{0.0, 0.0, 0.0}}, 3);
  for (std::size_t i = 0; i <= 3; ++i) EXPECT_EQ(full(i, 3), 1.0);
  EXPECT_THROW(boarding_matrix(QueueFront{{1.0}}, 3), validation_error);
}

TEST(DistMoments, HandExamples) {
  const auto pm = dist_moments(DiscreteDist::point_mass(7, 7));
  EXPECT_EQ(pm.mean, 7.0);
  EXPECT_EQ(pm.central2, 0.0);
  const auto u = dist_moments(DiscreteDist(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}));
  EXPECT_NEAR(u.mean, 1.0, 1e-15);
  EXPECT_NEAR(u.central2, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(u.central3, 0.0, 1e-15);
  const auto two = dist_moments(DiscreteDist(std::vector<double>{0.5, 0.0, 0.5}));
  EXPECT_DOUBLE_EQ(two.mean, 1.0);
  EXPECT_DOUBLE_EQ(two.central2, 1.0);
}

TEST(DiscreteDist, ClampsRoundoffRejectsGarbage) {
  const DiscreteDist d(std::vector<double>{-5e-13, 0.5, 0.5});
  EXPECT_EQ(d[0], 0.0);
  EXPECT_THROW(DiscreteDist(std::vector<double>{-1e-6, 0.5, 0.5 + 1e-6}), numeric_error);
  EXPECT_THROW(DiscreteDist(std::vector<double>{0.2, 0.2}), numeric_error);
}

TEST(Utilization, Cases) {
  const auto pm = DiscreteDist::point_mass(34, 34);
  EXPECT_EQ(utilization(pm, {0.0, 0.0, 0.0}).rho, 0.0);
  EXPECT_TRUE(utilization(pm, {0.0, 0.0, 0.0}).stable);
  EXPECT_FALSE(utilization(pm, {34.0, 40.0, 0.0}).stable);
  const auto none = utilization(DiscreteDist::point_mass(34, 0), {1.0, 1.0, 1.0});
  EXPECT_FALSE(none.stable);
  EXPECT_TRUE(std::isinf(none.rho));
}

TEST(EffectiveCapacity, TrimsNegligibleTop) {
  EXPECT_EQ(effective_capacity(DiscreteDist(std::vector<double>{0.5, 0.5, 0.0, 1e-13})), 1);
  EXPECT_EQ(effective_capacity(DiscreteDist::point_mass(10, 10)), 10);
}

// ---------------------------------------------------------------------------
// First station: empty vehicles, so rho = lambda E[H] / C.

TEST(Analyze, FirstStationUtilization) {
  const auto& m = reference_report().station(1);
  const double eh = truncated_headway_moments(m.headway).mean;
  EXPECT_NEAR(m.rho, 0.6 * eh / 34.0, 1e-14);
  EXPECT_NEAR(m.rho, 0.12706, 1e-5);
}

TEST(Analyze, ReferenceProfile) {
  const auto& r = reference_report();
  ASSERT_EQ(r.size(), 10u);
  for (const auto& m : r.per_station) EXPECT_TRUE(m.stable) << m.station;
  const auto& last = r.station(10);
  EXPECT_EQ(last.eq, 0.0);
  EXPECT_TRUE(std::isnan(last.ew));
  // The busiest stop, not 2 or 8, carries the longest queue.
  std::size_t peak = 1;
  for (std::size_t n = 2; n <= 10; ++n)
    if (r.station(n).eq > r.station(peak).eq) peak = n;
  EXPECT_EQ(peak, 4u);
}

// ---------------------------------------------------------------------------
// Brute-force Markov chain oracle

class MarkovOracle : public ::testing::TestWithParam<std::pair<int, std::size_t>> {};

TEST_P(MarkovOracle, MomentsAndFrontMatchChain) {
  const auto [preset, n] = GetParam();
  const auto& m = (preset == 6 ? reference_report() : h4_report()).station(n);
  if (m.lambda == 0.0) GTEST_SKIP();
  const auto chain = markov_for(m);
  ASSERT_LT(chain.truncated_mass, 1e-14);
  EXPECT_NEAR(m.eq, chain.mean, 1e-8 * std::max(1.0, chain.mean));
  EXPECT_NEAR(m.varq, chain.variance, 1e-7 * std::max(1.0, chain.variance));
  for (int k = 0; k < m.queue_front.capacity(); ++k)
    EXPECT_NEAR(m.queue_front.q[k], chain.pi[k], 1e-10) << "k=" << k;
}

INSTANTIATE_TEST_SUITE_P(BothPresets, MarkovOracle,
                         ::testing::Values(std::pair{6, 1u}, std::pair{6, 2u}, std::pair{6, 3u},
                                           std::pair{6, 4u}, std::pair{6, 5u}, std::pair{6, 6u},
                                           std::pair{6, 7u}, std::pair{6, 8u}, std::pair{6, 9u},
                                           std::pair{4, 2u}, std::pair{4, 4u}, std::pair{4, 5u},
                                           std::pair{4, 8u}));

// Values of the chain above, frozen so a regression shows up even if the
// oracle itself changes.
TEST(FrozenOracle, ReferenceStationFour) {
  const auto& m = reference_report().station(4);
  EXPECT_NEAR(m.eq, 26.00830109, 1e-7);
  EXPECT_NEAR(m.varq, 288.133228, 1e-5);
}

// ---------------------------------------------------------------------------
// Internal consistency

TEST(QueueMoments, CentralAndRawFormsAgree) {
  for (const auto* r : {&reference_report(), &h4_report()}) {
    for (const auto& m : r->per_station) {
      if (m.lambda == 0.0 || !m.stable) continue;
      const auto s = m.space.truncated(m.effective_capacity);
      const auto sm = dist_moments(s);
      const auto a = queue_moments(sm, m.arrivals, m.roots, m.effective_capacity);
      const auto b = queue_moments_raw(sm, m.arrivals, m.roots, m.effective_capacity);
      EXPECT_NEAR(a.mean, b.mean, 1e-9 * std::max(1.0, a.mean));
      EXPECT_NEAR(a.variance, b.variance, 1e-8 * std::max(1.0, a.variance));
    }
  }
}

TEST(QueueFront, NormalizationIdentity) {
  for (const auto& m : reference_report().per_station) {
    if (m.lambda == 0.0) continue;
    const auto s = m.space.truncated(m.effective_capacity);
    QueueFront f = m.queue_front;
    f.q.resize(static_cast<std::size_t>(m.effective_capacity));
    EXPECT_NEAR(normalization_residual(s, f), m.space_moments.mean - m.arrivals.mean, 1e-8);
  }
}

TEST(QueueFront, ContourMatchesTriangularOnSmallCapacity) {
  const auto r = analyze_route(small_capacity_scenario(8, 0.2));
  int checked = 0;
  for (const auto& m : r.per_station) {
    if (!m.stable || m.lambda == 0.0) continue;
    const auto s = m.space.truncated(m.effective_capacity);
    const auto tri = queue_front_triangular(s, m.roots, m.arrivals);
    for (std::size_t k = 0; k < tri.size(); ++k) EXPECT_NEAR(m.queue_front.q[k], tri[k], 1e-10);
    ++checked;
  }
  EXPECT_GE(checked, 5);
}

TEST(QueueFront, FixedCapacityReduction) {
  // Station 1 sees empty vehicles: s is a point mass at C.
  const auto& m = reference_report().station(1);
  ASSERT_EQ(m.space[34], 1.0);
  const auto eta = eta_coefficients(m.roots);
  std::vector<cplx> others(m.roots.roots.begin() + 1, m.roots.roots.end());
  cplx prod = 1.0;
  for (cplx z : others) prod *= z / (z - 1.0);
  const double q0 = (34.0 - m.arrivals.mean) * prod.real();
  EXPECT_NEAR(m.queue_front.q[0], q0, 1e-12);
  // Expanding the root product loses ~1e-10 to cancellation, which is
  // the accuracy of this oracle rather than of the front.
  for (int k = 0; k < 34; ++k) EXPECT_NEAR(m.queue_front.q[k], q0 * eta[k], 1e-9) << k;
}

TEST(QueueFront, SingleSeatIsIdleProbability) {
  Scenario sc = reference_scenario();
  sc.route.capacity = 1;
  sc.route.stations = {{0.1, 0.0}, {0.05, 0.6}};
  sc.route.demand_factor = 1.0;
  const auto r = analyze_route(sc);
  const auto& m = r.station(1);
  EXPECT_NEAR(m.queue_front.q[0], 1.0 - m.arrivals.mean, 1e-10);
  EXPECT_NEAR(m.queue_front.q[0], 1.0 - m.rho, 1e-10);
  const auto chain = markov_for(m);
  EXPECT_NEAR(m.eq, chain.mean, 1e-9);
  EXPECT_NEAR(m.varq, chain.variance, 1e-8);
  const auto chain2 = markov_for(r.station(2));
  EXPECT_NEAR(r.station(2).eq, chain2.mean, 1e-9);
}

TEST(WaitMoments, UncongestedStationsFollowRenewalFormula) {
  int checked = 0;
  for (const auto* r : {&reference_report(), &h4_report()}) {
    for (const auto& m : r->per_station) {
      if (m.lambda == 0.0 || m.rho >= 0.3 || m.queue_front.mass() <= 0.999) continue;
      const auto h = truncated_headway_moments(m.headway);
      EXPECT_NEAR(m.ew, 0.5 * (h.mean + h.variance / h.mean), 0.02 * m.ew) << m.station;
      ++checked;
    }
  }
  EXPECT_GE(checked, 4);
}

// Deterministic headways and nobody left behind: a uniform arrival waits
// half a headway. A full front (sum q_k ~ 1) is not enough on its own,
// since passengers are also left behind when the queue exceeds the free
// space; busy stations are skipped.
TEST(WaitMoments, NoIncidentsGiveHalfHeadway) {
  for (double h : {4.0, 6.0}) {
    Scenario sc = reference_scenario();
    sc.incidents.gamma = 0.0;
    sc.route.nominal_headway = h;
    const auto r = analyze_route(sc);
    for (const auto& m : r.per_station) {
      if (m.lambda == 0.0 || m.rho >= 0.3) continue;
      EXPECT_NEAR(m.ew, h / 2.0, 5e-4 * h) << "H=" << h << " station " << m.station;
    }
  }
}

TEST(WaitMoments, NoIncidentsBusyStationWaitsLonger) {
  Scenario sc = reference_scenario();
  sc.incidents.gamma = 0.0;
  const auto r = analyze_route(sc);
  EXPECT_GT(r.station(5).queue_front.mass(), 0.999);
  EXPECT_GT(r.station(5).ew, 3.05);
  EXPECT_NEAR(r.station(5).ew, 3.0915, 1e-3);
}

TEST(WaitMoments, NotApplicableWithoutArrivals) {
  const auto w = wait_moments({1.0, 1.0}, {0.0, 0.0, 0.0}, 0.0);
  EXPECT_TRUE(std::isnan(w.mean));
  const auto u = wait_moments({kUnbounded, kUnbounded}, {1.0, 1.0, 1.0}, 1.0);
  EXPECT_TRUE(std::isinf(u.mean));
}

// ---------------------------------------------------------------------------
// Pipeline edge cases

TEST(Analyze, NoDemandAnywhere) {
  Scenario sc = reference_scenario();
  for (auto& st : sc.route.stations) st.lambda = 0.0;
  const auto r = analyze_route(sc);
  for (const auto& m : r.per_station) {
    EXPECT_EQ(m.rho, 0.0);
    EXPECT_EQ(m.eq, 0.0);
    EXPECT_EQ(m.load_out[0], 1.0);
  }
}

TEST(Analyze, UnstableBranch) {
  Scenario sc = reference_scenario();
  sc.incidents.theta = 0.5;
  const auto r = analyze_route(sc);
  for (const auto& m : r.per_station) {
    EXPECT_EQ(m.stable, m.rho < 1.0) << m.station;
    if (m.stable) continue;
    EXPECT_TRUE(std::isinf(m.eq));
    EXPECT_TRUE(std::isinf(m.ew));
    EXPECT_EQ(m.queue_front.mass(), 0.0);
    EXPECT_EQ(m.load_out[34], 1.0);
  }
  EXPECT_FALSE(r.station(4).stable);
  EXPECT_FALSE(r.station(5).stable);
  EXPECT_TRUE(r.station(8).stable);
}

TEST(MarkovOracleExtra, StationWithRootsInsideTheOval) {
  Scenario sc = reference_scenario();
  sc.incidents = {0.2, 0.5};
  sc.route.nominal_headway = 7.0;
  sc.route.demand_factor = 0.6;
  const auto r = analyze_route(sc);
  const auto& m = r.station(6);
  const auto chain = markov_for(m);
  EXPECT_NEAR(m.eq, chain.mean, 1e-8 * chain.mean);
  EXPECT_NEAR(m.varq, chain.variance, 1e-7 * chain.variance);
}

TEST(Analyze, RejectsInvalidScenario) {
  Scenario sc = reference_scenario();
  sc.incidents.theta = 0.0;
  EXPECT_THROW(analyze_route(sc), validation_error);
}

TEST(Analyze, LoadDistributionsStayValid) {
  for (const auto& m : reference_report().per_station) {
    double t = 0.0;
    for (double p : m.load_out.probs()) {
      EXPECT_GE(p, 0.0);
      t += p;
    }
    EXPECT_NEAR(t, 1.0, 1e-9);
  }
}
