#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "transitq/error.hpp"
#include "transitq/headway.hpp"
#include "transitq/model.hpp"
#include "transitq/random.hpp"
#include "transitq/solver.hpp"

namespace transitq {

struct SimConfig {
  Scenario scenario;
  std::int64_t runs = 50000;
  double warmup_fraction = 0.10;
  std::uint64_t seed = 42;
};

inline std::vector<Violation> validate(const SimConfig& cfg) {
  auto out = validate(cfg.scenario);
  if (cfg.runs < 100) out.push_back({"runs", "runs must be at least 100"});
  if (!(cfg.warmup_fraction >= 0.0 && cfg.warmup_fraction < 1.0))
    out.push_back({"warmup", "warmup fraction must lie in [0, 1)"});
  return out;
}

// Sample mean/variance with batch-means standard errors.
struct Estimate {
  double mean = 0.0;
  double variance = 0.0;
  double se_mean = 0.0;
  double se_variance = 0.0;
  std::int64_t count = 0;

  double sd() const { return std::sqrt(variance); }
  // Delta method: se(sd) = se(var) / (2 sd).
  double se_sd() const { return variance > 0.0 ? se_variance / (2.0 * sd()) : 0.0; }
};

struct SimStationStats {
  std::size_t station = 0;
  double lambda = 0.0;
  Estimate queue;    // queue length seen by each arriving vehicle
  Estimate wait;     // individual waits of boarded passengers
  Estimate headway;  // realized departure headways
};

struct SimStats {
  std::string label;
  std::int64_t runs = 0;
  std::int64_t warmup_runs = 0;
  std::uint64_t seed = 0;
  std::vector<SimStationStats> per_station;

  const SimStationStats& station(std::size_t n) const { return per_station.at(n - 1); }
};

// One vehicle at one station, as seen by an optional observer.
struct VehicleEvent {
  std::int64_t vehicle = 0;  // 1-based
  std::size_t station = 0;   // 1-based
  double raw_time = 0.0;     // dispatch + travel + incident delay
  double departure = 0.0;    // after no-overtaking
  double headway = 0.0;      // departure minus predecessor's departure
  int queue = 0;             // waiting passengers when the vehicle arrives
  int load_in = 0;
  int alighted = 0;
  int boarded = 0;
  int load_out = 0;
};

struct NoObserver {
  void operator()(const VehicleEvent&) const noexcept {}
};

namespace detail {

// Sums per record, grouped into consecutive batches for the standard error.
class BatchAccumulator {
 public:
  void add_record(double sum, double sum_sq, std::int64_t n) {
    records_.push_back({sum, sum_sq, n});
  }

  Estimate finish(std::size_t max_batches = 50) const {
    Estimate e;
    double s = 0.0, ss = 0.0;
    for (const auto& r : records_) {
      s += r.sum;
      ss += r.sum_sq;
      e.count += r.n;
    }
    if (e.count == 0) return e;
    const double n = static_cast<double>(e.count);
    e.mean = s / n;
    e.variance = e.count > 1 ? std::max(0.0, (ss - n * e.mean * e.mean) / (n - 1.0)) : 0.0;

    const std::size_t batches = std::clamp<std::size_t>(records_.size() / 10, 2, max_batches);
    if (records_.size() < 2 * batches) return e;
    const std::size_t per = records_.size() / batches;
    std::vector<double> means, vars;
    for (std::size_t b = 0; b < batches; ++b) {
      double bs = 0.0, bss = 0.0;
      std::int64_t bn = 0;
      for (std::size_t i = b * per; i < (b + 1) * per; ++i) {
        bs += records_[i].sum;
        bss += records_[i].sum_sq;
        bn += records_[i].n;
      }
      if (bn < 2) continue;
      const double m = bs / static_cast<double>(bn);
      means.push_back(m);
      vars.push_back((bss - static_cast<double>(bn) * m * m) / static_cast<double>(bn - 1));
    }
    auto se = [](const std::vector<double>& v) {
      if (v.size() < 2) return 0.0;
      double m = 0.0;
      for (double x : v) m += x;
      m /= static_cast<double>(v.size());
      double q = 0.0;
      for (double x : v) q += (x - m) * (x - m);
      return std::sqrt(q / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    };
    e.se_mean = se(means);
    e.se_variance = se(vars);
    return e;
  }

 private:
  struct Record {
    double sum;
    double sum_sq;
    std::int64_t n;
  };
  std::vector<Record> records_;
};

}  // namespace detail

// Discrete-event run of `runs` vehicles through every station.
//
// Vehicle l is dispatched at (l-1) H_adj. Its incident delay is cumulative
// along the route (each segment adds a compound Poisson-exponential amount),
// and it may not leave a station before its predecessor. Passengers arrive
// as a Poisson process, wait FCFS, and board up to the free capacity after
// Binomial alighting. All randomness for vehicle l comes from its own
// substream.
template <typename Observer = NoObserver>
SimStats run_simulation(const SimConfig& cfg, Observer&& observe = {}) {
  if (auto v = validate(cfg); !v.empty()) throw validation_error(v.front().message);
  const Scenario& sc = cfg.scenario;
  const RouteConfig& route = sc.route;
  const std::size_t stations = route.size();
  const double h_adj = adjusted_headway(sc);
  const double gamma = sc.incidents.gamma;
  const double theta = sc.incidents.theta;
  const int cap = route.capacity;
  const auto warmup = static_cast<std::int64_t>(std::floor(cfg.warmup_fraction * cfg.runs));

  std::vector<double> segment(stations);
  for (std::size_t n = 1; n <= stations; ++n)
    segment[n - 1] = travel_time_to(route, n) - (n > 1 ? travel_time_to(route, n - 1) : 0.0);

  std::vector<double> last_departure(stations, 0.0);
  std::vector<std::deque<double>> queues(stations);
  std::vector<detail::BatchAccumulator> queue_acc(stations), wait_acc(stations),
      headway_acc(stations);

  for (std::int64_t l = 1; l <= cfg.runs; ++l) {
    rng::Engine gen = rng::substream(cfg.seed, static_cast<std::uint64_t>(l));
    const bool record = l > warmup;
    const double dispatch = static_cast<double>(l - 1) * h_adj;
    double clock = dispatch;  // raw (overtaking-free ignored) position in time
    int load = 0;

    for (std::size_t n = 0; n < stations; ++n) {
      clock += segment[n] + sample_incident_duration(gen, gamma, theta, segment[n]);
      const double departure = l == 1 ? clock : std::max(clock, last_departure[n]);
      auto& queue = queues[n];

      VehicleEvent ev;
      ev.vehicle = l;
      ev.station = n + 1;
      ev.raw_time = clock;
      ev.departure = departure;
      ev.headway = l == 1 ? 0.0 : departure - last_departure[n];

      // Arrivals since the previous departure (none before the first vehicle).
      const double lambda = route.arrival_rate(n + 1);
      if (l > 1 && ev.headway > 0.0 && lambda > 0.0) {
        const auto k = rng::poisson(gen, lambda * ev.headway);
        std::vector<double> times(static_cast<std::size_t>(k));
        for (auto& t : times) t = last_departure[n] + rng::uniform01(gen) * ev.headway;
        std::sort(times.begin(), times.end());
        queue.insert(queue.end(), times.begin(), times.end());
      }
      ev.queue = static_cast<int>(queue.size());
      ev.load_in = load;
      ev.alighted = rng::binomial(gen, load, route.alighting_prob(n + 1));
      load -= ev.alighted;
      ev.boarded = std::min(cap - load, ev.queue);

      double ws = 0.0, wss = 0.0;
      for (int i = 0; i < ev.boarded; ++i) {
        const double w = departure - queue.front();
        queue.pop_front();
        ws += w;
        wss += w * w;
      }
      load += ev.boarded;
      ev.load_out = load;

      if (record) {
        const double q = ev.queue;
        queue_acc[n].add_record(q, q * q, 1);
        if (ev.boarded > 0 || lambda > 0.0) wait_acc[n].add_record(ws, wss, ev.boarded);
        headway_acc[n].add_record(ev.headway, ev.headway * ev.headway, 1);
      }
      observe(ev);
      last_departure[n] = departure;
    }
  }

  SimStats out;
  out.label = sc.label;
  out.runs = cfg.runs;
  out.warmup_runs = warmup;
  out.seed = cfg.seed;
  for (std::size_t n = 0; n < stations; ++n) {
    SimStationStats st;
    st.station = n + 1;
    st.lambda = route.arrival_rate(n + 1);
    st.queue = queue_acc[n].finish();
    st.wait = wait_acc[n].finish();
    st.headway = headway_acc[n].finish();
    out.per_station.push_back(st);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Theory vs simulation

struct Tolerances {
  double mean_rel = 0.08;
  double queue_abs = 0.3;   // passengers
  double wait_abs = 0.2;    // minutes
  double sd_rel = 0.12;
};

enum class CompareStatus { pass, fail, excluded_unstable, not_applicable };

inline const char* to_string(CompareStatus s) {
  switch (s) {
    case CompareStatus::pass: return "pass";
    case CompareStatus::fail: return "fail";
    case CompareStatus::excluded_unstable: return "excluded (unstable)";
    case CompareStatus::not_applicable: return "n/a";
  }
  return "?";
}

struct ComparisonRow {
  std::size_t station = 0;
  std::string metric;  // e_queue, sd_queue, e_wait, sd_wait
  double theory = 0.0;
  double sim = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;
  double se = 0.0;
  double allowed = 0.0;
  CompareStatus status = CompareStatus::pass;
};

struct Comparison {
  std::string label;
  std::vector<ComparisonRow> rows;

  bool all_pass() const {
    return std::none_of(rows.begin(), rows.end(),
                        [](const ComparisonRow& r) { return r.status == CompareStatus::fail; });
  }
};

// Per-station theory values as they appear in reports (possibly read back
// from a file): moments plus stability.
struct TheoryRow {
  std::size_t station = 0;
  bool stable = true;
  double eq = 0.0, varq = 0.0, ew = 0.0, varw = 0.0;
};

struct SimRow {
  std::size_t station = 0;
  double lambda = 0.0;
  Estimate queue, wait;
};

inline std::vector<TheoryRow> theory_rows(const RouteReport& r) {
  std::vector<TheoryRow> out;
  for (const auto& m : r.per_station) out.push_back({m.station, m.stable, m.eq, m.varq, m.ew, m.varw});
  return out;
}

inline std::vector<SimRow> sim_rows(const SimStats& s) {
  std::vector<SimRow> out;
  for (const auto& m : s.per_station) out.push_back({m.station, m.lambda, m.queue, m.wait});
  return out;
}

// Relative gaps are taken against the simulated value; means also pass
// within an absolute floor.
inline Comparison compare(const std::string& label, const std::vector<TheoryRow>& theory,
                          const std::vector<SimRow>& sim, const Tolerances& tol = {}) {
  if (theory.size() != sim.size())
    throw validation_error("station count mismatch: theory has " + std::to_string(theory.size()) +
                           ", simulation has " + std::to_string(sim.size()));
  Comparison out;
  out.label = label;
  for (std::size_t i = 0; i < theory.size(); ++i) {
    const auto& t = theory[i];
    const auto& s = sim[i];
    auto add = [&](const char* metric, double tv, double sv, double se, double floor, double rel,
                   bool applicable) {
      ComparisonRow row;
      row.station = t.station;
      row.metric = metric;
      row.theory = tv;
      row.sim = sv;
      row.se = se;
      if (!t.stable) {
        row.status = CompareStatus::excluded_unstable;
      } else if (!applicable || std::isnan(tv)) {
        row.status = CompareStatus::not_applicable;
      } else {
        row.abs_gap = std::fabs(tv - sv);
        row.rel_gap = sv != 0.0 ? row.abs_gap / std::fabs(sv) : (row.abs_gap == 0.0 ? 0.0 : kUnbounded);
        row.allowed = std::max(floor, rel * std::fabs(sv));
        row.status = row.abs_gap <= row.allowed ? CompareStatus::pass : CompareStatus::fail;
      }
      out.rows.push_back(row);
    };
    const bool waits = s.lambda > 0.0 && s.wait.count > 0;
    add("e_queue", t.eq, s.queue.mean, s.queue.se_mean, tol.queue_abs, tol.mean_rel, true);
    add("sd_queue", std::sqrt(t.varq), s.queue.sd(), s.queue.se_sd(), 0.0, tol.sd_rel, true);
    add("e_wait", t.ew, s.wait.mean, s.wait.se_mean, tol.wait_abs, tol.mean_rel, waits);
    add("sd_wait", std::sqrt(t.varw), s.wait.sd(), s.wait.se_sd(), 0.0, tol.sd_rel, waits);
  }
  return out;
}

inline Comparison compare(const RouteReport& report, const SimStats& stats, const Tolerances& tol = {}) {
  return compare(report.label, theory_rows(report), sim_rows(stats), tol);
}

}  // namespace transitq
