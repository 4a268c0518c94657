#pragma once

// Subcommand implementations behind the transitq CLI. Each returns the
// process exit code: 0 ok, 1 tolerance failure, 2 bad input, 3 numeric
// failure.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "transitq/transitq.hpp"

namespace transitq::cli {

enum ExitCode : int { kOk = 0, kToleranceFailure = 1, kInputError = 2, kNumericError = 3 };

enum class Format { csv, json };

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw validation_error("unknown format '" + s + "' (expected csv or json)");
}

// Runs `body`, mapping exceptions onto exit codes with a message on `err`.
inline int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const root_finding_error& e) {
    err << "error: root finding failed: " << e.what() << '\n';
    return kNumericError;
  } catch (const numeric_error& e) {
    err << "error: " << e.what() << '\n';
    return kNumericError;
  } catch (const json::exception& e) {
    err << "error: bad JSON: " << e.what() << '\n';
    return kInputError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericError;
  }
}

inline void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_file(path, content);
  }
}

inline Scenario load_valid_scenario(const std::string& path) {
  Scenario sc = load_scenario(path);
  if (auto v = validate(sc); !v.empty()) {
    std::string msg = "invalid config " + path + ":";
    for (const auto& x : v) msg += "\n  " + x.field + ": " + x.message;
    throw validation_error(msg);
  }
  return sc;
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string config;
  std::string out;
  std::string format = "csv";
};

inline int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Format fmt = parse_format(a.format);
    const Scenario sc = load_valid_scenario(a.config);
    const RouteReport r = analyze_route(sc);
    emit(a.out, fmt == Format::csv ? report_csv(r) : report_json(r).dump(2) + "\n", out);
    return kOk;
  });
}

struct SimulateArgs {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::int64_t runs = 50000;
  std::uint64_t seed = 42;
  double warmup = 0.10;
};

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Format fmt = parse_format(a.format);
    SimConfig cfg{load_valid_scenario(a.config), a.runs, a.warmup, a.seed};
    if (auto v = validate(cfg); !v.empty()) throw validation_error(v.front().message);
    const SimStats s = run_simulation(cfg);
    emit(a.out, fmt == Format::csv ? stats_csv(s) : stats_json(s).dump(2) + "\n", out);
    return kOk;
  });
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string config;
  std::string param;
  std::string values;
  std::string out_dir;
  bool simulate = false;
  std::int64_t runs = 50000;
  std::uint64_t seed = 42;
  double warmup = 0.10;
  unsigned jobs = 0;  // 0: hardware concurrency
};

inline std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
               item.end());
    if (item.empty()) continue;
    const double v = parse_number(item);
    if (!std::isfinite(v)) throw validation_error("sweep values must be finite numbers");
    out.push_back(v);
  }
  return out;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads; the first exception
// (lowest index) is rethrown after all workers finish.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1)));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::string sweep_file_stem(std::size_t index, const std::string& param, double value) {
  std::string v = format_number(value);
  std::replace(v.begin(), v.end(), '.', 'p');
  std::replace(v.begin(), v.end(), '-', 'm');
  return std::to_string(index) + "_" + param + "_" + v;
}

// One report per value plus index.csv, which carries per-station means and
// the mean +/- 0.2 sd bands used for shaded sensitivity plots.
inline int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario base = load_valid_scenario(a.config);
    if (!is_sweep_parameter(a.param))
      throw validation_error("unknown sweep parameter '" + a.param +
                             "' (expected capacity, gamma, theta, nominal_headway or demand_factor)");
    const auto values = parse_value_list(a.values);
    if (values.empty()) throw validation_error("no sweep values given");
    const auto scenarios = expand_grid(base, a.param, values);
    for (const auto& sc : scenarios)
      if (auto v = validate(sc); !v.empty())
        throw validation_error(sc.label + ": " + v.front().message);
    if (a.simulate) {
      SimConfig probe{base, a.runs, a.warmup, a.seed};
      if (auto v = validate(probe); !v.empty()) throw validation_error(v.front().message);
    }
    std::filesystem::create_directories(a.out_dir);

    std::vector<RouteReport> reports(scenarios.size());
    std::vector<std::optional<SimStats>> sims(scenarios.size());
    parallel_for(scenarios.size(), a.jobs, [&](std::size_t i) {
      reports[i] = analyze_route(scenarios[i]);
      if (a.simulate) sims[i] = run_simulation(SimConfig{scenarios[i], a.runs, a.warmup, a.seed});
    });

    std::ostringstream index;
    index << "param,value,station,stable,rho,e_queue,sd_queue,e_queue_lo,e_queue_hi,e_wait,sd_wait,"
             "e_wait_lo,e_wait_hi";
    if (a.simulate) index << ",e_queue_sim,sd_queue_sim,e_wait_sim,sd_wait_sim";
    index << ",report,label\n";
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      const std::string stem = sweep_file_stem(i, a.param, values[i]);
      write_file((std::filesystem::path(a.out_dir) / (stem + ".csv")).string(), report_csv(reports[i]));
      if (sims[i])
        write_file((std::filesystem::path(a.out_dir) / (stem + "_sim.csv")).string(), stats_csv(*sims[i]));
      for (const auto& m : reports[i].per_station) {
        const double sdq = std::sqrt(m.varq), sdw = std::sqrt(m.varw);
        index << a.param << ',' << csv_cell(values[i]) << ',' << m.station << ','
              << (m.stable ? "true" : "false") << ',' << csv_cell(m.rho) << ',' << csv_cell(m.eq) << ','
              << csv_cell(sdq) << ',' << csv_cell(m.eq - 0.2 * sdq) << ',' << csv_cell(m.eq + 0.2 * sdq)
              << ',' << csv_cell(m.ew) << ',' << csv_cell(sdw) << ',' << csv_cell(m.ew - 0.2 * sdw)
              << ',' << csv_cell(m.ew + 0.2 * sdw);
        if (sims[i]) {
          const auto& s = sims[i]->station(m.station);
          const bool w = s.wait.count > 0;
          index << ',' << csv_cell(s.queue.mean) << ',' << csv_cell(s.queue.sd()) << ','
                << (w ? csv_cell(s.wait.mean) : "na") << ',' << (w ? csv_cell(s.wait.sd()) : "na");
        }
        index << ',' << stem << ".csv," << csv_quote(reports[i].label) << '\n';
      }
    }
    write_file((std::filesystem::path(a.out_dir) / "index.csv").string(), index.str());
    out << "wrote " << scenarios.size() << " report(s) to " << a.out_dir << '\n';
    return kOk;
  });
}

// ---------------------------------------------------------------------------

struct CompareArgs {
  std::string theory;
  std::string sim;
  std::string out;
  std::string format = "csv";
  Tolerances tol;
};

// A theory report may stand in for simulation output (zero standard error),
// which makes "theory vs itself" a meaningful smoke test.
inline SimFile parse_sim_or_theory(const std::string& text) {
  bool is_theory = false;
  if (looks_like_json(text)) {
    const json doc = json::parse(text);
    is_theory = doc.contains("stations") && !doc.at("stations").empty() &&
                doc.at("stations").front().contains("e_queue");
  } else {
    const CsvTable t = parse_csv(text);
    is_theory = t.has("e_queue") && !t.has("e_queue_sim");
  }
  if (!is_theory) return parse_sim(text);
  const TheoryFile th = parse_theory(text);
  SimFile f;
  f.label = th.label;
  for (const auto& r : th.rows) {
    const bool waits = std::isfinite(r.ew);
    f.rows.push_back({r.station, waits ? 1.0 : 0.0, Estimate{r.eq, r.varq, 0.0, 0.0, 1},
                      waits ? Estimate{r.ew, r.varw, 0.0, 0.0, 1} : Estimate{}});
  }
  return f;
}

inline int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Format fmt = parse_format(a.format);
    const TheoryFile th = parse_theory(read_file(a.theory));
    const SimFile sim = parse_sim_or_theory(read_file(a.sim));
    if (th.label != sim.label)
      throw validation_error("scenario labels differ: theory '" + th.label + "' vs simulation '" +
                             sim.label + "'");
    const Comparison c = compare(th.label, th.rows, sim.rows, a.tol);
    emit(a.out, fmt == Format::csv ? comparison_csv(c) : comparison_json(c).dump(2) + "\n", out);
    if (!c.all_pass()) {
      err << "comparison: some stations exceed the tolerances\n";
      return kToleranceFailure;
    }
    return kOk;
  });
}

// ---------------------------------------------------------------------------

struct RootsArgs {
  std::string config;
  std::size_t station = 1;
  std::string out;
};

inline int cmd_roots(const RootsArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario sc = load_valid_scenario(a.config);
    sc.route.check_station(a.station);
    DiscreteDist v = DiscreteDist::point_mass(sc.route.capacity, 0);
    for (std::size_t n = 1; n < a.station; ++n) v = analyze_station(sc, n, v).load_out;
    const StationMetrics m = analyze_station(sc, a.station, v);
    if (!m.stable)
      throw instability_error("station " + std::to_string(a.station) + " is unstable (rho = " +
                              format_number(m.rho) + "); no roots to report");
    const DiscreteDist s_eff = m.space.truncated(m.effective_capacity);
    emit(a.out, roots_csv(root_rows(m.roots, s_eff, ArrivalProcess{m.lambda, m.headway})), out);
    return kOk;
  });
}

}  // namespace transitq::cli
