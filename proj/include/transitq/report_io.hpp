#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "transitq/config_io.hpp"
#include "transitq/error.hpp"
#include "transitq/format.hpp"
#include "transitq/simulator.hpp"
#include "transitq/solver.hpp"

namespace transitq {

// CSV cells: 9 significant digits, "inf" for unbounded, "na" for
// not-applicable. JSON uses the string "inf" and null respectively.
inline std::string csv_cell(double v) { return std::isnan(v) ? "na" : format_number(v); }

inline json json_number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double number_from_json(const json& v) {
  if (v.is_null()) return kNotApplicable;
  if (v.is_string()) return parse_number(v.get<std::string>());
  if (v.is_number()) return v.get<double>();
  throw validation_error("expected a number, \"inf\" or null");
}

inline std::string csv_quote(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

// Header-indexed rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw validation_error("missing CSV column '" + std::string(name) + "'");
  }
  bool has(std::string_view name) const {
    for (const auto& h : header)
      if (h == name) return true;
    return false;
  }
};

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = csv_split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else {
      if (cells.size() != t.header.size())
        throw validation_error("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                               std::to_string(t.header.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw validation_error("empty CSV");
  return t;
}

inline bool looks_like_json(const std::string& text) {
  for (char c : text) {
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') continue;
    return c == '{';
  }
  return false;
}

// ---------------------------------------------------------------------------
// Route report

inline std::string report_csv(const RouteReport& r) {
  std::ostringstream out;
  out << "station,rho,stable,e_queue,var_queue,e_wait,var_wait,headway_mu,headway_sigma,zero_mass,label\n";
  for (const auto& m : r.per_station) {
    out << m.station << ',' << csv_cell(m.rho) << ',' << (m.stable ? "true" : "false") << ','
        << csv_cell(m.eq) << ',' << csv_cell(m.varq) << ',' << csv_cell(m.ew) << ','
        << csv_cell(m.varw) << ',' << csv_cell(m.headway.mu) << ',' << csv_cell(m.headway.sigma)
        << ',' << csv_cell(m.headway.zero_mass) << ',' << csv_quote(r.label) << '\n';
  }
  return out.str();
}

inline json report_json(const RouteReport& r) {
  json stations = json::array();
  for (const auto& m : r.per_station) {
    json q = json::array();
    for (double x : m.queue_front.q) q.push_back(x);
    stations.push_back({{"station", m.station},
                        {"rho", json_number(m.rho)},
                        {"stable", m.stable},
                        {"e_queue", json_number(m.eq)},
                        {"var_queue", json_number(m.varq)},
                        {"e_wait", json_number(m.ew)},
                        {"var_wait", json_number(m.varw)},
                        {"headway_mu", m.headway.mu},
                        {"headway_sigma", m.headway.sigma},
                        {"zero_mass", m.headway.zero_mass},
                        {"effective_capacity", m.effective_capacity},
                        {"queue_front", q}});
  }
  return {{"label", r.label}, {"stations", stations}};
}

struct TheoryFile {
  std::string label;
  std::vector<TheoryRow> rows;
};

inline TheoryFile parse_theory(const std::string& text) {
  TheoryFile f;
  if (looks_like_json(text)) {
    const json doc = json::parse(text);
    f.label = doc.value("label", "");
    for (const auto& s : doc.at("stations")) {
      f.rows.push_back({s.at("station").get<std::size_t>(), s.at("stable").get<bool>(),
                        number_from_json(s.at("e_queue")), number_from_json(s.at("var_queue")),
                        number_from_json(s.at("e_wait")), number_from_json(s.at("var_wait"))});
    }
    return f;
  }
  const CsvTable t = parse_csv(text);
  const auto st = t.column("station"), stab = t.column("stable"), eq = t.column("e_queue"),
             vq = t.column("var_queue"), ew = t.column("e_wait"), vw = t.column("var_wait");
  for (const auto& row : t.rows) {
    f.rows.push_back({static_cast<std::size_t>(std::stoul(row[st])), row[stab] == "true",
                      parse_number(row[eq]), parse_number(row[vq]), parse_number(row[ew]),
                      parse_number(row[vw])});
  }
  if (t.has("label") && !t.rows.empty()) f.label = t.rows.front()[t.column("label")];
  return f;
}

// ---------------------------------------------------------------------------
// Simulation statistics

inline std::string stats_csv(const SimStats& s) {
  std::ostringstream out;
  out << "station,lambda,e_queue_sim,e_queue_se,var_queue_sim,var_queue_se,e_wait_sim,e_wait_se,"
         "var_wait_sim,var_wait_se,headway_mean_sim,headway_var_sim,n_queue,n_wait,label\n";
  for (const auto& m : s.per_station) {
    const bool waits = m.wait.count > 0;
    auto w = [&](double v) { return waits ? csv_cell(v) : std::string("na"); };
    out << m.station << ',' << csv_cell(m.lambda) << ',' << csv_cell(m.queue.mean) << ','
        << csv_cell(m.queue.se_mean) << ',' << csv_cell(m.queue.variance) << ','
        << csv_cell(m.queue.se_variance) << ',' << w(m.wait.mean) << ',' << w(m.wait.se_mean)
        << ',' << w(m.wait.variance) << ',' << w(m.wait.se_variance) << ','
        << csv_cell(m.headway.mean) << ',' << csv_cell(m.headway.variance) << ','
        << m.queue.count << ',' << m.wait.count << ',' << csv_quote(s.label) << '\n';
  }
  return out.str();
}

inline json stats_json(const SimStats& s) {
  auto est = [](const Estimate& e) {
    return json{{"mean", json_number(e.mean)},         {"variance", json_number(e.variance)},
                {"se_mean", json_number(e.se_mean)},   {"se_variance", json_number(e.se_variance)},
                {"count", e.count}};
  };
  json stations = json::array();
  for (const auto& m : s.per_station) {
    stations.push_back({{"station", m.station},
                        {"lambda", m.lambda},
                        {"queue", est(m.queue)},
                        {"wait", est(m.wait)},
                        {"headway", est(m.headway)}});
  }
  return {{"label", s.label},
          {"runs", s.runs},
          {"warmup_runs", s.warmup_runs},
          {"seed", s.seed},
          {"stations", stations}};
}

struct SimFile {
  std::string label;
  std::vector<SimRow> rows;
};

inline SimFile parse_sim(const std::string& text) {
  SimFile f;
  if (looks_like_json(text)) {
    const json doc = json::parse(text);
    f.label = doc.value("label", "");
    auto est = [](const json& e) {
      Estimate out;
      out.mean = number_from_json(e.at("mean"));
      out.variance = number_from_json(e.at("variance"));
      out.se_mean = number_from_json(e.at("se_mean"));
      out.se_variance = number_from_json(e.at("se_variance"));
      out.count = e.at("count").get<std::int64_t>();
      return out;
    };
    for (const auto& s : doc.at("stations"))
      f.rows.push_back({s.at("station").get<std::size_t>(), s.at("lambda").get<double>(),
                        est(s.at("queue")), est(s.at("wait"))});
    return f;
  }
  const CsvTable t = parse_csv(text);
  auto num = [&](const std::vector<std::string>& row, const char* col) {
    const double v = parse_number(row[t.column(col)]);
    return std::isnan(v) ? 0.0 : v;
  };
  for (const auto& row : t.rows) {
    SimRow r;
    r.station = static_cast<std::size_t>(std::stoul(row[t.column("station")]));
    r.lambda = num(row, "lambda");
    r.queue = {num(row, "e_queue_sim"), num(row, "var_queue_sim"), num(row, "e_queue_se"),
               num(row, "var_queue_se"), std::stoll(row[t.column("n_queue")])};
    r.wait = {num(row, "e_wait_sim"), num(row, "var_wait_sim"), num(row, "e_wait_se"),
              num(row, "var_wait_se"), std::stoll(row[t.column("n_wait")])};
    f.rows.push_back(r);
  }
  if (t.has("label") && !t.rows.empty()) f.label = t.rows.front()[t.column("label")];
  return f;
}

// ---------------------------------------------------------------------------
// Comparison

inline std::string comparison_csv(const Comparison& c) {
  std::ostringstream out;
  out << "station,metric,theory,sim,abs_gap,rel_gap,se,allowed,status,label\n";
  for (const auto& r : c.rows) {
    const bool compared = r.status == CompareStatus::pass || r.status == CompareStatus::fail;
    auto cell = [&](double v) { return compared ? csv_cell(v) : std::string("na"); };
    out << r.station << ',' << r.metric << ',' << csv_cell(r.theory) << ',' << csv_cell(r.sim)
        << ',' << cell(r.abs_gap) << ',' << cell(r.rel_gap) << ',' << csv_cell(r.se) << ','
        << cell(r.allowed) << ',' << csv_quote(to_string(r.status)) << ',' << csv_quote(c.label)
        << '\n';
  }
  return out.str();
}

inline json comparison_json(const Comparison& c) {
  json rows = json::array();
  for (const auto& r : c.rows) {
    rows.push_back({{"station", r.station},
                    {"metric", r.metric},
                    {"theory", json_number(r.theory)},
                    {"sim", json_number(r.sim)},
                    {"abs_gap", json_number(r.abs_gap)},
                    {"rel_gap", json_number(r.rel_gap)},
                    {"se", json_number(r.se)},
                    {"allowed", json_number(r.allowed)},
                    {"status", to_string(r.status)}});
  }
  return {{"label", c.label}, {"all_pass", c.all_pass()}, {"rows", rows}};
}

// ---------------------------------------------------------------------------
// Roots

struct RootRow {
  cplx z;
  double residual;  // |Den(z)|
};

inline std::vector<RootRow> root_rows(const RootSet& roots, const DiscreteDist& s,
                                      const ArrivalProcess& y) {
  std::vector<RootRow> out;
  for (cplx z : roots.roots)
    out.push_back({z, std::abs(den_eval(z, s, [&](cplx w) { return y.pgf(w); }))});
  return out;
}

inline std::string roots_csv(const std::vector<RootRow>& rows) {
  std::ostringstream out;
  out << "re,im,r,phi,residual\n";
  for (const auto& r : rows) {
    const PolarPoint p = to_polar(r.z);
    out << format_number(r.z.real()) << ',' << format_number(r.z.imag()) << ','
        << format_number(p.r) << ',' << format_number(p.phi) << ','
        << format_number(r.residual) << '\n';
  }
  return out.str();
}

}  // namespace transitq
