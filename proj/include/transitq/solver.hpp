#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "transitq/distribution.hpp"
#include "transitq/error.hpp"
#include "transitq/headway.hpp"
#include "transitq/model.hpp"
#include "transitq/roots.hpp"

namespace transitq {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();
inline constexpr double kNotApplicable = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kCapacityEpsilon = 1e-12;

// ---------------------------------------------------------------------------
// Alighting / boarding

// a_ij = P(j of i on-board passengers stay) = Binom(i, alpha) at i - j.
inline Matrix alighting_matrix(double alpha, int capacity) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw validation_error("alpha must lie in [0, 1]");
  const auto n = static_cast<std::size_t>(capacity) + 1;
  Matrix a(n);
  a(0, 0) = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    if (alpha == 0.0) {
      a(i, i) = 1.0;
      continue;
    }
    if (alpha == 1.0) {
      a(i, 0) = 1.0;
      continue;
    }
    const double li = std::lgamma(static_cast<double>(i) + 1.0);
    const double la = std::log(alpha);
    const double lb = std::log1p(-alpha);
    for (std::size_t j = 0; j <= i; ++j) {
      const double off = static_cast<double>(i - j);
      const double stay = static_cast<double>(j);
      a(i, j) = std::exp(li - std::lgamma(off + 1.0) - std::lgamma(stay + 1.0) + off * la +
                         stay * lb);
    }
  }
  return a;
}

struct AlightingStep {
  DiscreteDist remaining;  // g: load after alighting
  DiscreteDist space;      // s: free places, s_k = g_{C-k}
};

inline AlightingStep step_alighting(const DiscreteDist& v_prev, double alpha) {
  DiscreteDist g = v_prev * alighting_matrix(alpha, v_prev.capacity());
  DiscreteDist s = g.reversed();
  return {std::move(g), std::move(s)};
}

// Steady-state probabilities that k < C passengers wait when a vehicle
// arrives.
struct QueueFront {
  std::vector<double> q;

  int capacity() const noexcept { return static_cast<int>(q.size()); }
  double mass() const {
    double t = 0.0;
    for (double x : q) t += x;
    return t;
  }
};

// b_ij = q_{j-i} for i <= j < C; b_iC takes the rest (vehicle leaves full).
inline Matrix boarding_matrix(const QueueFront& front, int capacity) {
  if (front.capacity() != capacity)
    throw validation_error("queue front has " + std::to_string(front.capacity()) +
                           " entries, expected " + std::to_string(capacity));
  const auto n = static_cast<std::size_t>(capacity) + 1;
  Matrix b(n);
  for (std::size_t i = 0; i < n - 1; ++i) {
    double below = 0.0;
    for (std::size_t j = i; j < n - 1; ++j) {
      b(i, j) = front.q[j - i];
      below += front.q[j - i];
    }
    b(i, n - 1) = std::max(0.0, 1.0 - below);
  }
  b(n - 1, n - 1) = 1.0;
  return b;
}

// ---------------------------------------------------------------------------
// Stability

struct Utilization {
  double rho = 0.0;
  bool stable = true;
};

inline Utilization utilization(const DiscreteDist& s, const ArrivalMoments& y) {
  const double sbar = dist_moments(s).mean;
  if (y.mean == 0.0) return {0.0, true};
  if (!(sbar > 0.0)) return {kUnbounded, false};
  const double rho = y.mean / sbar;
  return {rho, rho < 1.0};
}

// Largest k with s_k > eps; Den needs s_C > 0.
inline int effective_capacity(const DiscreteDist& s, double eps = kCapacityEpsilon) {
  for (int k = s.capacity(); k >= 0; --k)
    if (s[static_cast<std::size_t>(k)] > eps) return k;
  return 0;
}

// ---------------------------------------------------------------------------
// Queue front

namespace detail {

// Coefficients of prod_i (1 - z / z_i).
inline std::vector<cplx> expand_root_product(const std::vector<cplx>& roots) {
  std::vector<cplx> c{1.0};
  for (cplx zi : roots) {
    std::vector<cplx> next(c.size() + 1, 0.0);
    for (std::size_t j = 0; j < c.size(); ++j) {
      next[j] += c[j];
      next[j + 1] -= c[j] / zi;
    }
    c = std::move(next);
  }
  return c;
}

// Conjugate-paired sums and products are real up to roundoff relative to
// `scale`.
inline double real_part_checked(cplx v, const char* what, double scale = 1.0) {
  if (std::fabs(v.imag()) > 1e-8 * std::max({1.0, std::abs(v), scale}))
    throw numeric_error(std::string(what) + " has imaginary part " +
                        std::to_string(v.imag()));
  return v.real();
}

}  // namespace detail

namespace detail {

struct FrontSetup {
  int capacity;
  double s_c;
  double gap;                // S - Y
  std::vector<cplx> others;  // roots other than z = 1
};

inline FrontSetup front_setup(const DiscreteDist& s, const RootSet& roots, const ArrivalMoments& y) {
  const int c = s.capacity();
  const double s_c = s[static_cast<std::size_t>(c)];
  if (!(s_c > kCapacityEpsilon))
    throw capacity_trim_error("s_C = " + std::to_string(s_c) + " is too small");
  const double sbar = dist_moments(s).mean;
  if (!(sbar > y.mean)) throw instability_error("mean space does not exceed mean arrivals");
  const auto wanted = static_cast<std::size_t>(c);
  if (roots.size() != wanted)
    throw root_finding_error("queue front needs " + std::to_string(c) + " roots", roots.size(),
                             wanted);
  FrontSetup f{c, s_c, sbar - y.mean, {}};
  bool unit_seen = false;
  for (cplx z : roots.roots) {
    if (!unit_seen && std::abs(z - 1.0) < 1e-9) {
      unit_seen = true;
      continue;
    }
    f.others.push_back(z);
  }
  if (!unit_seen) throw root_finding_error("z = 1 missing from the root set", roots.size(), wanted);
  return f;
}

inline std::vector<double> clamp_front(std::vector<double> q) {
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (!std::isfinite(q[k]) || q[k] < kNegativeClamp)
      throw numeric_error("queue front q_" + std::to_string(k) + " = " + std::to_string(q[k]));
    if (q[k] < 0.0) q[k] = 0.0;
  }
  return q;
}

}  // namespace detail

// P(Q = 0) = (S - Y) / s_C * prod_{i>=1} z_i / (z_i - 1).
inline double queue_front_q0(const DiscreteDist& s, const RootSet& roots, const ArrivalMoments& y) {
  const auto f = detail::front_setup(s, roots, y);
  cplx prod = 1.0;
  for (cplx z : f.others) prod *= z / (z - 1.0);
  return f.gap / f.s_c * detail::real_part_checked(prod, "root product");
}

// Coefficient matching as a triangular Toeplitz system q Lambda = eta~,
// solved by substitution. Exact in exact arithmetic, but the recursion
// amplifies roundoff roughly like 1/s_C per step, so it is only used for
// small or fixed-capacity cases (and as a cross-check). Entries are not
// clamped.
inline std::vector<double> queue_front_triangular(const DiscreteDist& s, const RootSet& roots,
                                                  const ArrivalMoments& y) {
  const auto f = detail::front_setup(s, roots, y);
  const int c = f.capacity;
  const double q0 = queue_front_q0(s, roots, y);

  std::vector<cplx> all{1.0};
  all.insert(all.end(), f.others.begin(), f.others.end());
  const auto eta = detail::expand_root_product(all);
  double eta_scale = 0.0;
  for (cplx e : eta) eta_scale = std::max(eta_scale, std::abs(e));

  std::vector<double> q(static_cast<std::size_t>(c), 0.0);
  for (int j = 0; j < c; ++j) {
    const auto ej = detail::real_part_checked(eta[static_cast<std::size_t>(j)], "eta", eta_scale);
    double rhs = f.s_c * q0 * ej;
    for (int i = 0; i < j; ++i)
      rhs -= q[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(c - j + i)];
    q[static_cast<std::size_t>(j)] = rhs / f.s_c;
  }
  return q;
}

// Q(z) = (S - Y)(z - 1) prod_{i>=1} (z - z_i)/(1 - z_i) / Den(z).
inline cplx queue_pgf(cplx z, const DiscreteDist& s, const RootSet& roots,
                      const ArrivalProcess& y) {
  const auto f = detail::front_setup(s, roots, y.moments());
  cplx num = f.gap * (z - 1.0);
  for (cplx zi : f.others) num *= (z - zi) / (1.0 - zi);
  return num / den_eval(z, s, [&](cplx w) { return y.pgf(w); });
}

// q_0..q_{C-1} as Taylor coefficients of Q(z), by the trapezoidal rule on
// |z| = 1 (shifted half a step so z = 1 is never sampled). Each coefficient
// comes out with ~1e-15 absolute error; the node count doubles until the
// aliased tail no longer moves the result.
inline QueueFront queue_front(const DiscreteDist& s, const RootSet& roots, const ArrivalProcess& y,
                              std::size_t max_nodes = std::size_t{1} << 17) {
  const auto f = detail::front_setup(s, roots, y.moments());
  const int c = f.capacity;
  if (c == 1) return QueueFront{detail::clamp_front({queue_front_q0(s, roots, y.moments())})};

  std::vector<double> s_coeffs(s.probs().begin(), s.probs().end());
  auto q_at = [&](cplx z) {
    cplx num = f.gap * (z - 1.0);
    for (cplx zi : f.others) num *= (z - zi) / (1.0 - zi);
    cplx poly = 0.0;
    for (double su : s_coeffs) poly = poly * z + su;
    return num / (std::pow(z, c) / y.pgf(z) - poly);
  };

  std::vector<double> prev;
  for (std::size_t nodes = 1024;; nodes *= 2) {
    std::vector<double> q(static_cast<std::size_t>(c), 0.0);
    const double step = 2.0 * std::numbers::pi / static_cast<double>(nodes);
    // Real coefficients: the upper half circle suffices.
    for (std::size_t j = 0; j < nodes / 2; ++j) {
      const double phi = (static_cast<double>(j) + 0.5) * step;
      const cplx val = q_at(std::polar(1.0, phi));
      for (int k = 0; k < c; ++k)
        q[static_cast<std::size_t>(k)] +=
            2.0 * (val * std::polar(1.0, -phi * k)).real() / static_cast<double>(nodes);
    }
    double change = prev.empty() ? 1.0 : 0.0;
    for (std::size_t k = 0; k < prev.size(); ++k) change = std::max(change, std::fabs(q[k] - prev[k]));
    prev = std::move(q);
    if (change < 1e-13) break;
    if (nodes >= max_nodes)
      throw numeric_error("queue front did not converge on the unit circle");
  }
  return QueueFront{detail::clamp_front(std::move(prev))};
}

// sum_u s_u sum_{i<=u} q_i (u - i); equals S - Y for a correct front.
inline double normalization_residual(const DiscreteDist& s, const QueueFront& front) {
  double t = 0.0;
  for (int u = 0; u <= s.capacity(); ++u) {
    double inner = 0.0;
    for (int i = 0; i <= u && i < front.capacity(); ++i)
      inner += front.q[static_cast<std::size_t>(i)] * (u - i);
    t += s[static_cast<std::size_t>(u)] * inner;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Queue length and waiting time moments

struct QueueMoments {
  double mean = 0.0;
  double variance = 0.0;
};

namespace detail {

struct RootSums {
  double first = 0.0;   // sum 1/(1-z)
  double second = 0.0;  // sum z/(1-z)^2
};

inline RootSums root_sums(const RootSet& roots) {
  cplx a = 0.0, b = 0.0;
  bool unit_seen = false;
  for (cplx z : roots.roots) {
    if (!unit_seen && std::abs(z - 1.0) < 1e-9) {
      unit_seen = true;
      continue;
    }
    a += 1.0 / (1.0 - z);
    b += z / ((1.0 - z) * (1.0 - z));
  }
  return {real_part_checked(a, "sum 1/(1-z)"), real_part_checked(b, "sum z/(1-z)^2")};
}

}  // namespace detail

// Closed forms in central moments of S and Y. `s` is taken at its effective
// capacity.
inline QueueMoments queue_moments(const DistMoments& s, const ArrivalMoments& y,
                                  const RootSet& roots, int capacity) {
  const double d = s.mean - y.mean;
  if (!(d > 0.0)) return {kUnbounded, kUnbounded};
  const auto sums = detail::root_sums(roots);
  const double c = static_cast<double>(capacity);
  const double mean =
      (s.central2 + y.central2 + d * (1.0 + 2.0 * (s.mean - c)) - d * d) / (2.0 * d) + sums.first;
  const double v2 = s.central2 - y.central2;
  const double v3 = s.central3 - y.central3;
  const double sum2 = s.central2 + y.central2;
  const double var = (-4.0 * v3 * d + 3.0 * sum2 * sum2 - (6.0 * v2 - 1.0) * d * d -
                      d * d * d * d) / (12.0 * d * d) -
                     sums.second;
  return {mean, var};
}

// Same quantities via derivatives of A(z) = (S - Y)(z - 1) / Den(z) at z = 1,
// built from factorial moments of Y and of C - S.
inline QueueMoments queue_moments_raw(const DistMoments& s, const ArrivalMoments& y,
                                      const RootSet& roots, int capacity) {
  const double d = s.mean - y.mean;
  if (!(d > 0.0)) return {kUnbounded, kUnbounded};
  const double c = static_cast<double>(capacity);

  // Factorial moments of Y.
  const double y1 = y.mean;
  const double y2 = y.central2 + y1 * y1 - y1;
  const double ey3 = y.central3 + 3.0 * y1 * (y.central2 + y1 * y1) - 2.0 * y1 * y1 * y1;
  const double ey2 = y.central2 + y1 * y1;
  const double y3 = ey3 - 3.0 * ey2 + 2.0 * y1;

  // 1/Y(z) derivatives at 1.
  const double f1 = -y1;
  const double f2 = -y2 + 2.0 * y1 * y1;
  const double f3 = -y3 + 6.0 * y1 * y2 - 6.0 * y1 * y1 * y1;

  // z^C derivatives at 1.
  const double p1 = c;
  const double p2 = c * (c - 1.0);
  const double p3 = c * (c - 1.0) * (c - 2.0);

  // Factorial moments of G = C - S: E[G], E[G(G-1)], E[G(G-1)(G-2)].
  const double g_mean = c - s.mean;
  const double eg2 = s.central2 + g_mean * g_mean;
  const double eg3 = -s.central3 + 3.0 * g_mean * eg2 - 2.0 * g_mean * g_mean * g_mean;
  const double g1 = g_mean;
  const double g2 = eg2 - g1;
  const double g3 = eg3 - 3.0 * eg2 + 2.0 * g1;

  const double a2_1 = p1 + f1 - g1;
  const double a2_2 = p2 + 2.0 * p1 * f1 + f2 - g2;
  const double a2_3 = p3 + 3.0 * p2 * f1 + 3.0 * p1 * f2 + f3 - g3;

  // A1(z) = D (z - 1) is linear, so A'(1) and A''(1) follow from the Taylor
  // expansion of A2 about 1.
  const double a_1 = -a2_2 / (2.0 * a2_1);
  const double a_2 = (3.0 * a2_2 * a2_2 - 2.0 * a2_1 * a2_3) / (6.0 * a2_1 * a2_1);

  const auto sums = detail::root_sums(roots);
  return {a_1 + sums.first, a_2 - a_1 * a_1 + a_1 - sums.second};
}

struct WaitMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// Little's-law style conversion of the queue at vehicle arrival into the
// wait of a tagged passenger.
inline WaitMoments wait_moments(const QueueMoments& q, const ArrivalMoments& y, double lambda) {
  if (!(lambda > 0.0) || !(y.mean > 0.0)) return {kNotApplicable, kNotApplicable};
  if (!std::isfinite(q.mean)) return {kUnbounded, kUnbounded};
  const double m = y.mean;
  const double qt = q.mean - m + 0.5 * (y.central2 / m + m - 1.0);
  const double qtt = q.variance - y.central2 +
                     (4.0 * m * y.central3 + 6.0 * m * m * y.central2 - m * m + m * m * m * m -
                      3.0 * y.central2 * y.central2) /
                         (12.0 * m * m);
  return {qt / lambda, (qtt - qt) / (lambda * lambda)};
}

// ---------------------------------------------------------------------------
// Route pipeline

enum class MomentForm { central, raw };

struct SolverOptions {
  RootOptions roots;
  MomentForm form = MomentForm::central;
};

struct StationMetrics {
  std::size_t station = 0;
  double lambda = 0.0;
  double rho = 0.0;
  bool stable = true;
  int effective_capacity = 0;
  RootSet roots;
  QueueFront queue_front;
  double eq = 0.0;
  double varq = 0.0;
  double ew = 0.0;
  double varw = 0.0;
  HeadwayModel headway;
  ArrivalMoments arrivals;
  DistMoments space_moments;
  DiscreteDist space;     // s
  DiscreteDist load_out;  // v after boarding
};

struct RouteReport {
  std::string label;
  std::vector<StationMetrics> per_station;

  std::size_t size() const noexcept { return per_station.size(); }
  const StationMetrics& station(std::size_t n) const { return per_station.at(n - 1); }
};

inline StationMetrics analyze_station(const Scenario& sc, std::size_t n, const DiscreteDist& v_prev,
                                      const SolverOptions& opt = {}) {
  const int cap = sc.route.capacity;
  StationMetrics m;
  m.station = n;
  m.lambda = sc.route.arrival_rate(n);
  m.headway = truncated_headway(sc, n);
  m.arrivals = y_moments(m.lambda, m.headway);

  auto step = step_alighting(v_prev, sc.route.alighting_prob(n));
  m.space = step.space;
  m.space_moments = dist_moments(step.space);
  const auto u = utilization(step.space, m.arrivals);
  m.rho = u.rho;
  m.stable = u.stable;

  if (!m.stable) {
    m.queue_front.q.assign(static_cast<std::size_t>(cap), 0.0);
    m.eq = m.varq = m.ew = m.varw = kUnbounded;
    m.load_out = DiscreteDist::point_mass(cap, cap);
    return m;
  }
  if (m.arrivals.mean == 0.0) {
    // Nobody ever waits; the load passes through unchanged.
    m.queue_front.q.assign(static_cast<std::size_t>(cap), 0.0);
    m.queue_front.q[0] = 1.0;
    m.roots.roots = {cplx(1.0, 0.0)};
    m.effective_capacity = effective_capacity(step.space);
    m.eq = m.varq = 0.0;
    m.ew = m.varw = kNotApplicable;
    m.load_out = step.remaining;
    return m;
  }

  const int ce = effective_capacity(step.space);
  m.effective_capacity = ce;
  const DiscreteDist s_eff = ce == cap ? step.space : step.space.truncated(ce);
  try {
    m.roots = find_all_roots(s_eff, m.lambda, m.headway, m.rho, opt.roots);
  } catch (root_finding_error& e) {
    throw e.at_station(n);
  }
  QueueFront front = queue_front(s_eff, m.roots, ArrivalProcess{m.lambda, m.headway});
  front.q.resize(static_cast<std::size_t>(cap), 0.0);
  m.queue_front = std::move(front);

  const DistMoments sm = dist_moments(s_eff);
  const QueueMoments qm = opt.form == MomentForm::central
                              ? queue_moments(sm, m.arrivals, m.roots, ce)
                              : queue_moments_raw(sm, m.arrivals, m.roots, ce);
  m.eq = qm.mean;
  m.varq = qm.variance;
  const WaitMoments wm = wait_moments(qm, m.arrivals, m.lambda);
  m.ew = wm.mean;
  m.varw = wm.variance;
  m.load_out = step.remaining * boarding_matrix(m.queue_front, cap);
  return m;
}

// Station-by-station pass: empty vehicles leave the hub, each station's
// outgoing load feeds the next one's alighting step.
inline RouteReport analyze_route(const Scenario& sc, const SolverOptions& opt = {}) {
  require_valid(sc);
  RouteReport report;
  report.label = sc.label;
  DiscreteDist v = DiscreteDist::point_mass(sc.route.capacity, 0);
  for (std::size_t n = 1; n <= sc.route.size(); ++n) {
    report.per_station.push_back(analyze_station(sc, n, v, opt));
    v = report.per_station.back().load_out;
  }
  return report;
}

}  // namespace transitq
