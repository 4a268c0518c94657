#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "transitq/distribution.hpp"
#include "transitq/error.hpp"
#include "transitq/headway.hpp"
#include "transitq/random.hpp"

namespace transitq {

// Roots of Den(z) = z^C / Y(z) - sum_u s_u z^(C-u) inside the closed unit
// disk. Den(z) = 0 is equivalent to J(z) = Y(z) S(1/z) = 1, which is solved
// as the real 2-D system (Re log J, Im log J) = 0 in polar coordinates.

using LogJ = std::function<cplx(cplx)>;

struct PolarPoint {
  double r = 0.0;
  double phi = 0.0;

  cplx to_complex() const { return std::polar(r, phi); }
};

inline double wrap_angle(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  phi = std::fmod(phi, two_pi);
  if (phi < 0.0) phi += two_pi;
  if (phi >= two_pi) phi -= two_pi;
  return phi;
}

inline PolarPoint to_polar(cplx z) { return {std::abs(z), wrap_angle(std::arg(z))}; }

struct RootOptions {
  double r_min = 0.05;
  double r_max = 1.5;
  double residual_tol = 1e-10;
  int max_iterations = 200;
  double fd_step = 1e-7;
  double dedup_tol = 1e-6;
  double disk_tol = 1e-8;
  double perturb_prob = 0.3;
  int max_depth = 50;
  std::uint64_t seed = 20230601;
};

// Roots ordered by angle in [0, 2pi); z = 1 comes first.
struct RootSet {
  std::vector<cplx> roots;

  std::size_t size() const noexcept { return roots.size(); }

  bool contains(cplx z, double tol) const {
    return std::any_of(roots.begin(), roots.end(),
                       [&](cplx w) { return std::abs(w - z) <= tol; });
  }

  void sort_by_angle() {
    std::stable_sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
      return to_polar(a).phi < to_polar(b).phi;
    });
  }
};

// Builds log J(z) = log Y(z) + log S(1/z) for a given available-space
// distribution; s.capacity() is the effective capacity.
inline LogJ make_log_j(const DiscreteDist& s, double lambda, const HeadwayModel& model) {
  std::vector<double> coeffs(s.probs().begin(), s.probs().end());
  return [coeffs = std::move(coeffs), lambda, model](cplx z) {
    const cplx w = 1.0 / z;
    cplx acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * w + *it;
    return y_log_pgf(z, lambda, model) + std::log(acc);
  };
}

// Den(z) = z^C / Y(z) - sum_u s_u z^(C-u).
inline cplx den_eval(cplx z, const DiscreteDist& s, const std::function<cplx(cplx)>& y_pgf_fn) {
  const cplx y = y_pgf_fn(z);
  if (y == 0.0) throw numeric_error("Den: Y(z) vanishes");
  const int c = s.capacity();
  cplx poly = 0.0;
  for (int u = 0; u <= c; ++u) poly = poly * z + s[static_cast<std::size_t>(u)];
  return std::pow(z, c) / y - poly;
}

namespace detail {

struct Residual {
  double re;
  double im;
  double norm() const { return std::hypot(re, im); }
};

inline double wrap_pi(double x) {
  return std::remainder(x, 2.0 * std::numbers::pi);
}

// Principal branch: the imaginary part is wrapped into [-pi, pi].
inline Residual residual_at(const LogJ& log_j, double r, double phi) {
  const cplx v = log_j(std::polar(r, phi));
  return {v.real(), wrap_pi(v.imag())};
}

}  // namespace detail

// Damped Newton on (Re log J, Im log J) = 0 with a central-difference
// Jacobian; Levenberg steps take over when the Newton direction stalls.
inline std::optional<PolarPoint> solve_from_initial(PolarPoint init, const LogJ& log_j,
                                                    const RootOptions& opt = {}) {
  double r = std::clamp(init.r, opt.r_min, opt.r_max);
  double phi = init.phi;
  auto finite = [](const detail::Residual& f) {
    return std::isfinite(f.re) && std::isfinite(f.im);
  };
  detail::Residual f = detail::residual_at(log_j, r, phi);
  if (!finite(f)) return std::nullopt;

  for (int it = 0; it <= opt.max_iterations; ++it) {
    if (f.norm() < opt.residual_tol) return PolarPoint{r, wrap_angle(phi)};
    if (it == opt.max_iterations) break;

    const double h = opt.fd_step;
    const auto fr1 = detail::residual_at(log_j, r + h, phi);
    const auto fr0 = detail::residual_at(log_j, r - h, phi);
    const auto fp1 = detail::residual_at(log_j, r, phi + h);
    const auto fp0 = detail::residual_at(log_j, r, phi - h);
    const double j11 = (fr1.re - fr0.re) / (2 * h);
    const double j21 = detail::wrap_pi(fr1.im - fr0.im) / (2 * h);
    const double j12 = (fp1.re - fp0.re) / (2 * h);
    const double j22 = detail::wrap_pi(fp1.im - fp0.im) / (2 * h);
    if (!std::isfinite(j11 + j12 + j21 + j22)) return std::nullopt;

    auto try_step = [&](double dr, double dp) -> bool {
      const double nr = std::clamp(r + dr, opt.r_min, opt.r_max);
      const double np = phi + dp;
      const auto nf = detail::residual_at(log_j, nr, np);
      if (finite(nf) && nf.norm() < f.norm()) {
        r = nr;
        phi = np;
        f = nf;
        return true;
      }
      return false;
    };

    bool moved = false;
    const double det = j11 * j22 - j12 * j21;
    if (std::fabs(det) > 1e-300) {
      const double dr = -(j22 * f.re - j12 * f.im) / det;
      const double dp = -(-j21 * f.re + j11 * f.im) / det;
      double step = 1.0;
      for (int k = 0; k < 12 && !moved; ++k, step *= 0.5)
        moved = try_step(step * dr, step * dp);
    }
    if (!moved) {
      // Levenberg: (J^T J + mu I) d = -J^T f.
      const double a11 = j11 * j11 + j21 * j21;
      const double a12 = j11 * j12 + j21 * j22;
      const double a22 = j12 * j12 + j22 * j22;
      const double g1 = j11 * f.re + j21 * f.im;
      const double g2 = j12 * f.re + j22 * f.im;
      double mu = 1e-3 * std::max(a11 + a22, 1e-12);
      for (int k = 0; k < 16 && !moved; ++k, mu *= 10.0) {
        const double b11 = a11 + mu;
        const double b22 = a22 + mu;
        const double d = b11 * b22 - a12 * a12;
        moved = try_step(-(b22 * g1 - a12 * g2) / d, -(-a12 * g1 + b11 * g2) / d);
      }
    }
    if (!moved) return std::nullopt;
  }
  return std::nullopt;
}

namespace detail {

// Accepts a converged point if it lies in the closed disk and is new; its
// conjugate is added alongside. Returns the number of roots added.
inline int add_root(RootSet& set, cplx z, const RootOptions& opt) {
  if (std::abs(z) > 1.0 + opt.disk_tol) return 0;
  if (std::fabs(z.imag()) <= 0.5 * opt.dedup_tol) z = {z.real(), 0.0};
  int added = 0;
  if (!set.contains(z, opt.dedup_tol)) {
    set.roots.push_back(z);
    ++added;
  }
  const cplx zc = std::conj(z);
  if (zc != z && !set.contains(zc, opt.dedup_tol)) {
    set.roots.push_back(zc);
    ++added;
  }
  return added;
}

}  // namespace detail

// First pass: walk the upper half of the oval of roots, extrapolating each
// initial guess linearly in (r, phi) from the two previously found roots.
inline RootSet clockwise_search(int capacity, double rho, const LogJ& log_j,
                                const RootOptions& opt = {}) {
  RootSet set;
  set.roots.push_back(1.0);
  if (capacity <= 1) return set;

  const double c = static_cast<double>(capacity);
  PolarPoint prev{1.0, 0.0};
  PolarPoint init{1.0 - 0.5 * rho, 3.0 * std::numbers::pi / c};
  PolarPoint step{init.r - prev.r, init.phi - prev.phi};

  for (int attempt = 0; attempt < capacity; ++attempt) {
    if (init.phi > std::numbers::pi + 1e-9) break;
    const auto sol = solve_from_initial(init, log_j, opt);
    bool accepted = false;
    if (sol) {
      PolarPoint p = *sol;
      if (p.phi > std::numbers::pi) p.phi = 2.0 * std::numbers::pi - p.phi;
      if (p.phi > prev.phi + 1e-9 && detail::add_root(set, p.to_complex(), opt) > 0) {
        step = {p.r - prev.r, p.phi - prev.phi};
        prev = p;
        accepted = true;
      }
    }
    if (accepted) {
      init = {prev.r + step.r, prev.phi + step.phi};
    } else {
      init = {init.r + step.r, init.phi + std::max(step.phi, std::numbers::pi / c)};
    }
    if (set.size() >= static_cast<std::size_t>(capacity)) break;
  }
  set.sort_by_angle();
  return set;
}

// Second pass: interpolate L-1 initial guesses between every pair of
// angularly adjacent known roots (with random jitter of probability
// perturb_prob), solve from each, merge new roots, and refine L whenever a
// round finds nothing new. Returns whatever it has after max_depth rounds.
inline RootSet interpolation_pass(RootSet partial, int capacity, const LogJ& log_j,
                                  double perturb_prob, int max_depth, const RootOptions& opt = {}) {
  const auto wanted = static_cast<std::size_t>(capacity);
  partial.sort_by_angle();
  if (partial.size() >= wanted || partial.size() < 1) return partial;

  rng::Engine gen(rng::splitmix64(opt.seed));
  int lines = 2;
  for (int depth = 0; depth < max_depth && partial.size() < wanted; ++depth) {
    std::vector<PolarPoint> known;
    known.reserve(partial.size());
    for (cplx z : partial.roots) known.push_back(to_polar(z));

    std::vector<PolarPoint> inits;
    const std::size_t m = known.size();
    for (std::size_t i = 0; i < m; ++i) {
      const PolarPoint a = known[i];
      PolarPoint b = known[(i + 1) % m];
      if (i + 1 == m) b.phi += 2.0 * std::numbers::pi;
      const double dr = b.r - a.r;
      const double dp = b.phi - a.phi;
      for (int d = 1; d < lines; ++d) {
        PolarPoint p{a.r + d * dr / lines, a.phi + d * dp / lines};
        if (rng::uniform01(gen) < perturb_prob) {
          const double half_r = std::fabs(dr) / (2.0 * lines);
          const double half_p = std::fabs(dp) / (2.0 * lines);
          p.r += (2.0 * rng::uniform01(gen) - 1.0) * half_r;
          p.phi += (2.0 * rng::uniform01(gen) - 1.0) * half_p;
        }
        inits.push_back(p);
      }
    }

    std::vector<cplx> fresh;
    for (const auto& p : inits) {
      if (const auto sol = solve_from_initial(p, log_j, opt)) fresh.push_back(sol->to_complex());
    }
    std::size_t before = partial.size();
    for (cplx z : fresh) detail::add_root(partial, z, opt);
    partial.sort_by_angle();
    if (partial.size() == before) ++lines;
  }
  return partial;
}

inline RootSet interpolation_search(RootSet partial, int capacity, const LogJ& log_j,
                                    double perturb_prob, int max_depth,
                                    const RootOptions& opt = {}) {
  const auto wanted = static_cast<std::size_t>(capacity);
  if (partial.size() < 1)
    throw root_finding_error("interpolation search needs a seed root", 0, wanted);
  partial = interpolation_pass(std::move(partial), capacity, log_j, perturb_prob, max_depth, opt);
  if (partial.size() != wanted) {
    throw root_finding_error("found " + std::to_string(partial.size()) + " of " +
                                 std::to_string(wanted) + " roots",
                             partial.size(), wanted);
  }
  return partial;
}

// Fallback for roots away from the oval traced by the two passes above
// (they can sit well inside it when the free-space distribution is
// lopsided). Newton on F(z) / prod (z - z_i), F(z) = z^C (1 - J(z)), from a
// polar grid of starts; known roots are divided out so the iteration
// cannot fall back into them. Hits are polished with solve_from_initial.
inline RootSet deflation_search(RootSet set, int capacity, const LogJ& log_j,
                                const RootOptions& opt = {}) {
  const auto wanted = static_cast<std::size_t>(capacity);
  const double c = static_cast<double>(capacity);
  auto dlog = [&](cplx z) {
    // d/dz log G(z); log J is analytic, so a real-direction difference will do.
    const double h = 1e-6;
    const cplx lj = log_j(z);
    const cplx up = log_j(z + h), dn = log_j(z - h);
    const cplx dlj((up.real() - dn.real()) / (2 * h), detail::wrap_pi(up.imag() - dn.imag()) / (2 * h));
    const cplx j = std::exp(lj);
    cplx d = c / z - j * dlj / (1.0 - j);
    for (cplx zi : set.roots) d -= 1.0 / (z - zi);
    return d;
  };
  const int rings = 8, spokes = 48;
  for (int a = 0; a <= spokes / 2 && set.size() < wanted; ++a) {
    for (int k = 1; k <= rings && set.size() < wanted; ++k) {
      cplx z = std::polar(std::max(opt.r_min, k / (rings + 1.0)),
                          2.0 * std::numbers::pi * a / spokes + 1e-3);
      bool converged = false;
      for (int it = 0; it < 100; ++it) {
        const cplx d = dlog(z);
        if (!std::isfinite(d.real()) || !std::isfinite(d.imag()) || d == 0.0) break;
        cplx step = -1.0 / d;
        if (std::abs(step) > 0.1) step *= 0.1 / std::abs(step);
        z += step;
        if (std::abs(z) > opt.r_max || std::abs(z) < 0.5 * opt.r_min) break;
        if (std::abs(step) < 1e-12) {
          converged = true;
          break;
        }
      }
      if (!converged || std::abs(z) > 1.0 + opt.disk_tol) continue;
      const auto sol = solve_from_initial(to_polar(z), log_j, opt);
      if (!sol || std::abs(sol->to_complex() - z) > 1e-6) continue;
      detail::add_root(set, sol->to_complex(), opt);
    }
  }
  set.sort_by_angle();
  return set;
}

// All C roots of Den inside the closed unit disk, z = 1 first. `s` must
// already be trimmed so that s_C > 0.
inline RootSet find_all_roots(const DiscreteDist& s, double lambda, const HeadwayModel& model,
                              double rho, const RootOptions& opt = {}) {
  const int capacity = s.capacity();
  const auto wanted = static_cast<std::size_t>(capacity);
  if (capacity <= 1) return RootSet{{cplx(1.0, 0.0)}};
  const LogJ log_j = make_log_j(s, lambda, model);
  RootSet set = clockwise_search(capacity, rho, log_j, opt);
  set = interpolation_pass(std::move(set), capacity, log_j, opt.perturb_prob, opt.max_depth, opt);
  if (set.size() < wanted) set = deflation_search(std::move(set), capacity, log_j, opt);
  if (set.size() != wanted) {
    throw root_finding_error("found " + std::to_string(set.size()) + " of " +
                                 std::to_string(wanted) + " roots",
                             set.size(), wanted);
  }

  for (cplx z : set.roots) {
    if (!set.contains(std::conj(z), 1e-8))
      throw root_finding_error("root set is not closed under conjugation", set.size(),
                               set.size());
  }
  return set;
}

}  // namespace transitq
