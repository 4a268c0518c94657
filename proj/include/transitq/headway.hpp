#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>

#include "transitq/model.hpp"
#include "transitq/random.hpp"
#include "transitq/special.hpp"

namespace transitq {

using cplx = std::complex<double>;

// Total incident delay accumulated over T minutes of travel is compound
// Poisson: K ~ Poisson(gamma T) stops, each Exp(theta) long.
inline double incident_duration_mean(double gamma, double theta, double T) {
  return gamma * T / theta;
}

inline double incident_duration_variance(double gamma, double theta, double T) {
  return 2.0 * gamma * T / (theta * theta);
}

template <typename G>
double sample_incident_duration(G& g, double gamma, double theta, double T) {
  const auto k = rng::poisson(g, gamma * T);
  double total = 0.0;
  for (std::int64_t i = 0; i < k; ++i) total += rng::exponential(g, theta);
  return total;
}

struct HeadwayMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// Mean and variance of H = H_adj + I - I' at station n (untruncated).
inline HeadwayMoments headway_base_moments(const Scenario& sc, std::size_t n) {
  const double tn = travel_time_to(sc.route, n);
  const double g = sc.incidents.gamma;
  const double th = sc.incidents.theta;
  return {adjusted_headway(sc), 4.0 * tn * g / (th * th)};
}

// MGF of the untruncated headway. Only defined for |t| < theta.
inline double headway_mgf(double t, const Scenario& sc, std::size_t n) {
  const double th = sc.incidents.theta;
  if (!(std::fabs(t) < th))
    throw std::domain_error("headway MGF needs |t| < theta");
  const double tn = travel_time_to(sc.route, n);
  const double g = sc.incidents.gamma;
  return std::exp(t * adjusted_headway(sc)) *
         std::exp(g * tn * 2.0 * t * t / (th * th - t * t));
}

// Normal approximation of the headway, truncated at zero with the negative
// mass collapsed onto a point mass (vehicles bunch, they never overtake).
struct HeadwayModel {
  double mu = 0.0;
  double sigma = 0.0;
  double zero_mass = 0.0;

  bool degenerate() const noexcept { return sigma == 0.0; }
};

inline HeadwayModel make_headway_model(double mu, double sigma) {
  if (!(mu > 0.0) || !(sigma >= 0.0))
    throw std::invalid_argument("headway model needs mu > 0 and sigma >= 0");
  HeadwayModel m{mu, sigma, 0.0};
  if (sigma > 0.0) m.zero_mass = special::normal_cdf(-mu / sigma);
  return m;
}

inline HeadwayModel truncated_headway(const Scenario& sc, std::size_t n) {
  const auto base = headway_base_moments(sc, n);
  return make_headway_model(base.mean, std::sqrt(base.variance));
}

struct TruncatedMoments {
  double mean = 0.0;
  double variance = 0.0;
  double central3 = 0.0;
};

// Moments of max(0, X) with X ~ N(mu, sigma^2), from the rectified-Gaussian
// raw moments.
inline TruncatedMoments truncated_headway_moments(const HeadwayModel& m) {
  if (m.degenerate()) return {m.mu, 0.0, 0.0};
  const double mu = m.mu;
  const double s = m.sigma;
  const double a = mu / s;
  const double cdf = special::normal_cdf(a);
  const double pdf = special::normal_pdf(a);
  const double r1 = mu * cdf + s * pdf;
  const double r2 = (mu * mu + s * s) * cdf + mu * s * pdf;
  const double r3 = (mu * mu * mu + 3.0 * mu * s * s) * cdf +
                    (mu * mu * s + 2.0 * s * s * s) * pdf;
  const double var = r2 - r1 * r1;
  const double c3 = r3 - 3.0 * r1 * r2 + 2.0 * r1 * r1 * r1;
  return {r1, var > 0.0 ? var : 0.0, c3};
}

// PGF of the number of Poisson(lambda) arrivals during a truncated-normal
// headway:
//   Y(z) = Phi(-mu/s) + exp(mu l (z-1) + s^2 l^2 (z-1)^2 / 2) [1 - Phi(a)],
//   a = -mu/s - s l (z-1).
// The exponential and the normal tail combine to exp(-mu^2 / 2s^2) times the
// scaled tail, which is evaluated through the Faddeeva function.
inline cplx y_pgf(cplx z, double lambda, const HeadwayModel& m) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw std::domain_error("y_pgf: non-finite argument");
  const cplx zm1 = z - 1.0;
  if (m.degenerate()) return std::exp(lambda * m.mu * zm1);
  const double ratio = m.mu / m.sigma;
  const cplx a = -ratio - m.sigma * lambda * zm1;
  return m.zero_mass +
         std::exp(-0.5 * ratio * ratio) * special::scaled_upper_tail(a);
}

// log Y(z); exact in the deterministic-headway case.
inline cplx y_log_pgf(cplx z, double lambda, const HeadwayModel& m) {
  if (m.degenerate()) return lambda * m.mu * (z - 1.0);
  return std::log(y_pgf(z, lambda, m));
}

// Mean and second/third central moments of arrivals per headway.
struct ArrivalMoments {
  double mean = 0.0;
  double central2 = 0.0;
  double central3 = 0.0;
};

// Mixed Poisson with intensity L = lambda * H: cumulants add as
// k1 = E[L], k2 = E[L] + Var[L], k3 = E[L] + 3 Var[L] + c3[L].
inline ArrivalMoments y_moments(double lambda, const HeadwayModel& m) {
  const auto h = truncated_headway_moments(m);
  const double el = lambda * h.mean;
  const double vl = lambda * lambda * h.variance;
  const double cl = lambda * lambda * lambda * h.central3;
  return {el, el + vl, el + 3.0 * vl + cl};
}

// Arrivals at one station: Poisson(lambda) over a truncated-normal headway.
struct ArrivalProcess {
  double lambda = 0.0;
  HeadwayModel headway;

  cplx pgf(cplx z) const { return y_pgf(z, lambda, headway); }
  cplx log_pgf(cplx z) const { return y_log_pgf(z, lambda, headway); }
  ArrivalMoments moments() const { return y_moments(lambda, headway); }
};

}  // namespace transitq
