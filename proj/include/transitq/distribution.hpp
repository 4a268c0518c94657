#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "transitq/error.hpp"

namespace transitq {

inline constexpr double kNegativeClamp = -1e-12;
inline constexpr double kSumTolerance = 1e-9;

// Probability vector over 0..C passengers.
class DiscreteDist {
 public:
  DiscreteDist() = default;

  // Entries in [-1e-12, 0) are clamped to zero and the vector is renormalised;
  // anything more negative, or a total off by more than 1e-9, is a bug.
  explicit DiscreteDist(std::vector<double> probs) : p_(std::move(probs)) {
    if (p_.empty()) throw validation_error("distribution must be non-empty");
    double total = 0.0;
    for (std::size_t k = 0; k < p_.size(); ++k) {
      double& x = p_[k];
      if (!std::isfinite(x) || x < kNegativeClamp)
        throw numeric_error("probability " + std::to_string(x) + " at index " +
                            std::to_string(k) + " is invalid");
      if (x < 0.0) x = 0.0;
      total += x;
    }
    if (std::fabs(total - 1.0) > kSumTolerance)
      throw numeric_error("probabilities sum to " + std::to_string(total));
    for (double& x : p_) x /= total;
  }

  static DiscreteDist point_mass(int capacity, int at) {
    std::vector<double> p(static_cast<std::size_t>(capacity) + 1, 0.0);
    p.at(static_cast<std::size_t>(at)) = 1.0;
    return DiscreteDist(std::move(p));
  }

  int capacity() const noexcept { return static_cast<int>(p_.size()) - 1; }
  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t k) const { return p_[k]; }
  std::span<const double> probs() const noexcept { return p_; }

  // s_k = d_{C-k}.
  DiscreteDist reversed() const {
    return DiscreteDist(std::vector<double>(p_.rbegin(), p_.rend()));
  }

  // Keep 0..c, dropping the (negligible) tail mass above c.
  DiscreteDist truncated(int c) const {
    std::vector<double> p(p_.begin(), p_.begin() + c + 1);
    double total = 0.0;
    for (double x : p) total += x;
    for (double& x : p) x /= total;
    return DiscreteDist(std::move(p));
  }

 private:
  std::vector<double> p_;
};

struct DistMoments {
  double mean = 0.0;
  double central2 = 0.0;
  double central3 = 0.0;
};

inline DistMoments dist_moments(const DiscreteDist& d) {
  DistMoments m;
  for (std::size_t k = 0; k < d.size(); ++k) m.mean += static_cast<double>(k) * d[k];
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double x = static_cast<double>(k) - m.mean;
    m.central2 += x * x * d[k];
    m.central3 += x * x * x * d[k];
  }
  return m;
}

// Dense row-major square matrix; sizes here are (C+1) x (C+1).
class Matrix {
 public:
  explicit Matrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}
  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  double row_sum(std::size_t i) const {
    double t = 0.0;
    for (std::size_t j = 0; j < n_; ++j) t += (*this)(i, j);
    return t;
  }

 private:
  std::size_t n_;
  std::vector<double> a_;
};

// Row vector times matrix.
inline DiscreteDist operator*(const DiscreteDist& v, const Matrix& m) {
  std::vector<double> out(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    for (std::size_t j = 0; j < m.size(); ++j) out[j] += vi * m(i, j);
  }
  return DiscreteDist(std::move(out));
}

}  // namespace transitq
