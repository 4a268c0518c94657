#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace transitq {

// Scenario or input violates a documented invariant.
class validation_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failure inside the analytical pipeline.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Not all roots of the queue-length PGF denominator were found.
class root_finding_error : public numeric_error {
 public:
  root_finding_error(const std::string& what, std::size_t found,
                     std::size_t wanted, std::size_t station = 0)
      : numeric_error(what), found_(found), wanted_(wanted), station_(station) {}

  std::size_t found() const noexcept { return found_; }
  std::size_t wanted() const noexcept { return wanted_; }
  std::size_t station() const noexcept { return station_; }

  root_finding_error at_station(std::size_t n) const {
    return root_finding_error("station " + std::to_string(n) + ": " + what(),
                              found_, wanted_, n);
  }

 private:
  std::size_t found_;
  std::size_t wanted_;
  std::size_t station_;
};

// s_C is (numerically) zero; the caller has to trim the effective capacity.
class capacity_trim_error : public numeric_error {
 public:
  using numeric_error::numeric_error;
};

// Requested a stationary quantity for a station with rho >= 1.
class instability_error : public numeric_error {
 public:
  using numeric_error::numeric_error;
};

}  // namespace transitq
