#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace aeq {

// Comparison tolerance shared by every solver.
inline constexpr double kEpsilon = 1e-9;

using RewardVector = std::vector<double>;

// Real formatted with 12 significant digits; negative zero prints as 0.
std::string format_real(double value);
// "(a,b,...)" using format_real.
std::string format_vector(const std::vector<double>& values);

// Raised for malformed games, profiles, scenario files or arguments.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an enumeration would exceed its configured cap. `count` is
// the exact size that was refused, written out in decimal (or as a power
// when it does not fit in 64 bits).
class EnumerationCapError : public ValidationError {
 public:
  EnumerationCapError(const std::string& what_enumerated, std::string count,
                      std::size_t cap)
      : ValidationError(what_enumerated + " count " + count +
                        " exceeds cap " + std::to_string(cap)),
        count_(std::move(count)),
        cap_(cap) {}

  const std::string& count() const { return count_; }
  std::size_t cap() const { return cap_; }

 private:
  std::string count_;
  std::size_t cap_;
};

}  // namespace aeq
