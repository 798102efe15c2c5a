#pragma once

#include <stdexcept>
#include <string>

namespace advrisk {

/// Thrown when an enumeration would exceed its configured budget.  Carries the
/// budget that would have been required (saturated at the largest
/// representable count).
class budget_error : public std::runtime_error {
 public:
  budget_error(const std::string& what, unsigned long long required)
      : std::runtime_error(what), required_(required) {}

  unsigned long long required() const { return required_; }

 private:
  unsigned long long required_;
};

}  // namespace advrisk
