#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace advrisk {

// Library-wide tolerances.
inline constexpr double kOptTol = 1e-10;     // scalar minimization guarantee
inline constexpr double kCertTol = 1e-8;     // consistency-certificate margin cutoff
inline constexpr double kMassTol = 1e-12;    // mass balance / equality comparisons
inline constexpr double kWeakDualityTol = 1e-12;

/// A point of the extended real line.  NaN is rejected at construction, so
/// the ordinary comparisons on the payload give the total order
/// -inf < finite < +inf.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  constexpr ExtReal(double v) : v_(v) {
    if (v != v) throw std::invalid_argument("ExtReal: NaN is not an extended real");
  }

  static constexpr ExtReal inf() {
    return ExtReal(std::numeric_limits<double>::infinity());
  }
  static constexpr ExtReal neg_inf() {
    return ExtReal(-std::numeric_limits<double>::infinity());
  }

  constexpr double raw() const { return v_; }
  constexpr bool finite() const {
    return v_ > -std::numeric_limits<double>::infinity() &&
           v_ < std::numeric_limits<double>::infinity();
  }
  constexpr bool is_pos_inf() const {
    return v_ == std::numeric_limits<double>::infinity();
  }
  constexpr bool is_neg_inf() const {
    return v_ == -std::numeric_limits<double>::infinity();
  }

  constexpr ExtReal operator-() const { return ExtReal(-v_); }

  friend constexpr bool operator==(ExtReal a, ExtReal b) { return a.v_ == b.v_; }
  friend constexpr bool operator<(ExtReal a, ExtReal b) { return a.v_ < b.v_; }
  friend constexpr bool operator<=(ExtReal a, ExtReal b) { return a.v_ <= b.v_; }
  friend constexpr bool operator>(ExtReal a, ExtReal b) { return a.v_ > b.v_; }
  friend constexpr bool operator>=(ExtReal a, ExtReal b) { return a.v_ >= b.v_; }

 private:
  double v_ = 0.0;
};

/// w * x with the measure-theoretic convention 0 * (+-inf) = 0.
/// Requires w >= 0 and finite.
inline double scale(double w, ExtReal x) {
  if (w == 0.0) return 0.0;
  return w * x.raw();
}

inline ExtReal ext_max(ExtReal a, ExtReal b) { return a >= b ? a : b; }
inline ExtReal ext_min(ExtReal a, ExtReal b) { return a <= b ? a : b; }

}  // namespace advrisk
