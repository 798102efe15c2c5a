#pragma once

#include <cmath>

namespace advrisk {

/// Neumaier-compensated accumulator.  Deterministic for a fixed visit order
/// and recovers sums such as 21 * (0.5/21) exactly, which the finite-scene
/// integrals rely on.  Infinite partial sums saturate.
class NeumaierSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (!std::isfinite(t)) {
      sum_ = t;
      comp_ = 0.0;
      return;
    }
    if (std::fabs(sum_) >= std::fabs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }

  double value() const {
    return std::isfinite(sum_) ? sum_ + comp_ : sum_;
  }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace advrisk
