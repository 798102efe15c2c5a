#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace advrisk {

enum class Norm { L1, L2, LInf };

using Point = std::vector<double>;

inline std::string to_string(Norm n) {
  switch (n) {
    case Norm::L1: return "l1";
    case Norm::L2: return "l2";
    case Norm::LInf: return "linf";
  }
  return "l2";
}

inline Norm norm_from_string(const std::string& s) {
  if (s == "l1") return Norm::L1;
  if (s == "l2") return Norm::L2;
  if (s == "linf") return Norm::LInf;
  throw std::invalid_argument("unknown norm tag: " + s);
}

/// Distance in the tagged norm.  In one dimension all three norms coincide
/// and the result |a - b| is exact, which keeps ball-membership comparisons
/// on decimal inputs exact.
inline double distance(Norm norm, const Point& a, const Point& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("distance: dimension mismatch");
  if (a.size() == 1) return std::fabs(a[0] - b[0]);
  switch (norm) {
    case Norm::L1: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
      return s;
    }
    case Norm::L2: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
      }
      return std::sqrt(s);
    }
    case Norm::LInf: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i)
        s = std::max(s, std::fabs(a[i] - b[i]));
      return s;
    }
  }
  return 0.0;
}

/// Closed-ball membership: distance(a, b) <= eps.
inline bool within(Norm norm, const Point& a, const Point& b, double eps) {
  return distance(norm, a, b) <= eps;
}

}  // namespace advrisk
