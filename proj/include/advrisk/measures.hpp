#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "advrisk/extreal.hpp"
#include "advrisk/geometry.hpp"
#include "advrisk/sums.hpp"

namespace advrisk {

struct Atom {
  Point location;
  double mass;
};

/// A finite atomic measure on R^d with a norm tag.  Atoms at equal locations
/// (exact coordinate comparison) are merged at construction; zero-mass atoms
/// are dropped.
class DiscreteMeasure {
 public:
  DiscreteMeasure(int dimension, Norm norm, std::vector<Atom> atoms)
      : dimension_(dimension), norm_(norm) {
    if (dimension <= 0)
      throw std::invalid_argument("DiscreteMeasure: dimension must be positive");
    for (Atom& a : atoms) {
      if (a.location.size() != static_cast<std::size_t>(dimension))
        throw std::invalid_argument("DiscreteMeasure: atom dimension mismatch");
      if (!(a.mass >= 0.0) || !std::isfinite(a.mass))
        throw std::invalid_argument("DiscreteMeasure: atom mass must be finite and >= 0");
      for (double x : a.location)
        if (!std::isfinite(x))
          throw std::invalid_argument("DiscreteMeasure: atom location must be finite");
      bool merged = false;
      for (Atom& b : atoms_) {
        if (b.location == a.location) {
          b.mass += a.mass;
          merged = true;
          break;
        }
      }
      if (!merged) atoms_.push_back(std::move(a));
    }
    std::vector<Atom> kept;
    kept.reserve(atoms_.size());
    for (Atom& a : atoms_)
      if (a.mass > 0.0) kept.push_back(std::move(a));
    atoms_ = std::move(kept);
  }

  int dimension() const { return dimension_; }
  Norm norm() const { return norm_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }

  double total_mass() const {
    NeumaierSum s;
    for (const Atom& a : atoms_) s.add(a.mass);
    return s.value();
  }

 private:
  int dimension_;
  Norm norm_;
  std::vector<Atom> atoms_;
};

/// The pair (P0, P1) of class-conditional measures of a labeled distribution.
struct LabeledDistribution {
  DiscreteMeasure p0;
  DiscreteMeasure p1;

  LabeledDistribution(DiscreteMeasure p0_in, DiscreteMeasure p1_in)
      : p0(std::move(p0_in)), p1(std::move(p1_in)) {
    if (p0.dimension() != p1.dimension() || p0.norm() != p1.norm())
      throw std::invalid_argument("LabeledDistribution: P0 and P1 must share dimension and norm");
    double total = p0.total_mass() + p1.total_mass();
    if (std::fabs(total - 1.0) > kMassTol)
      throw std::invalid_argument("LabeledDistribution: P0 + P1 must have total mass 1");
  }
};

/// P = P0 + P1 and eta = dP1/dP on the combined support.
struct PosteriorView {
  std::vector<Point> support;
  std::vector<double> p_mass;   // mass of P0 + P1 at each support point
  std::vector<double> eta;      // P1 share at each support point
  std::vector<double> p0_mass;  // per-label masses, kept for exact reconstruction
  std::vector<double> p1_mass;
};

inline PosteriorView posterior(const DiscreteMeasure& p0, const DiscreteMeasure& p1) {
  if (p0.dimension() != p1.dimension() || p0.norm() != p1.norm())
    throw std::invalid_argument("posterior: measures must share dimension and norm");
  PosteriorView v;
  auto upsert = [&](const Point& loc) -> std::size_t {
    for (std::size_t i = 0; i < v.support.size(); ++i)
      if (v.support[i] == loc) return i;
    v.support.push_back(loc);
    v.p0_mass.push_back(0.0);
    v.p1_mass.push_back(0.0);
    return v.support.size() - 1;
  };
  for (const Atom& a : p0.atoms()) v.p0_mass[upsert(a.location)] += a.mass;
  for (const Atom& a : p1.atoms()) v.p1_mass[upsert(a.location)] += a.mass;
  v.p_mass.resize(v.support.size());
  v.eta.resize(v.support.size());
  for (std::size_t i = 0; i < v.support.size(); ++i) {
    v.p_mass[i] = v.p0_mass[i] + v.p1_mass[i];
    v.eta[i] = v.p1_mass[i] / v.p_mass[i];
  }
  return v;
}

inline PosteriorView posterior(const LabeledDistribution& dist) {
  return posterior(dist.p0, dist.p1);
}

/// n equally spaced atoms on [-R, R], each of mass half_mass / n; includes
/// the origin exactly when n is odd.
inline DiscreteMeasure uniform_segment(double R, int n, double half_mass,
                                       Norm norm = Norm::L2) {
  if (n < 2) throw std::invalid_argument("uniform_segment: n must be >= 2");
  if (!(R > 0.0) || !std::isfinite(R))
    throw std::invalid_argument("uniform_segment: R must be a positive real");
  if (!(half_mass >= 0.0) || !std::isfinite(half_mass))
    throw std::invalid_argument("uniform_segment: half_mass must be >= 0");
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(n));
  double m = half_mass / n;
  for (int i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / (n - 1);
    atoms.push_back({Point{R * (2.0 * t - 1.0)}, m});
  }
  return DiscreteMeasure(1, norm, std::move(atoms));
}

}  // namespace advrisk
