#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "advrisk/extreal.hpp"
#include "advrisk/geometry.hpp"

namespace advrisk {

/// Finite evaluation domain.  Classifiers are tabulated on scene points and
/// the ball supremum S_eps is the exact maximum over scene points in the
/// closed eps-ball.
class Scene {
 public:
  Scene(int dimension, Norm norm, std::vector<Point> points)
      : dimension_(dimension), norm_(norm), points_(std::move(points)) {
    if (dimension <= 0)
      throw std::invalid_argument("Scene: dimension must be positive");
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (points_[i].size() != static_cast<std::size_t>(dimension))
        throw std::invalid_argument("Scene: point dimension mismatch");
      for (double x : points_[i])
        if (!std::isfinite(x))
          throw std::invalid_argument("Scene: point coordinates must be finite");
      for (std::size_t j = 0; j < i; ++j)
        if (points_[i] == points_[j])
          throw std::invalid_argument("Scene: duplicate point");
    }
  }

  int dimension() const { return dimension_; }
  Norm norm() const { return norm_; }
  const std::vector<Point>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

  std::optional<std::size_t> index_of(const Point& p) const {
    for (std::size_t i = 0; i < points_.size(); ++i)
      if (points_[i] == p) return i;
    return std::nullopt;
  }

  std::size_t require_index(const Point& p) const {
    auto idx = index_of(p);
    if (!idx) throw std::invalid_argument("Scene: point not in scene");
    return *idx;
  }

  /// Indices of scene points in the closed eps-ball around points_[center].
  std::vector<std::size_t> ball(std::size_t center, double eps) const {
    if (center >= points_.size())
      throw std::invalid_argument("Scene: ball center out of range");
    if (!(eps >= 0.0))
      throw std::invalid_argument("Scene: eps must be >= 0");
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < points_.size(); ++j)
      if (within(norm_, points_[center], points_[j], eps)) out.push_back(j);
    return out;
  }

 private:
  int dimension_;
  Norm norm_;
  std::vector<Point> points_;
};

inline std::shared_ptr<const Scene> make_scene(int dimension, Norm norm,
                                               std::vector<Point> points) {
  return std::make_shared<const Scene>(dimension, norm, std::move(points));
}

/// An extended-real-valued classifier tabulated on a scene.
class TabulatedClassifier {
 public:
  TabulatedClassifier(std::shared_ptr<const Scene> scene, std::vector<ExtReal> values)
      : scene_(std::move(scene)), values_(std::move(values)) {
    if (!scene_) throw std::invalid_argument("TabulatedClassifier: null scene");
    if (values_.size() != scene_->size())
      throw std::invalid_argument("TabulatedClassifier: one value per scene point required");
  }

  const Scene& scene() const { return *scene_; }
  const std::shared_ptr<const Scene>& scene_ptr() const { return scene_; }
  const std::vector<ExtReal>& values() const { return values_; }
  ExtReal value_at(std::size_t i) const { return values_.at(i); }
  ExtReal value_at(const Point& p) const { return values_[scene_->require_index(p)]; }

 private:
  std::shared_ptr<const Scene> scene_;
  std::vector<ExtReal> values_;
};

/// sgn with the convention sgn 0 = -1.
inline int sgn(ExtReal alpha) { return alpha.raw() > 0.0 ? +1 : -1; }

/// Max of per-point values over the closed eps-ball around scene point `at`.
inline ExtReal sup_ball(const Scene& scene, const std::vector<ExtReal>& values,
                        std::size_t at, double eps) {
  if (values.size() != scene.size())
    throw std::invalid_argument("sup_ball: one value per scene point required");
  std::vector<std::size_t> idx = scene.ball(at, eps);
  ExtReal best = values[idx.front()];
  for (std::size_t k = 1; k < idx.size(); ++k) best = ext_max(best, values[idx[k]]);
  return best;
}

inline ExtReal sup_ball(const TabulatedClassifier& g, std::size_t at, double eps) {
  return sup_ball(g.scene(), g.values(), at, eps);
}

inline ExtReal sup_ball(const TabulatedClassifier& g, const Point& x, double eps) {
  return sup_ball(g.scene(), g.values(), g.scene().require_index(x), eps);
}

/// sigma_[-N,N] applied to every value; anti-symmetric in the value.
inline TabulatedClassifier truncate(const TabulatedClassifier& f, double N) {
  if (!(N > 0.0)) throw std::invalid_argument("truncate: N must be positive");
  std::vector<ExtReal> out;
  out.reserve(f.values().size());
  for (ExtReal v : f.values()) {
    double x = v.raw();
    out.push_back(ExtReal(x > N ? N : (x < -N ? -N : x)));
  }
  return TabulatedClassifier(f.scene_ptr(), std::move(out));
}

/// f_n: 1/n at the origin, -1/n at every other scene point.
inline TabulatedClassifier counterexample_classifier(std::shared_ptr<const Scene> scene,
                                                     long n) {
  if (n < 1) throw std::invalid_argument("counterexample_classifier: n must be >= 1");
  Point origin(static_cast<std::size_t>(scene->dimension()), 0.0);
  auto origin_idx = scene->index_of(origin);
  if (!origin_idx)
    throw std::invalid_argument("counterexample_classifier: scene must contain the origin");
  double v = 1.0 / static_cast<double>(n);
  std::vector<ExtReal> values(scene->size(), ExtReal(-v));
  values[*origin_idx] = ExtReal(v);
  return TabulatedClassifier(std::move(scene), std::move(values));
}

}  // namespace advrisk
