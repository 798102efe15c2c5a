#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "advrisk/classifiers.hpp"
#include "advrisk/errors.hpp"
#include "advrisk/extreal.hpp"
#include "advrisk/losses.hpp"
#include "advrisk/measures.hpp"
#include "advrisk/sums.hpp"

namespace advrisk {

inline constexpr unsigned long long kDefaultEnumerationBudget = 2'000'000;

namespace detail {

inline std::vector<std::size_t> support_indices(const Scene& scene,
                                                const DiscreteMeasure& m) {
  std::vector<std::size_t> idx;
  idx.reserve(m.atoms().size());
  for (const Atom& a : m.atoms()) {
    auto i = scene.index_of(a.location);
    if (!i) throw std::invalid_argument("risk: measure support point not in scene");
    idx.push_back(*i);
  }
  return idx;
}

/// Per-atom masses and closed-ball index lists, precomputed once per
/// (distribution, scene, eps).  Shared by the public adversarial risks and
/// the brute-force enumerator so both sum in the identical order.
struct RiskTables {
  std::vector<double> m1, m0;
  std::vector<std::vector<std::size_t>> ball1, ball0;
};

inline RiskTables make_risk_tables(const LabeledDistribution& dist,
                                   const Scene& scene, double eps) {
  if (!(eps >= 0.0)) throw std::invalid_argument("risk: eps must be >= 0");
  RiskTables t;
  std::vector<std::size_t> idx1 = support_indices(scene, dist.p1);
  std::vector<std::size_t> idx0 = support_indices(scene, dist.p0);
  t.m1.reserve(idx1.size());
  t.ball1.reserve(idx1.size());
  for (std::size_t k = 0; k < idx1.size(); ++k) {
    t.m1.push_back(dist.p1.atoms()[k].mass);
    t.ball1.push_back(scene.ball(idx1[k], eps));
  }
  t.m0.reserve(idx0.size());
  t.ball0.reserve(idx0.size());
  for (std::size_t k = 0; k < idx0.size(); ++k) {
    t.m0.push_back(dist.p0.atoms()[k].mass);
    t.ball0.push_back(scene.ball(idx0[k], eps));
  }
  return t;
}

inline double adv_classification(const RiskTables& t,
                                 const std::vector<ExtReal>& f) {
  NeumaierSum s1;
  for (std::size_t k = 0; k < t.m1.size(); ++k) {
    double ind = 0.0;
    for (std::size_t j : t.ball1[k])
      if (f[j].raw() <= 0.0) {
        ind = 1.0;
        break;
      }
    s1.add(t.m1[k] * ind);
  }
  NeumaierSum s0;
  for (std::size_t k = 0; k < t.m0.size(); ++k) {
    double ind = 0.0;
    for (std::size_t j : t.ball0[k])
      if (f[j].raw() > 0.0) {
        ind = 1.0;
        break;
      }
    s0.add(t.m0[k] * ind);
  }
  return s1.value() + s0.value();
}

inline double adv_surrogate(const RiskTables& t, const LossFunction& loss,
                            const std::vector<ExtReal>& f) {
  std::vector<double> phi_f(f.size()), phi_nf(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) {
    phi_f[j] = loss(f[j]).raw();
    phi_nf[j] = loss(-f[j]).raw();
  }
  NeumaierSum s1;
  for (std::size_t k = 0; k < t.m1.size(); ++k) {
    double sup = -std::numeric_limits<double>::infinity();
    for (std::size_t j : t.ball1[k]) sup = std::max(sup, phi_f[j]);
    s1.add(scale(t.m1[k], ExtReal(sup)));
  }
  NeumaierSum s0;
  for (std::size_t k = 0; k < t.m0.size(); ++k) {
    double sup = -std::numeric_limits<double>::infinity();
    for (std::size_t j : t.ball0[k]) sup = std::max(sup, phi_nf[j]);
    s0.add(scale(t.m0[k], ExtReal(sup)));
  }
  return s1.value() + s0.value();
}

}  // namespace detail

/// R(f): expected 0-1 error, with sgn 0 = -1.
inline double classification_risk(const LabeledDistribution& dist,
                                  const TabulatedClassifier& f) {
  const Scene& scene = f.scene();
  std::vector<std::size_t> idx1 = detail::support_indices(scene, dist.p1);
  std::vector<std::size_t> idx0 = detail::support_indices(scene, dist.p0);
  NeumaierSum s1;
  for (std::size_t k = 0; k < idx1.size(); ++k)
    s1.add(dist.p1.atoms()[k].mass * (f.values()[idx1[k]].raw() <= 0.0 ? 1.0 : 0.0));
  NeumaierSum s0;
  for (std::size_t k = 0; k < idx0.size(); ++k)
    s0.add(dist.p0.atoms()[k].mass * (f.values()[idx0[k]].raw() > 0.0 ? 1.0 : 0.0));
  return s1.value() + s0.value();
}

/// R_phi(f) = int phi(f) dP1 + int phi(-f) dP0.
inline ExtReal surrogate_risk(const LabeledDistribution& dist,
                              const TabulatedClassifier& f,
                              const LossFunction& loss) {
  const Scene& scene = f.scene();
  std::vector<std::size_t> idx1 = detail::support_indices(scene, dist.p1);
  std::vector<std::size_t> idx0 = detail::support_indices(scene, dist.p0);
  NeumaierSum s1;
  for (std::size_t k = 0; k < idx1.size(); ++k)
    s1.add(scale(dist.p1.atoms()[k].mass, loss(f.values()[idx1[k]])));
  NeumaierSum s0;
  for (std::size_t k = 0; k < idx0.size(); ++k)
    s0.add(scale(dist.p0.atoms()[k].mass, loss(-f.values()[idx0[k]])));
  return ExtReal(s1.value() + s0.value());
}

/// int C_phi(eta(x), f(x)) dP; equals surrogate_risk up to roundoff.
inline ExtReal pointwise_surrogate_risk(const PosteriorView& post,
                                        const TabulatedClassifier& f,
                                        const LossFunction& loss) {
  const Scene& scene = f.scene();
  NeumaierSum s;
  for (std::size_t i = 0; i < post.support.size(); ++i) {
    std::size_t j = scene.require_index(post.support[i]);
    s.add(scale(post.p_mass[i],
                conditional_risk(loss, post.eta[i], f.values()[j])));
  }
  return ExtReal(s.value());
}

/// int C_phi*(eta) dP: the optimal surrogate risk of the distribution.
inline double optimal_surrogate_risk(const PosteriorView& post,
                                     const LossFunction& loss) {
  NeumaierSum s;
  for (std::size_t i = 0; i < post.support.size(); ++i)
    s.add(scale(post.p_mass[i],
                ExtReal(optimal_conditional_risk(loss, post.eta[i]).value)));
  return s.value();
}

/// int C*(eta) dP = int min(eta, 1 - eta) dP: the Bayes 0-1 risk.
inline double optimal_zero_one_risk(const PosteriorView& post) {
  NeumaierSum s;
  for (std::size_t i = 0; i < post.support.size(); ++i)
    s.add(post.p_mass[i] * zero_one_optimal(post.eta[i]));
  return s.value();
}

/// R^eps(f) = int S_eps(1[f<=0]) dP1 + int S_eps(1[f>0]) dP0.
inline double adversarial_classification_risk(const LabeledDistribution& dist,
                                              const TabulatedClassifier& f,
                                              double eps) {
  detail::RiskTables t = detail::make_risk_tables(dist, f.scene(), eps);
  return detail::adv_classification(t, f.values());
}

/// R_phi^eps(f) = int S_eps(phi o f) dP1 + int S_eps(phi o -f) dP0.
inline ExtReal adversarial_surrogate_risk(const LabeledDistribution& dist,
                                          const TabulatedClassifier& f,
                                          const LossFunction& loss, double eps) {
  detail::RiskTables t = detail::make_risk_tables(dist, f.scene(), eps);
  return ExtReal(detail::adv_surrogate(t, loss, f.values()));
}

/// Default enumeration grid for brute-force optima: {-1, 0, +1} without a
/// loss; with an adversarially consistent loss the margin constant c is
/// added, {-inf, -1, -c, 0, c, 1, +inf}; with an inconsistent loss
/// {-inf, -1, 0, 1, +inf}.
inline std::vector<ExtReal> default_value_grid(const LossFunction* loss) {
  if (!loss) return {ExtReal(-1.0), ExtReal(0.0), ExtReal(1.0)};
  if (consistency_certificate(*loss).adversarially_consistent) {
    double c = margin_constants(*loss).c;
    return {ExtReal::neg_inf(), ExtReal(-1.0), ExtReal(-c), ExtReal(0.0),
            ExtReal(c),         ExtReal(1.0),  ExtReal::inf()};
  }
  return {ExtReal::neg_inf(), ExtReal(-1.0), ExtReal(0.0), ExtReal(1.0),
          ExtReal::inf()};
}

struct BruteForceResult {
  double value;
  TabulatedClassifier argmin;  // lexicographically smallest optimum in grid order
  unsigned long long examined;
};

/// Exact minimum of the chosen adversarial risk over all classifiers with
/// values drawn from value_grid.  Throws budget_error when
/// |grid|^|scene| exceeds the budget, reporting the required count.
inline BruteForceResult brute_force_optimal_risk(
    const LabeledDistribution& dist, double eps,
    std::shared_ptr<const Scene> scene, const std::vector<ExtReal>& value_grid,
    const LossFunction* loss = nullptr,
    unsigned long long budget = kDefaultEnumerationBudget) {
  if (value_grid.empty())
    throw std::invalid_argument("brute_force_optimal_risk: empty value grid");
  const std::size_t s = scene->size();
  if (s == 0) throw std::invalid_argument("brute_force_optimal_risk: empty scene");

  long double required = 1.0L;
  for (std::size_t i = 0; i < s; ++i) required *= static_cast<long double>(value_grid.size());
  if (required > static_cast<long double>(budget)) {
    unsigned long long req =
        required > static_cast<long double>(std::numeric_limits<unsigned long long>::max())
            ? std::numeric_limits<unsigned long long>::max()
            : static_cast<unsigned long long>(required);
    throw budget_error("brute_force_optimal_risk: enumeration of " +
                           std::to_string(req) + " classifiers exceeds budget " +
                           std::to_string(budget),
                       req);
  }

  detail::RiskTables tables = detail::make_risk_tables(dist, *scene, eps);

  std::vector<std::size_t> pick(s, 0);
  std::vector<ExtReal> values(s, value_grid[0]);
  double best = std::numeric_limits<double>::infinity();
  std::vector<ExtReal> best_values = values;
  unsigned long long examined = 0;
  while (true) {
    for (std::size_t i = 0; i < s; ++i) values[i] = value_grid[pick[i]];
    double v = loss ? detail::adv_surrogate(tables, *loss, values)
                    : detail::adv_classification(tables, values);
    ++examined;
    if (v < best) {
      best = v;
      best_values = values;
    }
    std::size_t i = s;
    while (i > 0) {
      --i;
      if (++pick[i] < value_grid.size()) break;
      pick[i] = 0;
      if (i == 0) {
        return {best, TabulatedClassifier(scene, std::move(best_values)), examined};
      }
    }
  }
}

}  // namespace advrisk
