#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "advrisk/classifiers.hpp"
#include "advrisk/errors.hpp"
#include "advrisk/extreal.hpp"
#include "advrisk/losses.hpp"
#include "advrisk/measures.hpp"
#include "advrisk/risks.hpp"
#include "advrisk/sums.hpp"
#include "advrisk/transport.hpp"

namespace advrisk {

inline constexpr unsigned long long kDefaultDualBudget = 1'000'000;

namespace detail {

/// Memoized C_phi*(eta); dual searches evaluate the same posteriors many times.
class CstarCache {
 public:
  explicit CstarCache(const LossFunction* loss) : loss_(loss) {}

  double operator()(double eta) {
    if (!loss_) return zero_one_optimal(eta);
    std::uint64_t key;
    std::memcpy(&key, &eta, sizeof key);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    double v = optimal_conditional_risk(*loss_, eta).value;
    memo_.emplace(key, v);
    return v;
  }

 private:
  const LossFunction* loss_;
  std::unordered_map<std::uint64_t, double> memo_;
};

}  // namespace detail

/// R-bar(P0', P1') = int C*(eta') d(P0' + P1') = sum of min(p0', p1') over
/// the shared support.
inline double dual_classification_objective(const DiscreteMeasure& p0p,
                                            const DiscreteMeasure& p1p) {
  PosteriorView v = posterior(p0p, p1p);
  NeumaierSum s;
  for (std::size_t i = 0; i < v.support.size(); ++i)
    s.add(std::min(v.p0_mass[i], v.p1_mass[i]));
  return s.value();
}

/// R-bar_phi(P0', P1') = int C_phi*(eta') d(P0' + P1').
inline double dual_surrogate_objective(const DiscreteMeasure& p0p,
                                       const DiscreteMeasure& p1p,
                                       const LossFunction& loss) {
  PosteriorView v = posterior(p0p, p1p);
  detail::CstarCache cstar(&loss);
  NeumaierSum s;
  for (std::size_t i = 0; i < v.support.size(); ++i)
    s.add(scale(v.p_mass[i], ExtReal(cstar(v.eta[i]))));
  return s.value();
}

/// A feasible dual point: perturbed measures inside the W_inf balls, with
/// witness couplings and the objective values they attain.
struct DualCandidate {
  DiscreteMeasure p0_prime;
  DiscreteMeasure p1_prime;
  Coupling witness0;  // P0 atoms -> P0' atoms
  Coupling witness1;  // P1 atoms -> P1' atoms
  PosteriorView posterior_prime;
  double objective_classification;
  std::optional<double> objective_surrogate;
  std::vector<std::size_t> assignment;  // destination scene index per atom, P0 atoms then P1 atoms
  std::string method;                   // "explicit", "exhaustive" or "coordinate_ascent"
};

/// Builds the candidate that moves each atom to its assigned scene point.
/// Destinations must lie in the closed eps-ball of the atom they move.
inline DualCandidate dual_candidate_from_assignment(
    const LabeledDistribution& dist, double eps, std::shared_ptr<const Scene> scene,
    const std::vector<std::size_t>& assignment, const LossFunction* loss = nullptr,
    std::string method = "explicit") {
  const std::size_t n0 = dist.p0.atoms().size();
  const std::size_t n1 = dist.p1.atoms().size();
  if (assignment.size() != n0 + n1)
    throw std::invalid_argument("dual candidate: one destination per atom required (P0 then P1)");
  if (!(eps >= 0.0)) throw std::invalid_argument("dual candidate: eps must be >= 0");

  const auto build = [&](const DiscreteMeasure& m, std::size_t offset)
      -> std::pair<DiscreteMeasure, Coupling> {
    // Destination atoms ordered by ascending scene index.
    std::vector<std::pair<std::size_t, double>> dest;  // (scene idx, mass)
    std::vector<double> dists(m.atoms().size());
    for (std::size_t k = 0; k < m.atoms().size(); ++k) {
      std::size_t di = assignment[offset + k];
      if (di >= scene->size())
        throw std::invalid_argument("dual candidate: destination index out of range");
      double dd = distance(m.norm(), m.atoms()[k].location, scene->points()[di]);
      if (dd > eps)
        throw std::invalid_argument("dual candidate: destination outside the eps-ball");
      dists[k] = dd;
      bool found = false;
      for (auto& [idx, mass] : dest)
        if (idx == di) {
          mass += m.atoms()[k].mass;
          found = true;
          break;
        }
      if (!found) dest.push_back({di, m.atoms()[k].mass});
    }
    std::sort(dest.begin(), dest.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Atom> atoms;
    atoms.reserve(dest.size());
    std::unordered_map<std::size_t, std::size_t> scene_to_prime;
    for (const auto& [idx, mass] : dest) {
      scene_to_prime[idx] = atoms.size();
      atoms.push_back({scene->points()[idx], mass});
    }
    DiscreteMeasure prime(m.dimension(), m.norm(), std::move(atoms));
    Coupling w;
    for (std::size_t k = 0; k < m.atoms().size(); ++k) {
      w.entries.push_back(
          {k, scene_to_prime[assignment[offset + k]], m.atoms()[k].mass, dists[k]});
      w.bottleneck = std::max(w.bottleneck, dists[k]);
    }
    return {std::move(prime), std::move(w)};
  };

  auto [p0p, w0] = build(dist.p0, 0);
  auto [p1p, w1] = build(dist.p1, n0);
  PosteriorView post = posterior(p0p, p1p);
  double obj_cls = dual_classification_objective(p0p, p1p);
  std::optional<double> obj_sur;
  if (loss) obj_sur = dual_surrogate_objective(p0p, p1p, *loss);
  return {std::move(p0p), std::move(p1p),     std::move(w0),
          std::move(w1),  std::move(post),    obj_cls,
          obj_sur,        assignment,         std::move(method)};
}

/// Maximizes the dual objective (surrogate when a loss is given, otherwise
/// classification) over per-atom destinations inside the eps-balls.
/// Exhaustive when the assignment count fits the budget; otherwise
/// deterministic coordinate ascent from the identity assignment.  Either way
/// the result is a certified lower bound on the dual supremum.
inline DualCandidate maximize_dual(const LabeledDistribution& dist, double eps,
                                   std::shared_ptr<const Scene> scene,
                                   const LossFunction* loss = nullptr,
                                   unsigned long long budget = kDefaultDualBudget) {
  if (!(eps >= 0.0)) throw std::invalid_argument("maximize_dual: eps must be >= 0");
  const std::size_t n0 = dist.p0.atoms().size();
  const std::size_t n1 = dist.p1.atoms().size();
  const std::size_t n = n0 + n1;

  // Per-atom candidate destinations and the identity assignment.
  std::vector<std::vector<std::size_t>> cands(n);
  std::vector<std::size_t> identity(n);
  std::vector<const Atom*> atom_of(n);
  std::vector<int> label_of(n);  // 0 for P0 atoms, 1 for P1 atoms
  for (std::size_t k = 0; k < n; ++k) {
    const Atom& a = k < n0 ? dist.p0.atoms()[k] : dist.p1.atoms()[k - n0];
    atom_of[k] = &a;
    label_of[k] = k < n0 ? 0 : 1;
    identity[k] = scene->require_index(a.location);
    for (std::size_t j = 0; j < scene->size(); ++j)
      if (within(scene->norm(), a.location, scene->points()[j], eps))
        cands[k].push_back(j);
  }

  detail::CstarCache cstar(loss);
  // Objective of an assignment via per-scene-point mass tallies, scene order.
  std::vector<double> mass0(scene->size()), mass1(scene->size());
  const auto objective = [&](const std::vector<std::size_t>& asg) {
    std::fill(mass0.begin(), mass0.end(), 0.0);
    std::fill(mass1.begin(), mass1.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k)
      (label_of[k] == 0 ? mass0 : mass1)[asg[k]] += atom_of[k]->mass;
    NeumaierSum s;
    for (std::size_t j = 0; j < scene->size(); ++j) {
      double p = mass0[j] + mass1[j];
      if (p <= 0.0) continue;
      if (loss)
        s.add(scale(p, ExtReal(cstar(mass1[j] / p))));
      else
        s.add(std::min(mass0[j], mass1[j]));
    }
    return s.value();
  };

  long double count = 1.0L;
  for (std::size_t k = 0; k < n; ++k) count *= static_cast<long double>(cands[k].size());

  std::vector<std::size_t> best = identity;
  std::string method;
  if (count <= static_cast<long double>(budget)) {
    method = "exhaustive";
    std::vector<std::size_t> pick(n, 0);
    std::vector<std::size_t> asg(n);
    double best_v = -std::numeric_limits<double>::infinity();
    bool done = n == 0;
    while (!done) {
      for (std::size_t k = 0; k < n; ++k) asg[k] = cands[k][pick[k]];
      double v = objective(asg);
      if (v > best_v) {
        best_v = v;
        best = asg;
      }
      std::size_t i = n;
      while (i > 0) {
        --i;
        if (++pick[i] < cands[i].size()) break;
        pick[i] = 0;
        if (i == 0) done = true;
      }
    }
  } else {
    method = "coordinate_ascent";
    best = identity;
    double cur = objective(best);
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t k = 0; k < n; ++k) {
        std::size_t keep = best[k];
        std::size_t pick_dest = keep;
        double pick_v = cur;
        for (std::size_t j : cands[k]) {
          if (j == keep) continue;
          best[k] = j;
          double v = objective(best);
          if (v > pick_v) {
            pick_v = v;
            pick_dest = j;
          }
        }
        best[k] = pick_dest;
        if (pick_dest != keep) {
          cur = pick_v;
          improved = true;
        }
      }
    }
  }

  return dual_candidate_from_assignment(dist, eps, std::move(scene), best, loss,
                                        std::move(method));
}

struct DualityGapReport {
  double primal;
  double dual;
  double gap;  // primal - dual; >= -1e-9 by weak duality
  BruteForceResult primal_result;
  DualCandidate candidate;
};

/// Primal brute-force optimum vs. dual search, same objective family.
inline DualityGapReport duality_gap(const LabeledDistribution& dist, double eps,
                                    std::shared_ptr<const Scene> scene,
                                    const LossFunction* loss = nullptr,
                                    std::vector<ExtReal> value_grid = {},
                                    unsigned long long enumeration_budget = kDefaultEnumerationBudget,
                                    unsigned long long dual_budget = kDefaultDualBudget) {
  if (value_grid.empty()) value_grid = default_value_grid(loss);
  BruteForceResult primal =
      brute_force_optimal_risk(dist, eps, scene, value_grid, loss, enumeration_budget);
  DualCandidate cand = maximize_dual(dist, eps, scene, loss, dual_budget);
  double dual = loss ? *cand.objective_surrogate : cand.objective_classification;
  double gap = primal.value - dual;
  return {primal.value, dual, gap, std::move(primal), std::move(cand)};
}

namespace detail {

inline void validate_witness(const DiscreteMeasure& from, const DiscreteMeasure& to,
                             const Coupling& w, double eps) {
  std::vector<double> out_mass(from.atoms().size(), 0.0);
  std::vector<double> in_mass(to.atoms().size(), 0.0);
  for (const CouplingEntry& e : w.entries) {
    if (e.source >= from.atoms().size() || e.target >= to.atoms().size())
      throw std::invalid_argument("dual candidate witness: entry index out of range");
    if (!(e.mass >= 0.0))
      throw std::invalid_argument("dual candidate witness: negative entry mass");
    double dd = distance(from.norm(), from.atoms()[e.source].location,
                         to.atoms()[e.target].location);
    if (dd > eps)
      throw std::invalid_argument("dual candidate witness: entry longer than eps");
    out_mass[e.source] += e.mass;
    in_mass[e.target] += e.mass;
  }
  for (std::size_t i = 0; i < out_mass.size(); ++i)
    if (std::fabs(out_mass[i] - from.atoms()[i].mass) > 1e-9)
      throw std::invalid_argument("dual candidate witness: source marginal mismatch");
  for (std::size_t j = 0; j < in_mass.size(); ++j)
    if (std::fabs(in_mass[j] - to.atoms()[j].mass) > 1e-9)
      throw std::invalid_argument("dual candidate witness: target marginal mismatch");
}

}  // namespace detail

/// Weak duality: R^eps(f) >= R-bar(candidate) - 1e-12.  The candidate's
/// witnesses are validated first.
inline bool weak_duality_check(const LabeledDistribution& dist, double eps,
                               const TabulatedClassifier& f,
                               const DualCandidate& candidate) {
  detail::validate_witness(dist.p0, candidate.p0_prime, candidate.witness0, eps);
  detail::validate_witness(dist.p1, candidate.p1_prime, candidate.witness1, eps);
  double lhs = adversarial_classification_risk(dist, f, eps);
  return lhs >= candidate.objective_classification - kWeakDualityTol;
}

/// One row of the complementary-slackness diagnostic for f_n.
struct SlacknessRow {
  long n;
  // int C_phi(eta*, f_n) dP* - int C_phi*(eta*) dP*
  double surrogate_conditional_residual;
  // int S_eps(phi o f_n) dP1 - int phi o f_n dP1*     (and the P0 analog)
  double surrogate_transport_residual_p1;
  double surrogate_transport_residual_p0;
  // the same three quantities with 0-1 indicators
  double classification_conditional_residual;
  double classification_transport_residual_p1;
  double classification_transport_residual_p0;
  // one-sided transport inequalities (lhs <= rhs + 1e-12), per side
  bool classification_p1_slack_holds;
  bool classification_p0_slack_holds;
};

/// Evaluates the complementary-slackness residuals of the classifiers f_n
/// against a dual candidate.  All residuals are >= -1e-12 by construction.
inline std::vector<SlacknessRow> slackness_report(
    const LabeledDistribution& dist, double eps, const LossFunction& loss,
    const std::function<TabulatedClassifier(long)>& family,
    const std::vector<long>& n_list, const DualCandidate& candidate) {
  if (!(eps >= 0.0)) throw std::invalid_argument("slackness_report: eps must be >= 0");
  detail::CstarCache cstar(&loss);
  const PosteriorView& post = candidate.posterior_prime;

  std::vector<SlacknessRow> rows;
  rows.reserve(n_list.size());
  for (long n : n_list) {
    TabulatedClassifier f = family(n);
    const Scene& scene = f.scene();

    std::vector<double> phi_f(scene.size()), phi_nf(scene.size());
    std::vector<ExtReal> ind_le(scene.size()), ind_gt(scene.size());
    for (std::size_t j = 0; j < scene.size(); ++j) {
      phi_f[j] = loss(f.values()[j]).raw();
      phi_nf[j] = loss(-f.values()[j]).raw();
      ind_le[j] = ExtReal(f.values()[j].raw() <= 0.0 ? 1.0 : 0.0);
      ind_gt[j] = ExtReal(f.values()[j].raw() > 0.0 ? 1.0 : 0.0);
    }

    // Conditional residuals against the candidate posterior.
    NeumaierSum c_phi, c_phi_star, c_cls, c_cls_star;
    for (std::size_t i = 0; i < post.support.size(); ++i) {
      std::size_t j = scene.require_index(post.support[i]);
      c_phi.add(scale(post.p_mass[i], conditional_risk(loss, post.eta[i], f.values()[j])));
      c_phi_star.add(scale(post.p_mass[i], ExtReal(cstar(post.eta[i]))));
      c_cls.add(post.p_mass[i] * zero_one_conditional_risk(post.eta[i], f.values()[j]));
      c_cls_star.add(post.p_mass[i] * zero_one_optimal(post.eta[i]));
    }

    // Transport residuals: sup-integral over the original marginal minus the
    // plain integral over the perturbed one.
    const auto sup_integral = [&](const DiscreteMeasure& m,
                                  const std::vector<double>& g) {
      NeumaierSum s;
      for (const Atom& a : m.atoms()) {
        std::size_t at = scene.require_index(a.location);
        double sup = -std::numeric_limits<double>::infinity();
        for (std::size_t j : scene.ball(at, eps)) sup = std::max(sup, g[j]);
        s.add(scale(a.mass, ExtReal(sup)));
      }
      return s.value();
    };
    const auto plain_integral = [&](const DiscreteMeasure& m,
                                    const std::vector<double>& g) {
      NeumaierSum s;
      for (const Atom& a : m.atoms())
        s.add(scale(a.mass, ExtReal(g[scene.require_index(a.location)])));
      return s.value();
    };
    std::vector<double> ind_le_d(scene.size()), ind_gt_d(scene.size());
    for (std::size_t j = 0; j < scene.size(); ++j) {
      ind_le_d[j] = ind_le[j].raw();
      ind_gt_d[j] = ind_gt[j].raw();
    }

    double sur_p1 = sup_integral(dist.p1, phi_f) -
                    plain_integral(candidate.p1_prime, phi_f);
    double sur_p0 = sup_integral(dist.p0, phi_nf) -
                    plain_integral(candidate.p0_prime, phi_nf);
    double cls_p1_lhs = sup_integral(dist.p1, ind_le_d);
    double cls_p1_rhs = plain_integral(candidate.p1_prime, ind_le_d);
    double cls_p0_lhs = sup_integral(dist.p0, ind_gt_d);
    double cls_p0_rhs = plain_integral(candidate.p0_prime, ind_gt_d);

    rows.push_back({n,
                    c_phi.value() - c_phi_star.value(),
                    sur_p1,
                    sur_p0,
                    c_cls.value() - c_cls_star.value(),
                    cls_p1_lhs - cls_p1_rhs,
                    cls_p0_lhs - cls_p0_rhs,
                    cls_p1_lhs <= cls_p1_rhs + kWeakDualityTol,
                    cls_p0_lhs <= cls_p0_rhs + kWeakDualityTol});
  }
  return rows;
}

}  // namespace advrisk
