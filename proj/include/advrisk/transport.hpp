#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "advrisk/classifiers.hpp"
#include "advrisk/extreal.hpp"
#include "advrisk/geometry.hpp"
#include "advrisk/measures.hpp"
#include "advrisk/sums.hpp"

namespace advrisk {

struct CouplingEntry {
  std::size_t source;  // atom index in the source measure
  std::size_t target;  // atom index in the target measure
  double mass;
  double distance;
};

/// A transport plan between two equal-mass discrete measures.
struct Coupling {
  std::vector<CouplingEntry> entries;
  double bottleneck = 0.0;  // max entry distance
};

namespace detail {

// Residual capacities below this are treated as exhausted; with equal atom
// masses all flow arithmetic is exact and this never triggers.
inline constexpr double kCapEps = 1e-14;

/// Deterministic max-flow (BFS augmenting paths, index-ordered adjacency).
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t n) : adj_(n) {}

  /// Returns the index of the new edge within adj_[a].
  std::size_t add_edge(std::size_t a, std::size_t b, double cap) {
    adj_[a].push_back({b, adj_[b].size(), cap});
    adj_[b].push_back({a, adj_[a].size() - 1, 0.0});
    return adj_[a].size() - 1;
  }

  double run(std::size_t src, std::size_t sink) {
    double flow = 0.0;
    while (true) {
      std::vector<std::pair<std::size_t, std::size_t>> parent(
          adj_.size(), {SIZE_MAX, SIZE_MAX});
      std::vector<std::size_t> queue{src};
      parent[src] = {src, 0};
      for (std::size_t qi = 0; qi < queue.size() && parent[sink].first == SIZE_MAX; ++qi) {
        std::size_t u = queue[qi];
        for (std::size_t e = 0; e < adj_[u].size(); ++e) {
          const Edge& ed = adj_[u][e];
          if (ed.cap > kCapEps && parent[ed.to].first == SIZE_MAX) {
            parent[ed.to] = {u, e};
            queue.push_back(ed.to);
          }
        }
      }
      if (parent[sink].first == SIZE_MAX) break;
      double push = std::numeric_limits<double>::infinity();
      for (std::size_t v = sink; v != src;) {
        auto [u, e] = parent[v];
        push = std::min(push, adj_[u][e].cap);
        v = u;
      }
      for (std::size_t v = sink; v != src;) {
        auto [u, e] = parent[v];
        adj_[u][e].cap -= push;
        adj_[adj_[u][e].to][adj_[u][e].rev].cap += push;
        v = u;
      }
      flow += push;
    }
    return flow;
  }

  /// Flow pushed through the edge added k-th from node a (reverse-edge cap).
  double pushed(std::size_t a, std::size_t edge_index) const {
    const Edge& ed = adj_[a][edge_index];
    return adj_[ed.to][ed.rev].cap;
  }

 private:
  struct Edge {
    std::size_t to;
    std::size_t rev;
    double cap;
  };
  std::vector<std::vector<Edge>> adj_;
};

}  // namespace detail

struct WinfResult {
  ExtReal distance;
  Coupling witness;
};

/// W_inf between equal-mass measures: the least bottleneck over couplings.
/// Threshold search over the sorted pairwise distances, with feasibility at a
/// threshold decided by max-flow on the bipartite graph of admissible pairs.
inline WinfResult winf_distance(const DiscreteMeasure& q, const DiscreteMeasure& qp) {
  if (q.dimension() != qp.dimension() || q.norm() != qp.norm())
    throw std::invalid_argument("winf_distance: measures must share dimension and norm");
  double total = q.total_mass();
  if (std::fabs(total - qp.total_mass()) > kMassTol)
    throw std::invalid_argument("winf_distance: W_inf requires equal total masses");
  const std::size_t ns = q.atoms().size(), nt = qp.atoms().size();
  if (ns == 0 || nt == 0) return {ExtReal(0.0), Coupling{}};

  std::vector<std::vector<double>> d(ns, std::vector<double>(nt));
  std::vector<double> thresholds;
  thresholds.reserve(ns * nt);
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nt; ++j) {
      d[i][j] = distance(q.norm(), q.atoms()[i].location, qp.atoms()[j].location);
      thresholds.push_back(d[i][j]);
    }
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const std::size_t src = 0, sink = ns + nt + 1;
  struct PairEdge {
    std::size_t i, j, edge;  // edge index within adj_[1 + i]
  };
  struct Solution {
    bool feasible;
    detail::MaxFlow flow;
    std::vector<PairEdge> pair_edges;
  };
  const auto solve = [&](double t) {
    detail::MaxFlow flow(ns + nt + 2);
    std::vector<PairEdge> pair_edges;
    for (std::size_t i = 0; i < ns; ++i)
      flow.add_edge(src, 1 + i, q.atoms()[i].mass);
    for (std::size_t i = 0; i < ns; ++i)
      for (std::size_t j = 0; j < nt; ++j)
        if (d[i][j] <= t)
          pair_edges.push_back({i, j, flow.add_edge(1 + i, 1 + ns + j, q.atoms()[i].mass)});
    for (std::size_t j = 0; j < nt; ++j)
      flow.add_edge(1 + ns + j, sink, qp.atoms()[j].mass);
    double got = flow.run(src, sink);
    return Solution{got >= total - kMassTol, std::move(flow), std::move(pair_edges)};
  };

  std::size_t lo = 0, hi = thresholds.size() - 1;
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (solve(thresholds[mid]).feasible)
      hi = mid;
    else
      lo = mid + 1;
  }
  double t_star = thresholds[lo];
  Solution sol = solve(t_star);
  if (!sol.feasible) throw std::runtime_error("winf_distance: no feasible coupling found");

  Coupling witness;
  for (const PairEdge& pe : sol.pair_edges) {
    double m = sol.flow.pushed(1 + pe.i, pe.edge);
    if (m > detail::kCapEps) {
      witness.entries.push_back({pe.i, pe.j, m, d[pe.i][pe.j]});
      witness.bottleneck = std::max(witness.bottleneck, d[pe.i][pe.j]);
    }
  }
  return {ExtReal(t_star), std::move(witness)};
}

struct BallResult {
  bool member;
  std::optional<Coupling> witness;
};

/// Closed W_inf ball membership; returns the witness coupling when inside.
inline BallResult in_ball(const DiscreteMeasure& q, const DiscreteMeasure& qp, double eps) {
  if (!(eps >= 0.0)) throw std::invalid_argument("in_ball: eps must be >= 0");
  WinfResult r = winf_distance(q, qp);
  if (r.distance.raw() <= eps) return {true, std::move(r.witness)};
  return {false, std::nullopt};
}

struct SupIntegralReport {
  double lhs;  // int S_eps(g) dQ
  double rhs;  // int g dQ'
  bool holds;  // lhs >= rhs - 1e-12
};

/// The transport inequality int S_eps(g) dQ >= int g dQ' for Q' in the
/// eps-ball around Q; membership is verified first.  g may not put positive
/// mass on both +inf and -inf within one integral (the integral would be
/// undefined).
inline SupIntegralReport sup_integral_check(const TabulatedClassifier& g,
                                            const DiscreteMeasure& q,
                                            const DiscreteMeasure& qp, double eps) {
  if (!in_ball(q, qp, eps).member)
    throw std::invalid_argument("sup_integral_check: Q' is not in the eps-ball around Q");
  const Scene& scene = g.scene();
  NeumaierSum lhs;
  for (const Atom& a : q.atoms())
    lhs.add(scale(a.mass, sup_ball(g, scene.require_index(a.location), eps)));
  NeumaierSum rhs;
  for (const Atom& a : qp.atoms())
    rhs.add(scale(a.mass, g.values()[scene.require_index(a.location)]));
  double l = lhs.value(), r = rhs.value();
  if (std::isnan(l) || std::isnan(r))
    throw std::invalid_argument(
        "sup_integral_check: integral undefined (g carries both infinities)");
  return {l, r, l >= r - kWeakDualityTol};
}

}  // namespace advrisk
