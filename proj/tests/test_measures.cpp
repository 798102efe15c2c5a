#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "advrisk/measures.hpp"

using advrisk::Atom;
using advrisk::DiscreteMeasure;
using advrisk::LabeledDistribution;
using advrisk::Norm;
using advrisk::Point;
using advrisk::posterior;
using advrisk::PosteriorView;
using advrisk::uniform_segment;

TEST_CASE("atoms at equal locations merge") {
  DiscreteMeasure m(1, Norm::L2,
                    {{{0.5}, 0.125}, {{1.0}, 0.25}, {{0.5}, 0.125}, {{2.0}, 0.0}});
  REQUIRE(m.atoms().size() == 2);  // zero-mass atom dropped
  REQUIRE(m.atoms()[0].location == Point{0.5});
  REQUIRE(m.atoms()[0].mass == 0.25);
  REQUIRE(m.total_mass() == 0.5);
}

TEST_CASE("measure construction validates input") {
  REQUIRE_THROWS_AS(DiscreteMeasure(1, Norm::L2, {{{0.0, 1.0}, 0.5}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(DiscreteMeasure(1, Norm::L2, {{{0.0}, -0.5}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(DiscreteMeasure(0, Norm::L2, {}), std::invalid_argument);
}

TEST_CASE("labeled distributions must have total mass one") {
  DiscreteMeasure half(1, Norm::L2, {{{0.0}, 0.5}});
  DiscreteMeasure third(1, Norm::L2, {{{1.0}, 0.25}});
  REQUIRE_NOTHROW(LabeledDistribution(half, half));
  REQUIRE_THROWS_AS(LabeledDistribution(half, third), std::invalid_argument);
  DiscreteMeasure other_norm(1, Norm::L1, {{{1.0}, 0.5}});
  REQUIRE_THROWS_AS(LabeledDistribution(half, other_norm), std::invalid_argument);
}

TEST_CASE("posterior at pinned points") {
  // shared atom: eta = 1/2
  LabeledDistribution both(DiscreteMeasure(1, Norm::L2, {{{0.0}, 0.5}}),
                           DiscreteMeasure(1, Norm::L2, {{{0.0}, 0.5}}));
  PosteriorView v = posterior(both);
  REQUIRE(v.support.size() == 1);
  REQUIRE(v.eta[0] == 0.5);
  REQUIRE(v.p_mass[0] == 1.0);

  // disjoint supports: eta in {0, 1}
  LabeledDistribution disj(DiscreteMeasure(1, Norm::L2, {{{1.0}, 0.5}}),
                           DiscreteMeasure(1, Norm::L2, {{{0.0}, 0.5}}));
  v = posterior(disj);
  for (std::size_t i = 0; i < v.support.size(); ++i) {
    if (v.support[i] == Point{0.0}) REQUIRE(v.eta[i] == 1.0);
    if (v.support[i] == Point{1.0}) REQUIRE(v.eta[i] == 0.0);
  }

  // mixed: P0 = 0.2 delta_0 + 0.2 delta_1, P1 = 0.6 delta_0
  LabeledDistribution mixed(
      DiscreteMeasure(1, Norm::L2, {{{0.0}, 0.2}, {{1.0}, 0.2}}),
      DiscreteMeasure(1, Norm::L2, {{{0.0}, 0.6}}));
  v = posterior(mixed);
  for (std::size_t i = 0; i < v.support.size(); ++i) {
    if (v.support[i] == Point{0.0})
      REQUIRE(v.eta[i] == Catch::Approx(0.75).margin(1e-15));
    if (v.support[i] == Point{1.0}) REQUIRE(v.eta[i] == 0.0);
  }
}

TEST_CASE("posterior round-trips exactly on dyadic data") {
  // Build (p, eta) from small dyadics so eta * p_mass reproduces the label
  // masses without rounding, then check the round trip is exact.
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> grid(0, 64);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Atom> a0, a1;
    double scale_sum = 0.0;
    std::vector<double> ps, etas;
    for (int i = 0; i < 4; ++i) {
      double p = grid(rng) / 64.0;
      double eta = grid(rng) / 64.0;
      if (p == 0.0) continue;
      ps.push_back(p);
      etas.push_back(eta);
      scale_sum += p;
    }
    if (ps.empty()) continue;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      double p = ps[i] / scale_sum;  // masses only need to sum to 1 approximately
      double m1 = etas[i] * p;
      double m0 = p - m1;
      Point loc{static_cast<double>(i)};
      if (m0 > 0.0) a0.push_back({loc, m0});
      if (m1 > 0.0) a1.push_back({loc, m1});
    }
    DiscreteMeasure p0(1, Norm::L2, a0), p1(1, Norm::L2, a1);
    PosteriorView v = posterior(p0, p1);
    for (std::size_t i = 0; i < v.support.size(); ++i) {
      REQUIRE(v.eta[i] * v.p_mass[i] == v.p1_mass[i]);
      REQUIRE(v.p_mass[i] - v.eta[i] * v.p_mass[i] == v.p0_mass[i]);
    }
  }
}

TEST_CASE("uniform segment at pinned points") {
  DiscreteMeasure m = uniform_segment(1.0, 5, 0.5);
  REQUIRE(m.atoms().size() == 5);
  std::vector<double> expect{-1.0, -0.5, 0.0, 0.5, 1.0};
  for (std::size_t i = 0; i < 5; ++i) {
    REQUIRE(m.atoms()[i].location[0] == expect[i]);
    REQUIRE(m.atoms()[i].mass == 0.1);
  }
  REQUIRE(m.total_mass() == 0.5);

  DiscreteMeasure two = uniform_segment(1.0, 2, 0.5);
  REQUIRE(two.atoms()[0].location[0] == -1.0);
  REQUIRE(two.atoms()[1].location[0] == 1.0);
  REQUIRE(two.atoms()[0].mass == 0.25);

  // odd n pins the origin exactly; total mass is exact
  DiscreteMeasure odd = uniform_segment(1.0, 21, 0.5);
  bool has_origin = false;
  for (const Atom& a : odd.atoms()) has_origin |= a.location[0] == 0.0;
  REQUIRE(has_origin);
  REQUIRE(odd.total_mass() == 0.5);

  REQUIRE_THROWS_AS(uniform_segment(1.0, 1, 0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(uniform_segment(0.0, 5, 0.5), std::invalid_argument);
}
