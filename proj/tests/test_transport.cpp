#include <cmath>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "advrisk/transport.hpp"
#include "oracle_helpers.hpp"

using advrisk::Atom;
using advrisk::Coupling;
using advrisk::DiscreteMeasure;
using advrisk::ExtReal;
using advrisk::in_ball;
using advrisk::make_scene;
using advrisk::Norm;
using advrisk::Point;
using advrisk::sup_integral_check;
using advrisk::TabulatedClassifier;
using advrisk::winf_distance;
using advrisk::WinfResult;

namespace {

DiscreteMeasure unit_atoms(const std::vector<double>& xs, double mass = 1.0) {
  std::vector<Atom> atoms;
  for (double x : xs) atoms.push_back({{x}, mass});
  return DiscreteMeasure(1, Norm::L2, std::move(atoms));
}

void check_witness(const WinfResult& r, const DiscreteMeasure& q,
                   const DiscreteMeasure& qp) {
  std::vector<double> out(q.atoms().size(), 0.0), in(qp.atoms().size(), 0.0);
  double bottleneck = 0.0;
  for (const auto& e : r.witness.entries) {
    REQUIRE(e.mass > 0.0);
    out[e.source] += e.mass;
    in[e.target] += e.mass;
    bottleneck = std::max(bottleneck, e.distance);
    REQUIRE(e.distance ==
            advrisk::distance(q.norm(), q.atoms()[e.source].location,
                              qp.atoms()[e.target].location));
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    REQUIRE(out[i] == Catch::Approx(q.atoms()[i].mass).margin(1e-9));
  for (std::size_t j = 0; j < in.size(); ++j)
    REQUIRE(in[j] == Catch::Approx(qp.atoms()[j].mass).margin(1e-9));
  REQUIRE(bottleneck == r.distance.raw());
  REQUIRE(r.witness.bottleneck == r.distance.raw());
}

}  // namespace

TEST_CASE("winf at pinned points") {
  // two diracs: the unique coupling
  auto q = unit_atoms({0.25});
  auto qp = unit_atoms({-1.0});
  WinfResult r = winf_distance(q, qp);
  REQUIRE(r.distance.raw() == 1.25);
  check_witness(r, q, qp);

  // {0, 1} vs {0.2, 0.9}: max(0.2, 0.1) beats max(0.9, 0.8)
  q = unit_atoms({0.0, 1.0});
  qp = unit_atoms({0.2, 0.9});
  r = winf_distance(q, qp);
  REQUIRE(r.distance.raw() == 0.2);
  check_witness(r, q, qp);

  // identical measures: distance 0 with the identity coupling
  auto same = unit_atoms({0.0, 0.5, 1.0}, 0.25);
  r = winf_distance(same, same);
  REQUIRE(r.distance.raw() == 0.0);
  REQUIRE(r.witness.entries.size() == 3);
  for (const auto& e : r.witness.entries) REQUIRE(e.source == e.target);
}

TEST_CASE("winf validates its inputs") {
  auto q = unit_atoms({0.0});
  auto heavier = unit_atoms({0.0}, 2.0);
  REQUIRE_THROWS_AS(winf_distance(q, heavier), std::invalid_argument);
  DiscreteMeasure other_norm(1, Norm::L1, {{{0.0}, 1.0}});
  REQUIRE_THROWS_AS(winf_distance(q, other_norm), std::invalid_argument);
  DiscreteMeasure two_d(2, Norm::L2, {{{0.0, 0.0}, 1.0}});
  REQUIRE_THROWS_AS(winf_distance(q, two_d), std::invalid_argument);
}

TEST_CASE("winf equals the permutation oracle on unit-mass instances") {
  std::mt19937_64 rng(59);
  std::uniform_int_distribution<int> nn(1, 6);
  std::uniform_real_distribution<double> ux(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    int n = nn(rng);
    std::vector<double> xs, ys;
    std::vector<Point> src, dst;
    for (int i = 0; i < n; ++i) {
      xs.push_back(ux(rng));
      ys.push_back(ux(rng));
      src.push_back({xs.back()});
      dst.push_back({ys.back()});
    }
    auto q = unit_atoms(xs);
    auto qp = unit_atoms(ys);
    WinfResult r = winf_distance(q, qp);
    REQUIRE(r.distance.raw() == oracle::bottleneck_matching(src, dst, Norm::L2));
    check_witness(r, q, qp);
  }
}

TEST_CASE("winf is a metric on random equal-mass instances") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> ux(-2.0, 2.0);
  std::uniform_int_distribution<int> nn(1, 4);
  for (int trial = 0; trial < 30; ++trial) {
    int n = nn(rng);
    std::vector<double> a, b, c;
    for (int i = 0; i < n; ++i) {
      a.push_back(ux(rng));
      b.push_back(ux(rng));
      c.push_back(ux(rng));
    }
    auto qa = unit_atoms(a), qb = unit_atoms(b), qc = unit_atoms(c);
    double dab = winf_distance(qa, qb).distance.raw();
    double dba = winf_distance(qb, qa).distance.raw();
    double dac = winf_distance(qa, qc).distance.raw();
    double dcb = winf_distance(qc, qb).distance.raw();
    REQUIRE(dab == dba);                      // symmetry
    REQUIRE(winf_distance(qa, qa).distance.raw() == 0.0);
    REQUIRE(dab <= dac + dcb + 1e-12);        // triangle inequality
  }
}

TEST_CASE("ball membership is closed") {
  auto q = unit_atoms({0.0, 1.0});
  auto qp = unit_atoms({0.2, 0.9});
  auto at_distance = in_ball(q, qp, 0.2);
  REQUIRE(at_distance.member);
  REQUIRE(at_distance.witness.has_value());
  REQUIRE_FALSE(in_ball(q, qp, 0.15).member);

  // eps = 0: member iff equal
  REQUIRE(in_ball(q, q, 0.0).member);
  REQUIRE_FALSE(in_ball(q, qp, 0.0).member);
}

TEST_CASE("sup-integral inequality at pinned points") {
  auto scene = make_scene(1, Norm::L2, {{0.0}, {0.5}, {1.0}});
  TabulatedClassifier g(scene, {ExtReal(3.0), ExtReal(-1.0), ExtReal(2.0)});
  auto q = unit_atoms({0.0, 1.0}, 0.5);

  // Q' = Q, eps = 0: equality
  auto rep = sup_integral_check(g, q, q, 0.0);
  REQUIRE(rep.lhs == rep.rhs);
  REQUIRE(rep.holds);

  // constant g integrates to mass * value on both sides
  TabulatedClassifier konst(scene, {ExtReal(0.7), ExtReal(0.7), ExtReal(0.7)});
  auto qp = unit_atoms({0.5, 0.5});  // merged into one atom of mass 1 at 0.5
  REQUIRE(qp.atoms().size() == 1);
  rep = sup_integral_check(konst, unit_atoms({0.0, 1.0}), qp, 0.5);
  REQUIRE(rep.lhs == Catch::Approx(rep.rhs).margin(1e-15));
  REQUIRE(rep.holds);

  // precondition: Q' must be inside the ball
  REQUIRE_THROWS_AS(sup_integral_check(g, unit_atoms({0.0}), unit_atoms({1.0}), 0.5),
                    std::invalid_argument);
}

TEST_CASE("sup-integral inequality on random ball members") {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> ue(0.25, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    auto scene = make_scene(1, Norm::L2, oracle::random_scene_points(rng, 6));
    TabulatedClassifier g(scene, oracle::random_loss_like_values(rng, scene->size()));
    double eps = ue(rng);

    // Q on some scene points; Q' moves each atom within the ball (in scene)
    std::uniform_int_distribution<int> w(0, 4);
    std::vector<Atom> qa, qpa;
    for (std::size_t i = 0; i < scene->size(); ++i) {
      int wi = w(rng);
      if (wi == 0) continue;
      double mass = wi / 8.0;
      qa.push_back({scene->points()[i], mass});
      std::vector<std::size_t> near = scene->ball(i, eps);
      qpa.push_back({scene->points()[near[rng() % near.size()]], mass});
    }
    if (qa.empty()) continue;
    DiscreteMeasure q(1, Norm::L2, qa), qp(1, Norm::L2, qpa);
    auto rep = sup_integral_check(g, q, qp, eps);
    REQUIRE(rep.holds);
  }
}
