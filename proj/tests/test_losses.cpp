#include <cmath>
#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "advrisk/losses.hpp"
#include "oracle_helpers.hpp"

using advrisk::conditional_risk;
using advrisk::consistency_certificate;
using advrisk::ExtReal;
using advrisk::LossFunction;
using advrisk::margin_constants;
using advrisk::optimal_conditional_risk;
using advrisk::right_inverse;
using advrisk::zero_one_conditional_risk;
using advrisk::zero_one_optimal;

namespace {

std::vector<LossFunction> builtin_losses() {
  return {LossFunction::hinge(),          LossFunction::squared_hinge(),
          LossFunction::exponential(),    LossFunction::logistic(),
          LossFunction::rho_margin(1.0),  LossFunction::rho_margin(0.5),
          LossFunction::shifted_sigmoid(1.0), LossFunction::shifted_sigmoid(2.0)};
}

}  // namespace

TEST_CASE("loss evaluation at pinned points") {
  auto rho1 = LossFunction::rho_margin(1.0);
  REQUIRE(rho1(ExtReal(0.0)).raw() == 1.0);
  REQUIRE(rho1(ExtReal(0.25)).raw() == 0.75);
  REQUIRE(rho1(ExtReal(-3.0)).raw() == 1.0);
  REQUIRE(rho1(ExtReal(2.0)).raw() == 0.0);

  for (const auto& loss : builtin_losses())
    REQUIRE(loss(ExtReal::inf()).raw() == 0.0);

  REQUIRE(LossFunction::exponential()(ExtReal::neg_inf()).is_pos_inf());
  REQUIRE(LossFunction::hinge()(ExtReal::neg_inf()).is_pos_inf());
  REQUIRE(LossFunction::shifted_sigmoid(1.0)(ExtReal::neg_inf()).raw() == 1.0);
  REQUIRE(LossFunction::hinge()(ExtReal(-1.0)).raw() == 2.0);
  REQUIRE(LossFunction::squared_hinge()(ExtReal(-1.0)).raw() == 4.0);
  REQUIRE(LossFunction::logistic()(ExtReal(0.0)).raw() ==
          Catch::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("losses are non-increasing on random grids") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (const auto& loss : builtin_losses()) {
    for (int t = 0; t < 200; ++t) {
      double a = u(rng), b = u(rng);
      if (a > b) std::swap(a, b);
      REQUIRE(loss(ExtReal(a)).raw() >= loss(ExtReal(b)).raw());
    }
  }
}

TEST_CASE("conditional risk at pinned points") {
  auto hinge = LossFunction::hinge();
  REQUIRE(conditional_risk(hinge, 0.7, ExtReal(1.0)).raw() ==
          Catch::Approx(0.6).margin(1e-15));
  auto rho1 = LossFunction::rho_margin(1.0);
  REQUIRE(conditional_risk(rho1, 0.3, ExtReal::inf()).raw() ==
          Catch::Approx(0.7).margin(1e-15));
  // eta in {0, 1} meets the 0*inf = 0 convention
  REQUIRE(conditional_risk(hinge, 1.0, ExtReal::inf()).raw() == 0.0);
  REQUIRE(conditional_risk(hinge, 0.0, ExtReal::neg_inf()).raw() == 0.0);
  REQUIRE_THROWS_AS(conditional_risk(hinge, 1.5, ExtReal(0.0)), std::invalid_argument);
}

TEST_CASE("conditional risk symmetry C(eta, a) = C(1-eta, -a)") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ua(-5.0, 5.0);
  std::uniform_int_distribution<int> ue(0, 1024);
  for (const auto& loss : builtin_losses()) {
    for (int t = 0; t < 100; ++t) {
      double eta = ue(rng) / 1024.0;  // dyadic, so 1 - (1 - eta) == eta
      ExtReal a(ua(rng));
      REQUIRE(conditional_risk(loss, eta, a).raw() ==
              conditional_risk(loss, 1.0 - eta, -a).raw());
    }
  }
}

TEST_CASE("zero-one conditional risk") {
  REQUIRE(zero_one_conditional_risk(0.3, ExtReal(-2.0)) == 0.3);
  REQUIRE(zero_one_conditional_risk(0.3, ExtReal(0.0)) == 0.3);  // sgn 0 = -1
  REQUIRE(zero_one_conditional_risk(0.3, ExtReal(0.5)) == 0.7);
  REQUIRE(zero_one_conditional_risk(0.5, ExtReal(42.0)) == 0.5);
  REQUIRE(zero_one_optimal(0.3) == 0.3);
  REQUIRE(zero_one_optimal(0.75) == 0.25);
}

TEST_CASE("optimal conditional risk at pinned points") {
  auto opt = optimal_conditional_risk(LossFunction::rho_margin(1.0), 0.3);
  REQUIRE(opt.value == Catch::Approx(0.3).margin(1e-9));

  REQUIRE(optimal_conditional_risk(LossFunction::hinge(), 0.5).value ==
          Catch::Approx(1.0).margin(1e-9));

  // frozen from the independent dense-grid oracle: 2*sqrt(0.3*0.7)
  REQUIRE(optimal_conditional_risk(LossFunction::exponential(), 0.3).value ==
          Catch::Approx(0.916515138991168).margin(1e-9));
}

TEST_CASE("optimal conditional risk agrees with the dense-grid oracle") {
  for (const auto& loss : builtin_losses()) {
    for (int k = 0; k <= 10; ++k) {
      double eta = k / 10.0;
      double lib = optimal_conditional_risk(loss, eta).value;
      double ora = oracle::cstar(loss, eta);
      INFO(loss.name() << " eta=" << eta);
      REQUIRE(lib == Catch::Approx(ora).margin(1e-8));
    }
  }
}

TEST_CASE("optimal value lower-bounds the conditional risk") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ua(-30.0, 30.0);
  std::uniform_real_distribution<double> ue(0.0, 1.0);
  for (const auto& loss : builtin_losses()) {
    for (int t = 0; t < 125; ++t) {
      double eta = ue(rng);
      double alpha = ua(rng);
      double opt = optimal_conditional_risk(loss, eta).value;
      REQUIRE(opt <= conditional_risk(loss, eta, ExtReal(alpha)).raw() + advrisk::kOptTol);
    }
  }
}

TEST_CASE("the argmin attains the reported optimum") {
  for (const auto& loss : builtin_losses()) {
    for (double eta : {0.0, 0.2, 0.5, 0.9, 1.0}) {
      auto opt = optimal_conditional_risk(loss, eta);
      REQUIRE(conditional_risk(loss, eta, opt.argmin).raw() <=
              opt.value + advrisk::kOptTol);
    }
  }
}

TEST_CASE("consistency certificates") {
  for (const auto& loss : {LossFunction::hinge(), LossFunction::squared_hinge(),
                           LossFunction::exponential(), LossFunction::logistic()}) {
    auto cert = consistency_certificate(loss);
    INFO(loss.name());
    REQUIRE_FALSE(cert.adversarially_consistent);
    REQUIRE(std::fabs(cert.margin) <= 1e-8);
  }

  auto rho = consistency_certificate(LossFunction::rho_margin(1.0));
  REQUIRE(rho.adversarially_consistent);
  REQUIRE(rho.cstar_half == Catch::Approx(0.5).margin(1e-9));
  REQUIRE(rho.phi_zero == 1.0);
  REQUIRE(rho.margin == Catch::Approx(0.5).margin(1e-8));

  auto sig = consistency_certificate(LossFunction::shifted_sigmoid(1.0));
  REQUIRE(sig.adversarially_consistent);
  REQUIRE(sig.phi_zero == Catch::Approx(0.7310585786300049).margin(1e-12));
  REQUIRE(sig.margin >= 0.23);
}

TEST_CASE("right inverse") {
  auto rho1 = LossFunction::rho_margin(1.0);
  REQUIRE(right_inverse(rho1, 0.75).raw() == Catch::Approx(0.25).margin(1e-12));
  REQUIRE(right_inverse(LossFunction::exponential(), 0.0).is_pos_inf());
  REQUIRE(right_inverse(rho1, 0.0).is_pos_inf());

  auto logi = LossFunction::logistic();
  ExtReal a = right_inverse(logi, 0.4);
  REQUIRE(a.raw() == Catch::Approx(0.709632931588928).margin(1e-9));
  REQUIRE(logi(a).raw() == Catch::Approx(0.4).margin(1e-12));

  REQUIRE_THROWS_AS(right_inverse(rho1, 1.5), std::invalid_argument);
  REQUIRE_THROWS_AS(right_inverse(rho1, -0.1), std::invalid_argument);
}

TEST_CASE("right inverse identities on random samples") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> uy(0.0, 1.0);
  std::uniform_real_distribution<double> ua(-10.0, 10.0);
  for (const auto& loss : builtin_losses()) {
    double cap = std::min(loss.sup().raw(), 10.0);
    for (int t = 0; t < 30; ++t) {
      double y = uy(rng) * cap;
      ExtReal inv = right_inverse(loss, y);
      REQUIRE(loss(inv).raw() == Catch::Approx(y).margin(advrisk::kOptTol * (1.0 + y)));
      double alpha = ua(rng);
      REQUIRE(right_inverse(loss, loss(ExtReal(alpha)).raw()).raw() >=
              alpha - advrisk::kOptTol);
    }
  }
}

TEST_CASE("margin constants for the unit rho-margin loss") {
  auto mc = margin_constants(LossFunction::rho_margin(1.0));
  REQUIRE(mc.a == Catch::Approx(1.0).margin(1e-8));
  REQUIRE(mc.c == Catch::Approx(0.25).margin(1e-8));
  REQUIRE(mc.delta > 0.0);
  REQUIRE(mc.delta == Catch::Approx(0.375).margin(1e-6));
}

TEST_CASE("margin constants witness the uniform bound") {
  for (const auto& loss :
       {LossFunction::rho_margin(1.0), LossFunction::shifted_sigmoid(1.0)}) {
    auto mc = margin_constants(loss);
    REQUIRE(loss(ExtReal(mc.c)).raw() < loss(ExtReal(0.0)).raw());
    for (int j = 0; j <= 40; ++j) {
      double eta = j / 40.0;
      double opt = optimal_conditional_risk(loss, eta).value;
      for (int i = 0; i <= 40; ++i) {
        double alpha = -mc.c + 2.0 * mc.c * i / 40.0;
        REQUIRE(conditional_risk(loss, eta, ExtReal(alpha)).raw() >=
                opt + mc.delta - advrisk::kOptTol);
      }
    }
  }
}

TEST_CASE("margin constants require adversarial consistency") {
  REQUIRE_THROWS_AS(margin_constants(LossFunction::hinge()), std::invalid_argument);
  REQUIRE_THROWS_AS(margin_constants(LossFunction::exponential()), std::invalid_argument);
}

TEST_CASE("only eta = 1/2 admits 0 as a near-minimizer") {
  // For consistent losses, C_phi(eta, 0) within cert_tol of the optimum
  // pins eta to 1/2 up to the grid spacing.
  const double spacing = 1.0 / 200;
  for (const auto& loss : {LossFunction::hinge(), LossFunction::logistic(),
                           LossFunction::exponential(), LossFunction::rho_margin(1.0),
                           LossFunction::shifted_sigmoid(1.0)}) {
    for (int k = 0; k <= 200; ++k) {
      double eta = static_cast<double>(k) / 200;
      double at_zero = conditional_risk(loss, eta, ExtReal(0.0)).raw();
      double opt = optimal_conditional_risk(loss, eta).value;
      if (at_zero <= opt + advrisk::kCertTol) {
        INFO(loss.name() << " eta=" << eta);
        REQUIRE(std::fabs(eta - 0.5) <= spacing);
      }
    }
  }
}

TEST_CASE("tabulated losses") {
  using advrisk::LossKnot;
  auto tab = LossFunction::tabulated({{-1.0, 2.0}, {1.0, 0.0}}, 0.0);
  REQUIRE(tab(ExtReal(0.0)).raw() == 1.0);
  REQUIRE(tab(ExtReal(-5.0)).raw() == 2.0);
  REQUIRE(tab(ExtReal::neg_inf()).raw() == 2.0);
  REQUIRE(tab(ExtReal(3.0)).raw() == 0.0);
  REQUIRE(tab(ExtReal::inf()).raw() == 0.0);
  REQUIRE(tab.sup().raw() == 2.0);
  REQUIRE_FALSE(consistency_certificate(tab).adversarially_consistent);

  // piecewise-linear rebuild of the unit rho-margin loss
  auto tab_rho = LossFunction::tabulated({{0.0, 1.0}, {1.0, 0.0}});
  auto cert = consistency_certificate(tab_rho);
  REQUIRE(cert.adversarially_consistent);
  REQUIRE(cert.margin == Catch::Approx(0.5).margin(1e-8));
  auto mc = margin_constants(tab_rho);
  REQUIRE(mc.c == Catch::Approx(0.25).margin(1e-8));

  REQUIRE_THROWS_AS(LossFunction::tabulated({{0.0, 1.0}, {1.0, 2.0}}),
                    std::invalid_argument);  // increasing segment
  REQUIRE_THROWS_AS(LossFunction::tabulated({{0.0, -1.0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(LossFunction::tabulated({{0.0, 1.0}, {1.0, 0.5}}, 0.2),
                    std::invalid_argument);  // discontinuous tail
  REQUIRE_THROWS_AS(LossFunction::tabulated({{0.0, 1.0}, {0.0, 0.5}}),
                    std::invalid_argument);  // non-increasing args
}

TEST_CASE("loss construction validates parameters") {
  REQUIRE_THROWS_AS(LossFunction::rho_margin(0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(LossFunction::rho_margin(-1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(LossFunction::shifted_sigmoid(0.0), std::invalid_argument);
}
