#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "advrisk/extreal.hpp"

namespace advrisk {

/// One sample of a tabulated loss: the loss takes `value` at `arg`.
struct LossKnot {
  double arg;
  double value;
};

/// A surrogate loss: non-increasing, non-negative, continuous on the reals,
/// evaluated on the extended reals via its monotone limits.
///
/// Built-in families all satisfy phi(+inf) = 0.  Tabulated losses
/// interpolate linearly between knots, extend constantly left of the first
/// knot (so sup phi is the first knot value, always finite) and constantly
/// right of the last knot; the declared tail must equal the last knot value
/// to keep the loss continuous.
class LossFunction {
 public:
  enum class Family {
    Hinge,
    SquaredHinge,
    Exponential,
    Logistic,
    RhoMargin,
    ShiftedSigmoid,
    Tabulated
  };

  static LossFunction hinge() { return LossFunction(Family::Hinge); }
  static LossFunction squared_hinge() { return LossFunction(Family::SquaredHinge); }
  static LossFunction exponential() { return LossFunction(Family::Exponential); }
  static LossFunction logistic() { return LossFunction(Family::Logistic); }

  static LossFunction rho_margin(double rho) {
    if (!(rho > 0.0) || !std::isfinite(rho))
      throw std::invalid_argument("rho_margin: rho must be a positive real");
    LossFunction l(Family::RhoMargin);
    l.param_ = rho;
    return l;
  }

  static LossFunction shifted_sigmoid(double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau))
      throw std::invalid_argument("shifted_sigmoid: tau must be a positive real");
    LossFunction l(Family::ShiftedSigmoid);
    l.param_ = tau;
    return l;
  }

  static LossFunction tabulated(std::vector<LossKnot> knots) {
    if (knots.empty()) throw std::invalid_argument("tabulated: needs at least one knot");
    double tail = knots.back().value;
    return tabulated(std::move(knots), tail);
  }

  static LossFunction tabulated(std::vector<LossKnot> knots, double tail) {
    if (knots.empty()) throw std::invalid_argument("tabulated: needs at least one knot");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (!std::isfinite(knots[i].arg) || !std::isfinite(knots[i].value))
        throw std::invalid_argument("tabulated: knots must be finite");
      if (knots[i].value < 0.0)
        throw std::invalid_argument("tabulated: negative loss value");
      if (i > 0 && !(knots[i].arg > knots[i - 1].arg))
        throw std::invalid_argument("tabulated: knot arguments must be strictly increasing");
      if (i > 0 && knots[i].value > knots[i - 1].value)
        throw std::invalid_argument("tabulated: increasing segment rejected");
    }
    if (!(tail >= 0.0) || !std::isfinite(tail))
      throw std::invalid_argument("tabulated: tail must be a finite non-negative real");
    if (tail != knots.back().value)
      throw std::invalid_argument("tabulated: tail must equal the last knot value (continuity)");
    LossFunction l(Family::Tabulated);
    l.knots_ = std::move(knots);
    l.param_ = tail;
    return l;
  }

  Family family() const { return family_; }
  double rho() const { return param_; }
  double tau() const { return param_; }
  double tail() const { return param_; }
  const std::vector<LossKnot>& knots() const { return knots_; }

  std::string name() const {
    switch (family_) {
      case Family::Hinge: return "hinge";
      case Family::SquaredHinge: return "squared_hinge";
      case Family::Exponential: return "exponential";
      case Family::Logistic: return "logistic";
      case Family::RhoMargin: return "rho_margin";
      case Family::ShiftedSigmoid: return "shifted_sigmoid";
      case Family::Tabulated: return "tabulated";
    }
    return "?";
  }

  /// phi(alpha), total on the extended reals.
  ExtReal operator()(ExtReal alpha) const {
    const double a = alpha.raw();
    switch (family_) {
      case Family::Hinge:
        return ExtReal(std::max(0.0, 1.0 - a));
      case Family::SquaredHinge: {
        double h = std::max(0.0, 1.0 - a);
        return ExtReal(h * h);
      }
      case Family::Exponential:
        return ExtReal(std::exp(-a));
      case Family::Logistic:
        if (alpha.is_pos_inf()) return ExtReal(0.0);
        if (alpha.is_neg_inf()) return ExtReal::inf();
        return a >= 0.0 ? ExtReal(std::log1p(std::exp(-a)))
                        : ExtReal(-a + std::log1p(std::exp(a)));
      case Family::RhoMargin:
        return ExtReal(std::min(1.0, std::max(1.0 - a / param_, 0.0)));
      case Family::ShiftedSigmoid:
        if (alpha.is_neg_inf()) return ExtReal(1.0);
        return ExtReal(1.0 / (1.0 + std::exp(a - param_)));
      case Family::Tabulated: {
        if (a <= knots_.front().arg) return ExtReal(knots_.front().value);
        if (a >= knots_.back().arg) return ExtReal(param_);
        auto it = std::upper_bound(
            knots_.begin(), knots_.end(), a,
            [](double x, const LossKnot& k) { return x < k.arg; });
        const LossKnot& hi = *it;
        const LossKnot& lo = *(it - 1);
        double t = (a - lo.arg) / (hi.arg - lo.arg);
        return ExtReal(lo.value + t * (hi.value - lo.value));
      }
    }
    return ExtReal(0.0);
  }

  ExtReal eval(ExtReal alpha) const { return (*this)(alpha); }

  /// sup phi over the extended reals; equals the monotone limit phi(-inf).
  ExtReal sup() const { return (*this)(ExtReal::neg_inf()); }

 private:
  explicit LossFunction(Family f) : family_(f) {}

  Family family_;
  double param_ = 0.0;
  std::vector<LossKnot> knots_;
};

namespace detail {

inline void require_eta(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("eta must lie in [0, 1]");
}

inline constexpr double kHalfPi = 1.57079632679489661923;

/// Fixed monotone bijection from [-1, 1] onto the extended reals.
inline double alpha_from_unit(double t) {
  if (t <= -1.0) return -std::numeric_limits<double>::infinity();
  if (t >= 1.0) return std::numeric_limits<double>::infinity();
  return std::tan(kHalfPi * t);
}

inline double unit_from_alpha(double alpha) {
  if (alpha == std::numeric_limits<double>::infinity()) return 1.0;
  if (alpha == -std::numeric_limits<double>::infinity()) return -1.0;
  return std::atan(alpha) / kHalfPi;
}

}  // namespace detail

/// C_phi(eta, alpha) = eta*phi(alpha) + (1-eta)*phi(-alpha), with 0*inf = 0.
inline ExtReal conditional_risk(const LossFunction& loss, double eta, ExtReal alpha) {
  detail::require_eta(eta);
  return ExtReal(scale(eta, loss(alpha)) + scale(1.0 - eta, loss(-alpha)));
}

/// C(eta, alpha) for the 0-1 loss, with sgn 0 = -1.
inline double zero_one_conditional_risk(double eta, ExtReal alpha) {
  detail::require_eta(eta);
  return alpha.raw() <= 0.0 ? eta : 1.0 - eta;
}

/// C*(eta) = min(eta, 1 - eta).
inline double zero_one_optimal(double eta) {
  detail::require_eta(eta);
  return std::min(eta, 1.0 - eta);
}

struct OptimalConditionalRisk {
  double value;
  ExtReal argmin;
};

/// inf over extended-real alpha of C_phi(eta, .): a 4097-point scan of the
/// compactified line (both infinities are grid points) followed by a
/// golden-section pass on the best bracket.  Guaranteed within kOptTol for
/// the shipped families; tabulated kinks are probed explicitly.
inline OptimalConditionalRisk optimal_conditional_risk(const LossFunction& loss, double eta) {
  detail::require_eta(eta);
  const auto value_at = [&](double alpha) {
    return scale(eta, loss(ExtReal(alpha))) + scale(1.0 - eta, loss(ExtReal(-alpha)));
  };

  constexpr int kGrid = 4096;  // 4097 points
  double best_v = value_at(-std::numeric_limits<double>::infinity());
  double best_alpha = -std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 1; i <= kGrid; ++i) {
    double t = static_cast<double>(i) / 2048.0 - 1.0;
    double alpha = detail::alpha_from_unit(t);
    double v = value_at(alpha);
    if (v < best_v) {
      best_v = v;
      best_alpha = alpha;
      best_i = i;
    }
  }

  // Golden-section refinement on the bracket around the best grid point.
  double a = std::max(-1.0, static_cast<double>(best_i - 1) / 2048.0 - 1.0);
  double b = std::min(1.0, static_cast<double>(best_i + 1) / 2048.0 - 1.0);
  const double gr = 0.61803398874989485;
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = value_at(detail::alpha_from_unit(x1));
  double f2 = value_at(detail::alpha_from_unit(x2));
  const auto consider = [&](double t, double v) {
    if (v < best_v) {
      best_v = v;
      best_alpha = detail::alpha_from_unit(t);
    }
  };
  consider(x1, f1);
  consider(x2, f2);
  for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = value_at(detail::alpha_from_unit(x1));
      consider(x1, f1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = value_at(detail::alpha_from_unit(x2));
      consider(x2, f2);
    }
  }

  if (loss.family() == LossFunction::Family::Tabulated) {
    for (const LossKnot& k : loss.knots()) {
      for (double alpha : {k.arg, -k.arg}) {
        double v = value_at(alpha);
        if (v < best_v) {
          best_v = v;
          best_alpha = alpha;
        }
      }
    }
  }

  return {best_v, ExtReal(best_alpha)};
}

struct ConsistencyCertificate {
  double cstar_half;
  double phi_zero;
  double margin;
  bool adversarially_consistent;
};

/// Certifies adversarial consistency via the margin phi(0) - C_phi*(1/2).
/// Convex losses have margin 0 analytically, so anything below kCertTol is
/// reported inconsistent.
inline ConsistencyCertificate consistency_certificate(const LossFunction& loss) {
  double phi0 = loss(ExtReal(0.0)).raw();
  OptimalConditionalRisk opt = optimal_conditional_risk(loss, 0.5);
  double margin = phi0 - opt.value;
  return {opt.value, phi0, margin, margin > kCertTol};
}

/// phi^-(y) = sup{alpha : phi(alpha) >= y} over the extended reals.
/// Satisfies phi(phi^-(y)) = y and phi^-(phi(alpha)) >= alpha.
inline ExtReal right_inverse(const LossFunction& loss, double y) {
  if (!(y >= 0.0) || !std::isfinite(y))
    throw std::invalid_argument("right_inverse: y must be a finite non-negative real");
  if (ExtReal(y) > loss.sup())
    throw std::invalid_argument("right_inverse: y exceeds sup phi");
  if (loss(ExtReal::inf()).raw() >= y) return ExtReal::inf();

  double lo;
  if (loss(ExtReal(0.0)).raw() >= y) {
    lo = 0.0;
  } else {
    lo = -1.0;
    while (lo > -1e300 && loss(ExtReal(lo)).raw() < y) lo *= 2.0;
    if (loss(ExtReal(lo)).raw() < y) return ExtReal::neg_inf();  // sup attained only in the limit
  }
  double hi = std::max(1.0, lo == 0.0 ? 1.0 : -lo);
  while (hi < 1e300 && loss(ExtReal(hi)).raw() >= y) hi *= 2.0;

  // Bisection to adjacent doubles; phi(lo) >= y > phi(hi) throughout.
  while (true) {
    double mid = lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi)) break;
    if (loss(ExtReal(mid)).raw() >= y)
      lo = mid;
    else
      hi = mid;
  }
  return ExtReal(lo);
}

struct MarginConstants {
  double a;      // smallest non-negative (tolerance-)minimizer of C_phi(1/2, .)
  double c;      // phi^-((phi(0) + C_phi*(1/2)) / 2)
  double delta;  // inf over [-c,c] x [0,1] of C_phi(eta, alpha) - C_phi*(eta)
};

/// The (a, c, delta) constants that witness the uniform suboptimality of
/// [-c, c] for adversarially consistent losses.
inline MarginConstants margin_constants(const LossFunction& loss) {
  ConsistencyCertificate cert = consistency_certificate(loss);
  if (!cert.adversarially_consistent)
    throw std::invalid_argument("margin_constants: loss is not adversarially consistent");
  const double cstar = cert.cstar_half;
  const double accept = cstar + 1e-9;
  const auto c_half = [&](double alpha) {
    return scale(0.5, loss(ExtReal(alpha))) + scale(0.5, loss(ExtReal(-alpha)));
  };

  // a: scan t in [0,1] for the first point with C_phi(1/2, alpha(t)) within
  // tolerance of the optimum, then bisect the bracket.
  constexpr int kScan = 2048;
  int hit = -1;
  for (int i = 0; i <= kScan; ++i) {
    double t = static_cast<double>(i) / kScan;
    if (c_half(detail::alpha_from_unit(t)) <= accept) {
      hit = i;
      break;
    }
  }
  double t_false, t_true;
  if (hit > 0) {
    t_false = static_cast<double>(hit - 1) / kScan;
    t_true = static_cast<double>(hit) / kScan;
  } else {
    // Grid missed a narrow dip; fall back to the optimizer's argmin.
    OptimalConditionalRisk opt = optimal_conditional_risk(loss, 0.5);
    double t_star = detail::unit_from_alpha(std::fabs(opt.argmin.raw()));
    if (c_half(detail::alpha_from_unit(t_star)) > accept)
      throw std::runtime_error("margin_constants: failed to localize a");
    t_true = t_star;
    t_false = 0.0;
  }
  for (int it = 0; it < 200; ++it) {
    double mid = t_false + 0.5 * (t_true - t_false);
    if (!(mid > t_false && mid < t_true)) break;
    if (c_half(detail::alpha_from_unit(mid)) <= accept)
      t_true = mid;
    else
      t_false = mid;
  }
  double a = detail::alpha_from_unit(t_true);

  double c = right_inverse(loss, 0.5 * (cert.phi_zero + cstar)).raw();
  if (!(c > 0.0) || !std::isfinite(c) || !(loss(ExtReal(c)).raw() < cert.phi_zero))
    throw std::runtime_error("margin_constants: postcondition phi(c) < phi(0) failed");

  // delta: 513 x 513 product grid over [-c, c] x [0, 1] plus one local
  // refinement pass around the grid argmin.
  constexpr int kDelta = 512;
  std::vector<double> copt(kDelta + 1);
  for (int j = 0; j <= kDelta; ++j)
    copt[j] = optimal_conditional_risk(loss, static_cast<double>(j) / kDelta).value;
  double delta = std::numeric_limits<double>::infinity();
  int bi = 0, bj = 0;
  for (int j = 0; j <= kDelta; ++j) {
    double eta = static_cast<double>(j) / kDelta;
    for (int i = 0; i <= kDelta; ++i) {
      double alpha = -c + 2.0 * c * i / kDelta;
      double gap = scale(eta, loss(ExtReal(alpha))) +
                   scale(1.0 - eta, loss(ExtReal(-alpha))) - copt[j];
      if (gap < delta) {
        delta = gap;
        bi = i;
        bj = j;
      }
    }
  }
  {
    double alo = -c + 2.0 * c * std::max(0, bi - 1) / kDelta;
    double ahi = -c + 2.0 * c * std::min(kDelta, bi + 1) / kDelta;
    double elo = static_cast<double>(std::max(0, bj - 1)) / kDelta;
    double ehi = static_cast<double>(std::min(kDelta, bj + 1)) / kDelta;
    constexpr int kFine = 64;
    for (int j = 0; j <= kFine; ++j) {
      double eta = elo + (ehi - elo) * j / kFine;
      double opt = optimal_conditional_risk(loss, eta).value;
      for (int i = 0; i <= kFine; ++i) {
        double alpha = alo + (ahi - alo) * i / kFine;
        double gap = scale(eta, loss(ExtReal(alpha))) +
                     scale(1.0 - eta, loss(ExtReal(-alpha))) - opt;
        delta = std::min(delta, gap);
      }
    }
  }
  if (!(delta > 0.0))
    throw std::runtime_error("margin_constants: postcondition delta > 0 failed");

  return {a, c, delta};
}

}  // namespace advrisk
