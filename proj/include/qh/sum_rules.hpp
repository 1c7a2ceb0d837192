#pragma once

// Weighted integrals of the measure, the Kramers-Kronig-style identities
// linking them to the asymptotic expansion coefficients, and the physical
// bound for passive approximation of a non-passive target.

#include <cmath>
#include <stdexcept>

#include <qh/errors.hpp>
#include <qh/representation.hpp>

namespace qh {

// One linear equality a solver can impose on a representation:
//   (1/pi) lim int x^power Im q(x + iy) dx = rhs.
struct SumRuleConstraint {
  SumRuleConstraint(int power_, double rhs_) : power(power_), rhs(rhs_) {
    if (power % 2 != 0)
      throw std::invalid_argument(
          "SumRuleConstraint: odd powers vanish identically; the power must "
          "be even");
    if (!std::isfinite(rhs))
      throw std::invalid_argument("SumRuleConstraint: rhs must be finite");
  }
  int power;
  double rhs;
};

// (1/pi) lim_{eps->0} lim_{y->0+} int_{eps<|x|<1/eps} x^k Im q(x+iy) dx.
// Splines integrate in closed form; point masses contribute p_i xi_i^k via
// the Poisson-kernel limit. The inner truncation excludes the origin, so a
// mass at 0 never contributes; for k < 0 it makes the limit divergent.
inline double sum_rule_integral(const QuasiHerglotzRep& rep, int k) {
  if (k < 0) {
    for (const auto& m : rep.masses)
      if (m.location == 0.0 && m.amplitude != 0.0)
        throw DivergentMomentError(
            "sum_rule_integral: negative power against a mass at the origin");
  }
  return measure_moment(rep, k, /*include_origin=*/false);
}

// Right side of the identity for power k, assembled from the expansion
// coefficients at zero and at infinity:
//   k <= -3:        a_{-k-1}
//   -2 <= k <= 0:   a_{-k-1} - b_{-k-1}
//   k >= 1:         -b_{-k-1}
inline double identity_rhs(const QuasiHerglotzRep& rep, int k) {
  const int need_zero = (k <= 0) ? (-k - 1) : -1;
  const int need_inf = (k >= -2) ? std::max(0, k + 1) : 0;
  const auto ac = asymptotic_coeffs(rep, need_zero, need_inf);
  if (k <= -3) return ac.a(-k - 1);
  if (k <= 0) return ac.a(-k - 1) - ac.b(-k - 1);
  return -ac.b(-k - 1);
}

// |integral - identity_rhs|; zero (to rounding) for every representation
// this library can express.
inline double verify_sum_rule(const QuasiHerglotzRep& rep, int k) {
  return std::abs(sum_rule_integral(rep, k) - identity_rhs(rep, k));
}

// Best-possible weighted-sup error when approximating the constant target
// eps_t over a band of fractional width B by a passive (Herglotz) model
// with high-frequency permittivity eps_inf.
inline double passive_bound(double eps_inf, double eps_t, double B) {
  if (!(B > 0.0 && B < 2.0))
    throw std::invalid_argument("passive_bound: B must lie in (0, 2)");
  if (!(eps_inf >= eps_t))
    throw std::invalid_argument("passive_bound: requires eps_inf >= eps_t");
  return (eps_inf - eps_t) * B / (2.0 + B);
}

}  // namespace qh
