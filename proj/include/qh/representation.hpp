#pragma once

// Finite-dimensional quasi-Herglotz representations: a real constant, a
// linear term, real point masses, and B-spline densities with coefficients
// of either sign. Boundary values on the real axis come from the Hilbert
// transforms of the basis functions; values in the open upper half-plane
// come from the Cauchy transforms. In symmetric mode the stored data lives
// on x >= 0 and the mirrored measure (and mirrored poles) are implied, so
// q(-conj(z)) = -conj(q(z)) holds identically.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <qh/detail/poly.hpp>
#include <qh/errors.hpp>
#include <qh/spline_basis.hpp>

namespace qh {

struct PointMass {
  double location = 0.0;   // pole position xi_i on the real axis
  double amplitude = 0.0;  // signed mass p_i of the beta measure
};

struct SplineComponent {
  SplineBasis basis;
  std::vector<double> coeffs;  // one signed coefficient per basis function
};

struct QuasiHerglotzRep {
  double a_check = 0.0;  // constant after absorbing the measure shift
  double b = 0.0;        // coefficient of the linear term
  std::vector<PointMass> masses;
  std::vector<SplineComponent> components;
  bool symmetric = false;
};

namespace detail {

inline void validate_rep(const QuasiHerglotzRep& rep) {
  for (const auto& comp : rep.components) {
    if (static_cast<int>(comp.coeffs.size()) != comp.basis.count())
      throw std::invalid_argument(
          "representation: coefficient count does not match basis size");
  }
  if (rep.symmetric) {
    if (rep.a_check != 0.0)
      throw std::invalid_argument(
          "representation: symmetric mode forces the constant term to zero");
    for (const auto& m : rep.masses) {
      if (m.location < 0.0)
        throw std::invalid_argument(
            "representation: symmetric masses are stored on x >= 0");
    }
  }
}

inline double ipow_int(double base, int e) {
  if (e < 0) return 1.0 / ipow_int(base, -e);
  double acc = 1.0, p = base;
  for (int k = e; k > 0; k >>= 1) {
    if (k & 1) acc *= p;
    p *= p;
  }
  return acc;
}

}  // namespace detail

// Integral of xi^k against the full measure (mirrored when symmetric).
// Point masses at the origin contribute only to k = 0; a nonzero origin
// mass makes negative powers divergent. Spline moments with k < 0 diverge
// when the closed support of the basis touches zero.
inline double measure_moment(const QuasiHerglotzRep& rep, int k,
                             bool include_origin = true) {
  detail::validate_rep(rep);
  double total = 0.0;
  for (const auto& m : rep.masses) {
    if (m.location == 0.0) {
      if (!include_origin || m.amplitude == 0.0) continue;
      if (k < 0)
        throw DivergentMomentError(
            "measure_moment: negative power against a mass at the origin");
      if (k == 0) total += m.amplitude;
    } else {
      const double factor =
          rep.symmetric ? ((k % 2 == 0) ? 2.0 : 0.0) : 1.0;
      if (factor != 0.0)
        total += factor * m.amplitude * detail::ipow_int(m.location, k);
    }
  }
  constexpr double pi = 3.14159265358979323846;
  for (const auto& comp : rep.components) {
    const double factor = rep.symmetric ? ((k % 2 == 0) ? 2.0 : 0.0) : 1.0;
    if (factor == 0.0) {
      // The mirrored moment cancels exactly, but divergence must still
      // surface: probe one moment when the support touches zero.
      if (comp.basis.lo() <= 0.0 && comp.basis.hi() >= 0.0 && k < 0)
        comp.basis.moment(0, k);
      continue;
    }
    for (int n = 0; n < comp.basis.count(); ++n)
      total += factor * comp.coeffs[n] / pi * comp.basis.moment(n, k);
  }
  return total;
}

// Boundary values q(x + i0). The real part collects the constant, the
// linear term, the pole kernels, and the Hilbert transforms of the spline
// densities; the imaginary part is pi * beta'(x), the spline density alone.
inline std::complex<double> eval_boundary(const QuasiHerglotzRep& rep,
                                          double x) {
  detail::validate_rep(rep);
  double re = rep.a_check + rep.b * x;
  double im = 0.0;
  for (const auto& m : rep.masses) {
    if (!rep.symmetric) {
      if (x == m.location)
        throw PoleError("eval_boundary: x hits a point mass");
      re += m.amplitude / (m.location - x);
    } else if (m.location == 0.0) {
      if (m.amplitude == 0.0) continue;
      if (x == 0.0) throw PoleError("eval_boundary: x hits the origin mass");
      re += m.amplitude / (0.0 - x);
    } else {
      if (x == m.location || x == -m.location)
        throw PoleError("eval_boundary: x hits a point mass");
      re += m.amplitude * (1.0 / (m.location - x) - 1.0 / (m.location + x));
    }
  }
  for (const auto& comp : rep.components) {
    for (int n = 0; n < comp.basis.count(); ++n) {
      const double c = comp.coeffs[n];
      if (c == 0.0) continue;
      if (!rep.symmetric) {
        re += c * comp.basis.hilbert_eval(n, x);
        im += c * comp.basis.eval(n, x);
      } else {
        re += c * (comp.basis.hilbert_eval(n, x) -
                   comp.basis.hilbert_eval(n, -x));
        im += c * (comp.basis.eval(n, x) + comp.basis.eval(n, -x));
      }
    }
  }
  return {re, im};
}

// Values in the open upper half-plane (Im z > 0 strictly).
inline std::complex<double> eval_upper(const QuasiHerglotzRep& rep,
                                       std::complex<double> z) {
  if (!(z.imag() > 0.0))
    throw std::domain_error("eval_upper: Im z must be positive");
  detail::validate_rep(rep);
  std::complex<double> q = rep.a_check + rep.b * z;
  for (const auto& m : rep.masses) {
    if (!rep.symmetric) {
      q += m.amplitude / (m.location - z);
    } else if (m.location == 0.0) {
      if (m.amplitude != 0.0) q += m.amplitude / (-z);
    } else {
      q += m.amplitude * (1.0 / (m.location - z) - 1.0 / (m.location + z));
    }
  }
  for (const auto& comp : rep.components) {
    for (int n = 0; n < comp.basis.count(); ++n) {
      const double c = comp.coeffs[n];
      if (c == 0.0) continue;
      if (!rep.symmetric) {
        q += c * comp.basis.cauchy_transform(n, z);
      } else {
        q += c * (comp.basis.cauchy_transform(n, z) -
                  comp.basis.cauchy_transform(n, -z));
      }
    }
  }
  return q;
}

// Coefficients of the asymptotic expansions
//   q(z) ~ a_{-1} z^{-1} + a_0 + a_1 z + ...        as z -> 0,
//   q(z) ~ b_1 z + b_0 + b_{-1} z^{-1} + ...        as z -> infinity,
// both along nontangential paths in the upper half-plane.
class AsymptoticCoeffs {
 public:
  AsymptoticCoeffs(std::vector<double> at_zero, std::vector<double> at_inf)
      : at_zero_(std::move(at_zero)), at_infinity_(std::move(at_inf)) {}

  // a(order) for order in [-1, order_zero()].
  double a(int order) const {
    if (order < -1 || order + 1 >= static_cast<int>(at_zero_.size()))
      throw std::out_of_range("AsymptoticCoeffs: at-zero order " +
                              std::to_string(order) + " not computed");
    return at_zero_[order + 1];
  }
  // b(order) for order in [-order_infinity(), 1].
  double b(int order) const {
    if (order > 1 || 1 - order >= static_cast<int>(at_infinity_.size()))
      throw std::out_of_range("AsymptoticCoeffs: at-infinity order " +
                              std::to_string(order) + " not computed");
    return at_infinity_[1 - order];
  }
  int order_zero() const { return static_cast<int>(at_zero_.size()) - 2; }
  int order_infinity() const {
    return static_cast<int>(at_infinity_.size()) - 2;
  }
  // a_{-1}, a_0, a_1, ...
  const std::vector<double>& at_zero() const { return at_zero_; }
  // b_1, b_0, b_{-1}, ...
  const std::vector<double>& at_infinity() const { return at_infinity_; }

 private:
  std::vector<double> at_zero_;
  std::vector<double> at_infinity_;
};

// True when the measure has weight at the origin, which blocks the at-zero
// expansion beyond the residual term a_{-1}.
inline bool measure_touches_origin(const QuasiHerglotzRep& rep) {
  for (const auto& m : rep.masses)
    if (m.location == 0.0 && m.amplitude != 0.0) return true;
  for (const auto& comp : rep.components)
    if (comp.basis.lo() <= 0.0 && comp.basis.hi() >= 0.0) return true;
  return false;
}

inline AsymptoticCoeffs asymptotic_coeffs(const QuasiHerglotzRep& rep,
                                          int max_order_zero,
                                          int max_order_inf) {
  detail::validate_rep(rep);
  if (max_order_zero < -1)
    throw std::invalid_argument("asymptotic_coeffs: max_order_zero < -1");
  if (max_order_inf < 0)
    throw std::invalid_argument("asymptotic_coeffs: max_order_inf < 0");
  if (max_order_zero > -1 && measure_touches_origin(rep))
    throw UnavailableExpansionError(
        "asymptotic_coeffs: measure touches the origin; only the residual "
        "coefficient a(-1) exists there (requested order " +
        std::to_string(max_order_zero) + ")");

  std::vector<double> at_zero;
  double origin_mass = 0.0;
  for (const auto& m : rep.masses)
    if (m.location == 0.0) origin_mass += m.amplitude;
  at_zero.push_back(-origin_mass);  // a_{-1}
  for (int k = 0; k <= max_order_zero; ++k) {
    double ak = measure_moment(rep, -k - 1, /*include_origin=*/false);
    if (k == 0) ak += rep.a_check;
    if (k == 1) ak += rep.b;
    at_zero.push_back(ak);
  }

  std::vector<double> at_inf;
  at_inf.push_back(rep.b);        // b_1
  at_inf.push_back(rep.a_check);  // b_0
  for (int k = 1; k <= max_order_inf; ++k)
    at_inf.push_back(-measure_moment(rep, k - 1, /*include_origin=*/true));

  return {std::move(at_zero), std::move(at_inf)};
}

// Mass of the same pole in the classical (sigma) picture:
// dbeta = (1 + xi^2) dsigma.
inline double sigma_amplitude(const PointMass& m) {
  return m.amplitude / (1.0 + m.location * m.location);
}

// Recovers the canonical constant a = a_check + int xi/(1+xi^2) dbeta.
// Symmetric representations have a = 0 by oddness of the integrand.
inline double unabsorbed_constant(const QuasiHerglotzRep& rep) {
  detail::validate_rep(rep);
  if (rep.symmetric) return 0.0;
  double a = rep.a_check;
  for (const auto& m : rep.masses)
    a += m.amplitude * m.location / (1.0 + m.location * m.location);
  constexpr double pi = 3.14159265358979323846;
  for (const auto& comp : rep.components) {
    const auto& bp = comp.basis.breakpoints();
    const double delta = comp.basis.delta();
    for (int n = 0; n < comp.basis.count(); ++n) {
      const double c = comp.coeffs[n];
      if (c == 0.0) continue;
      double integral = 0.0;
      for (int cell = 0; cell < comp.basis.order(); ++cell) {
        // Piece polynomial in global coordinates, times xi/(1 + xi^2).
        const detail::Poly global = detail::poly_affine(
            comp.basis.piece(cell), 1.0 / delta, -bp[n + cell] / delta);
        detail::Poly numer = detail::poly_mul(global, {0.0, 1.0});
        auto [quot, lin] = detail::poly_divide_x2_plus_1(numer);
        const detail::Poly anti = detail::poly_antiderivative(quot);
        const double xa = bp[n + cell], xb = bp[n + cell + 1];
        integral += detail::poly_eval(anti, xb) - detail::poly_eval(anti, xa);
        integral += 0.5 * lin[1] *
                    (std::log1p(xb * xb) - std::log1p(xa * xa));
        integral += lin[0] * (std::atan(xb) - std::atan(xa));
      }
      a += c / pi * integral;
    }
  }
  return a;
}

}  // namespace qh
