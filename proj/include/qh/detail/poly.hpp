#pragma once

// Small dense-polynomial helpers used by the B-spline closed forms.
// Coefficients are stored ascending: p[i] multiplies t^i.

#include <array>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

namespace qh::detail {

using Poly = std::vector<double>;

inline double poly_eval(const Poly& p, double t) {
  double acc = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * t + p[i];
  return acc;
}

inline std::complex<double> poly_eval(const Poly& p, std::complex<double> t) {
  std::complex<double> acc = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * t + p[i];
  return acc;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

inline void poly_axpy(Poly& acc, double a, const Poly& p) {
  if (acc.size() < p.size()) acc.resize(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) acc[i] += a * p[i];
}

inline Poly poly_antiderivative(const Poly& p) {
  Poly r(p.size() + 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) r[i + 1] = p[i] / (i + 1.0);
  return r;
}

// q(t) = p(a t + b), by Horner with polynomial coefficients.
inline Poly poly_affine(const Poly& p, double a, double b) {
  Poly q;
  for (std::size_t i = p.size(); i-- > 0;) {
    // q <- q * (a t + b) + p[i]
    Poly next(q.size() + 1, 0.0);
    for (std::size_t j = 0; j < q.size(); ++j) {
      next[j] += b * q[j];
      next[j + 1] += a * q[j];
    }
    if (next.empty()) next.resize(1, 0.0);
    next[0] += p[i];
    q = std::move(next);
  }
  return q;
}

// Synthetic division of p(t) - p(x) by (t - x): returns q with
// p(t) = q(t) (t - x) + p(x). Exact difference quotient of a polynomial.
inline Poly poly_divide_linear(const Poly& p, double x) {
  if (p.size() <= 1) return {};
  Poly q(p.size() - 1, 0.0);
  double carry = p.back();
  for (std::size_t i = p.size() - 1; i-- > 0;) {
    q[i] = carry;
    carry = p[i] + x * carry;
  }
  return q;
}

// Complex-point variant of the same division (coefficients become complex).
inline std::vector<std::complex<double>> poly_divide_linear(
    const Poly& p, std::complex<double> x) {
  if (p.size() <= 1) return {};
  std::vector<std::complex<double>> q(p.size() - 1);
  std::complex<double> carry = p.back();
  for (std::size_t i = p.size() - 1; i-- > 0;) {
    q[i] = carry;
    carry = p[i] + x * carry;
  }
  return q;
}

// Integral of a complex-coefficient polynomial over [0, 1].
inline std::complex<double> poly_integral01(
    const std::vector<std::complex<double>>& q) {
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) acc += q[i] / (i + 1.0);
  return acc;
}

inline double poly_integral01(const Poly& q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) acc += q[i] / (i + 1.0);
  return acc;
}

// Divides p by (x^2 + 1): p = quot * (x^2 + 1) + rem[1] * x + rem[0].
inline std::pair<Poly, std::array<double, 2>> poly_divide_x2_plus_1(
    const Poly& p) {
  Poly rem = p;
  Poly quot(p.size() > 2 ? p.size() - 2 : 0, 0.0);
  for (std::size_t i = p.size(); i-- > 2;) {
    const double q = rem[i];
    quot[i - 2] += q;
    rem[i - 2] -= q;
    rem[i] = 0.0;
  }
  rem.resize(2, 0.0);
  return {std::move(quot), {rem[0], rem[1]}};
}

}  // namespace qh::detail
