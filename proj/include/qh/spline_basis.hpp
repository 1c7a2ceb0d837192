#pragma once

// Uniform B-spline bases with closed-form Hilbert/Cauchy transforms and
// moments. A basis of `count` functions of order m on [lo, hi] lives on a
// grid of count + m equidistant breakpoints with spacing delta; function n
// (0-based) is the cardinal B-spline translated to start at breakpoint n,
// so it spans m cells, has unit integral in the cell coordinate
// (integral delta in x), and for m = 2 is the unit-peak hat.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <qh/detail/poly.hpp>
#include <qh/errors.hpp>

namespace qh {

class SplineBasis {
 public:
  SplineBasis(double support_lo, double support_hi, int count, int order)
      : lo_(support_lo), hi_(support_hi), count_(count), order_(order) {
    if (!(std::isfinite(support_lo) && std::isfinite(support_hi)))
      throw std::invalid_argument("spline basis: non-finite support bounds");
    if (!(support_hi > support_lo))
      throw std::invalid_argument("spline basis: support_hi must exceed support_lo");
    if (count < 1) throw std::invalid_argument("spline basis: count must be >= 1");
    if (order < 2) throw std::invalid_argument("spline basis: order must be >= 2");

    const int points = count_ + order_;
    delta_ = (hi_ - lo_) / (points - 1);
    breakpoints_.resize(points);
    for (int j = 0; j < points; ++j)
      breakpoints_[j] = lo_ + (hi_ - lo_) * j / (points - 1.0);
    breakpoints_.front() = lo_;
    breakpoints_.back() = hi_;

    build_pieces();
    build_centered_moments();
  }

  int count() const { return count_; }
  int order() const { return order_; }
  double delta() const { return delta_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  std::pair<double, double> support(int n) const {
    check_index(n);
    return {breakpoints_[n], breakpoints_[n + order_]};
  }

  // Piece polynomial of the cardinal spline on local cell c, in the local
  // variable s = u - c with u = (x - breakpoints[n]) / delta.
  const detail::Poly& piece(int c) const { return pieces_.at(c); }

  // p_n(x): the order-m B-spline starting at breakpoint n.
  double eval(int n, double x) const {
    check_index(n);
    const double u = (x - breakpoints_[n]) / delta_;
    if (u <= 0.0 || u >= order_) return 0.0;
    const int c = static_cast<int>(u);
    return detail::poly_eval(pieces_[c], u - c);
  }

  // phat_n(x) = (1/pi) p.v. int p_n(xi)/(xi - x) dxi. Continuous everywhere,
  // including breakpoints. Near the support this is the per-cell difference
  // quotient integral plus breakpoint log terms; far away, a centered-moment
  // series (the two branches agree to machine precision at the switch).
  double hilbert_eval(int n, double x) const {
    check_index(n);
    const double mu = center(n);
    if (std::abs(x - mu) > far_radius()) {
      return far_series(x - mu);
    }
    const double u = (x - breakpoints_[n]) / delta_;
    double acc = 0.0;
    for (int c = 0; c < order_; ++c)
      acc += detail::poly_integral01(detail::poly_divide_linear(pieces_[c], u - c));
    for (int j = 0; j <= order_; ++j) {
      const double v = u - j;
      if (v == 0.0 || lead_jump_[j] == 0.0) continue;  // t^{m-1} log t -> 0
      acc += lead_jump_[j] * ipow(v, order_ - 1) * std::log(std::abs(v) * delta_);
    }
    return acc / pi();
  }

  // (1/pi) int p_n(xi)/(xi - z) dxi for complex z. Analytic off the support;
  // at Im z = +0 it equals hilbert_eval + i eval (upper boundary limit).
  std::complex<double> cauchy_transform(int n, std::complex<double> z) const {
    check_index(n);
    const std::complex<double> w = z - center(n);
    if (std::abs(w) > far_radius()) {
      return far_series(w);
    }
    const std::complex<double> u = (z - breakpoints_[n]) / delta_;
    std::complex<double> acc = 0.0;
    for (int c = 0; c < order_; ++c)
      acc += detail::poly_integral01(
          detail::poly_divide_linear(pieces_[c], u - static_cast<double>(c)));
    for (int j = 0; j <= order_; ++j) {
      const std::complex<double> v = u - static_cast<double>(j);
      if ((v.real() == 0.0 && v.imag() == 0.0) || lead_jump_[j] == 0.0) continue;
      // Build t_j - z by explicit negation so that Im z = +0 keeps a signed
      // -0 imaginary part: the principal log then takes the branch matching
      // the limit from the upper half-plane.
      const std::complex<double> log_arg(breakpoints_[n + j] - z.real(),
                                         -z.imag());
      acc += lead_jump_[j] * ipow(v, order_ - 1) * std::log(log_arg);
    }
    return acc / pi();
  }

  // int xi^k p_n(xi) dxi. Non-negative k uses the cancellation-free centered
  // expansion; negative k integrates cell-by-cell in global coordinates
  // (powers plus a logarithm at exponent -1) and requires 0 outside the
  // closed support.
  double moment(int n, int k) const {
    check_index(n);
    if (k >= 0 && k < static_cast<int>(centered_moment_.size())) {
      const double mu = center(n);
      double acc = 0.0;
      double binom = 1.0;
      double dpow = delta_;
      for (int j = 0; j <= k; ++j) {
        if (centered_moment_[j] != 0.0)
          acc += binom * ipow(mu, k - j) * dpow * centered_moment_[j];
        binom *= static_cast<double>(k - j) / (j + 1.0);
        dpow *= delta_;
      }
      return acc;
    }
    const auto [slo, shi] = support(n);
    if (k < 0 && slo <= 0.0 && shi >= 0.0)
      throw DivergentMomentError(
          "moment: x^" + std::to_string(k) +
          " against a density whose support contains 0 diverges");
    double acc = 0.0;
    for (int c = 0; c < order_; ++c) {
      const double a = breakpoints_[n + c], b = breakpoints_[n + c + 1];
      const detail::Poly global =
          detail::poly_affine(pieces_[c], 1.0 / delta_, -a / delta_);
      for (std::size_t i = 0; i < global.size(); ++i) {
        if (global[i] == 0.0) continue;
        const int e = static_cast<int>(i) + k;
        if (e == -1)
          acc += global[i] * (std::log(std::abs(b)) - std::log(std::abs(a)));
        else
          acc += global[i] * (ipow(b, e + 1) - ipow(a, e + 1)) / (e + 1.0);
      }
    }
    return acc;
  }

 private:
  static constexpr double pi() { return 3.14159265358979323846; }
  static constexpr int kMaxCenteredMoment = 80;

  void check_index(int n) const {
    if (n < 0 || n >= count_)
      throw std::invalid_argument("spline basis: index " + std::to_string(n) +
                                  " outside [0, " + std::to_string(count_) + ")");
  }

  double center(int n) const { return breakpoints_[n] + 0.5 * order_ * delta_; }
  double far_radius() const { return 2.0 * order_ * delta_; }

  template <typename T>
  static T ipow(T base, int e) {
    T acc = T(1.0);
    for (int i = 0; i < e; ++i) acc *= base;
    return acc;
  }

  // Series phat(x) = -(1/pi) sum_j Mc_j r^{j+1}, r = delta/(x - mu), from the
  // geometric expansion of the kernel about the support center. Valid (and
  // rapidly convergent) for |x - mu| > 2 m delta; odd Mc vanish by symmetry.
  template <typename T>
  T far_series(T offset) const {
    const T r = delta_ / offset;
    const T r2 = r * r;
    T power = r;  // r^{j+1}
    T acc = T(0.0);
    for (int j = 0; j + 1 < static_cast<int>(centered_moment_.size()); j += 2) {
      const T term = centered_moment_[j] * power;
      acc += term;
      if (std::abs(term) <= 1e-18 * std::abs(acc)) break;
      power *= r2;
    }
    return -acc / pi();
  }

  // Local piece polynomials of the cardinal B-spline B_m: pieces_[c](s) with
  // s in [0,1] is B_m on cell [c, c+1], built by the Cox-de Boor recurrence
  //   B_k(u) = (u B_{k-1}(u) + (k - u) B_{k-1}(u - 1)) / (k - 1).
  void build_pieces() {
    std::vector<detail::Poly> cur = {{1.0}};  // B_1 on [0,1]
    for (int k = 2; k <= order_; ++k) {
      std::vector<detail::Poly> next(k);
      for (int c = 0; c < k; ++c) {
        detail::Poly p;
        if (c < k - 1) {
          const detail::Poly up = {static_cast<double>(c), 1.0};  // c + s
          detail::poly_axpy(p, 1.0, detail::poly_mul(up, cur[c]));
        }
        if (c >= 1) {
          const detail::Poly down = {static_cast<double>(k - c), -1.0};  // (k-c) - s
          detail::poly_axpy(p, 1.0, detail::poly_mul(down, cur[c - 1]));
        }
        for (double& coef : p) coef /= (k - 1.0);
        next[c] = std::move(p);
      }
      cur = std::move(next);
    }
    pieces_ = std::move(cur);
    for (auto& p : pieces_) p.resize(order_, 0.0);

    // Jumps of the leading coefficient across breakpoints: the C^{m-2}
    // continuity of B_m makes P_{c-1} - P_c = lead_jump * (local offset)^{m-1}
    // exactly, which is the log-term coefficient of the Hilbert transform.
    lead_jump_.assign(order_ + 1, 0.0);
    for (int j = 0; j <= order_; ++j) {
      const double left = (j >= 1) ? pieces_[j - 1][order_ - 1] : 0.0;
      const double right = (j < order_) ? pieces_[j][order_ - 1] : 0.0;
      lead_jump_[j] = left - right;
    }
  }

  // Mc_j = int_0^m (u - m/2)^j B_m(u) du, used by far_series and moment.
  void build_centered_moments() {
    centered_moment_.assign(kMaxCenteredMoment + 1, 0.0);
    for (int c = 0; c < order_; ++c) {
      detail::Poly power = {1.0};
      const detail::Poly shift = {c - 0.5 * order_, 1.0};  // s + (c - m/2)
      for (int j = 0; j <= kMaxCenteredMoment; ++j) {
        centered_moment_[j] +=
            detail::poly_integral01(detail::poly_mul(power, pieces_[c]));
        power = detail::poly_mul(power, shift);
      }
    }
    // B_m is symmetric about m/2; zero the odd moments exactly.
    for (int j = 1; j <= kMaxCenteredMoment; j += 2) centered_moment_[j] = 0.0;
  }

  double lo_, hi_, delta_;
  int count_, order_;
  std::vector<double> breakpoints_;
  std::vector<detail::Poly> pieces_;
  std::vector<double> lead_jump_;
  std::vector<double> centered_moment_;
};

inline SplineBasis make_uniform_basis(double support_lo, double support_hi,
                                      int count, int order) {
  return SplineBasis(support_lo, support_hi, count, order);
}

}  // namespace qh
