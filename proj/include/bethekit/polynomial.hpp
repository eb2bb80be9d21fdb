#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "bethekit/numeric.hpp"

namespace bethekit {

/// Univariate polynomial with complex coefficients in ascending degree.
/// The leading stored coefficient is nonzero unless the polynomial is zero,
/// in which case no coefficient is stored.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Complex> coefficients) : c_(std::move(coefficients)) { normalize(); }
  Polynomial(std::initializer_list<Complex> coefficients) : c_(coefficients) { normalize(); }

  static Polynomial constant(Complex c) { return Polynomial({c}); }

  /// Monic polynomial with the given roots (with multiplicity).
  static Polynomial from_roots(std::span<const Complex> roots) {
    std::vector<Complex> c{Complex{1.0}};
    for (Complex r : roots) {
      c.push_back(Complex{});
      for (std::size_t i = c.size() - 1; i > 0; --i) c[i] = c[i - 1] - r * c[i];
      c[0] = -r * c[0];
    }
    return Polynomial(std::move(c));
  }

  /// Product of linear factors (scale[j] * u - shift[j]).
  static Polynomial from_linear_factors(std::span<const std::pair<Complex, Complex>> factors) {
    Polynomial p = constant(1.0);
    for (const auto& [scale, shift] : factors) p = p * Polynomial({-shift, scale});
    return p;
  }

  /// -1 for the zero polynomial.
  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const noexcept { return c_.empty(); }
  const std::vector<Complex>& coefficients() const noexcept { return c_; }
  Complex coefficient(int i) const { return i >= 0 && i < static_cast<int>(c_.size()) ? c_[i] : Complex{}; }
  Complex leading() const { return c_.empty() ? Complex{} : c_.back(); }

  Complex operator()(Complex u) const {
    Complex acc{};
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * u + *it;
    return acc;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<Complex> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
    return Polynomial(std::move(d));
  }

  double max_abs_coefficient() const {
    double m = 0.0;
    for (Complex x : c_) m = std::max(m, std::abs(x));
    return m;
  }

  /// Drops leading coefficients below rel_tol times the largest one.
  Polynomial trimmed(double rel_tol) const {
    const double cut = rel_tol * max_abs_coefficient();
    std::vector<Complex> c = c_;
    while (!c.empty() && std::abs(c.back()) <= cut) c.pop_back();
    return Polynomial(std::move(c));
  }

  /// Coefficients reversed against a nominal degree n: u^n p(1/u).
  Polynomial reversed(int n) const {
    std::vector<Complex> c(static_cast<std::size_t>(n + 1));
    for (int i = 0; i <= n && i <= degree(); ++i) c[n - i] = c_[i];
    return Polynomial(std::move(c));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<Complex> c(std::max(a.c_.size(), b.c_.size()));
    for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
    return Polynomial(std::move(c));
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + b * Complex{-1.0}; }
  friend Polynomial operator*(const Polynomial& a, Complex s) {
    std::vector<Complex> c = a.c_;
    for (Complex& x : c) x *= s;
    return Polynomial(std::move(c));
  }
  friend Polynomial operator*(Complex s, const Polynomial& a) { return a * s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Complex> c(a.c_.size() + b.c_.size() - 1);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
  }

 private:
  void normalize() {
    while (!c_.empty() && c_.back() == Complex{}) c_.pop_back();
  }

  std::vector<Complex> c_;
};

/// First `terms` Taylor coefficients at 0 of num/den. Requires den(0) != 0.
inline std::vector<Complex> series_at_zero(const Polynomial& num, const Polynomial& den, int terms) {
  std::vector<Complex> s(static_cast<std::size_t>(std::max(terms, 0)));
  const Complex d0 = den.coefficient(0);
  for (int j = 0; j < terms; ++j) {
    Complex acc = num.coefficient(j);
    for (int i = 1; i <= j && i <= den.degree(); ++i) acc -= den.coefficient(i) * s[j - i];
    s[j] = acc / d0;
  }
  return s;
}

/// Coefficient of u^p in the expansion of num/den at infinity (descending
/// Laurent series). Computed by long division in 1/u.
inline Complex laurent_at_infinity(const Polynomial& num, const Polynomial& den, int p) {
  if (num.is_zero()) return {};
  const int top = num.degree() - den.degree();
  if (p > top) return {};
  const int j = top - p;
  const auto s = series_at_zero(num.reversed(num.degree()), den.reversed(den.degree()), j + 1);
  return s[j];
}

struct RootFinderOptions {
  int max_iter = 500;
  double tol = 1e-15;
  int polish_steps = 3;
};

/// All roots of p (with multiplicity) by Aberth-Ehrlich simultaneous
/// iteration, followed by a few Newton steps per root.
inline std::vector<Complex> polynomial_roots(const Polynomial& p, const RootFinderOptions& opt = {}) {
  const int n = p.degree();
  if (n <= 0) return {};
  if (n == 1) return {-p.coefficient(0) / p.coefficient(1)};

  const Complex lead = p.leading();
  // Fujiwara bound on root moduli.
  double bound = 0.0;
  for (int i = 0; i < n; ++i) {
    const double ratio = std::abs(p.coefficient(i) / lead);
    if (ratio == 0.0) continue;
    const double exponent = 1.0 / static_cast<double>(n - i);
    const double term = i == 0 ? std::pow(ratio / 2.0, exponent) : std::pow(ratio, exponent);
    bound = std::max(bound, 2.0 * term);
  }
  if (bound == 0.0) return std::vector<Complex>(static_cast<std::size_t>(n), Complex{});
  // Geometric mean of root moduli as the starting radius, kept within two
  // decades of the bound so a tiny constant term does not collapse the starts.
  const double c0 = std::abs(p.coefficient(0));
  const double mean = std::pow(c0 / std::abs(lead), 1.0 / n);
  const double radius = std::clamp(mean, 1e-2 * bound, bound);

  std::vector<Complex> z(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) z[j] = std::polar(radius, kTwoPi * j / n + 0.4);

  const Polynomial dp = p.derivative();
  std::vector<bool> done(static_cast<std::size_t>(n), false);
  for (int it = 0; it < opt.max_iter; ++it) {
    bool all_done = true;
    for (int j = 0; j < n; ++j) {
      if (done[j]) continue;
      const Complex pv = p(z[j]);
      if (pv == Complex{}) {
        done[j] = true;
        continue;
      }
      const Complex ratio = pv / dp(z[j]);
      Complex repulsion{};
      bool collided = false;
      for (int i = 0; i < n; ++i) {
        if (i == j) continue;
        if (z[j] == z[i]) collided = true;
        repulsion += 1.0 / (z[j] - z[i]);
      }
      if (collided) {
        z[j] += std::polar(1e-6 * std::max(bound, std::abs(z[j])), 0.7 + j);
        all_done = false;
        continue;
      }
      const Complex step = ratio / (1.0 - ratio * repulsion);
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) {
        z[j] += Complex{1e-8, 1e-8} * std::max(1.0, std::abs(z[j]));
        all_done = false;
        continue;
      }
      z[j] -= step;
      if (std::abs(step) <= opt.tol * std::max(1.0, std::abs(z[j])))
        done[j] = true;
      else
        all_done = false;
    }
    if (all_done) break;
  }
  for (Complex& r : z) {
    for (int s = 0; s < opt.polish_steps; ++s) {
      const Complex d = dp(r);
      if (d == Complex{}) break;
      const Complex next = r - p(r) / d;
      if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) break;
      if (std::abs(p(next)) > std::abs(p(r))) break;
      r = next;
    }
  }
  return z;
}

}  // namespace bethekit
