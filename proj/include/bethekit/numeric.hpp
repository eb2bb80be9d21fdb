#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

namespace bethekit {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

/// Default tolerance for complex equality on unit-scale data.
inline constexpr double kDefaultTol = 1e-9;

/// |a - b| <= tol * max(1, |a|, |b|).
inline bool near(Complex a, Complex b, double tol = kDefaultTol) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= tol * scale;
}

inline bool near_zero(Complex a, double tol = kDefaultTol) { return std::abs(a) <= tol; }

/// Sum by pairwise tree reduction; the order of additions depends only on the
/// length of the input.
inline Complex pairwise_sum(std::span<const Complex> values) {
  if (values.empty()) return {};
  if (values.size() == 1) return values[0];
  if (values.size() <= 8) {
    Complex s{};
    for (Complex v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

/// Reduces an angle to [0, 2pi).
inline double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

namespace detail {

/// Dense row-major complex matrix, just enough for small Newton systems and
/// Sylvester determinants.
class Matrix {
 public:
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  Complex operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Complex> data_;
};

/// Determinant by Gaussian elimination with partial pivoting.
inline Complex determinant(Matrix m) {
  const std::size_t n = m.rows();
  Complex det{1.0, 0.0};
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
    if (m(pivot, col) == Complex{}) return {};
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(m(pivot, c), m(col, c));
      det = -det;
    }
    det *= m(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const Complex f = m(r, col) / m(col, col);
      if (f == Complex{}) continue;
      for (std::size_t c = col; c < n; ++c) m(r, c) -= f * m(col, c);
    }
  }
  return det;
}

/// Solves m x = b. Returns false if m is numerically singular.
inline bool solve_linear(Matrix m, std::vector<Complex>& b) {
  const std::size_t n = m.rows();
  double max_entry = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) max_entry = std::max(max_entry, std::abs(m(r, c)));
  if (max_entry == 0.0) return false;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
    if (std::abs(m(pivot, col)) <= 1e-300 + 1e-15 * max_entry) return false;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(m(pivot, c), m(col, c));
      std::swap(b[pivot], b[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const Complex f = m(r, col) / m(col, col);
      for (std::size_t c = col; c < n; ++c) m(r, c) -= f * m(col, c);
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    Complex s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= m(i, c) * b[c];
    b[i] = s / m(i, i);
  }
  return true;
}

}  // namespace detail
}  // namespace bethekit
