#pragma once

#include <algorithm>
#include <complex>
#include <span>
#include <vector>

#include "bethekit/numeric.hpp"

namespace bethekit {

/// Default radius under which two roots count as the same root.
inline constexpr double kDefaultDedupTol = 1e-7;

namespace detail {

/// Sort by real part; runs of real parts chained closer than tie_tol are
/// re-sorted by imaginary part. Applying it twice gives the same order.
inline void canonical_sort(std::vector<Complex>& v, double tie_tol) {
  auto by_real = [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  };
  auto by_imag = [](Complex a, Complex b) {
    return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
  };
  std::sort(v.begin(), v.end(), by_real);
  std::size_t start = 0;
  while (start < v.size()) {
    std::size_t end = start + 1;
    while (end < v.size() && v[end].real() - v[end - 1].real() < tie_tol) ++end;
    std::sort(v.begin() + static_cast<std::ptrdiff_t>(start), v.begin() + static_cast<std::ptrdiff_t>(end),
              by_imag);
    start = end;
  }
}

}  // namespace detail

/// Unordered multiset of rapidities, stored in canonical order.
class RootSet {
 public:
  RootSet() = default;
  explicit RootSet(std::vector<Complex> roots, double tie_tol = kDefaultDedupTol) : roots_(std::move(roots)) {
    detail::canonical_sort(roots_, tie_tol);
  }

  std::size_t size() const noexcept { return roots_.size(); }
  bool empty() const noexcept { return roots_.empty(); }
  std::span<const Complex> roots() const noexcept { return roots_; }
  const std::vector<Complex>& values() const noexcept { return roots_; }
  Complex operator[](std::size_t i) const { return roots_[i]; }
  auto begin() const noexcept { return roots_.begin(); }
  auto end() const noexcept { return roots_.end(); }

 private:
  std::vector<Complex> roots_;
};

/// Canonical ordering of an arbitrary list of rapidities. Idempotent.
inline RootSet canonicalize(std::span<const Complex> roots, double dedup_tol = kDefaultDedupTol) {
  return RootSet(std::vector<Complex>(roots.begin(), roots.end()), dedup_tol);
}

/// True iff there is a bijection between a and b moving no root by more
/// than tol (scaled by max(1, |root|)). Greedy nearest matching; adequate
/// when tol is small compared to root separations.
inline bool approx_equal(const RootSet& a, const RootSet& b, double tol = kDefaultDedupTol) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (Complex x : a) {
    std::size_t best = b.size();
    double best_d = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(x - b[j]);
      if (best == b.size() || d < best_d) {
        best = j;
        best_d = d;
      }
    }
    if (best == b.size() || !near(x, b[best], tol)) return false;
    used[best] = true;
  }
  return true;
}

}  // namespace bethekit
