#pragma once

#include <set>
#include <utility>
#include <vector>

#include "bethekit/error.hpp"
#include "bethekit/model.hpp"

namespace bethekit {

/// (root index, site index), both 0-based.
using PointHit = std::pair<int, int>;

struct Classification {
  bool admissible = true;
  bool offdiagonal = true;
  std::set<PointHit> near_plus_points;
  std::set<PointHit> near_minus_points;
  bool precondition_ok = true;
  /// XXZ only: some root is at 0. Such roots solve the system exactly when
  /// q^{2 mu} = q^{-2(S_z + 1)}.
  bool zero_root = false;
  /// Admissibility with the t_a != 0 condition dropped.
  bool pair_admissible = true;
};

namespace detail {

inline bool pairs_admissible(const ModelSpec& spec, std::span<const Complex> t, double tol) {
  const Complex q2 = spec.q_power(2.0);
  for (std::size_t a = 0; a < t.size(); ++a) {
    for (std::size_t b = 0; b < t.size(); ++b) {
      if (a == b) continue;
      if (spec.is_xxx() ? near(t[a], t[b] + 1.0, tol) : near(t[a], q2 * t[b], tol)) return false;
    }
  }
  return true;
}

inline bool has_zero_root(const ModelSpec& spec, std::span<const Complex> t, double tol) {
  if (!spec.is_xxz()) return false;
  for (Complex x : t)
    if (near_zero(x, tol)) return true;
  return false;
}

}  // namespace detail

/// Admissible: no t_a = t_b + 1 (XXX), no t_a = q^2 t_b and no t_a = 0 (XXZ).
inline bool is_admissible(const ModelSpec& spec, std::span<const Complex> t, double tol) {
  return !detail::has_zero_root(spec, t, tol) && detail::pairs_admissible(spec, t, tol);
}

inline bool is_offdiagonal(std::span<const Complex> t, double tol) {
  for (std::size_t a = 0; a < t.size(); ++a)
    for (std::size_t b = a + 1; b < t.size(); ++b)
      if (near(t[a], t[b], tol)) return false;
  return true;
}

/// z_i + l_i != z_j - l_j (XXX), q^{2l_i} z_i != q^{-2l_j} z_j (XXZ), for all i, j.
inline bool lemma_precondition(const ModelSpec& spec, double tol = kDefaultDedupTol) {
  const auto plus = plus_points(spec);
  const auto minus = minus_points(spec);
  for (Complex p : plus)
    for (Complex m : minus)
      if (near(p, m, tol)) return false;
  return true;
}

inline Classification classify(const ModelSpec& spec, const Sector& sector, const RootSet& roots,
                               double tol = kDefaultDedupTol) {
  check_sector(spec, sector);
  check_roots(sector, roots.size());
  Classification c;
  const auto t = roots.roots();
  c.zero_root = detail::has_zero_root(spec, t, tol);
  c.pair_admissible = detail::pairs_admissible(spec, t, tol);
  c.admissible = !c.zero_root && c.pair_admissible;
  c.offdiagonal = is_offdiagonal(t, tol);
  c.precondition_ok = lemma_precondition(spec, tol);
  const auto plus = plus_points(spec);
  const auto minus = minus_points(spec);
  for (std::size_t a = 0; a < t.size(); ++a) {
    for (std::size_t i = 0; i < spec.sites(); ++i) {
      if (near(t[a], plus[i], tol)) c.near_plus_points.emplace(static_cast<int>(a), static_cast<int>(i));
      if (near(t[a], minus[i], tol)) c.near_minus_points.emplace(static_cast<int>(a), static_cast<int>(i));
    }
  }
  return c;
}

/// Outcome of the three admissibility implications on one solution.
struct LemmaVerdict {
  /// precondition and admissible => no root at any forbidden point.
  bool a = true;
  /// no root at a "+" point => admissible.
  bool b = true;
  /// no root at a "-" point => admissible.
  bool c = true;

  /// Every failing implication holds once t_a != 0 is dropped from
  /// admissibility. A zero root is its own q^2-shift, which the pairwise
  /// argument behind (b) and (c) does not exclude.
  bool zero_root_only = false;

  bool all() const noexcept { return a && b && c; }
};

inline LemmaVerdict lemma_verdict(const Classification& cls) {
  LemmaVerdict v;
  if (cls.precondition_ok && cls.admissible)
    v.a = cls.near_plus_points.empty() && cls.near_minus_points.empty();
  if (cls.near_plus_points.empty()) v.b = cls.admissible;
  if (cls.near_minus_points.empty()) v.c = cls.admissible;
  if (!v.all() && cls.zero_root) {
    Classification pairs = cls;
    pairs.admissible = cls.pair_admissible;
    pairs.zero_root = false;
    LemmaVerdict w = lemma_verdict(pairs);
    v.zero_root_only = w.all();
  }
  return v;
}

/// Checks the implications on a verified solution. Throws InvalidInput when
/// roots do not solve the system to residual_tol (normalized).
inline LemmaVerdict check_lemma(const ModelSpec& spec, const Sector& sector, const RootSet& roots,
                                double residual_tol, double tol = kDefaultDedupTol) {
  const double res = normalized_residual(spec, sector, roots);
  if (!(res <= residual_tol))
    throw InvalidInput("root set is not a solution (normalized residual " + std::to_string(res) + ")");
  return lemma_verdict(classify(spec, sector, roots, tol));
}

}  // namespace bethekit
